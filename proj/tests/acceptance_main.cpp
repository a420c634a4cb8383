// Acceptance suite: one criterion per case, each printing a pass/fail line
// with the measured values and elapsed time. Run with no arguments for the
// whole suite, or --criterion N for one. --cli PATH points criterion 9 at
// the command-line binary; without it the pipeline runs in process.

#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qdn/charge_conversion.hpp"
#include "qdn/fitting.hpp"
#include "qdn/hyperfine.hpp"
#include "qdn/noise_synth.hpp"
#include "qdn/pipeline.hpp"
#include "qdn/qubit_sim.hpp"
#include "qdn/rng.hpp"
#include "qdn/spectral.hpp"

namespace fs = std::filesystem;
using namespace qdn;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------- helpers

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// Two-level propagator composition oracle for the fringe formula.
using Mat2 = std::array<std::complex<double>, 4>;

Mat2 matmul(const Mat2& a, const Mat2& b) {
  return {a[0] * b[0] + a[1] * b[2], a[0] * b[1] + a[1] * b[3],
          a[2] * b[0] + a[3] * b[2], a[2] * b[1] + a[3] * b[3]};
}

Mat2 pulse_propagator(double f_rabi, double delta, double tau) {
  const double phi_mag = std::hypot(f_rabi, delta);
  const double half_angle = pi * phi_mag * tau;
  const double c = std::cos(half_angle), s = std::sin(half_angle);
  const double nx = f_rabi / phi_mag, nz = delta / phi_mag;
  const std::complex<double> i(0.0, 1.0);
  return {c - i * s * nz, -i * s * nx, -i * s * nx, c + i * s * nz};
}

double unitary_oracle(const PulseParams& p, double t_e, double delta) {
  const std::complex<double> i(0.0, 1.0);
  const Mat2 free{std::exp(-i * (pi * delta * t_e)), 0.0, 0.0,
                  std::exp(i * (pi * delta * t_e))};
  const Mat2 u = matmul(pulse_propagator(p.f_rabi_hz, delta, p.t_pi_half_s),
                        matmul(free, pulse_propagator(p.f_rabi_hz, delta, p.t_pi_half_s)));
  return std::norm(u[1]);
}

// -------------------------------------------------------------- criteria

// Hyperfine table: spinful counts within 2%, dephasing times within 5%.
Outcome criterion1() {
  const auto dot = default_dot_geometry();
  const auto species = default_bath_species();
  const std::array<double, 3> count_ref{9.6, 5.2, 3.7};
  const std::array<double, 3> t2_ref{22e-6, 30e-6, 0.61e-6};
  bool pass = true;
  std::ostringstream detail;
  for (std::size_t i = 0; i < 3; ++i) {
    const double n_s = count_spinful(species[i], dot);
    const double t2 = ergodic_t2star(species[i], dot);
    pass = pass && std::abs(n_s / count_ref[i] - 1.0) < 0.02;
    pass = pass && std::abs(t2 / t2_ref[i] - 1.0) < 0.05;
    detail << species[i].label << " N=" << fmt(n_s) << " T2*=" << fmt(t2 * 1e6)
           << "us ";
  }
  return {pass, detail.str()};
}

// Fringe formula against the propagator oracle, 1e3 random parameter sets.
Outcome criterion2() {
  Rng rng(20240601);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    PulseParams p;
    p.f_rabi_hz = 2e5 + 4.8e6 * rng.uniform();
    p.t_pi_half_s = 50e-9 + 550e-9 * rng.uniform();
    const double delta = -3e6 + 6e6 * rng.uniform();
    const double t_e = 20e-6 * rng.uniform();
    worst = std::max(worst, std::abs(fringe_probability(p, t_e, delta) -
                                     unitary_oracle(p, t_e, delta)));
  }
  return {worst < 1e-10, "max |formula - oracle| = " + fmt(worst)};
}

// Synthesis/estimation round trip: exponents within 0.1 (16 seeds, 2^20).
Outcome criterion3() {
  bool pass = true;
  std::ostringstream detail;
  WelchSettings settings;
  settings.segment_length = 1 << 17;
  for (double alpha : {1.0, 1.5, 2.0}) {
    const CompositePsd psd({{1.0, alpha}}, "detuning-Hz");
    std::vector<double> mean_density;
    std::vector<double> freqs;
    for (int s = 0; s < 16; ++s) {
      const auto est =
          welch_psd(synthesize(psd, 1 << 20, 1.0, 2200 + s), settings);
      if (mean_density.empty()) {
        mean_density.assign(est.densities.size(), 0.0);
        freqs = est.frequencies_hz;
      }
      for (std::size_t i = 0; i < est.densities.size(); ++i)
        mean_density[i] += est.densities[i] / 16.0;
    }
    PsdEstimate averaged;
    averaged.frequencies_hz = freqs;
    averaged.densities = mean_density;
    const auto fit = fit_power_law(averaged, 10.0 * freqs.front(),
                                   0.125 * freqs.back());
    pass = pass && std::abs(fit.exponent - alpha) <= 0.1;
    detail << "alpha " << fmt(alpha) << " -> " << fmt(fit.exponent) << "  ";
  }
  return {pass, detail.str()};
}

// Crossover blending through the full scan/track/estimate pipeline at
// scale 0.1: the truncated-band exponent sits strictly inside (1.2, 1.8).
Outcome criterion4() {
  double alpha_mean = 0.0;
  const int n_runs = 4;
  for (int run = 0; run < n_runs; ++run) {
    pipeline::ScenarioConfig cfg;
    cfg.scale = 0.1;
    cfg.threads = 2;
    cfg.seed = 6100 + run;
    cfg.detuning_psd_override =
        CompositePsd({{1.8e8, 1.0}, {1.8e5, 2.0}}, "detuning-Hz");
    const auto dir = fresh_dir("qdn_acc_c4_" + std::to_string(run));
    const auto result = pipeline::run_fig1d(cfg, dir);
    fs::remove_all(dir);
    if (!result.summary.contains("alpha_high_band"))
      return {false, "pipeline produced no truncated-band exponent"};
    alpha_mean += result.summary.at("alpha_high_band").get<double>() / n_runs;
  }
  return {alpha_mean > 1.2 && alpha_mean < 1.8,
          "mean truncated-band exponent = " + fmt(alpha_mean) + " over " +
              std::to_string(n_runs) + " runs"};
}

// Quasi-static Monte-Carlo against the closed-form decay-time law, with a
// strictly decreasing dependence on measurement time.
Outcome criterion5() {
  const double alpha = 1.5, s0 = 1.29e6, t_e_ref = 2e-5;
  const CompositePsd psd({{s0, alpha}}, "detuning-Hz");
  const auto t_m_list = pipeline::logspace(60.0, 6000.0, 8);
  bool pass = true;
  double prev = std::numeric_limits<double>::infinity();
  std::ostringstream detail;
  double worst_rel = 0.0;
  for (std::size_t k = 0; k < t_m_list.size(); ++k) {
    const double t_m = t_m_list[k];
    const double sigma = quasi_static_sigma(psd, 1.0 / t_m, 1.0 / t_e_ref, 2.0);
    NoiseTrace draws;
    draws.sample_rate_hz = 1.0;
    Rng rng(8800 + k);
    for (int i = 0; i < 60000; ++i) draws.samples.push_back(sigma * rng.normal());
    const double expected = t2star_prediction(s0, alpha, t_m, t_e_ref);
    std::vector<double> grid;
    for (int i = 0; i < 50; ++i) grid.push_back((0.05 + 2.5 * i / 49.0) * expected);
    DecaySimOptions opt;
    opt.analytic_readout = true;
    const auto curve =
        simulate_decay(SequenceKind::ramsey, grid, draws, 2000, 120 + k, opt);
    const auto fit = fit_ramsey_decay(curve);
    const double got = fit.at("t2_star");
    const double rel = std::abs(got / expected - 1.0);
    worst_rel = std::max(worst_rel, rel);
    pass = pass && fit.converged && rel <= 0.10 && got < prev;
    prev = got;
  }
  detail << "worst |T2/prediction - 1| = " << fmt(worst_rel)
         << ", strictly decreasing over two decades";
  return {pass, detail.str()};
}

// Converted charge-noise model drives the quasi-static simulation into the
// observed dephasing-time range.
Outcome criterion6() {
  pipeline::ScenarioConfig cfg;
  cfg.seed = 4242;
  const auto dir = fresh_dir("qdn_acc_c6");
  const auto result = pipeline::run_fig3b(cfg, dir);
  fs::remove_all(dir);
  const double t2 = result.summary.at("t2star_s").get<double>();
  const bool pass = result.summary.at("converged").get<bool>() && t2 >= 18e-6 &&
                    t2 <= 24e-6;
  const double k = cfg.chain.detuning_hz_per_pa();
  return {pass, "fitted T2* = " + fmt(t2 * 1e6) + " us (chain K = " + fmt(k) +
                    " Hz/pA)"};
}

// Echo-fit recovery under 5000-shot binomial noise, 20 seeds.
Outcome criterion7() {
  const double t2_truth = 128e-6, alpha_truth = 1.003, a = 0.4, b = 0.25;
  const auto grid = pipeline::linspace(2e-6, 400e-6, 40);
  double worst_t2 = 0.0, worst_alpha = 0.0;
  bool pass = true;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(3300 + seed);
    DecayCurve curve;
    curve.kind = SequenceKind::echo;
    curve.shots_per_point = 5000;
    for (double t : grid) {
      const double p =
          a * (1.0 - std::exp(-std::pow(t / t2_truth, alpha_truth + 1.0))) + b;
      curve.t_e_s.push_back(t);
      curve.p_up.push_back(rng.binomial(5000, p) / 5000.0);
    }
    const auto fit = fit_echo_decay(curve);
    const double dt2 = std::abs(fit.at("t2_echo") - t2_truth);
    const double dalpha = std::abs(fit.at("alpha") - alpha_truth);
    worst_t2 = std::max(worst_t2, dt2);
    worst_alpha = std::max(worst_alpha, dalpha);
    pass = pass && fit.converged && dt2 <= 4e-6 && dalpha <= 0.15;
  }
  return {pass, "worst |dT2| = " + fmt(worst_t2 * 1e6) +
                    " us (<= 4), worst |dalpha| = " + fmt(worst_alpha) +
                    " (<= 0.15), 20 seeds"};
}

// Conversion algebra: exponents bit-identical, amplitudes exactly K^2,
// spectral estimation commutes to 1e-12 relative.
Outcome criterion8() {
  ConversionChain chain;
  const double k = chain.detuning_hz_per_pa();
  const CompositePsd psd({{0.37, 1.0}, {5.5e-4, 2.0}}, "current-pA");
  const auto converted = convert_psd(psd, chain);
  bool pass = true;
  for (std::size_t i = 0; i < psd.segments().size(); ++i) {
    pass = pass && converted.segments()[i].exponent == psd.segments()[i].exponent;
    pass = pass && converted.segments()[i].amplitude_at_1hz ==
                       psd.segments()[i].amplitude_at_1hz * k * k;
  }

  NoiseTrace trace;
  trace.sample_rate_hz = 50.0;
  trace.unit_label = "current-pA";
  Rng rng(88);
  for (int i = 0; i < (1 << 14); ++i) trace.samples.push_back(rng.normal());
  const auto det = detuning_from_current(trace, chain);
  WelchSettings s;
  s.segment_length = 1 << 10;
  const auto before = welch_psd(trace, s);
  const auto after = welch_psd(det, s);
  double worst = 0.0;
  for (std::size_t i = 0; i < before.densities.size(); ++i) {
    worst = std::max(worst, std::abs(after.densities[i] -
                                     k * k * before.densities[i]) /
                                after.densities[i]);
  }
  pass = pass && worst <= 1e-12;
  return {pass, "max relative spectral mismatch = " + fmt(worst)};
}

// Byte-identical outputs under a fixed seed, via the CLI when available.
Outcome criterion9(const std::string& cli_path) {
  const auto dir_a = fresh_dir("qdn_acc_c9_a");
  const auto dir_b = fresh_dir("qdn_acc_c9_b");

  auto produce = [&](const fs::path& dir) {
    if (!cli_path.empty()) {
      for (const std::string figure : {"fig3b", "hyperfine_table"}) {
        std::ostringstream cmd;
        cmd << cli_path << " reproduce --figure " << figure << " --seed 7 --out "
            << (dir / figure) << " >/dev/null 2>&1";
        if (std::system(cmd.str().c_str()) != 0)
          throw std::runtime_error("CLI run failed: " + cmd.str());
      }
    } else {
      pipeline::ScenarioConfig cfg;
      cfg.seed = 7;
      pipeline::run_fig3b(cfg, dir / "fig3b");
      pipeline::run_hyperfine_table(cfg, dir / "hyperfine_table");
    }
  };
  produce(dir_a);
  produce(dir_b);

  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  bool pass = true;
  int compared = 0;
  std::string mismatch;
  for (auto it = fs::recursive_directory_iterator(dir_a);
       it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file()) continue;
    const auto rel = fs::relative(it->path(), dir_a);
    if (rel.filename() == "manifest.json") continue;  // carries the timestamp
    const auto other = dir_b / rel;
    if (!fs::exists(other) || slurp(it->path()) != slurp(other)) {
      pass = false;
      mismatch = rel.string();
      break;
    }
    ++compared;
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  if (!pass) return {false, "mismatch in " + mismatch};
  return {compared > 0, std::to_string(compared) + " data files byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  std::string cli_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) only = std::atoi(argv[++i]);
    if (arg == "--cli" && i + 1 < argc) cli_path = argv[++i];
  }

  const std::array<std::pair<const char*, std::function<Outcome()>>, 9> criteria{{
      {"hyperfine table values", [] { return criterion1(); }},
      {"fringe formula vs unitary oracle", [] { return criterion2(); }},
      {"synthesis/estimation exponent round trip", [] { return criterion3(); }},
      {"crossover blending in the truncated band", [] { return criterion4(); }},
      {"quasi-static Monte-Carlo vs decay-time law", [] { return criterion5(); }},
      {"converted charge noise reproduces the decay time", [] { return criterion6(); }},
      {"echo-fit recovery under shot noise", [] { return criterion7(); }},
      {"conversion algebra exactness", [] { return criterion8(); }},
      {"fixed-seed byte-identical reproduction",
       [&cli_path] { return criterion9(cli_path); }},
  }};

  int failures = 0;
  for (int n = 1; n <= 9; ++n) {
    if (only != 0 && only != n) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[n - 1].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %d: %s — %s (%.1f s)\n",
                outcome.pass ? "PASS" : "FAIL", n, criteria[n - 1].first,
                outcome.detail.c_str(), elapsed);
    std::fflush(stdout);
    failures += outcome.pass ? 0 : 1;
  }
  return failures;
}
