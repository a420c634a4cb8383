#include "qdn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "qdn/fitting.hpp"
#include "qdn/noise_synth.hpp"
#include "qdn/rng.hpp"

namespace qdn::pipeline {

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  auto v = linspace(std::log(a), std::log(b), n);
  for (auto& x : v) x = std::exp(x);
  return v;
}

namespace {

// Default two-slope charge model anchored at 0.47 ueV/sqrt(Hz) at 1 Hz with
// the slope change at 1e-3 Hz.
CompositePsd default_charge_psd() {
  const double total_1hz = 0.47 * 0.47;
  const double crossover_hz = 1e-3;
  const double s1 = total_1hz / (1.0 + crossover_hz);
  return CompositePsd({{s1, 1.0}, {s1 * crossover_hz, 2.0}}, "energy-ueV");
}

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage) {
  return Rng::stream(seed, 0xABCD0000ULL + stage)();
}

int scaled_count(int base, double scale, int minimum) {
  return std::max(minimum, static_cast<int>(std::lround(base * scale)));
}

std::string json_to_file(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << j.dump(2) << "\n";
  return path.filename().string();
}

std::size_t clamp_pow2(std::size_t target, std::size_t lo, std::size_t hi) {
  std::size_t p = lo;
  while (p * 2 <= target && p * 2 <= hi) p *= 2;
  return p;
}

double series_std(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size()));
}

nlohmann::json power_law_fit_json(const PowerLawFitResult& f) {
  return {{"amplitude_at_1hz", f.amplitude_at_1hz},
          {"exponent", f.exponent},
          {"amplitude_err", f.amplitude_err},
          {"exponent_err", f.exponent_err},
          {"n_bins", f.n_bins}};
}

}  // namespace

ScenarioConfig::ScenarioConfig()
    : charge_noise_psd(default_charge_psd()),
      dot_geometry(default_dot_geometry()),
      bath_species(default_bath_species()) {}

CompositePsd ScenarioConfig::detuning_model() const {
  if (detuning_psd_override) return *detuning_psd_override;
  return convert_psd(charge_noise_psd, chain);
}

nlohmann::json ScenarioConfig::to_json() const {
  nlohmann::json j{
      {"seed", seed},
      {"scale", scale},
      {"threads", threads},
      {"out_dir", out_dir},
      {"charge_noise_psd", charge_noise_psd.to_json()},
      {"conversion_chain", chain.to_json()},
      {"pulse",
       {{"f_rabi_hz", pulse.f_rabi_hz},
        {"t_pi_half_s", pulse.t_pi_half_s},
        {"reference_frequency_hz", pulse.reference_frequency_hz}}},
      {"fringe_scan",
       {{"grid_min_hz", fringe_scan.grid_min_hz},
        {"grid_max_hz", fringe_scan.grid_max_hz},
        {"n_steps", fringe_scan.n_steps},
        {"shots_per_point", fringe_scan.shots_per_point},
        {"line_duration_s", fringe_scan.line_duration_s},
        {"n_lines", fringe_scan.n_lines},
        {"t_e_s", fringe_scan.t_e_s}}},
      {"t2star_scan",
       {{"t_e_min_s", t2star_scan.t_e_min_s},
        {"t_e_max_s", t2star_scan.t_e_max_s},
        {"n_points", t2star_scan.n_points},
        {"shots_per_point", t2star_scan.shots_per_point},
        {"line_duration_s", t2star_scan.line_duration_s},
        {"n_lines", t2star_scan.n_lines},
        {"bundle_offset_lines", t2star_scan.bundle_offset_lines},
        {"n_t_m_points", t2star_scan.n_t_m_points},
        {"t_e_ref_s", t2star_scan.t_e_ref_s},
        {"split_t_m_s", t2star_scan.split_t_m_s}}},
      {"echo_scan",
       {{"t_e_min_s", echo_scan.t_e_min_s},
        {"t_e_max_s", echo_scan.t_e_max_s},
        {"n_points", echo_scan.n_points},
        {"shots_per_point", echo_scan.shots_per_point},
        {"trace_sample_rate_hz", echo_scan.trace_sample_rate_hz},
        {"trace_samples", echo_scan.trace_samples}}},
      {"quasi_static_sim",
       {{"t_m_s", quasi_static_sim.t_m_s},
        {"t_e_ref_s", quasi_static_sim.t_e_ref_s},
        {"t_e_min_s", quasi_static_sim.t_e_min_s},
        {"t_e_max_s", quasi_static_sim.t_e_max_s},
        {"n_points", quasi_static_sim.n_points},
        {"shots_per_point", quasi_static_sim.shots_per_point},
        {"trace_sample_rate_hz", quasi_static_sim.trace_sample_rate_hz}}},
      {"welch",
       {{"segment_length", welch.segment_length},
        {"overlap_fraction", welch.overlap_fraction},
        {"window", to_string(welch.window)}}},
      {"synth",
       {{"n_samples", synth.n_samples}, {"sample_rate_hz", synth.sample_rate_hz}}},
      {"dot_geometry", dot_geometry.to_json()},
  };
  nlohmann::json species = nlohmann::json::array();
  for (const auto& s : bath_species) species.push_back(s.to_json());
  j["bath_species"] = species;
  if (detuning_psd_override)
    j["detuning_psd_override"] = detuning_psd_override->to_json();
  return j;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  c.seed = j.value("seed", c.seed);
  c.scale = j.value("scale", c.scale);
  c.threads = j.value("threads", c.threads);
  c.out_dir = j.value("out_dir", c.out_dir);
  if (!(c.scale > 0.0) || c.scale > 1.0)
    throw std::invalid_argument("config: scale must lie in (0, 1]");
  if (c.threads < 1) throw std::invalid_argument("config: threads must be >= 1");

  if (j.contains("charge_noise_psd"))
    c.charge_noise_psd = CompositePsd::from_json(j.at("charge_noise_psd"));
  if (j.contains("detuning_psd_override") && !j.at("detuning_psd_override").is_null())
    c.detuning_psd_override = CompositePsd::from_json(j.at("detuning_psd_override"));
  if (j.contains("conversion_chain"))
    c.chain = ConversionChain::from_json(j.at("conversion_chain"));
  if (j.contains("pulse")) {
    const auto& p = j.at("pulse");
    c.pulse.f_rabi_hz = p.value("f_rabi_hz", c.pulse.f_rabi_hz);
    c.pulse.t_pi_half_s = p.value("t_pi_half_s", c.pulse.t_pi_half_s);
    c.pulse.reference_frequency_hz =
        p.value("reference_frequency_hz", c.pulse.reference_frequency_hz);
    c.pulse.validate();
  }
  if (j.contains("fringe_scan")) {
    const auto& s = j.at("fringe_scan");
    auto& f = c.fringe_scan;
    f.grid_min_hz = s.value("grid_min_hz", f.grid_min_hz);
    f.grid_max_hz = s.value("grid_max_hz", f.grid_max_hz);
    f.n_steps = s.value("n_steps", f.n_steps);
    f.shots_per_point = s.value("shots_per_point", f.shots_per_point);
    f.line_duration_s = s.value("line_duration_s", f.line_duration_s);
    f.n_lines = s.value("n_lines", f.n_lines);
    f.t_e_s = s.value("t_e_s", f.t_e_s);
  }
  if (j.contains("t2star_scan")) {
    const auto& s = j.at("t2star_scan");
    auto& t = c.t2star_scan;
    t.t_e_min_s = s.value("t_e_min_s", t.t_e_min_s);
    t.t_e_max_s = s.value("t_e_max_s", t.t_e_max_s);
    t.n_points = s.value("n_points", t.n_points);
    t.shots_per_point = s.value("shots_per_point", t.shots_per_point);
    t.line_duration_s = s.value("line_duration_s", t.line_duration_s);
    t.n_lines = s.value("n_lines", t.n_lines);
    t.bundle_offset_lines = s.value("bundle_offset_lines", t.bundle_offset_lines);
    t.n_t_m_points = s.value("n_t_m_points", t.n_t_m_points);
    t.t_e_ref_s = s.value("t_e_ref_s", t.t_e_ref_s);
    t.split_t_m_s = s.value("split_t_m_s", t.split_t_m_s);
  }
  if (j.contains("echo_scan")) {
    const auto& s = j.at("echo_scan");
    auto& e = c.echo_scan;
    e.t_e_min_s = s.value("t_e_min_s", e.t_e_min_s);
    e.t_e_max_s = s.value("t_e_max_s", e.t_e_max_s);
    e.n_points = s.value("n_points", e.n_points);
    e.shots_per_point = s.value("shots_per_point", e.shots_per_point);
    e.trace_sample_rate_hz = s.value("trace_sample_rate_hz", e.trace_sample_rate_hz);
    e.trace_samples = s.value("trace_samples", e.trace_samples);
  }
  if (j.contains("quasi_static_sim")) {
    const auto& s = j.at("quasi_static_sim");
    auto& q = c.quasi_static_sim;
    q.t_m_s = s.value("t_m_s", q.t_m_s);
    q.t_e_ref_s = s.value("t_e_ref_s", q.t_e_ref_s);
    q.t_e_min_s = s.value("t_e_min_s", q.t_e_min_s);
    q.t_e_max_s = s.value("t_e_max_s", q.t_e_max_s);
    q.n_points = s.value("n_points", q.n_points);
    q.shots_per_point = s.value("shots_per_point", q.shots_per_point);
    q.trace_sample_rate_hz = s.value("trace_sample_rate_hz", q.trace_sample_rate_hz);
  }
  if (j.contains("welch")) {
    const auto& s = j.at("welch");
    c.welch.segment_length = s.value("segment_length", c.welch.segment_length);
    c.welch.overlap_fraction = s.value("overlap_fraction", c.welch.overlap_fraction);
    if (s.contains("window"))
      c.welch.window = window_from_string(s.at("window").get<std::string>());
  }
  if (j.contains("synth")) {
    const auto& s = j.at("synth");
    c.synth.n_samples = s.value("n_samples", c.synth.n_samples);
    c.synth.sample_rate_hz = s.value("sample_rate_hz", c.synth.sample_rate_hz);
  }
  if (j.contains("dot_geometry"))
    c.dot_geometry = DotGeometry::from_json(j.at("dot_geometry"));
  if (j.contains("bath_species")) {
    c.bath_species.clear();
    for (const auto& s : j.at("bath_species"))
      c.bath_species.push_back(BathSpecies::from_json(s));
  }
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config: cannot open " + path.string());
  nlohmann::json j;
  is >> j;
  return from_json(j);
}

RunResult run_hyperfine_table(const ScenarioConfig& cfg,
                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunResult result;
  nlohmann::json table = nlohmann::json::array();
  std::vector<double> t2_values;

  std::FILE* f = std::fopen((out_dir / "hyperfine_table.csv").string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot open hyperfine_table.csv");
  std::fputs("species,n_spinful,t2star_formula_s,t2star_oracle_s\r\n", f);
  for (std::size_t i = 0; i < cfg.bath_species.size(); ++i) {
    const auto& sp = cfg.bath_species[i];
    const double n_s = count_spinful(sp, cfg.dot_geometry);
    const double t2 = ergodic_t2star(sp, cfg.dot_geometry);
    const double t2_mc = overhauser_mc_oracle(sp, cfg.dot_geometry, 10000,
                                              stage_seed(cfg.seed, 10 + i),
                                              cfg.threads);
    std::fprintf(f, "%s,%.17g,%.17g,%.17g\r\n", sp.label.c_str(), n_s, t2, t2_mc);
    table.push_back({{"species", sp.label},
                     {"n_spinful", n_s},
                     {"t2star_formula_s", t2},
                     {"t2star_oracle_s", t2_mc}});
    t2_values.push_back(t2);
  }
  std::fclose(f);

  result.summary = {{"table", table},
                    {"combined_t2star_s", combine_baths(t2_values)},
                    {"n_atoms", cfg.dot_geometry.n_atoms}};
  result.output_files = {"hyperfine_table.csv",
                         json_to_file(result.summary, out_dir / "summary.json")};
  return result;
}

RunResult run_fig1d(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const CompositePsd model = cfg.detuning_model();
  const auto& fs_cfg = cfg.fringe_scan;

  RamseyScanConfig scan;
  scan.detuning_grid_hz =
      linspace(fs_cfg.grid_min_hz, fs_cfg.grid_max_hz,
               static_cast<std::size_t>(fs_cfg.n_steps));
  scan.shots_per_point = fs_cfg.shots_per_point;
  scan.line_duration_s = fs_cfg.line_duration_s;
  scan.n_lines = scaled_count(fs_cfg.n_lines, cfg.scale, 8);
  scan.t_e_s = fs_cfg.t_e_s;

  const double line_rate = 1.0 / scan.line_duration_s;
  const NoiseTrace trace = synthesize(model, static_cast<std::size_t>(scan.n_lines),
                                      line_rate, stage_seed(cfg.seed, 1));
  const FringeDataset dataset =
      simulate_ramsey_scan(cfg.pulse, scan, trace, stage_seed(cfg.seed, 2), cfg.threads);
  const DetuningSeries series =
      track_detuning(dataset, cfg.pulse, scan.t_e_s, cfg.threads);

  const auto run = series.longest_valid_run();
  if (run.size() < 16)
    throw std::runtime_error("fig1d: too few tracked lines for spectral estimation");
  WelchSettings welch = cfg.welch;
  if (welch.segment_length == 0)
    welch.segment_length = clamp_pow2(run.size() / 8, 16, 512);
  const PsdEstimate est = welch_psd(run, line_rate, welch);

  nlohmann::json summary{
      {"n_lines", scan.n_lines},
      {"n_valid_lines", series.n_valid()},
      {"tracked_sigma_hz", series_std(run)},
      {"injected_sigma_hz", std::sqrt(trace.variance())},
      {"psd_f_min_hz", est.frequencies_hz.front()},
      {"psd_f_max_hz", est.frequencies_hz.back()},
  };

  // Two-slope structure of the estimate, when it has the bins for it.
  try {
    const auto broken = fit_broken_power_law(est, 2);
    summary["low_band_segment"] = power_law_fit_json(broken.segments[0]);
    summary["high_band_segment"] = power_law_fit_json(broken.segments[1]);
    summary["f_split_hz"] = broken.f_split_hz;
  } catch (const std::exception& e) {
    summary["broken_fit_error"] = e.what();
  }
  // Single slope over the truncated detection band.
  try {
    const auto high = fit_power_law(est, 6e-4, 3e-3);
    summary["alpha_high_band"] = high.exponent;
    summary["alpha_high_band_err"] = high.exponent_err;
  } catch (const std::exception& e) {
    summary["high_band_fit_error"] = e.what();
  }

  dataset.write_csv(out_dir / "fringes.csv");
  json_to_file(dataset.to_json(), out_dir / "fringes.json");
  series.write_csv(out_dir / "detuning_series.csv");
  est.write_csv(out_dir / "detuning_psd.csv");
  json_to_file(est.to_json(), out_dir / "detuning_psd.json");

  RunResult result;
  result.summary = summary;
  result.output_files = {"fringes.csv",      "fringes.json",
                         "detuning_series.csv", "detuning_psd.csv",
                         "detuning_psd.json",
                         json_to_file(summary, out_dir / "summary.json")};
  return result;
}

RunResult run_fig2c(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const CompositePsd model = cfg.detuning_model();
  const auto& t_cfg = cfg.t2star_scan;

  const int n_lines = scaled_count(t_cfg.n_lines, cfg.scale, 16);
  const double line_rate = 1.0 / t_cfg.line_duration_s;
  const auto t_e_grid = linspace(t_cfg.t_e_min_s, t_cfg.t_e_max_s,
                                 static_cast<std::size_t>(t_cfg.n_points));

  const NoiseTrace slow = synthesize(model, static_cast<std::size_t>(n_lines),
                                     line_rate, stage_seed(cfg.seed, 1));
  // Intra-line band above the slow-trace Nyquist, trace-consistent factor 1.
  const double intra_sigma =
      quasi_static_sigma(model, 0.5 * line_rate, 1.0 / t_cfg.t_e_ref_s, 1.0);

  const auto lines = simulate_decay_line_series(
      t_e_grid, slow, t_cfg.line_duration_s, n_lines, intra_sigma,
      t_cfg.shots_per_point, stage_seed(cfg.seed, 2), cfg.threads);

  const double t_m_max =
      n_lines * t_cfg.line_duration_s / 2.0;  // at least two bundles
  const auto t_m_list =
      logspace(t_cfg.line_duration_s, t_m_max,
               static_cast<std::size_t>(t_cfg.n_t_m_points));
  const int offset =
      std::max(1, static_cast<int>(std::lround(t_cfg.bundle_offset_lines * cfg.scale)));
  const T2StarSeries series =
      t2star_vs_tm(lines, t_cfg.line_duration_s, offset, t_m_list, cfg.threads);

  nlohmann::json summary{{"n_lines", n_lines},
                         {"bundle_offset_lines", offset},
                         {"intra_line_sigma_hz", intra_sigma},
                         {"t_m_s", series.t_m_s},
                         {"t2star_s", series.t2star_s}};
  bool monotone = series.t2star_s.size() >= 2;
  for (std::size_t i = 1; i < series.t2star_s.size(); ++i)
    monotone = monotone && series.t2star_s[i] < series.t2star_s[i - 1];
  summary["monotone_decreasing"] = monotone;

  try {
    const auto global = fit_t2star_tm(series, t_cfg.t_e_ref_s);
    summary["alpha_global"] = global[0].alpha;
    summary["s0_global"] = global[0].s0_at_1hz;
    summary["residual_global"] = global[0].residual_rms;
  } catch (const std::exception& e) {
    summary["global_fit_error"] = e.what();
  }
  try {
    const auto split = fit_t2star_tm(series, t_cfg.t_e_ref_s, t_cfg.split_t_m_s);
    summary["alpha_short_tm"] = split[0].alpha;
    summary["alpha_long_tm"] = split[1].alpha;
    summary["residual_split"] =
        std::sqrt(0.5 * (split[0].residual_rms * split[0].residual_rms +
                         split[1].residual_rms * split[1].residual_rms));
  } catch (const std::exception& e) {
    summary["split_fit_error"] = e.what();
  }

  series.write_csv(out_dir / "t2star_vs_tm.csv");
  std::FILE* f = std::fopen((out_dir / "decay_lines.csv").string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot open decay_lines.csv");
  std::fputs("line,t_e_s,p_up\r\n", f);
  for (std::size_t l = 0; l < lines.size(); ++l)
    for (std::size_t j = 0; j < lines[l].t_e_s.size(); ++j)
      std::fprintf(f, "%zu,%.17g,%.17g\r\n", l, lines[l].t_e_s[j], lines[l].p_up[j]);
  std::fclose(f);

  RunResult result;
  result.summary = summary;
  result.output_files = {"t2star_vs_tm.csv", "decay_lines.csv",
                         json_to_file(summary, out_dir / "summary.json")};
  return result;
}

RunResult run_fig2d(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const CompositePsd model = cfg.detuning_model();
  const auto& e_cfg = cfg.echo_scan;

  const NoiseTrace trace = synthesize(model, e_cfg.trace_samples,
                                      e_cfg.trace_sample_rate_hz, stage_seed(cfg.seed, 1));
  const auto grid = linspace(e_cfg.t_e_min_s, e_cfg.t_e_max_s,
                             static_cast<std::size_t>(e_cfg.n_points));
  const int shots = scaled_count(e_cfg.shots_per_point, cfg.scale, 200);
  DecaySimOptions opt;
  opt.quasi_static = false;
  const DecayCurve curve = simulate_decay(SequenceKind::echo, grid, trace, shots,
                                          stage_seed(cfg.seed, 2), opt, cfg.threads);
  const FitResult fit = fit_echo_decay(curve);

  nlohmann::json summary{{"shots_per_point", shots},
                         {"t2_echo_s", fit.at("t2_echo")},
                         {"t2_echo_err_s", fit.error("t2_echo")},
                         {"alpha", fit.at("alpha")},
                         {"alpha_err", fit.error("alpha")},
                         {"converged", fit.converged},
                         {"fit", fit.to_json()}};

  curve.write_csv(out_dir / "echo_decay.csv");
  json_to_file(curve.to_json(), out_dir / "echo_decay.json");

  RunResult result;
  result.summary = summary;
  result.output_files = {"echo_decay.csv", "echo_decay.json",
                         json_to_file(summary, out_dir / "summary.json")};
  return result;
}

RunResult run_fig3b(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const CompositePsd model = cfg.detuning_model();
  const auto& q = cfg.quasi_static_sim;

  const auto n_samples = static_cast<std::size_t>(
      std::lround(q.t_m_s * q.trace_sample_rate_hz));
  const NoiseTrace trace =
      synthesize(model, n_samples, q.trace_sample_rate_hz, stage_seed(cfg.seed, 1));

  DecaySimOptions opt;
  opt.quasi_static = true;
  // Band between the trace Nyquist and 1/t_e, factor 1 to match the trace.
  opt.extra_quasistatic_sigma_hz = quasi_static_sigma(
      model, 0.5 * q.trace_sample_rate_hz, 1.0 / q.t_e_ref_s, 1.0);

  const auto grid =
      linspace(q.t_e_min_s, q.t_e_max_s, static_cast<std::size_t>(q.n_points));
  const DecayCurve curve =
      simulate_decay(SequenceKind::ramsey, grid, trace, q.shots_per_point,
                     stage_seed(cfg.seed, 2), opt, cfg.threads);
  const FitResult fit = fit_ramsey_decay(curve);

  nlohmann::json summary{
      {"t2star_s", fit.at("t2_star")},
      {"t2star_err_s", fit.error("t2_star")},
      {"converged", fit.converged},
      {"trace_sigma_hz", std::sqrt(trace.variance())},
      {"extra_quasistatic_sigma_hz", opt.extra_quasistatic_sigma_hz},
      {"fit", fit.to_json()}};

  curve.write_csv(out_dir / "simulated_decay.csv");
  json_to_file(curve.to_json(), out_dir / "simulated_decay.json");

  RunResult result;
  result.summary = summary;
  result.output_files = {"simulated_decay.csv", "simulated_decay.json",
                         json_to_file(summary, out_dir / "summary.json")};
  return result;
}

RunResult run_synth(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  const CompositePsd model = cfg.detuning_model();
  const NoiseTrace trace = synthesize(model, cfg.synth.n_samples,
                                      cfg.synth.sample_rate_hz, cfg.seed);
  save_trace(trace, out_dir / "trace.qdnt");
  write_trace_csv(trace, out_dir / "trace.csv");

  const double df = trace.sample_rate_hz / static_cast<double>(trace.size());
  const double band_integral = model.integrate(df, 0.5 * trace.sample_rate_hz);
  RunResult result;
  result.summary = {{"n_samples", trace.size()},
                    {"sample_rate_hz", trace.sample_rate_hz},
                    {"variance", trace.variance()},
                    {"band_integral", band_integral},
                    {"variance_over_band_integral", trace.variance() / band_integral}};
  result.output_files = {"trace.qdnt", "trace.csv",
                         json_to_file(result.summary, out_dir / "summary.json")};
  return result;
}

RunResult run_figure(const std::string& figure, const ScenarioConfig& cfg,
                     const std::filesystem::path& out_dir) {
  if (figure == "fig1d") return run_fig1d(cfg, out_dir);
  if (figure == "fig2c") return run_fig2c(cfg, out_dir);
  if (figure == "fig2d") return run_fig2d(cfg, out_dir);
  if (figure == "fig3b") return run_fig3b(cfg, out_dir);
  if (figure == "hyperfine_table") return run_hyperfine_table(cfg, out_dir);
  throw std::invalid_argument("unknown figure: " + figure);
}

void write_manifest(const ScenarioConfig& cfg, const std::string& command,
                    const RunResult& result, const std::filesystem::path& out_dir) {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  nlohmann::json manifest{{"artifact_version", artifact_version},
                          {"command", command},
                          {"generated_at", stamp},
                          {"config", cfg.to_json()},
                          {"outputs", result.output_files},
                          {"summary", result.summary}};
  json_to_file(manifest, out_dir / "manifest.json");
}

}  // namespace qdn::pipeline
