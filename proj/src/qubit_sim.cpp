#include "qdn/qubit_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "qdn/parallel.hpp"

namespace qdn {

namespace {
constexpr double pi = std::numbers::pi;

std::FILE* open_csv(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return f;
}
}  // namespace

bool PulseParams::is_ideal_pulse() const {
  return std::abs(4.0 * f_rabi_hz * t_pi_half_s - 1.0) < 1e-9;
}

void PulseParams::validate() const {
  if (!(f_rabi_hz > 0.0) || !(t_pi_half_s > 0.0))
    throw std::invalid_argument("PulseParams: Rabi frequency and pulse time must be positive");
}

double fringe_probability(const PulseParams& params, double t_e_s, double delta_f_hz) {
  if (t_e_s < 0.0) throw std::domain_error("fringe_probability: negative evolution time");
  const double f_r = params.f_rabi_hz;
  const double phi_mag = std::hypot(delta_f_hz, f_r);
  const double pulse_arg = pi * params.t_pi_half_s * phi_mag;
  const double free_arg = pi * delta_f_hz * t_e_s;
  const double s = std::sin(pulse_arg);
  const double bracket = std::cos(free_arg) * std::cos(pulse_arg) -
                         (delta_f_hz / phi_mag) * std::sin(free_arg) * s;
  const double axis = f_r / phi_mag;
  return 4.0 * axis * axis * s * s * bracket * bracket;
}

double pup_quasistatic(double t_e_s, double delta_f_hz) {
  if (t_e_s < 0.0) throw std::domain_error("pup_quasistatic: negative evolution time");
  return 0.5 * (std::cos(2.0 * pi * t_e_s * delta_f_hz) + 1.0);
}

double echo_phase(std::span<const double> detuning_hz, double sample_rate_hz) {
  const std::size_t n = detuning_hz.size();
  if (n < 3 || n % 2 == 0)
    throw std::domain_error("echo_phase: need an odd sample count (even interval split)");
  const std::size_t mid = n / 2;
  auto trapezoid = [&](std::size_t first, std::size_t last) {
    double acc = 0.0;
    for (std::size_t i = first; i < last; ++i)
      acc += 0.5 * (detuning_hz[i] + detuning_hz[i + 1]);
    return acc / sample_rate_hz;
  };
  return 2.0 * pi * (trapezoid(0, mid) - trapezoid(mid, n - 1));
}

double echo_phase(const NoiseTrace& trace, double t_start_s, double t_e_s) {
  if (t_start_s < 0.0 || t_e_s <= 0.0)
    throw std::domain_error("echo_phase: invalid window");
  const double fs = trace.sample_rate_hz;
  std::size_t intervals = static_cast<std::size_t>(std::llround(t_e_s * fs));
  if (intervals < 2) intervals = 2;
  if (intervals % 2 == 1) ++intervals;
  const std::size_t start = static_cast<std::size_t>(std::llround(t_start_s * fs));
  if (start + intervals + 1 > trace.samples.size())
    throw std::domain_error("echo_phase: trace segment shorter than the evolution window");
  return echo_phase(std::span<const double>(trace.samples.data() + start, intervals + 1), fs);
}

void RamseyScanConfig::validate() const {
  if (detuning_grid_hz.size() < 2)
    throw std::invalid_argument("RamseyScanConfig: need at least 2 grid points");
  for (std::size_t i = 1; i < detuning_grid_hz.size(); ++i)
    if (!(detuning_grid_hz[i] > detuning_grid_hz[i - 1]))
      throw std::invalid_argument("RamseyScanConfig: grid must increase strictly");
  if (shots_per_point < 0)
    throw std::invalid_argument("RamseyScanConfig: negative shot count");
  if (!(line_duration_s > 0.0))
    throw std::invalid_argument("RamseyScanConfig: line duration must be positive");
  if (n_lines < 1) throw std::invalid_argument("RamseyScanConfig: need at least one line");
  if (!(t_e_s >= 0.0)) throw std::invalid_argument("RamseyScanConfig: negative evolution time");
}

nlohmann::json RamseyScanConfig::to_json() const {
  return {{"detuning_grid_hz", detuning_grid_hz},
          {"shots_per_point", shots_per_point},
          {"line_duration_s", line_duration_s},
          {"n_lines", n_lines},
          {"t_e_s", t_e_s}};
}

RamseyScanConfig RamseyScanConfig::from_json(const nlohmann::json& j) {
  RamseyScanConfig c;
  c.detuning_grid_hz = j.at("detuning_grid_hz").get<std::vector<double>>();
  c.shots_per_point = j.at("shots_per_point").get<int>();
  c.line_duration_s = j.at("line_duration_s").get<double>();
  c.n_lines = j.at("n_lines").get<int>();
  c.t_e_s = j.at("t_e_s").get<double>();
  c.validate();
  return c;
}

void FringeDataset::write_csv(const std::filesystem::path& path) const {
  std::FILE* f = open_csv(path);
  std::fputs("time_s,delta_f_mw_hz,p_up\r\n", f);
  const std::size_t w = config.detuning_grid_hz.size();
  for (std::size_t l = 0; l < timestamps_s.size(); ++l) {
    for (std::size_t j = 0; j < w; ++j) {
      std::fprintf(f, "%.17g,%.17g,%.17g\r\n", timestamps_s[l],
                   config.detuning_grid_hz[j], at(l, j));
    }
  }
  std::fclose(f);
}

nlohmann::json FringeDataset::to_json() const {
  return {{"config", config.to_json()},
          {"p_up", p_up},
          {"timestamps_s", timestamps_s}};
}

FringeDataset FringeDataset::from_json(const nlohmann::json& j) {
  FringeDataset d;
  d.config = RamseyScanConfig::from_json(j.at("config"));
  d.p_up = j.at("p_up").get<std::vector<double>>();
  d.timestamps_s = j.at("timestamps_s").get<std::vector<double>>();
  if (d.p_up.size() != d.timestamps_s.size() * d.config.detuning_grid_hz.size())
    throw std::invalid_argument("FringeDataset: inconsistent matrix shape");
  return d;
}

FringeDataset simulate_ramsey_scan(const PulseParams& params,
                                   const RamseyScanConfig& config,
                                   const NoiseTrace& trace, std::uint64_t seed,
                                   int threads) {
  params.validate();
  config.validate();
  const double needed = config.n_lines * config.line_duration_s;
  if (trace.duration_s() < needed - 0.5 / trace.sample_rate_hz)
    throw std::domain_error("simulate_ramsey_scan: trace shorter than the scan");

  const std::size_t w = config.detuning_grid_hz.size();
  FringeDataset out;
  out.config = config;
  out.p_up.assign(static_cast<std::size_t>(config.n_lines) * w, 0.0);
  out.timestamps_s.resize(config.n_lines);

  parallel_for(static_cast<std::size_t>(config.n_lines), threads, [&](std::size_t l) {
    Rng rng = Rng::stream(seed, l);
    const double t_mid = (static_cast<double>(l) + 0.5) * config.line_duration_s;
    const std::size_t idx = std::min(
        trace.samples.size() - 1,
        static_cast<std::size_t>(t_mid * trace.sample_rate_hz));
    const double noise = trace.samples[idx];
    out.timestamps_s[l] = t_mid;
    for (std::size_t j = 0; j < w; ++j) {
      const double p = fringe_probability(params, config.t_e_s,
                                          config.detuning_grid_hz[j] - noise);
      out.p_up[l * w + j] =
          config.shots_per_point > 0
              ? static_cast<double>(rng.binomial(config.shots_per_point, p)) /
                    config.shots_per_point
              : p;
    }
  });
  return out;
}

std::string to_string(SequenceKind kind) {
  return kind == SequenceKind::ramsey ? "ramsey" : "echo";
}

SequenceKind sequence_kind_from_string(const std::string& s) {
  if (s == "ramsey") return SequenceKind::ramsey;
  if (s == "echo") return SequenceKind::echo;
  throw std::invalid_argument("unknown sequence kind: " + s);
}

void DecayCurve::write_csv(const std::filesystem::path& path) const {
  std::FILE* f = open_csv(path);
  std::fputs("t_e_s,p_up\r\n", f);
  for (std::size_t i = 0; i < t_e_s.size(); ++i)
    std::fprintf(f, "%.17g,%.17g\r\n", t_e_s[i], p_up[i]);
  std::fclose(f);
}

nlohmann::json DecayCurve::to_json() const {
  return {{"t_e_s", t_e_s},
          {"p_up", p_up},
          {"shots_per_point", shots_per_point},
          {"sequence_kind", to_string(kind)}};
}

DecayCurve DecayCurve::from_json(const nlohmann::json& j) {
  DecayCurve c;
  c.t_e_s = j.at("t_e_s").get<std::vector<double>>();
  c.p_up = j.at("p_up").get<std::vector<double>>();
  c.shots_per_point = j.at("shots_per_point").get<int>();
  c.kind = sequence_kind_from_string(j.at("sequence_kind").get<std::string>());
  return c;
}

namespace {

void validate_grid(std::span<const double> t_e_grid_s) {
  if (t_e_grid_s.empty()) throw std::domain_error("simulate_decay: empty grid");
  for (std::size_t i = 0; i < t_e_grid_s.size(); ++i) {
    if (t_e_grid_s[i] < 0.0)
      throw std::domain_error("simulate_decay: negative evolution time");
    if (i > 0 && !(t_e_grid_s[i] > t_e_grid_s[i - 1]))
      throw std::domain_error("simulate_decay: grid must increase strictly");
  }
}

// Ramsey phase over [start, start + intervals] by trapezoid.
double integrated_phase(const NoiseTrace& trace, std::size_t start, std::size_t intervals) {
  double acc = 0.0;
  for (std::size_t i = start; i < start + intervals; ++i)
    acc += 0.5 * (trace.samples[i] + trace.samples[i + 1]);
  return 2.0 * pi * acc / trace.sample_rate_hz;
}

}  // namespace

DecayCurve simulate_decay(SequenceKind kind, std::span<const double> t_e_grid_s,
                          const NoiseTrace& trace, int shots, std::uint64_t seed,
                          const DecaySimOptions& options, int threads) {
  validate_grid(t_e_grid_s);
  if (shots < 1) throw std::domain_error("simulate_decay: need at least one shot");
  const bool sample_quasistatic =
      kind == SequenceKind::ramsey && options.quasi_static;
  if (!sample_quasistatic &&
      t_e_grid_s.back() >= trace.duration_s() - 2.0 / trace.sample_rate_hz)
    throw std::domain_error("simulate_decay: grid exceeds trace duration");

  DecayCurve out;
  out.t_e_s.assign(t_e_grid_s.begin(), t_e_grid_s.end());
  out.p_up.assign(t_e_grid_s.size(), 0.0);
  out.shots_per_point = shots;
  out.kind = kind;

  const std::size_t n = trace.samples.size();
  parallel_for(t_e_grid_s.size(), threads, [&](std::size_t j) {
    Rng rng = Rng::stream(seed, j);
    const double t_e = t_e_grid_s[j];
    double acc = 0.0;
    for (int r = 0; r < shots; ++r) {
      double p;
      if (sample_quasistatic) {
        double delta = trace.samples[rng.uniform_index(n)];
        if (options.extra_quasistatic_sigma_hz > 0.0)
          delta += options.extra_quasistatic_sigma_hz * rng.normal();
        p = pup_quasistatic(t_e, delta);
      } else {
        std::size_t intervals =
            static_cast<std::size_t>(std::llround(t_e * trace.sample_rate_hz));
        if (intervals < 2) intervals = 2;
        if (kind == SequenceKind::echo && intervals % 2 == 1) ++intervals;
        const std::size_t start = rng.uniform_index(n - intervals - 1);
        double phase;
        if (kind == SequenceKind::echo) {
          phase = echo_phase(
              std::span<const double>(trace.samples.data() + start, intervals + 1),
              trace.sample_rate_hz);
        } else {
          phase = integrated_phase(trace, start, intervals);
        }
        p = 0.5 * (std::cos(phase) + 1.0);
      }
      acc += options.analytic_readout ? p : (rng.bernoulli(p) ? 1.0 : 0.0);
    }
    out.p_up[j] = acc / shots;
  });
  return out;
}

std::vector<DecayCurve> simulate_decay_line_series(
    std::span<const double> t_e_grid_s, const NoiseTrace& slow_trace,
    double line_duration_s, int n_lines, double intra_line_sigma_hz, int shots,
    std::uint64_t seed, int threads) {
  validate_grid(t_e_grid_s);
  if (n_lines < 1) throw std::domain_error("simulate_decay_line_series: need lines");
  if (shots < 1) throw std::domain_error("simulate_decay_line_series: need shots");
  const double needed = n_lines * line_duration_s;
  if (slow_trace.duration_s() < needed - 0.5 / slow_trace.sample_rate_hz)
    throw std::domain_error("simulate_decay_line_series: trace shorter than the series");

  std::vector<DecayCurve> lines(static_cast<std::size_t>(n_lines));
  parallel_for(static_cast<std::size_t>(n_lines), threads, [&](std::size_t l) {
    Rng rng = Rng::stream(seed, l);
    const double t_mid = (static_cast<double>(l) + 0.5) * line_duration_s;
    const std::size_t idx = std::min(
        slow_trace.samples.size() - 1,
        static_cast<std::size_t>(t_mid * slow_trace.sample_rate_hz));
    const double base = slow_trace.samples[idx];
    DecayCurve& line = lines[l];
    line.t_e_s.assign(t_e_grid_s.begin(), t_e_grid_s.end());
    line.p_up.assign(t_e_grid_s.size(), 0.0);
    line.shots_per_point = shots;
    line.kind = SequenceKind::ramsey;
    for (std::size_t j = 0; j < t_e_grid_s.size(); ++j) {
      double acc = 0.0;
      for (int r = 0; r < shots; ++r) {
        const double delta = base + intra_line_sigma_hz * rng.normal();
        acc += rng.bernoulli(pup_quasistatic(t_e_grid_s[j], delta)) ? 1.0 : 0.0;
      }
      line.p_up[j] = acc / shots;
    }
  });
  return lines;
}

}  // namespace qdn
