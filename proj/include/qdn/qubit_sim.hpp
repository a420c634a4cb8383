#ifndef QDN_QUBIT_SIM_HPP
#define QDN_QUBIT_SIM_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdn/noise_synth.hpp"

namespace qdn {

/// Drive parameters of the two-pulse interference sequence. The reference
/// frequency is bookkeeping only; the dynamics depend on the Rabi frequency
/// and the pulse duration.
struct PulseParams {
  double f_rabi_hz = 1.0e6;
  double t_pi_half_s = 2.5e-7;
  double reference_frequency_hz = 19.9e9;

  bool is_ideal_pulse() const;
  void validate() const;
};

/// Spin-up probability after pi/2 - wait(t_e) - pi/2 at constant detuning,
/// for finite-bandwidth pulses driven at Rabi frequency f_rabi:
///   P = (4 f_R^2/Phi^2) sin^2(pi t_p Phi)
///       [cos(pi df t_e) cos(pi t_p Phi) - (df/Phi) sin(pi df t_e) sin(pi t_p Phi)]^2
/// with Phi = sqrt(df^2 + f_R^2). Lies in [0,1] by construction.
double fringe_probability(const PulseParams& params, double t_e_s, double delta_f_hz);

/// Ideal-pulse quasi-static limit: P = (cos(2 pi t_e df) + 1)/2.
double pup_quasistatic(double t_e_s, double delta_f_hz);

/// Accumulated echo phase of a detuning record spanning [0, t_e]:
/// 2 pi (integral over the first half - integral over the second half),
/// trapezoidal. Needs an even number of intervals (odd sample count).
double echo_phase(std::span<const double> detuning_hz, double sample_rate_hz);

/// Echo phase over [t_start, t_start + t_e] of a trace; the interval count is
/// rounded to even. Throws if the trace does not cover the window.
double echo_phase(const NoiseTrace& trace, double t_start_s, double t_e_s);

/// Fringe-scan acquisition plan: one line sweeps the drive detuning grid.
struct RamseyScanConfig {
  std::vector<double> detuning_grid_hz;
  int shots_per_point = 100;  // 0 = analytic (infinite-shot) probabilities
  double line_duration_s = 120.0;
  int n_lines = 1;
  double t_e_s = 2.5e-6;

  void validate() const;
  nlohmann::json to_json() const;
  static RamseyScanConfig from_json(const nlohmann::json& j);
};

/// Grid of spin-up probabilities, one row per fringe line.
struct FringeDataset {
  RamseyScanConfig config;
  std::vector<double> p_up;          // row-major [n_lines][grid]
  std::vector<double> timestamps_s;  // line midpoints

  double at(std::size_t line, std::size_t point) const {
    return p_up[line * config.detuning_grid_hz.size() + point];
  }
  std::span<const double> line(std::size_t index) const {
    const std::size_t w = config.detuning_grid_hz.size();
    return {p_up.data() + index * w, w};
  }

  void write_csv(const std::filesystem::path& path) const;
  nlohmann::json to_json() const;
  static FringeDataset from_json(const nlohmann::json& j);
};

/// Simulates the fringe scan against a detuning trace. The noise is frozen
/// per line at the trace value at the line midpoint; the effective detuning
/// at a grid point is grid - noise. shots_per_point = 0 records analytic
/// probabilities, otherwise binomial proportions.
FringeDataset simulate_ramsey_scan(const PulseParams& params,
                                   const RamseyScanConfig& config,
                                   const NoiseTrace& trace, std::uint64_t seed,
                                   int threads = 1);

enum class SequenceKind { ramsey, echo };

std::string to_string(SequenceKind kind);
SequenceKind sequence_kind_from_string(const std::string& s);

/// Spin-up probability versus free evolution time.
struct DecayCurve {
  std::vector<double> t_e_s;
  std::vector<double> p_up;
  int shots_per_point = 0;
  SequenceKind kind = SequenceKind::ramsey;

  void write_csv(const std::filesystem::path& path) const;
  nlohmann::json to_json() const;
  static DecayCurve from_json(const nlohmann::json& j);
};

struct DecaySimOptions {
  /// Ramsey only: detuning frozen per repetition (sampled from the trace)
  /// instead of phase-integrated along the trace.
  bool quasi_static = true;
  /// Record expectation values instead of binomial proportions.
  bool analytic_readout = false;
  /// Extra zero-mean Gaussian detuning per repetition, covering the band
  /// above the trace Nyquist in quasi-static mode.
  double extra_quasistatic_sigma_hz = 0.0;
};

/// Decay acquisition: per evolution time, shots repetitions each drawing
/// noise from the trace (quasi-static sample or integrated/echoed segment).
DecayCurve simulate_decay(SequenceKind kind, std::span<const double> t_e_grid_s,
                          const NoiseTrace& trace, int shots, std::uint64_t seed,
                          const DecaySimOptions& options = {}, int threads = 1);

/// Repeated quick decay sweeps: line l freezes the slow trace at its midpoint
/// and adds i.i.d. intra-line quasi-static noise per repetition. This is the
/// raw dataset the measurement-time bundling protocol consumes.
std::vector<DecayCurve> simulate_decay_line_series(
    std::span<const double> t_e_grid_s, const NoiseTrace& slow_trace,
    double line_duration_s, int n_lines, double intra_line_sigma_hz, int shots,
    std::uint64_t seed, int threads = 1);

}  // namespace qdn

#endif
