#ifndef QDN_SPECTRAL_HPP
#define QDN_SPECTRAL_HPP

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdn/fitting.hpp"
#include "qdn/noise_synth.hpp"
#include "qdn/qubit_sim.hpp"

namespace qdn {

enum class Window { hann, rect };
std::string to_string(Window w);
Window window_from_string(const std::string& s);

/// One-sided averaged-periodogram spectral estimate with its settings.
struct PsdEstimate {
  std::vector<double> frequencies_hz;  // positive bins, strictly increasing
  std::vector<double> densities;       // X^2/Hz
  std::size_t segment_length = 0;
  double overlap_fraction = 0.0;
  Window window = Window::hann;
  int n_segments_averaged = 0;

  /// Trapezoidal integral of the estimate over [f_lo, f_hi].
  double integrate(double f_lo_hz, double f_hi_hz) const;

  void write_csv(const std::filesystem::path& path) const;
  nlohmann::json to_json() const;
};

struct WelchSettings {
  std::size_t segment_length = 0;  // 0 = n/8 rounded down to a power of two
  double overlap_fraction = 0.5;
  Window window = Window::hann;
};

/// Averaged modified periodograms over overlapping windowed segments, with
/// per-segment mean removal. One-sided normalization: for a rectangular
/// window the bin sum times the bin width reproduces the segment variance.
PsdEstimate welch_psd(std::span<const double> samples, double sample_rate_hz,
                      const WelchSettings& settings = {});
PsdEstimate welch_psd(const NoiseTrace& trace, const WelchSettings& settings = {});

/// Detuning versus time extracted from fringe lines; non-converged lines are
/// kept as gaps (valid = false), never interpolated.
struct DetuningSeries {
  std::vector<double> times_s;
  std::vector<double> delta_f_hz;
  std::vector<double> sigma_hz;  // per-point fit uncertainty
  std::vector<bool> valid;

  std::size_t n_valid() const;
  /// Longest contiguous run of valid points (uniform cadence), for spectral
  /// estimation. Returns the values only.
  std::vector<double> longest_valid_run() const;

  void write_csv(const std::filesystem::path& path) const;  // valid rows only
};

/// Per-line fringe fits over a dataset: one detuning sample per line at the
/// line midpoint.
DetuningSeries track_detuning(const FringeDataset& dataset, const PulseParams& params,
                              double t_e_s, int threads = 1);

/// Single power law fitted to the estimate over [f_lo, f_hi] by weighted
/// least squares in log-log space (closed form).
struct PowerLawFitResult {
  double amplitude_at_1hz = 0.0;
  double exponent = 0.0;
  double amplitude_err = 0.0;
  double exponent_err = 0.0;
  double residual_rms = 0.0;  // rms of log-density residuals
  std::size_t n_bins = 0;
};

PowerLawFitResult fit_power_law(const PsdEstimate& estimate, double f_lo_hz,
                                double f_hi_hz);

struct BrokenPowerLawFitResult {
  std::vector<PowerLawFitResult> segments;  // low-frequency segment first
  double f_split_hz = 0.0;                  // NaN when n_segments = 1
  double residual_rms = 0.0;
};

/// One- or two-slope fit of a spectral estimate. With two slopes and no split
/// given, the split is grid-searched over the band (at least 8 bins per
/// side); the two-term sum model is then refined jointly and the crossover of
/// the refined terms is reported as f_split.
BrokenPowerLawFitResult fit_broken_power_law(const PsdEstimate& estimate,
                                             int n_segments,
                                             std::optional<double> f_split_hz = std::nullopt);

}  // namespace qdn

#endif
