#ifndef QDN_NOISE_SYNTH_HPP
#define QDN_NOISE_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qdn/psd_model.hpp"
#include "qdn/rng.hpp"

namespace qdn {

/// Uniformly sampled real-valued noise record with seed provenance.
struct NoiseTrace {
  double sample_rate_hz = 0.0;
  std::vector<double> samples;
  std::uint64_t seed = 0;
  std::string unit_label = "detuning-Hz";
  std::optional<CompositePsd> psd_provenance;

  std::size_t size() const { return samples.size(); }
  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  double mean() const;
  double variance() const;  // about the sample mean
};

/// Stationary Gaussian trace realizing the target one-sided PSD, by circulant
/// frequency-domain shaping: independent complex Gaussian coefficients per
/// positive bin, scaled so the realized variance is sum_k S(f_k) df over
/// bins 1..n/2, DC forced to zero, then an inverse real FFT. Deterministic in
/// (seed, n_samples, sample_rate, psd).
NoiseTrace synthesize(const CompositePsd& psd, std::size_t n_samples,
                      double sample_rate_hz, std::uint64_t seed);

/// Standard deviation of the band-limited quasi-static component:
/// sqrt(convention_factor * integral of S over [f_lo, f_hi]). Factor 2 is the
/// printed dephasing-formula convention; factor 1 matches the variance a
/// synthesized trace actually carries.
double quasi_static_sigma(const CompositePsd& psd, double f_lo_hz, double f_hi_hz,
                          double convention_factor = 2.0);

/// One zero-mean Gaussian draw with quasi_static_sigma's standard deviation.
double draw_quasi_static(const CompositePsd& psd, double f_lo_hz, double f_hi_hz,
                         double convention_factor, Rng& rng);

// Binary trace file: magic "QDNT", u32 version, f64 sample_rate, u64 n,
// u64 seed, then n f64 samples, all little-endian.
void save_trace(const NoiseTrace& trace, const std::filesystem::path& path);
NoiseTrace load_trace(const std::filesystem::path& path,
                      const std::string& unit_label = "detuning-Hz");

/// CSV export, columns (time_s, value).
void write_trace_csv(const NoiseTrace& trace, const std::filesystem::path& path);

}  // namespace qdn

#endif
