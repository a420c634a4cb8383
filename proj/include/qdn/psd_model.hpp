#ifndef QDN_PSD_MODEL_HPP
#define QDN_PSD_MODEL_HPP

#include <string>
#include <vector>

#include <json.hpp>

namespace qdn {

/// One S/f^alpha term. The amplitude is the density at f = 1 Hz, in units of
/// X^2/Hz for a quantity measured in X.
struct PowerLawSegment {
  double amplitude_at_1hz = 0.0;
  double exponent = 0.0;
};

/// Sum of power-law terms, as a one-sided spectral density over f in (0, inf).
/// unit_label tags the underlying quantity ("detuning-Hz", "current-pA",
/// "energy-ueV").
class CompositePsd {
 public:
  CompositePsd(std::vector<PowerLawSegment> segments, std::string unit_label);

  /// Density at f (> 0): sum of S_i / f^alpha_i.
  double eval(double f_hz) const;

  /// Analytic integral of the density over [f_lo, f_hi], 0 < f_lo < f_hi.
  /// Exponent-one terms integrate to a logarithm; near-one exponents go
  /// through expm1 so the two branches join smoothly.
  double integrate(double f_lo_hz, double f_hi_hz) const;

  const std::vector<PowerLawSegment>& segments() const { return segments_; }
  const std::string& unit_label() const { return unit_label_; }

  nlohmann::json to_json() const;
  static CompositePsd from_json(const nlohmann::json& j);

 private:
  std::vector<PowerLawSegment> segments_;
  std::string unit_label_;
};

/// Frequency at which two power-law terms have equal density:
/// f* = (S_b/S_a)^(1/(alpha_b - alpha_a)). Equal exponents have no crossover.
double crossover_frequency(const PowerLawSegment& a, const PowerLawSegment& b);

}  // namespace qdn

#endif
