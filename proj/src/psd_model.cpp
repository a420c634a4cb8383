#include "qdn/psd_model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace qdn {

namespace {

void validate_segment(const PowerLawSegment& s) {
  if (!(s.amplitude_at_1hz > 0.0) || !std::isfinite(s.amplitude_at_1hz))
    throw std::invalid_argument("PowerLawSegment: amplitude must be positive and finite");
  if (!(s.exponent >= 0.0) || !(s.exponent <= 3.0))
    throw std::invalid_argument("PowerLawSegment: exponent must lie in [0, 3]");
}

// Integral of f^-alpha over [f_lo, f_hi]. The alpha == 1 branch is the exact
// logarithm; elsewhere (f_hi^e - f_lo^e)/e with e = 1-alpha, evaluated via
// expm1 so values near alpha = 1 do not cancel catastrophically.
double power_law_band_integral(double exponent, double f_lo, double f_hi) {
  if (exponent == 1.0) return std::log(f_hi / f_lo);
  const double e = 1.0 - exponent;
  return (std::expm1(e * std::log(f_hi)) - std::expm1(e * std::log(f_lo))) / e;
}

}  // namespace

CompositePsd::CompositePsd(std::vector<PowerLawSegment> segments, std::string unit_label)
    : segments_(std::move(segments)), unit_label_(std::move(unit_label)) {
  if (segments_.empty())
    throw std::invalid_argument("CompositePsd: need at least one segment");
  for (const auto& s : segments_) validate_segment(s);
}

double CompositePsd::eval(double f_hz) const {
  if (!(f_hz > 0.0))
    throw std::domain_error("CompositePsd::eval: frequency must be positive");
  double density = 0.0;
  for (const auto& s : segments_)
    density += s.amplitude_at_1hz * std::pow(f_hz, -s.exponent);
  return density;
}

double CompositePsd::integrate(double f_lo_hz, double f_hi_hz) const {
  if (!(f_lo_hz > 0.0) || !(f_hi_hz > f_lo_hz))
    throw std::domain_error("CompositePsd::integrate: need 0 < f_lo < f_hi");
  double acc = 0.0;
  for (const auto& s : segments_)
    acc += s.amplitude_at_1hz * power_law_band_integral(s.exponent, f_lo_hz, f_hi_hz);
  return acc;
}

nlohmann::json CompositePsd::to_json() const {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : segments_)
    segs.push_back({{"amplitude_at_1hz", s.amplitude_at_1hz}, {"exponent", s.exponent}});
  return {{"unit_label", unit_label_},
          {"convention", "one-sided"},
          {"segments", segs}};
}

CompositePsd CompositePsd::from_json(const nlohmann::json& j) {
  if (j.contains("convention") && j.at("convention") != "one-sided")
    throw std::invalid_argument("CompositePsd: unsupported PSD convention");
  std::vector<PowerLawSegment> segs;
  for (const auto& s : j.at("segments")) {
    segs.push_back({s.at("amplitude_at_1hz").get<double>(),
                    s.at("exponent").get<double>()});
  }
  return CompositePsd(std::move(segs), j.at("unit_label").get<std::string>());
}

double crossover_frequency(const PowerLawSegment& a, const PowerLawSegment& b) {
  validate_segment(a);
  validate_segment(b);
  if (a.exponent == b.exponent)
    throw std::domain_error("crossover_frequency: equal exponents never cross");
  return std::pow(b.amplitude_at_1hz / a.amplitude_at_1hz,
                  1.0 / (b.exponent - a.exponent));
}

}  // namespace qdn
