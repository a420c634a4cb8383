#ifndef QDN_CHARGE_CONVERSION_HPP
#define QDN_CHARGE_CONVERSION_HPP

#include <json.hpp>

#include "qdn/noise_synth.hpp"
#include "qdn/psd_model.hpp"

namespace qdn {

/// Sensor-current (or gate-referred energy) fluctuations map onto qubit
/// detuning through gate voltage, dot displacement, and the longitudinal
/// field gradient. Units ride in the field names; configs without them are
/// refused.
struct ConversionChain {
  double dv_di_mv_per_pa = 1.0 / 35.0;   // gate voltage per sensor current
  double dx_dv_nm_per_mv = 0.024;        // dot displacement per gate voltage
  double dbx_dx_mt_per_nm = 0.08;        // field gradient along the dot axis
  double g_factor = 2.0;
  double lever_arm_uev_per_mv = 9.94;    // gate-referred energy per voltage

  void validate() const;

  /// g * mu_B / h, field to ordinary frequency.
  double gyromagnetic_scale_hz_per_t() const;
  /// Detuning per gate millivolt.
  double detuning_hz_per_mv() const;
  /// Full chain constant K, detuning per sensor picoampere.
  double detuning_hz_per_pa() const;
  /// Energy route, detuning per micro-electronvolt.
  double detuning_hz_per_uev() const;

  nlohmann::json to_json() const;
  static ConversionChain from_json(const nlohmann::json& j);
};

/// Samplewise current-to-detuning conversion of a "current-pA" trace.
NoiseTrace detuning_from_current(const NoiseTrace& current_trace,
                                 const ConversionChain& chain);

/// PSD conversion into detuning units: amplitudes scale by the squared chain
/// constant of the input unit, exponents are untouched.
CompositePsd convert_psd(const CompositePsd& psd, const ConversionChain& chain);

}  // namespace qdn

#endif
