#include "qdn/charge_conversion.hpp"

#include <cmath>
#include <stdexcept>

#include "qdn/constants.hpp"

namespace qdn {

void ConversionChain::validate() const {
  const double factors[] = {dv_di_mv_per_pa, dx_dv_nm_per_mv, dbx_dx_mt_per_nm,
                            g_factor, lever_arm_uev_per_mv};
  for (double f : factors) {
    if (!(f > 0.0) || !std::isfinite(f))
      throw std::invalid_argument("ConversionChain: factors must be positive and finite");
  }
}

double ConversionChain::gyromagnetic_scale_hz_per_t() const {
  return g_factor * constants::bohr_magneton_hz_per_tesla;
}

double ConversionChain::detuning_hz_per_mv() const {
  // mV -> nm -> mT -> T -> Hz
  return dx_dv_nm_per_mv * dbx_dx_mt_per_nm * 1e-3 * gyromagnetic_scale_hz_per_t();
}

double ConversionChain::detuning_hz_per_pa() const {
  return dv_di_mv_per_pa * detuning_hz_per_mv();
}

double ConversionChain::detuning_hz_per_uev() const {
  return detuning_hz_per_mv() / lever_arm_uev_per_mv;
}

nlohmann::json ConversionChain::to_json() const {
  return {{"dv_di_mv_per_pa", dv_di_mv_per_pa},
          {"dx_dv_nm_per_mv", dx_dv_nm_per_mv},
          {"dbx_dx_mt_per_nm", dbx_dx_mt_per_nm},
          {"g_factor", g_factor},
          {"lever_arm_uev_per_mv", lever_arm_uev_per_mv}};
}

ConversionChain ConversionChain::from_json(const nlohmann::json& j) {
  // Unit-suffixed keys are required; a bare "dv_di" is an error.
  ConversionChain c;
  c.dv_di_mv_per_pa = j.at("dv_di_mv_per_pa").get<double>();
  c.dx_dv_nm_per_mv = j.at("dx_dv_nm_per_mv").get<double>();
  c.dbx_dx_mt_per_nm = j.at("dbx_dx_mt_per_nm").get<double>();
  c.g_factor = j.at("g_factor").get<double>();
  c.lever_arm_uev_per_mv = j.at("lever_arm_uev_per_mv").get<double>();
  c.validate();
  return c;
}

namespace {
bool is_current_unit(const std::string& label) { return label == "current-pA"; }
bool is_energy_unit(const std::string& label) {
  return label == "energy-ueV" || label == "energy-µeV";
}
}  // namespace

NoiseTrace detuning_from_current(const NoiseTrace& current_trace,
                                 const ConversionChain& chain) {
  chain.validate();
  if (!is_current_unit(current_trace.unit_label))
    throw std::invalid_argument("detuning_from_current: trace unit is '" +
                                current_trace.unit_label + "', expected current-pA");
  const double k = chain.detuning_hz_per_pa();
  NoiseTrace out;
  out.sample_rate_hz = current_trace.sample_rate_hz;
  out.seed = current_trace.seed;
  out.unit_label = "detuning-Hz";
  out.samples.resize(current_trace.samples.size());
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = k * current_trace.samples[i];
  if (current_trace.psd_provenance)
    out.psd_provenance = convert_psd(*current_trace.psd_provenance, chain);
  return out;
}

CompositePsd convert_psd(const CompositePsd& psd, const ConversionChain& chain) {
  chain.validate();
  double k;
  if (is_current_unit(psd.unit_label())) {
    k = chain.detuning_hz_per_pa();
  } else if (is_energy_unit(psd.unit_label())) {
    k = chain.detuning_hz_per_uev();
  } else {
    throw std::invalid_argument("convert_psd: cannot convert unit '" +
                                psd.unit_label() + "'");
  }
  std::vector<PowerLawSegment> segments = psd.segments();
  for (auto& s : segments) s.amplitude_at_1hz *= k * k;
  return CompositePsd(std::move(segments), "detuning-Hz");
}

}  // namespace qdn
