#ifndef QDN_FITTING_HPP
#define QDN_FITTING_HPP

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdn/qubit_sim.hpp"

namespace qdn {

struct FitResult {
  std::map<std::string, double> parameters;
  std::map<std::string, double> standard_errors;
  double residual_rms = 0.0;  // unweighted rms of residuals
  bool converged = false;
  int n_iterations = 0;

  double at(const std::string& name) const { return parameters.at(name); }
  double error(const std::string& name) const { return standard_errors.at(name); }
  nlohmann::json to_json() const;
};

using ModelFn = std::function<double(double x, std::span<const double> params)>;

struct FitOptions {
  int max_iterations = 200;
  double ftol = 1e-12;   // relative objective decrease
  double xtol = 1e-12;   // scaled step size
  std::vector<double> lower;          // optional box bounds
  std::vector<double> upper;
  std::vector<double> typical_scale;  // per-parameter magnitude for steps
  std::vector<double>* objective_trace = nullptr;  // accepted chi2 values
};

/// Damped least squares (Levenberg-Marquardt): interpolates between
/// Gauss-Newton and gradient descent via an adaptive damping factor, with
/// forward-difference Jacobians on internally rescaled parameters. Standard
/// errors come from the residual-scaled inverse normal matrix. Weights are
/// inverse-variance up to a common factor; pass empty for uniform.
FitResult fit_curve(const ModelFn& model, std::span<const double> x,
                    std::span<const double> y, std::span<const double> weights,
                    std::span<const std::string> names,
                    std::span<const double> initial_guess,
                    const FitOptions& options = {});

/// Fits one fringe line P(x) = amplitude * fringe(x - delta_f) + offset.
/// A deterministic coarse scan over candidate detunings (amplitude/offset
/// solved linearly per candidate) seeds the refinement, so lines fit
/// independently of each other. Optional hint joins the candidate set.
/// Parameters: delta_f, amplitude, offset.
FitResult fit_fringe(std::span<const double> grid_hz, std::span<const double> p_up,
                     const PulseParams& params, double t_e_s, int shots,
                     std::optional<double> delta_f_hint = std::nullopt);

/// Gaussian free-induction decay with a residual oscillation:
/// P = amplitude * exp(-(t/t2_star)^2) cos(2 pi delta_f t) + offset.
FitResult fit_ramsey_decay(const DecayCurve& curve);

/// Saturating echo decay
/// P = amplitude * (1 - exp(-(t/t2_echo)^(alpha+1))) + offset, alpha in [0,3].
FitResult fit_echo_decay(const DecayCurve& curve);

/// Dephasing time under S(f) = S0/f^alpha noise integrated between 1/t_m and
/// 1/t_e:  T2* = (4 pi^2 S0 (t_m^(a-1) - t_e^(a-1)) / (a-1))^(-1/2), with the
/// logarithmic limit at alpha = 1.
double t2star_prediction(double s0_at_1hz, double alpha, double t_m_s, double t_e_s);

/// T2* versus total measurement time, from the bundling protocol.
struct T2StarSeries {
  std::vector<double> t_m_s;
  std::vector<double> t2star_s;        // mean over bundles
  std::vector<double> t2star_std_s;    // inter-bundle standard deviation
  std::vector<double> t2star_sem_s;    // standard error of the mean
  std::vector<int> n_bundles_averaged;

  void write_csv(const std::filesystem::path& path) const;
};

/// For each requested t_m, averages bundles of ceil(t_m/line_duration)
/// consecutive lines placed bundle_offset_lines apart, fits each averaged
/// curve, and averages the fitted T2*. t_m values without a complete bundle
/// are dropped with a warning on stderr.
T2StarSeries t2star_vs_tm(const std::vector<DecayCurve>& lines,
                          double line_duration_s, int bundle_offset_lines,
                          std::span<const double> t_m_list_s, int threads = 1);

struct PowerLawNoiseFit {
  double s0_at_1hz = 0.0;
  double alpha = 0.0;
  double s0_err = 0.0;
  double alpha_err = 0.0;
  double residual_rms = 0.0;  // rms of log-T2 residuals
};

/// Fits the T2*(t_m) law to a series, either globally or in two t_m regimes
/// split at split_t_m_s. Needs at least 4 points per regime.
std::vector<PowerLawNoiseFit> fit_t2star_tm(const T2StarSeries& series, double t_e_s,
                                            std::optional<double> split_t_m_s = std::nullopt);

}  // namespace qdn

#endif
