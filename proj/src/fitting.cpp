#include "qdn/fitting.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qdn/parallel.hpp"

namespace qdn {

namespace {

constexpr double pi = std::numbers::pi;

double clamp_to(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

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

/// Least-squares (a, b) for y ~ a*m + b under weights; returns weighted SSR.
double solve_scale_offset(std::span<const double> m, std::span<const double> y,
                          std::span<const double> w, double& a, double& b) {
  double sw = 0, swm = 0, swy = 0, swmm = 0, swmy = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    swm += wi * m[i];
    swy += wi * y[i];
    swmm += wi * m[i] * m[i];
    swmy += wi * m[i] * y[i];
  }
  const double det = sw * swmm - swm * swm;
  if (std::abs(det) < 1e-300) {
    a = 0.0;
    b = sw > 0 ? swy / sw : 0.0;
  } else {
    a = (sw * swmy - swm * swy) / det;
    b = (swmm * swy - swm * swmy) / det;
  }
  double ssr = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    const double r = y[i] - a * m[i] - b;
    ssr += wi * r * r;
  }
  return ssr;
}

std::vector<double> binomial_weights(std::span<const double> p_up, int shots) {
  std::vector<double> w(p_up.size(), 1.0);
  if (shots > 0) {
    for (std::size_t i = 0; i < p_up.size(); ++i)
      w[i] = shots / (p_up[i] * (1.0 - p_up[i]) + 1e-3);
  }
  return w;
}

}  // namespace

nlohmann::json FitResult::to_json() const {
  return {{"parameters", parameters},
          {"standard_errors", standard_errors},
          {"residual_rms", residual_rms},
          {"converged", converged},
          {"n_iterations", n_iterations}};
}

FitResult fit_curve(const ModelFn& model, std::span<const double> x,
                    std::span<const double> y, std::span<const double> weights,
                    std::span<const std::string> names,
                    std::span<const double> initial_guess, const FitOptions& options) {
  const std::size_t n = x.size();
  const std::size_t np = initial_guess.size();
  if (n != y.size()) throw std::invalid_argument("fit_curve: x/y size mismatch");
  if (!weights.empty() && weights.size() != n)
    throw std::invalid_argument("fit_curve: weight size mismatch");
  if (np == 0 || names.size() != np)
    throw std::invalid_argument("fit_curve: names/guess size mismatch");
  if (n < np) throw std::invalid_argument("fit_curve: fewer points than parameters");

  std::vector<double> lower(np, -std::numeric_limits<double>::infinity());
  std::vector<double> upper(np, std::numeric_limits<double>::infinity());
  if (!options.lower.empty()) lower = options.lower;
  if (!options.upper.empty()) upper = options.upper;
  std::vector<double> scale(np);
  for (std::size_t j = 0; j < np; ++j) {
    scale[j] = options.typical_scale.size() == np && options.typical_scale[j] > 0
                   ? options.typical_scale[j]
                   : std::max(std::abs(initial_guess[j]), 1.0);
  }

  // Work in scaled parameters q = p / scale.
  Eigen::VectorXd q(np);
  for (std::size_t j = 0; j < np; ++j) {
    const double p0 = clamp_to(initial_guess[j], lower[j], upper[j]);
    if (!std::isfinite(p0)) throw std::invalid_argument("fit_curve: non-finite guess");
    q[j] = p0 / scale[j];
  }

  std::vector<double> p(np);
  auto unscale = [&](const Eigen::VectorXd& qv) {
    for (std::size_t j = 0; j < np; ++j)
      p[j] = clamp_to(qv[j] * scale[j], lower[j], upper[j]);
  };
  auto chi2_of = [&](const Eigen::VectorXd& qv, Eigen::VectorXd& r) {
    unscale(qv);
    double chi2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = weights.empty() ? 1.0 : weights[i];
      r[i] = y[i] - model(x[i], p);
      chi2 += wi * r[i] * r[i];
    }
    return chi2;
  };

  Eigen::VectorXd r(n), r_try(n);
  double chi2 = chi2_of(q, r);
  if (options.objective_trace) options.objective_trace->push_back(chi2);

  double lambda = 1e-3;
  bool converged = chi2 < 1e-300;
  int iter = 0;
  Eigen::MatrixXd jac(n, np);

  while (!converged && iter < options.max_iterations) {
    ++iter;
    // Forward-difference Jacobian in scaled coordinates.
    unscale(q);
    const std::vector<double> p_base = p;
    std::vector<double> f_base(n);
    for (std::size_t i = 0; i < n; ++i) f_base[i] = model(x[i], p_base);
    for (std::size_t j = 0; j < np; ++j) {
      Eigen::VectorXd q_step = q;
      const double h = 1.49e-8 * std::max(std::abs(q[j]), 1.0);
      q_step[j] += h;
      unscale(q_step);
      const double dh = (p[j] - p_base[j]);
      if (dh == 0.0) {
        jac.col(j).setZero();
        continue;
      }
      for (std::size_t i = 0; i < n; ++i)
        jac(i, j) = (model(x[i], p) - f_base[i]) / (h);
    }

    Eigen::MatrixXd a(np, np);
    Eigen::VectorXd g(np);
    a.setZero();
    g.setZero();
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = weights.empty() ? 1.0 : weights[i];
      const auto ji = jac.row(i);
      a.noalias() += wi * ji.transpose() * ji;
      g.noalias() += wi * r[i] * ji.transpose();
    }

    bool stepped = false;
    // Degenerate columns (zero sensitivity at a symmetric point) get their
    // damping floored by the dominant curvature so steps stay bounded.
    const double diag_floor =
        std::max(1e-3 * a.diagonal().maxCoeff(), 1e-300);
    while (lambda <= 1e14) {
      Eigen::MatrixXd damped = a;
      for (std::size_t j = 0; j < np; ++j)
        damped(j, j) += lambda * std::max(a(j, j), diag_floor);
      Eigen::VectorXd delta = damped.ldlt().solve(g);
      if (!delta.allFinite()) {
        lambda *= 10.0;
        continue;
      }
      Eigen::VectorXd q_try = q + delta;
      for (std::size_t j = 0; j < np; ++j)
        q_try[j] = clamp_to(q_try[j], lower[j] / scale[j], upper[j] / scale[j]);
      const double chi2_try = chi2_of(q_try, r_try);
      if (std::isfinite(chi2_try) && chi2_try <= chi2) {
        const double drop = chi2 - chi2_try;
        q = q_try;
        r = r_try;
        const double old = chi2;
        chi2 = chi2_try;
        if (options.objective_trace) options.objective_trace->push_back(chi2);
        lambda = std::max(lambda / 3.0, 1e-12);
        stepped = true;
        if (chi2 < 1e-300 || drop <= options.ftol * std::max(old, 1e-300) ||
            delta.cwiseAbs().maxCoeff() < options.xtol)
          converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!stepped) {
      // Damping exhausted. If the undamped Newton step was already below
      // resolution we are simply sitting at the optimum.
      const double newton_step =
          (g.cwiseAbs().array() / a.diagonal().array().max(1e-300)).maxCoeff();
      if (newton_step < 1e-8) converged = true;
      break;
    }
  }

  FitResult result;
  result.converged = converged;
  result.n_iterations = iter;
  unscale(q);
  for (std::size_t j = 0; j < np; ++j) result.parameters[names[j]] = p[j];

  double ssr_unweighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) ssr_unweighted += r[i] * r[i];
  result.residual_rms = std::sqrt(ssr_unweighted / n);

  // Residual-scaled covariance from the final Jacobian.
  {
    unscale(q);
    const std::vector<double> p_base = p;
    std::vector<double> f_base(n);
    for (std::size_t i = 0; i < n; ++i) f_base[i] = model(x[i], p_base);
    for (std::size_t j = 0; j < np; ++j) {
      Eigen::VectorXd q_step = q;
      const double h = 1.49e-8 * std::max(std::abs(q[j]), 1.0);
      q_step[j] += h;
      unscale(q_step);
      for (std::size_t i = 0; i < n; ++i)
        jac(i, j) = (model(x[i], p) - f_base[i]) / h;
    }
    Eigen::MatrixXd a(np, np);
    a.setZero();
    double chi2_w = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = weights.empty() ? 1.0 : weights[i];
      const auto ji = jac.row(i);
      a.noalias() += wi * ji.transpose() * ji;
      chi2_w += wi * r[i] * r[i];
    }
    const double dof_scale = n > np ? chi2_w / static_cast<double>(n - np) : 0.0;
    Eigen::MatrixXd cov =
        a.completeOrthogonalDecomposition().pseudoInverse() * dof_scale;
    // Scaled coordinates: p = q * s, so sigma_p = sigma_q * s.
    for (std::size_t j = 0; j < np; ++j) {
      const double var = cov(j, j);
      result.standard_errors[names[j]] = var > 0 ? std::sqrt(var) * scale[j] : 0.0;
    }
  }
  return result;
}

FitResult fit_fringe(std::span<const double> grid_hz, std::span<const double> p_up,
                     const PulseParams& params, double t_e_s, int shots,
                     std::optional<double> delta_f_hint) {
  params.validate();
  if (grid_hz.size() != p_up.size())
    throw std::invalid_argument("fit_fringe: grid/probability size mismatch");
  if (grid_hz.size() < 10)
    throw std::domain_error("fit_fringe: need at least 10 points");
  const double span_hz = grid_hz.back() - grid_hz.front();
  if (!(t_e_s > 0.0) || span_hz * t_e_s < 1.0)
    throw std::domain_error("fit_fringe: grid must span at least one fringe period");

  const auto w = binomial_weights(p_up, shots);

  // Coarse scan: candidate centers at 1/6 fringe-period spacing, the
  // amplitude and offset solved linearly for each.
  const double step = 1.0 / (6.0 * t_e_s);
  const double lo = grid_hz.front() - 0.15 * span_hz;
  const double hi = grid_hz.back() + 0.15 * span_hz;
  std::vector<double> candidates;
  for (double c = lo; c <= hi; c += step) candidates.push_back(c);
  if (delta_f_hint && std::isfinite(*delta_f_hint)) candidates.push_back(*delta_f_hint);

  // The chirped pattern has shifted near-aliases whose misfit is comparable
  // to the shot-noise floor, so an unconstrained search is ambiguous at the
  // percent level. With a hint (tracking: the previous line) the fit stays
  // in the hint's basin; without one, the best separated basins compete on
  // the refined misfit.
  struct Candidate {
    double delta, a, b, ssr;
  };
  std::vector<Candidate> ranked;
  std::vector<double> m(grid_hz.size());
  auto scan_at = [&](double c) {
    for (std::size_t i = 0; i < grid_hz.size(); ++i)
      m[i] = fringe_probability(params, t_e_s, grid_hz[i] - c);
    double a, b;
    const double ssr = solve_scale_offset(m, p_up, w, a, b);
    return Candidate{c, a, b, ssr};
  };

  const double basin_radius = 0.5 / t_e_s;
  std::vector<Candidate> starts;
  if (delta_f_hint && std::isfinite(*delta_f_hint)) {
    for (double c : candidates) {
      if (std::abs(c - *delta_f_hint) > basin_radius) continue;
      starts.push_back(scan_at(c));
    }
    starts.push_back(scan_at(*delta_f_hint));
    std::sort(starts.begin(), starts.end(),
              [](const Candidate& a, const Candidate& b) { return a.ssr < b.ssr; });
    if (starts.size() > 3) starts.resize(3);
  } else {
    for (double c : candidates) ranked.push_back(scan_at(c));
    std::sort(ranked.begin(), ranked.end(),
              [](const Candidate& a, const Candidate& b) { return a.ssr < b.ssr; });
    const double separation = 1.0 / (3.0 * t_e_s);
    for (const auto& c : ranked) {
      bool distinct = true;
      for (const auto& s : starts)
        distinct = distinct && std::abs(c.delta - s.delta) > separation;
      if (distinct) starts.push_back(c);
      if (starts.size() == 4) break;
    }
  }

  const ModelFn model = [&params, t_e_s](double x, std::span<const double> p) {
    return p[1] * fringe_probability(params, t_e_s, x - p[0]) + p[2];
  };
  const std::array<std::string, 3> names{"delta_f", "amplitude", "offset"};
  FitOptions opt;
  opt.typical_scale = {std::max(step, 1.0), 1.0, 1.0};
  opt.lower = {grid_hz.front() - span_hz, -3.0, -2.0};
  opt.upper = {grid_hz.back() + span_hz, 3.0, 2.0};
  if (delta_f_hint && std::isfinite(*delta_f_hint)) {
    opt.lower[0] = *delta_f_hint - basin_radius;
    opt.upper[0] = *delta_f_hint + basin_radius;
  }

  FitResult best;
  double best_chi2 = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    const std::array<double, 3> guess{s.delta, s.a, s.b};
    FitResult fit = fit_curve(model, grid_hz, p_up, w, names, guess, opt);
    double chi2 = 0.0;
    const std::array<double, 3> p{fit.at("delta_f"), fit.at("amplitude"),
                                  fit.at("offset")};
    for (std::size_t i = 0; i < grid_hz.size(); ++i) {
      const double r = p_up[i] - model(grid_hz[i], p);
      chi2 += w[i] * r * r;
    }
    if (fit.converged && chi2 < best_chi2) {
      best_chi2 = chi2;
      best = std::move(fit);
    }
  }
  if (!std::isfinite(best_chi2)) {
    const std::array<double, 3> guess{starts.front().delta, starts.front().a,
                                      starts.front().b};
    return fit_curve(model, grid_hz, p_up, w, names, guess, opt);
  }
  return best;
}

FitResult fit_ramsey_decay(const DecayCurve& curve) {
  if (curve.kind != SequenceKind::ramsey)
    throw std::invalid_argument("fit_ramsey_decay: not a ramsey curve");
  const std::size_t n = curve.t_e_s.size();
  if (n < 6) throw std::domain_error("fit_ramsey_decay: too few points");
  const auto w = binomial_weights(curve.p_up, curve.shots_per_point);
  const double t_max = curve.t_e_s.back();
  const double t_min_pos = std::max(curve.t_e_s.front(), t_max / 1e3);

  double min_dt = t_max;
  for (std::size_t i = 1; i < n; ++i)
    min_dt = std::min(min_dt, curve.t_e_s[i] - curve.t_e_s[i - 1]);

  // 2-D coarse seed over (T2, detuning) with a linear amplitude/offset solve.
  const auto t2_candidates = logspace(std::max(t_min_pos, t_max / 50.0), 3.0 * t_max, 12);
  const auto df_candidates = linspace(-0.4 / min_dt, 0.4 / min_dt, 41);
  std::vector<double> m(n);
  double best_ssr = std::numeric_limits<double>::infinity();
  double best_t2 = t_max / 3.0, best_df = 0.0, best_a = 0.0, best_b = 0.0;
  for (double t2 : t2_candidates) {
    for (double df : df_candidates) {
      for (std::size_t i = 0; i < n; ++i) {
        const double t = curve.t_e_s[i];
        m[i] = std::exp(-(t / t2) * (t / t2)) * std::cos(2.0 * pi * df * t);
      }
      double a, b;
      const double ssr = solve_scale_offset(m, curve.p_up, w, a, b);
      if (ssr < best_ssr) {
        best_ssr = ssr;
        best_t2 = t2;
        best_df = df;
        best_a = a;
        best_b = b;
      }
    }
  }

  const ModelFn model = [](double t, std::span<const double> p) {
    const double u = t / p[0];
    return p[2] * std::exp(-u * u) * std::cos(2.0 * pi * p[1] * t) + p[3];
  };
  const std::array<std::string, 4> names{"t2_star", "delta_f", "amplitude", "offset"};
  const std::array<double, 4> guess{best_t2, best_df, best_a, best_b};
  FitOptions opt;
  opt.typical_scale = {t_max, 0.25 / min_dt, 1.0, 1.0};
  opt.lower = {t_min_pos / 100.0, -0.5 / min_dt, -3.0, -2.0};
  opt.upper = {100.0 * t_max, 0.5 / min_dt, 3.0, 2.0};
  return fit_curve(model, curve.t_e_s, curve.p_up, w, names, guess, opt);
}

FitResult fit_echo_decay(const DecayCurve& curve) {
  if (curve.kind != SequenceKind::echo)
    throw std::invalid_argument("fit_echo_decay: not an echo curve");
  const std::size_t n = curve.t_e_s.size();
  if (n < 6) throw std::domain_error("fit_echo_decay: too few points");
  const auto w = binomial_weights(curve.p_up, curve.shots_per_point);
  const double t_max = curve.t_e_s.back();

  const auto t2_candidates = logspace(t_max / 100.0, 10.0 * t_max, 24);
  std::vector<double> m(n);
  double best_ssr = std::numeric_limits<double>::infinity();
  double best_t2 = t_max, best_a = 0.0, best_b = 0.0;
  for (double t2 : t2_candidates) {
    for (std::size_t i = 0; i < n; ++i) {
      const double u = curve.t_e_s[i] / t2;
      m[i] = 1.0 - std::exp(-u * u);
    }
    double a, b;
    const double ssr = solve_scale_offset(m, curve.p_up, w, a, b);
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best_t2 = t2;
      best_a = a;
      best_b = b;
    }
  }

  const ModelFn model = [](double t, std::span<const double> p) {
    const double u = t / p[0];
    return p[2] * (1.0 - std::exp(-std::pow(u, p[1] + 1.0))) + p[3];
  };
  const std::array<std::string, 4> names{"t2_echo", "alpha", "amplitude", "offset"};
  const std::array<double, 4> guess{best_t2, 1.0, best_a, best_b};
  FitOptions opt;
  opt.typical_scale = {t_max, 1.0, 1.0, 1.0};
  opt.lower = {t_max / 1e3, 0.0, -3.0, -2.0};
  opt.upper = {1e3 * t_max, 3.0, 3.0, 2.0};
  return fit_curve(model, curve.t_e_s, curve.p_up, w, names, guess, opt);
}

double t2star_prediction(double s0_at_1hz, double alpha, double t_m_s, double t_e_s) {
  if (!(s0_at_1hz > 0.0)) throw std::domain_error("t2star_prediction: S0 must be positive");
  if (!(t_e_s > 0.0) || !(t_m_s > t_e_s))
    throw std::domain_error("t2star_prediction: need t_m > t_e > 0");
  if (alpha < 1.0 - 1e-12)
    throw std::domain_error("t2star_prediction: exponent below 1 not covered");
  const double eps = alpha - 1.0;
  const double lm = std::log(t_m_s);
  const double le = std::log(t_e_s);
  // (t_m^eps - t_e^eps)/eps, log limit at eps = 0, via expm1 for small eps.
  const double band = std::abs(eps) < 1e-12
                          ? lm - le
                          : (std::expm1(eps * lm) - std::expm1(eps * le)) / eps;
  return 1.0 / std::sqrt(4.0 * pi * pi * s0_at_1hz * band);
}

void T2StarSeries::write_csv(const std::filesystem::path& path) const {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::fputs("t_m_s,t2star_s,n_bundles,t2star_std_s,t2star_sem_s\r\n", f);
  for (std::size_t i = 0; i < t_m_s.size(); ++i) {
    std::fprintf(f, "%.17g,%.17g,%d,%.17g,%.17g\r\n", t_m_s[i], t2star_s[i],
                 n_bundles_averaged[i], t2star_std_s[i], t2star_sem_s[i]);
  }
  std::fclose(f);
}

T2StarSeries t2star_vs_tm(const std::vector<DecayCurve>& lines,
                          double line_duration_s, int bundle_offset_lines,
                          std::span<const double> t_m_list_s, int threads) {
  if (lines.empty()) throw std::domain_error("t2star_vs_tm: no lines");
  if (bundle_offset_lines < 1)
    throw std::invalid_argument("t2star_vs_tm: bundle offset must be >= 1");
  const std::size_t n_lines = lines.size();
  const std::size_t n_points = lines.front().t_e_s.size();
  for (const auto& l : lines) {
    if (l.t_e_s.size() != n_points || l.t_e_s != lines.front().t_e_s)
      throw std::invalid_argument("t2star_vs_tm: lines must share the evolution grid");
  }

  T2StarSeries series;
  for (double t_m : t_m_list_s) {
    const auto bundle_len = static_cast<std::size_t>(
        std::max<long>(1, std::lround(std::ceil(t_m / line_duration_s - 1e-9))));
    if (bundle_len > n_lines) {
      std::cerr << "t2star_vs_tm: skipping t_m = " << t_m
                << " s (needs " << bundle_len << " lines, have " << n_lines << ")\n";
      continue;
    }
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + bundle_len <= n_lines;
         s += static_cast<std::size_t>(bundle_offset_lines))
      starts.push_back(s);

    std::vector<double> t2(starts.size(),
                           std::numeric_limits<double>::quiet_NaN());
    parallel_for(starts.size(), threads, [&](std::size_t b) {
      DecayCurve avg;
      avg.t_e_s = lines.front().t_e_s;
      avg.p_up.assign(n_points, 0.0);
      avg.kind = SequenceKind::ramsey;
      avg.shots_per_point =
          lines.front().shots_per_point * static_cast<int>(bundle_len);
      for (std::size_t l = starts[b]; l < starts[b] + bundle_len; ++l)
        for (std::size_t j = 0; j < n_points; ++j) avg.p_up[j] += lines[l].p_up[j];
      for (auto& v : avg.p_up) v /= static_cast<double>(bundle_len);
      const FitResult fit = fit_ramsey_decay(avg);
      const double value = fit.at("t2_star");
      if (fit.converged && value > 0.0 &&
          value < 100.0 * lines.front().t_e_s.back())
        t2[b] = value;
    });

    double sum = 0.0, sum2 = 0.0;
    int count = 0;
    for (double v : t2) {
      if (std::isnan(v)) continue;
      sum += v;
      sum2 += v * v;
      ++count;
    }
    if (count == 0) {
      std::cerr << "t2star_vs_tm: no converged bundle at t_m = " << t_m << " s\n";
      continue;
    }
    const double mean = sum / count;
    const double var = count > 1 ? std::max(0.0, (sum2 - count * mean * mean) / (count - 1)) : 0.0;
    series.t_m_s.push_back(t_m);
    series.t2star_s.push_back(mean);
    series.t2star_std_s.push_back(std::sqrt(var));
    series.t2star_sem_s.push_back(std::sqrt(var / count));
    series.n_bundles_averaged.push_back(count);
  }
  return series;
}

namespace {

PowerLawNoiseFit fit_t2star_tm_range(std::span<const double> t_m,
                                     std::span<const double> t2, double t_e_s) {
  // log-T2 residuals keep the fit scale free; log S0 is then linear for a
  // fixed exponent, which seeds the refinement closed-form.
  std::vector<double> y(t2.size());
  for (std::size_t i = 0; i < t2.size(); ++i) y[i] = std::log(t2[i]);

  double best_ssr = std::numeric_limits<double>::infinity();
  double best_alpha = 1.4, best_ln_s0 = 0.0;
  for (double alpha = 1.0; alpha <= 2.5; alpha += 0.02) {
    // log T2(S0) = log T2(1) - ln(S0)/2, so ln S0 is closed-form per alpha.
    double acc = 0.0;
    for (std::size_t i = 0; i < t_m.size(); ++i)
      acc += y[i] - std::log(t2star_prediction(1.0, alpha, t_m[i], t_e_s));
    const double s0 = std::exp(-2.0 * acc / static_cast<double>(t_m.size()));
    double ssr = 0.0;
    for (std::size_t i = 0; i < t_m.size(); ++i) {
      const double r = y[i] - std::log(t2star_prediction(s0, alpha, t_m[i], t_e_s));
      ssr += r * r;
    }
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best_alpha = alpha;
      best_ln_s0 = std::log(s0);
    }
  }

  const ModelFn model = [t_e_s](double tm, std::span<const double> p) {
    return std::log(t2star_prediction(std::exp(p[0]), p[1], tm, t_e_s));
  };
  const std::array<std::string, 2> names{"ln_s0", "alpha"};
  const std::array<double, 2> guess{best_ln_s0, best_alpha};
  FitOptions opt;
  opt.typical_scale = {std::max(std::abs(best_ln_s0), 1.0), 0.3};
  opt.lower = {best_ln_s0 - 20.0, 1.0};
  opt.upper = {best_ln_s0 + 20.0, 3.0};
  const FitResult fit = fit_curve(model, t_m, y, {}, names, guess, opt);

  PowerLawNoiseFit out;
  out.s0_at_1hz = std::exp(fit.at("ln_s0"));
  out.alpha = fit.at("alpha");
  out.s0_err = out.s0_at_1hz * fit.error("ln_s0");
  out.alpha_err = fit.error("alpha");
  out.residual_rms = fit.residual_rms;
  return out;
}

}  // namespace

std::vector<PowerLawNoiseFit> fit_t2star_tm(const T2StarSeries& series, double t_e_s,
                                            std::optional<double> split_t_m_s) {
  const std::size_t n = series.t_m_s.size();
  if (!split_t_m_s) {
    if (n < 4) throw std::domain_error("fit_t2star_tm: need at least 4 points");
    return {fit_t2star_tm_range(series.t_m_s, series.t2star_s, t_e_s)};
  }
  std::vector<double> tm_lo, t2_lo, tm_hi, t2_hi;
  for (std::size_t i = 0; i < n; ++i) {
    if (series.t_m_s[i] < *split_t_m_s) {
      tm_lo.push_back(series.t_m_s[i]);
      t2_lo.push_back(series.t2star_s[i]);
    } else {
      tm_hi.push_back(series.t_m_s[i]);
      t2_hi.push_back(series.t2star_s[i]);
    }
  }
  if (tm_lo.size() < 4 || tm_hi.size() < 4)
    throw std::domain_error("fit_t2star_tm: need at least 4 points per regime");
  return {fit_t2star_tm_range(tm_lo, t2_lo, t_e_s),
          fit_t2star_tm_range(tm_hi, t2_hi, t_e_s)};
}

}  // namespace qdn
