#include "qdn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "qdn/fft.hpp"
#include "qdn/parallel.hpp"

namespace qdn {

namespace {
constexpr double pi = std::numbers::pi;
}

std::string to_string(Window w) { return w == Window::hann ? "hann" : "rect"; }

Window window_from_string(const std::string& s) {
  if (s == "hann") return Window::hann;
  if (s == "rect") return Window::rect;
  throw std::invalid_argument("unknown window: " + s);
}

double PsdEstimate::integrate(double f_lo_hz, double f_hi_hz) const {
  if (!(f_lo_hz < f_hi_hz)) throw std::domain_error("PsdEstimate::integrate: bad bounds");
  double acc = 0.0;
  for (std::size_t i = 1; i < frequencies_hz.size(); ++i) {
    const double a = std::max(frequencies_hz[i - 1], f_lo_hz);
    const double b = std::min(frequencies_hz[i], f_hi_hz);
    if (b <= a) continue;
    // Linear interpolation of the density across the clipped bin.
    const double f0 = frequencies_hz[i - 1], f1 = frequencies_hz[i];
    const double d0 = densities[i - 1], d1 = densities[i];
    auto density_at = [&](double f) { return d0 + (d1 - d0) * (f - f0) / (f1 - f0); };
    acc += 0.5 * (density_at(a) + density_at(b)) * (b - a);
  }
  return acc;
}

void PsdEstimate::write_csv(const std::filesystem::path& path) const {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::fputs("frequency_hz,density,n_segments_averaged\r\n", f);
  for (std::size_t i = 0; i < frequencies_hz.size(); ++i)
    std::fprintf(f, "%.17g,%.17g,%d\r\n", frequencies_hz[i], densities[i],
                 n_segments_averaged);
  std::fclose(f);
}

nlohmann::json PsdEstimate::to_json() const {
  return {{"frequencies_hz", frequencies_hz},
          {"densities", densities},
          {"segment_length", segment_length},
          {"overlap_fraction", overlap_fraction},
          {"window", to_string(window)},
          {"n_segments_averaged", n_segments_averaged},
          {"convention", "one-sided"}};
}

namespace {

std::size_t default_segment_length(std::size_t n) {
  std::size_t target = std::max<std::size_t>(n / 8, 8);
  std::size_t p = 8;
  while (p * 2 <= target) p *= 2;
  return std::min(p, n);
}

std::vector<double> make_window(Window w, std::size_t len) {
  std::vector<double> win(len, 1.0);
  if (w == Window::hann) {
    // Periodic form, the spectral-estimation convention.
    for (std::size_t i = 0; i < len; ++i)
      win[i] = 0.5 * (1.0 - std::cos(2.0 * pi * static_cast<double>(i) /
                                     static_cast<double>(len)));
  }
  return win;
}

}  // namespace

PsdEstimate welch_psd(std::span<const double> samples, double sample_rate_hz,
                      const WelchSettings& settings) {
  const std::size_t n = samples.size();
  if (!(sample_rate_hz > 0.0)) throw std::domain_error("welch_psd: bad sample rate");
  if (n < 4) throw std::domain_error("welch_psd: series too short");
  const std::size_t seg_len =
      settings.segment_length == 0 ? default_segment_length(n) : settings.segment_length;
  if (seg_len < 4 || seg_len > n)
    throw std::domain_error("welch_psd: segment longer than the series");
  if (!(settings.overlap_fraction >= 0.0) || !(settings.overlap_fraction < 1.0))
    throw std::domain_error("welch_psd: overlap must lie in [0, 1)");

  const auto hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(
             static_cast<double>(seg_len) * (1.0 - settings.overlap_fraction))));
  const auto win = make_window(settings.window, seg_len);
  double window_power = 0.0;
  for (double w : win) window_power += w * w;

  const std::size_t n_bins = seg_len / 2;  // k = 1 .. seg_len/2
  std::vector<double> accum(n_bins + 1, 0.0);
  int n_segments = 0;
  std::vector<double> buf(seg_len);
  for (std::size_t start = 0; start + seg_len <= n; start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < seg_len; ++i) mean += samples[start + i];
    mean /= static_cast<double>(seg_len);
    for (std::size_t i = 0; i < seg_len; ++i)
      buf[i] = (samples[start + i] - mean) * win[i];
    const auto spec = fft::real_to_complex(buf);
    for (std::size_t k = 1; k <= n_bins; ++k) accum[k] += std::norm(spec[k]);
    ++n_segments;
  }

  PsdEstimate est;
  est.segment_length = seg_len;
  est.overlap_fraction = settings.overlap_fraction;
  est.window = settings.window;
  est.n_segments_averaged = n_segments;
  est.frequencies_hz.resize(n_bins);
  est.densities.resize(n_bins);
  const double scale = 1.0 / (sample_rate_hz * window_power * n_segments);
  for (std::size_t k = 1; k <= n_bins; ++k) {
    est.frequencies_hz[k - 1] =
        static_cast<double>(k) * sample_rate_hz / static_cast<double>(seg_len);
    const bool nyquist = (seg_len % 2 == 0) && (k == n_bins);
    est.densities[k - 1] = accum[k] * scale * (nyquist ? 1.0 : 2.0);
  }
  return est;
}

PsdEstimate welch_psd(const NoiseTrace& trace, const WelchSettings& settings) {
  return welch_psd(trace.samples, trace.sample_rate_hz, settings);
}

std::size_t DetuningSeries::n_valid() const {
  std::size_t count = 0;
  for (bool v : valid) count += v ? 1 : 0;
  return count;
}

std::vector<double> DetuningSeries::longest_valid_run() const {
  std::size_t best_start = 0, best_len = 0, start = 0, len = 0;
  for (std::size_t i = 0; i <= valid.size(); ++i) {
    if (i < valid.size() && valid[i]) {
      if (len == 0) start = i;
      ++len;
    } else {
      if (len > best_len) {
        best_len = len;
        best_start = start;
      }
      len = 0;
    }
  }
  return {delta_f_hz.begin() + static_cast<std::ptrdiff_t>(best_start),
          delta_f_hz.begin() + static_cast<std::ptrdiff_t>(best_start + best_len)};
}

void DetuningSeries::write_csv(const std::filesystem::path& path) const {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::fputs("time_s,delta_f_hz,sigma_hz\r\n", f);
  for (std::size_t i = 0; i < times_s.size(); ++i) {
    if (!valid[i]) continue;
    std::fprintf(f, "%.17g,%.17g,%.17g\r\n", times_s[i], delta_f_hz[i], sigma_hz[i]);
  }
  std::fclose(f);
}

DetuningSeries track_detuning(const FringeDataset& dataset, const PulseParams& params,
                              double t_e_s, int threads) {
  const std::size_t n_lines = dataset.timestamps_s.size();
  if (dataset.config.detuning_grid_hz.size() < 10)
    throw std::domain_error("track_detuning: need at least 10 grid points per line");

  DetuningSeries series;
  series.times_s = dataset.timestamps_s;
  series.delta_f_hz.assign(n_lines, std::numeric_limits<double>::quiet_NaN());
  series.sigma_hz.assign(n_lines, std::numeric_limits<double>::quiet_NaN());
  series.valid.assign(n_lines, false);

  parallel_for(n_lines, threads, [&](std::size_t l) {
    try {
      const FitResult fit =
          fit_fringe(dataset.config.detuning_grid_hz, dataset.line(l), params, t_e_s,
                     dataset.config.shots_per_point);
      if (fit.converged) {
        series.delta_f_hz[l] = fit.at("delta_f");
        series.sigma_hz[l] = fit.error("delta_f");
        series.valid[l] = true;
      }
    } catch (const std::exception&) {
      // left as a gap
    }
  });
  return series;
}

PowerLawFitResult fit_power_law(const PsdEstimate& estimate, double f_lo_hz,
                                double f_hi_hz) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < estimate.frequencies_hz.size(); ++i) {
    const double f = estimate.frequencies_hz[i];
    if (f < f_lo_hz || f > f_hi_hz) continue;
    if (!(estimate.densities[i] > 0.0)) continue;
    lx.push_back(std::log(f));
    ly.push_back(std::log(estimate.densities[i]));
  }
  const std::size_t n = lx.size();
  if (n < 8) throw std::domain_error("fit_power_law: fewer than 8 bins in band");

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double nd = static_cast<double>(n);
  const double det = nd * sxx - sx * sx;
  const double slope = (nd * sxy - sx * sy) / det;
  const double intercept = (sxx * sy - sx * sxy) / det;

  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - slope * lx[i] - intercept;
    ssr += r * r;
  }
  const double s2 = n > 2 ? ssr / (nd - 2.0) : 0.0;

  PowerLawFitResult out;
  out.exponent = -slope;
  out.amplitude_at_1hz = std::exp(intercept);
  out.exponent_err = std::sqrt(s2 * nd / det);
  out.amplitude_err = out.amplitude_at_1hz * std::sqrt(s2 * sxx / det);
  out.residual_rms = std::sqrt(ssr / nd);
  out.n_bins = n;
  return out;
}

namespace {

// Piecewise single-law fits on either side of a split; total log-space SSR.
double split_ssr(const PsdEstimate& est, double f_split, PowerLawFitResult& lo,
                 PowerLawFitResult& hi) {
  lo = fit_power_law(est, 0.0, f_split);
  hi = fit_power_law(est, f_split, std::numeric_limits<double>::infinity());
  const double n_lo = static_cast<double>(lo.n_bins);
  const double n_hi = static_cast<double>(hi.n_bins);
  return lo.residual_rms * lo.residual_rms * n_lo +
         hi.residual_rms * hi.residual_rms * n_hi;
}

}  // namespace

BrokenPowerLawFitResult fit_broken_power_law(const PsdEstimate& estimate,
                                             int n_segments,
                                             std::optional<double> f_split_hz) {
  if (n_segments != 1 && n_segments != 2)
    throw std::invalid_argument("fit_broken_power_law: n_segments must be 1 or 2");
  const auto& freq = estimate.frequencies_hz;
  if (freq.size() < 8) throw std::domain_error("fit_broken_power_law: too few bins");

  BrokenPowerLawFitResult out;
  if (n_segments == 1) {
    auto fit = fit_power_law(estimate, 0.0, std::numeric_limits<double>::infinity());
    out.residual_rms = fit.residual_rms;
    out.segments = {std::move(fit)};
    out.f_split_hz = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  PowerLawFitResult lo, hi;
  double best_split;
  if (f_split_hz) {
    best_split = *f_split_hz;
    split_ssr(estimate, best_split, lo, hi);
  } else {
    double best_ssr = std::numeric_limits<double>::infinity();
    best_split = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 8; i + 8 <= freq.size(); ++i) {
      const double candidate = std::sqrt(freq[i - 1] * freq[i]);
      PowerLawFitResult clo, chi;
      double ssr;
      try {
        ssr = split_ssr(estimate, candidate, clo, chi);
      } catch (const std::domain_error&) {
        continue;
      }
      if (ssr < best_ssr) {
        best_ssr = ssr;
        best_split = candidate;
        lo = clo;
        hi = chi;
      }
    }
    if (!std::isfinite(best_split))
      throw std::domain_error("fit_broken_power_law: no split leaves 8 bins per side");
  }

  // Joint refinement of the two-term sum in log space, seeded by the
  // piecewise result; stabilized by evaluating via the dominant term.
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < freq.size(); ++i) {
    if (!(estimate.densities[i] > 0.0)) continue;
    lx.push_back(std::log(freq[i]));
    ly.push_back(std::log(estimate.densities[i]));
  }
  const ModelFn model = [](double logf, std::span<const double> p) {
    const double a = p[0] - p[1] * logf;  // ln of first term
    const double b = p[2] - p[3] * logf;  // ln of second term
    const double m = std::max(a, b);
    return m + std::log1p(std::exp(std::min(a, b) - m));
  };
  const std::array<std::string, 4> names{"ln_s_low", "alpha_low", "ln_s_high",
                                         "alpha_high"};
  // "low" carries the low-frequency (steeper, below-split) term.
  const std::array<double, 4> guess{std::log(lo.amplitude_at_1hz), lo.exponent,
                                    std::log(hi.amplitude_at_1hz), hi.exponent};
  FitOptions opt;
  opt.typical_scale = {std::max(1.0, std::abs(guess[0])), 0.5,
                       std::max(1.0, std::abs(guess[2])), 0.5};
  opt.lower = {guess[0] - 30.0, 0.0, guess[2] - 30.0, 0.0};
  opt.upper = {guess[0] + 30.0, 3.0, guess[2] + 30.0, 3.0};
  const FitResult joint = fit_curve(model, lx, ly, {}, names, guess, opt);

  PowerLawFitResult seg_lo = lo, seg_hi = hi;
  if (joint.converged) {
    seg_lo.amplitude_at_1hz = std::exp(joint.at("ln_s_low"));
    seg_lo.exponent = joint.at("alpha_low");
    seg_lo.amplitude_err = seg_lo.amplitude_at_1hz * joint.error("ln_s_low");
    seg_lo.exponent_err = joint.error("alpha_low");
    seg_lo.residual_rms = joint.residual_rms;
    seg_hi.amplitude_at_1hz = std::exp(joint.at("ln_s_high"));
    seg_hi.exponent = joint.at("alpha_high");
    seg_hi.amplitude_err = seg_hi.amplitude_at_1hz * joint.error("ln_s_high");
    seg_hi.exponent_err = joint.error("alpha_high");
    seg_hi.residual_rms = joint.residual_rms;
    out.residual_rms = joint.residual_rms;
    try {
      out.f_split_hz = crossover_frequency(
          {seg_lo.amplitude_at_1hz, seg_lo.exponent},
          {seg_hi.amplitude_at_1hz, seg_hi.exponent});
    } catch (const std::exception&) {
      out.f_split_hz = best_split;
    }
  } else {
    out.residual_rms = std::sqrt((lo.residual_rms * lo.residual_rms * lo.n_bins +
                                  hi.residual_rms * hi.residual_rms * hi.n_bins) /
                                 static_cast<double>(lo.n_bins + hi.n_bins));
    out.f_split_hz = best_split;
  }
  // Keep the steeper-at-low-frequency term first.
  if (seg_lo.exponent < seg_hi.exponent) std::swap(seg_lo, seg_hi);
  out.segments = {seg_lo, seg_hi};
  return out;
}

}  // namespace qdn
