#include "qdn/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace qdn::fft {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

std::vector<std::complex<double>> real_to_complex(std::span<const double> in) {
  const std::size_t n = in.size();
  if (n < 2) throw std::domain_error("fft: need at least 2 samples");
  std::vector<double> buf(in.begin(), in.end());
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), buf.data(),
                                reinterpret_cast<fftw_complex*>(out.data()),
                                FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("fft: r2c planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

std::vector<double> complex_to_real(std::vector<std::complex<double>> half_spectrum,
                                    std::size_t n) {
  if (n < 2) throw std::domain_error("fft: need at least 2 samples");
  if (half_spectrum.size() != n / 2 + 1)
    throw std::invalid_argument("fft: half spectrum size must be n/2+1");
  std::vector<double> out(n);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                reinterpret_cast<fftw_complex*>(half_spectrum.data()),
                                out.data(), FFTW_ESTIMATE);
  }
  if (!plan) throw std::runtime_error("fft: c2r planning failed");
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace qdn::fft
