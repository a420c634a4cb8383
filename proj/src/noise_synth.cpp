#include "qdn/noise_synth.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "qdn/fft.hpp"

namespace qdn {

double NoiseTrace::mean() const {
  double acc = 0.0;
  for (double v : samples) acc += v;
  return samples.empty() ? 0.0 : acc / static_cast<double>(samples.size());
}

double NoiseTrace::variance() const {
  if (samples.size() < 2) return 0.0;
  const double m = mean();
  double acc = 0.0;
  for (double v : samples) acc += (v - m) * (v - m);
  return acc / static_cast<double>(samples.size());
}

NoiseTrace synthesize(const CompositePsd& psd, std::size_t n_samples,
                      double sample_rate_hz, std::uint64_t seed) {
  if (n_samples < 2)
    throw std::domain_error("synthesize: need at least 2 samples");
  if (!(sample_rate_hz > 0.0))
    throw std::domain_error("synthesize: sample rate must be positive");

  const std::size_t n = n_samples;
  const double df = sample_rate_hz / static_cast<double>(n);
  std::vector<std::complex<double>> spectrum(n / 2 + 1, {0.0, 0.0});
  Rng rng = Rng::stream(seed, 0);

  // FFTW's c2r has no 1/n factor, so with per-component deviation
  // sqrt(S df)/2 each Hermitian pair contributes S(f_k) df to the variance.
  const std::size_t last_interior = (n - 1) / 2;
  for (std::size_t k = 1; k <= last_interior; ++k) {
    const double amp = 0.5 * std::sqrt(psd.eval(static_cast<double>(k) * df) * df);
    spectrum[k] = {amp * rng.normal(), amp * rng.normal()};
  }
  if (n % 2 == 0) {
    const std::size_t k = n / 2;
    const double amp = std::sqrt(psd.eval(static_cast<double>(k) * df) * df);
    spectrum[k] = {amp * rng.normal(), 0.0};
  }

  NoiseTrace trace;
  trace.sample_rate_hz = sample_rate_hz;
  trace.samples = fft::complex_to_real(std::move(spectrum), n);
  trace.seed = seed;
  trace.unit_label = psd.unit_label();
  trace.psd_provenance = psd;
  return trace;
}

double quasi_static_sigma(const CompositePsd& psd, double f_lo_hz, double f_hi_hz,
                          double convention_factor) {
  if (!(convention_factor > 0.0))
    throw std::domain_error("quasi_static_sigma: convention factor must be positive");
  return std::sqrt(convention_factor * psd.integrate(f_lo_hz, f_hi_hz));
}

double draw_quasi_static(const CompositePsd& psd, double f_lo_hz, double f_hi_hz,
                         double convention_factor, Rng& rng) {
  return quasi_static_sigma(psd, f_lo_hz, f_hi_hz, convention_factor) * rng.normal();
}

namespace {
constexpr char kMagic[4] = {'Q', 'D', 'N', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& os, const T& value) {
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}
}  // namespace

void save_trace(const NoiseTrace& trace, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("save_trace: cannot open " + path.string());
  os.write(kMagic, 4);
  write_pod(os, kVersion);
  write_pod(os, trace.sample_rate_hz);
  write_pod(os, static_cast<std::uint64_t>(trace.samples.size()));
  write_pod(os, trace.seed);
  os.write(reinterpret_cast<const char*>(trace.samples.data()),
           static_cast<std::streamsize>(trace.samples.size() * sizeof(double)));
  if (!os) throw std::runtime_error("save_trace: write failed for " + path.string());
}

NoiseTrace load_trace(const std::filesystem::path& path, const std::string& unit_label) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("load_trace: cannot open " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("load_trace: bad magic in " + path.string());
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kVersion)
    throw std::runtime_error("load_trace: unsupported version");
  NoiseTrace trace;
  trace.sample_rate_hz = read_pod<double>(is);
  const auto n = read_pod<std::uint64_t>(is);
  trace.seed = read_pod<std::uint64_t>(is);
  if (!(trace.sample_rate_hz > 0.0) || n < 2)
    throw std::runtime_error("load_trace: corrupt header");
  trace.samples.resize(n);
  is.read(reinterpret_cast<char*>(trace.samples.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) throw std::runtime_error("load_trace: truncated file " + path.string());
  trace.unit_label = unit_label;
  return trace;
}

void write_trace_csv(const NoiseTrace& trace, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("write_trace_csv: cannot open " + path.string());
  std::fputs("time_s,value\r\n", f);
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    std::fprintf(f, "%.17g,%.17g\r\n",
                 static_cast<double>(i) / trace.sample_rate_hz, trace.samples[i]);
  }
  std::fclose(f);
}

}  // namespace qdn
