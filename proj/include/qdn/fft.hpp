#ifndef QDN_FFT_HPP
#define QDN_FFT_HPP

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qdn::fft {

// Thin FFTW wrappers, unnormalized transforms in FFTW's convention.
// Planning is serialized internally; execution on distinct buffers is
// thread safe.

/// Forward real-to-complex transform; returns n/2+1 spectral coefficients.
std::vector<std::complex<double>> real_to_complex(std::span<const double> in);

/// Inverse complex-to-real transform of a half spectrum (n/2+1 coefficients)
/// to n real samples. The input is consumed (FFTW destroys it).
std::vector<double> complex_to_real(std::vector<std::complex<double>> half_spectrum,
                                    std::size_t n);

}  // namespace qdn::fft

#endif
