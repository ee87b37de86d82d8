#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace reduxcorr::fft {

// Smallest power of two >= n (n must be >= 1).
std::size_t next_pow2(std::size_t n);

// In-place iterative radix-2 complex FFT. data.size() must be a power of two.
// inverse=true applies the conjugate transform and divides by N.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

// Real-input FFT: returns the n/2+1 non-redundant bins of the length-n
// transform, computed via one complex FFT of half the length. n = input.size()
// must be a power of two >= 2.
std::vector<std::complex<double>> rfft(const std::vector<double>& input);

}  // namespace reduxcorr::fft
