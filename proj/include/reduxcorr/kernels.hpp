#pragma once

#include <cstddef>

// Data-parallel inner loops used by the pitch tracker, the correlation tables
// and the models. Each operation has a scalar reference implementation plus
// SIMD variants (AVX2 on x86-64, NEON on aarch64) selected at runtime; the
// test suite checks every available variant against the scalar reference.

namespace reduxcorr::kernels {

enum class Backend { Scalar = 0, Avx2 = 1, Neon = 2 };

const char* backend_name(Backend b);

// Backend in use for subsequent kernel calls.
Backend active_backend();

// Pin the dispatch to one backend (tests use this to compare variants).
// Returns false and leaves the dispatch unchanged if the backend is not
// available on this CPU/build.
bool force_backend(Backend b);

// Return to auto-detection (best available backend).
void reset_backend();

float dot_f32(const float* a, const float* b, std::size_t n);
float sumsq_f32(const float* a, std::size_t n);
double dot_f64(const double* a, const double* b, std::size_t n);
double l2sq_f64(const double* a, const double* b, std::size_t n);

namespace detail {

float dot_f32_scalar(const float* a, const float* b, std::size_t n);
float sumsq_f32_scalar(const float* a, std::size_t n);
double dot_f64_scalar(const double* a, const double* b, std::size_t n);
double l2sq_f64_scalar(const double* a, const double* b, std::size_t n);

#if defined(REDUXCORR_HAVE_AVX2)
float dot_f32_avx2(const float* a, const float* b, std::size_t n);
float sumsq_f32_avx2(const float* a, std::size_t n);
double dot_f64_avx2(const double* a, const double* b, std::size_t n);
double l2sq_f64_avx2(const double* a, const double* b, std::size_t n);
#endif

#if defined(REDUXCORR_HAVE_NEON)
float dot_f32_neon(const float* a, const float* b, std::size_t n);
float sumsq_f32_neon(const float* a, std::size_t n);
double dot_f64_neon(const double* a, const double* b, std::size_t n);
double l2sq_f64_neon(const double* a, const double* b, std::size_t n);
#endif

}  // namespace detail

}  // namespace reduxcorr::kernels
