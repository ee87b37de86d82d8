#include "reduxcorr/kernels.hpp"

namespace reduxcorr::kernels {

namespace detail {

float dot_f32_scalar(const float* a, const float* b, std::size_t n) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

float sumsq_f32_scalar(const float* a, std::size_t n) {
    float acc = 0.0f;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
    return acc;
}

double dot_f64_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double l2sq_f64_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace detail

namespace {

struct KernelTable {
    float (*dot_f32)(const float*, const float*, std::size_t);
    float (*sumsq_f32)(const float*, std::size_t);
    double (*dot_f64)(const double*, const double*, std::size_t);
    double (*l2sq_f64)(const double*, const double*, std::size_t);
};

constexpr KernelTable kScalarTable = {
    detail::dot_f32_scalar,
    detail::sumsq_f32_scalar,
    detail::dot_f64_scalar,
    detail::l2sq_f64_scalar,
};

#if defined(REDUXCORR_HAVE_AVX2)
constexpr KernelTable kAvx2Table = {
    detail::dot_f32_avx2,
    detail::sumsq_f32_avx2,
    detail::dot_f64_avx2,
    detail::l2sq_f64_avx2,
};
#endif

#if defined(REDUXCORR_HAVE_NEON)
constexpr KernelTable kNeonTable = {
    detail::dot_f32_neon,
    detail::sumsq_f32_neon,
    detail::dot_f64_neon,
    detail::l2sq_f64_neon,
};
#endif

bool backend_available(Backend b) {
    switch (b) {
        case Backend::Scalar:
            return true;
        case Backend::Avx2:
#if defined(REDUXCORR_HAVE_AVX2)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Backend::Neon:
#if defined(REDUXCORR_HAVE_NEON)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Backend detect_backend() {
    if (backend_available(Backend::Avx2)) return Backend::Avx2;
    if (backend_available(Backend::Neon)) return Backend::Neon;
    return Backend::Scalar;
}

const KernelTable* table_for(Backend b) {
    switch (b) {
#if defined(REDUXCORR_HAVE_AVX2)
        case Backend::Avx2:
            return &kAvx2Table;
#endif
#if defined(REDUXCORR_HAVE_NEON)
        case Backend::Neon:
            return &kNeonTable;
#endif
        default:
            return &kScalarTable;
    }
}

Backend g_backend = detect_backend();
const KernelTable* g_table = table_for(g_backend);

}  // namespace

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::Scalar: return "scalar";
        case Backend::Avx2: return "avx2";
        case Backend::Neon: return "neon";
    }
    return "?";
}

Backend active_backend() { return g_backend; }

bool force_backend(Backend b) {
    if (!backend_available(b)) return false;
    g_backend = b;
    g_table = table_for(b);
    return true;
}

void reset_backend() {
    g_backend = detect_backend();
    g_table = table_for(g_backend);
}

float dot_f32(const float* a, const float* b, std::size_t n) { return g_table->dot_f32(a, b, n); }
float sumsq_f32(const float* a, std::size_t n) { return g_table->sumsq_f32(a, n); }
double dot_f64(const double* a, const double* b, std::size_t n) { return g_table->dot_f64(a, b, n); }
double l2sq_f64(const double* a, const double* b, std::size_t n) { return g_table->l2sq_f64(a, b, n); }

}  // namespace reduxcorr::kernels
