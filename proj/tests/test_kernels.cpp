#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "reduxcorr/kernels.hpp"
#include "reduxcorr/util.hpp"

using reduxcorr::Rng;
namespace kernels = reduxcorr::kernels;
using kernels::Backend;

namespace {

// Backends this build + CPU can actually run.
std::vector<Backend> available_backends() {
    std::vector<Backend> out;
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
        if (kernels::force_backend(b)) out.push_back(b);
    }
    kernels::reset_backend();
    return out;
}

// Independent references accumulated in long double.
long double ref_dot_f32(const float* a, const float* b, std::size_t n) {
    long double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(a[i]) * b[i];
    return s;
}
long double ref_sumsq_f32(const float* a, std::size_t n) {
    long double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(a[i]) * a[i];
    return s;
}
long double ref_dot_f64(const double* a, const double* b, std::size_t n) {
    long double s = 0;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(a[i]) * b[i];
    return s;
}
long double ref_l2sq_f64(const double* a, const double* b, std::size_t n) {
    long double s = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const long double d = static_cast<long double>(a[i]) - b[i];
        s += d * d;
    }
    return s;
}

// Sum of |terms| — the natural scale for an accumulation error bound.
long double abs_scale_f32(const float* a, const float* b, std::size_t n) {
    long double s = 1e-30L;
    for (std::size_t i = 0; i < n; ++i) s += std::abs(static_cast<long double>(a[i]) * b[i]);
    return s;
}

}  // namespace

TEST_CASE("backend forcing and detection") {
    const auto detected = kernels::active_backend();
    CHECK(kernels::backend_name(detected) != nullptr);

    REQUIRE(kernels::force_backend(Backend::Scalar));
    CHECK(kernels::active_backend() == Backend::Scalar);

    // Unavailable backends are refused and leave the selection alone.
#if defined(__x86_64__)
    CHECK_FALSE(kernels::force_backend(Backend::Neon));
    CHECK(kernels::active_backend() == Backend::Scalar);
#elif defined(__aarch64__)
    CHECK_FALSE(kernels::force_backend(Backend::Avx2));
    CHECK(kernels::active_backend() == Backend::Scalar);
#endif

    kernels::reset_backend();
    CHECK(kernels::active_backend() == detected);
}

TEST_CASE("every available backend matches the long-double reference") {
    Rng rng(42);
    // Lengths straddling every main-loop width and tail combination.
    const std::size_t lengths[] = {0,  1,  2,  3,  4,  5,  7,  8,  9,   15,  16,
                                   17, 23, 31, 32, 33, 63, 64, 65, 100, 257, 1000};
    for (std::size_t n : lengths) {
        std::vector<float> fa(n + 1), fb(n + 1);
        std::vector<double> da(n + 1), db(n + 1);
        for (std::size_t i = 0; i < n + 1; ++i) {
            fa[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
            fb[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
            da[i] = rng.uniform(-1.0, 1.0);
            db[i] = rng.uniform(-1.0, 1.0);
        }
        for (Backend backend : available_backends()) {
            CAPTURE(static_cast<int>(backend));
            CAPTURE(n);
            REQUIRE(kernels::force_backend(backend));
            // Both natural alignment and a one-element offset (SIMD loads
            // must not assume alignment).
            for (std::size_t off : {std::size_t{0}, std::size_t{1}}) {
                const float* pa = fa.data() + off;
                const float* pb = fb.data() + off;
                const double* qa = da.data() + off;
                const double* qb = db.data() + off;
                const auto f32_scale = static_cast<double>(abs_scale_f32(pa, pb, n));
                CHECK(std::abs(kernels::dot_f32(pa, pb, n) -
                               static_cast<double>(ref_dot_f32(pa, pb, n))) <= 1e-5 * f32_scale);
                CHECK(std::abs(kernels::sumsq_f32(pa, n) -
                               static_cast<double>(ref_sumsq_f32(pa, n))) <=
                      1e-5 * (static_cast<double>(ref_sumsq_f32(pa, n)) + 1e-30));
                CHECK(std::abs(kernels::dot_f64(qa, qb, n) -
                               static_cast<double>(ref_dot_f64(qa, qb, n))) <=
                      1e-12 * (static_cast<double>(n) + 1.0));
                CHECK(std::abs(kernels::l2sq_f64(qa, qb, n) -
                               static_cast<double>(ref_l2sq_f64(qa, qb, n))) <=
                      1e-12 * (static_cast<double>(n) + 1.0));
            }
        }
        kernels::reset_backend();
    }
}

TEST_CASE("kernel trivial identities") {
    for (Backend backend : available_backends()) {
        REQUIRE(kernels::force_backend(backend));
        CHECK(kernels::dot_f32(nullptr, nullptr, 0) == 0.0f);
        CHECK(kernels::sumsq_f32(nullptr, 0) == 0.0f);
        CHECK(kernels::dot_f64(nullptr, nullptr, 0) == 0.0);
        CHECK(kernels::l2sq_f64(nullptr, nullptr, 0) == 0.0);

        const std::vector<double> ones(17, 1.0);
        CHECK(kernels::dot_f64(ones.data(), ones.data(), ones.size()) ==
              doctest::Approx(17.0).epsilon(1e-15));
        CHECK(kernels::l2sq_f64(ones.data(), ones.data(), ones.size()) == 0.0);
    }
    kernels::reset_backend();
}
