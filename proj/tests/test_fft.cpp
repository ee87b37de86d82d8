#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "reduxcorr/fft.hpp"
#include "reduxcorr/util.hpp"

using reduxcorr::Rng;
namespace fft = reduxcorr::fft;

namespace {

// O(n^2) DFT in long double as the independent oracle.
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    const long double two_pi = 6.283185307179586476925286766559L;
    for (std::size_t k = 0; k < n; ++k) {
        long double re = 0, im = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const long double angle = -two_pi * static_cast<long double>(k) *
                                      static_cast<long double>(j) / static_cast<long double>(n);
            const long double c = std::cos(angle), s = std::sin(angle);
            re += x[j].real() * c - x[j].imag() * s;
            im += x[j].real() * s + x[j].imag() * c;
        }
        out[k] = {static_cast<double>(re), static_cast<double>(im)};
    }
    return out;
}

}  // namespace

TEST_CASE("next_pow2") {
    CHECK(fft::next_pow2(1) == 1);
    CHECK(fft::next_pow2(2) == 2);
    CHECK(fft::next_pow2(3) == 4);
    CHECK(fft::next_pow2(4) == 4);
    CHECK(fft::next_pow2(5) == 8);
    CHECK(fft::next_pow2(1000) == 1024);
    CHECK(fft::next_pow2(1024) == 1024);
    CHECK(fft::next_pow2(1025) == 2048);
    CHECK_THROWS(fft::next_pow2(0));
}

TEST_CASE("fft matches the naive DFT") {
    Rng rng(7);
    for (std::size_t n : {std::size_t{1}, std::size_t{2}, std::size_t{4}, std::size_t{8},
                          std::size_t{32}, std::size_t{128}, std::size_t{512}}) {
        std::vector<std::complex<double>> x(n);
        for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        const auto expected = naive_dft(x);
        auto got = x;
        fft::fft(got);
        const double tol = 1e-11 * static_cast<double>(n) + 1e-12;
        for (std::size_t k = 0; k < n; ++k) {
            CAPTURE(n);
            CAPTURE(k);
            CHECK(std::abs(got[k] - expected[k]) <= tol);
        }
    }
}

TEST_CASE("inverse fft round-trips") {
    Rng rng(11);
    std::vector<std::complex<double>> x(256);
    for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    auto y = x;
    fft::fft(y);
    fft::fft(y, /*inverse=*/true);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(y[i] - x[i]) <= 1e-12);
    }
}

TEST_CASE("fft rejects non-power-of-two sizes") {
    for (std::size_t n : {std::size_t{3}, std::size_t{6}, std::size_t{100}}) {
        std::vector<std::complex<double>> x(n, {1.0, 0.0});
        CHECK_THROWS(fft::fft(x));
    }
}

TEST_CASE("rfft matches the complex transform of the real signal") {
    Rng rng(13);
    for (std::size_t n : {std::size_t{2}, std::size_t{8}, std::size_t{64}, std::size_t{1024}}) {
        std::vector<double> x(n);
        for (auto& v : x) v = rng.uniform(-1.0, 1.0);
        std::vector<std::complex<double>> full(n);
        for (std::size_t i = 0; i < n; ++i) full[i] = {x[i], 0.0};
        fft::fft(full);
        const auto half = fft::rfft(x);
        REQUIRE(half.size() == n / 2 + 1);
        const double tol = 1e-11 * static_cast<double>(n) + 1e-12;
        for (std::size_t k = 0; k < half.size(); ++k) {
            CAPTURE(n);
            CAPTURE(k);
            CHECK(std::abs(half[k] - full[k]) <= tol);
        }
        // Real-input symmetry: DC and (even n) Nyquist bins are real.
        CHECK(std::abs(half[0].imag()) <= 1e-12);
        CHECK(std::abs(half[n / 2].imag()) <= tol);
    }
}

TEST_CASE("rfft of a pure cosine concentrates in one bin") {
    const std::size_t n = 256;
    std::vector<double> x(n);
    const std::size_t bin = 19;
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = std::cos(2.0 * 3.14159265358979323846 * static_cast<double>(bin) *
                        static_cast<double>(i) / static_cast<double>(n));
    }
    const auto spec = fft::rfft(x);
    for (std::size_t k = 0; k < spec.size(); ++k) {
        const double expected = k == bin ? static_cast<double>(n) / 2.0 : 0.0;
        CHECK(std::abs(std::abs(spec[k]) - expected) <= 1e-9 * static_cast<double>(n));
    }
}
