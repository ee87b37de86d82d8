#include "reduxcorr/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace reduxcorr::fft {

namespace {
constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }
}  // namespace

std::size_t next_pow2(std::size_t n) {
    if (n == 0) throw std::invalid_argument("next_pow2: n must be >= 1");
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

void fft(std::vector<std::complex<double>>& data, bool inverse) {
    const std::size_t n = data.size();
    if (n == 0) return;
    if (!is_pow2(n)) throw std::invalid_argument("fft: size must be a power of two");
    if (n == 1) return;

    // Bit-reversal permutation.
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j |= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = data[i + k];
                std::complex<double> v = data[i + k + len / 2] * w;
                data[i + k] = u + v;
                data[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }

    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : data) x *= inv;
    }
}

std::vector<std::complex<double>> rfft(const std::vector<double>& input) {
    const std::size_t n = input.size();
    if (n < 2 || !is_pow2(n)) throw std::invalid_argument("rfft: size must be a power of two >= 2");

    // Pack even/odd samples into a complex signal of half length, transform,
    // then untangle the two interleaved real spectra.
    const std::size_t m = n / 2;
    std::vector<std::complex<double>> z(m);
    for (std::size_t i = 0; i < m; ++i) z[i] = {input[2 * i], input[2 * i + 1]};
    fft(z);

    // Untangle: X[k] = E[k] + W^k * O[k] where E,O are the DFTs of the
    // even/odd sample streams: E[k] = (z[k]+conj(z[m-k]))/2,
    // O[k] = -i*(z[k]-conj(z[m-k]))/2.
    std::vector<std::complex<double>> out(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
        const std::size_t k1 = k % m;
        const std::size_t k2 = (m - k) % m;
        const std::complex<double> zk = z[k1];
        const std::complex<double> zc = std::conj(z[k2]);
        const std::complex<double> ek = 0.5 * (zk + zc);
        const std::complex<double> ok = std::complex<double>(0.0, -0.5) * (zk - zc);
        const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        out[k] = ek + std::complex<double>(std::cos(ang), std::sin(ang)) * ok;
    }
    return out;
}

}  // namespace reduxcorr::fft
