// SPDX-License-Identifier: Apache-2.0
#include "condfoley/dsp/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace condfoley::dsp {

void fft(std::vector<std::complex<float>>& a, bool inverse) {
    const size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft: size must be a nonzero power of two");

    // bit-reversal permutation
    for (size_t i = 1, j = 0; i < n; ++i) {
        size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }

    for (size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * M_PI / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u(a[i + k]);
                const std::complex<double> t = std::complex<double>(a[i + k + len / 2]) * w;
                a[i + k] = std::complex<float>(u + t);
                a[i + k + len / 2] = std::complex<float>(u - t);
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const float inv_n = 1.0f / static_cast<float>(n);
        for (auto& x : a) x *= inv_n;
    }
}

std::vector<std::complex<float>> rfft(const float* x, int n) {
    std::vector<std::complex<float>> a(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) a[static_cast<size_t>(i)] = {x[i], 0.0f};
    fft(a, false);
    a.resize(static_cast<size_t>(n / 2 + 1));
    return a;
}

std::vector<float> irfft(const std::vector<std::complex<float>>& bins, int n) {
    std::vector<std::complex<float>> a(static_cast<size_t>(n));
    for (int k = 0; k <= n / 2; ++k) a[static_cast<size_t>(k)] = bins[static_cast<size_t>(k)];
    for (int k = n / 2 + 1; k < n; ++k)
        a[static_cast<size_t>(k)] = std::conj(bins[static_cast<size_t>(n - k)]);
    fft(a, true);
    std::vector<float> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = a[static_cast<size_t>(i)].real();
    return out;
}

}  // namespace condfoley::dsp
