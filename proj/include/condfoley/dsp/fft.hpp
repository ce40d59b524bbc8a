// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <vector>

namespace condfoley::dsp {

// In-place iterative radix-2 FFT. Size must be a power of two.
void fft(std::vector<std::complex<float>>& a, bool inverse);

// Forward real FFT: n real samples -> n/2+1 complex bins.
std::vector<std::complex<float>> rfft(const float* x, int n);

// Inverse of rfft: n/2+1 bins -> n real samples.
std::vector<float> irfft(const std::vector<std::complex<float>>& bins, int n);

}  // namespace condfoley::dsp
