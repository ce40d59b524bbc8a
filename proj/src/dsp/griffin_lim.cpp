// SPDX-License-Identifier: Apache-2.0
#include "condfoley/dsp/griffin_lim.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "condfoley/dsp/fft.hpp"

namespace condfoley::dsp {

using Mat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>;

std::vector<float> mel_to_power(const MelSpectrogram& m, const MelFilterbank& bank,
                                int nnls_iters) {
    const int T = m.num_frames;
    const int M = m.num_mels;
    const int B = bank.num_bins;

    // Mel energies back from the log domain, clamped nonnegative.
    Mat mel(M, T);
    for (int t = 0; t < T; ++t)
        for (int f = 0; f < M; ++f)
            mel(f, t) = std::max(0.0f, std::exp(m.at(t, f)) - kLogEps);

    Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
        W(bank.weights.data(), M, B);

    // x <- x * (W^T mel) / (W^T W x); multiplicative updates keep x >= 0.
    Mat wt_mel = W.transpose() * mel;                        // B x T
    Mat gram = (W.transpose() * W).eval();                   // B x B
    Eigen::VectorXf col_sum = W.colwise().sum().transpose(); // per-bin total weight
    Mat x(B, T);
    for (int k = 0; k < B; ++k) {
        const float denom = std::max(col_sum(k), 1e-8f);
        for (int t = 0; t < T; ++t) x(k, t) = wt_mel(k, t) / denom;
    }
    const float tiny = 1e-12f;
    for (int it = 0; it < nnls_iters; ++it) {
        Mat denom = gram * x;
        for (int k = 0; k < B; ++k)
            for (int t = 0; t < T; ++t)
                x(k, t) *= wt_mel(k, t) / (denom(k, t) + tiny);
    }

    std::vector<float> out(static_cast<size_t>(T) * B);
    for (int t = 0; t < T; ++t)
        for (int k = 0; k < B; ++k)
            out[static_cast<size_t>(t) * B + k] = std::max(0.0f, x(k, t));
    return out;
}

Waveform istft(const std::vector<float>& real, const std::vector<float>& imag,
               int num_frames, int num_fft, int hop_length, int sample_rate) {
    const int num_bins = num_fft / 2 + 1;
    const int64_t out_len = static_cast<int64_t>(num_frames - 1) * hop_length + num_fft;

    std::vector<float> window(static_cast<size_t>(num_fft));
    for (int i = 0; i < num_fft; ++i)
        window[static_cast<size_t>(i)] =
            0.5f - 0.5f * std::cos(2.0 * M_PI * i / static_cast<double>(num_fft));

    std::vector<double> acc(static_cast<size_t>(out_len), 0.0);
    std::vector<double> norm(static_cast<size_t>(out_len), 0.0);
    std::vector<std::complex<float>> bins(static_cast<size_t>(num_bins));
    for (int t = 0; t < num_frames; ++t) {
        for (int k = 0; k < num_bins; ++k)
            bins[static_cast<size_t>(k)] = {real[static_cast<size_t>(t) * num_bins + k],
                                            imag[static_cast<size_t>(t) * num_bins + k]};
        auto frame = irfft(bins, num_fft);
        const int64_t off = static_cast<int64_t>(t) * hop_length;
        for (int i = 0; i < num_fft; ++i) {
            acc[static_cast<size_t>(off + i)] += static_cast<double>(frame[static_cast<size_t>(i)]) * window[static_cast<size_t>(i)];
            norm[static_cast<size_t>(off + i)] += static_cast<double>(window[static_cast<size_t>(i)]) * window[static_cast<size_t>(i)];
        }
    }

    Waveform w;
    w.sample_rate = sample_rate;
    w.samples.resize(static_cast<size_t>(out_len));
    // Floor the window-sum normalizer: near clip edges the Hann window tends
    // to zero and a bare division would amplify numerical dust.
    for (int64_t i = 0; i < out_len; ++i)
        w.samples[static_cast<size_t>(i)] =
            static_cast<float>(acc[static_cast<size_t>(i)] / std::max(norm[static_cast<size_t>(i)], 1e-3));
    return w;
}

Waveform griffin_lim_invert(const MelSpectrogram& m, int num_iters, int nnls_iters) {
    require(num_iters >= 1, "griffin_lim_invert: num_iters must be >= 1");
    for (float x : m.values) require(std::isfinite(x), "griffin_lim_invert: non-finite input");

    const auto bank = mel_filterbank(m.num_mels, m.num_fft, m.sample_rate);
    const auto power = mel_to_power(m, bank, nnls_iters);

    const int T = m.num_frames;
    const int num_bins = m.num_fft / 2 + 1;
    std::vector<float> mag(static_cast<size_t>(T) * num_bins);
    for (size_t i = 0; i < mag.size(); ++i) mag[i] = std::sqrt(power[i]);

    // zero-phase initialization
    std::vector<float> re = mag;
    std::vector<float> im(mag.size(), 0.0f);

    std::vector<float> window(static_cast<size_t>(m.num_fft));
    for (int i = 0; i < m.num_fft; ++i)
        window[static_cast<size_t>(i)] =
            0.5f - 0.5f * std::cos(2.0 * M_PI * i / static_cast<double>(m.num_fft));

    Waveform wave;
    std::vector<float> frame(static_cast<size_t>(m.num_fft));
    for (int it = 0; it < num_iters; ++it) {
        wave = istft(re, im, T, m.num_fft, m.hop_length, m.sample_rate);
        // re-analyze and keep only the phase
        for (int t = 0; t < T; ++t) {
            const float* src = wave.samples.data() + static_cast<size_t>(t) * m.hop_length;
            for (int i = 0; i < m.num_fft; ++i)
                frame[static_cast<size_t>(i)] = src[i] * window[static_cast<size_t>(i)];
            auto bins = rfft(frame.data(), m.num_fft);
            for (int k = 0; k < num_bins; ++k) {
                const float a = std::abs(bins[static_cast<size_t>(k)]);
                const size_t idx = static_cast<size_t>(t) * num_bins + k;
                if (a > 1e-12f) {
                    re[idx] = mag[idx] * bins[static_cast<size_t>(k)].real() / a;
                    im[idx] = mag[idx] * bins[static_cast<size_t>(k)].imag() / a;
                } else {
                    re[idx] = mag[idx];
                    im[idx] = 0.0f;
                }
            }
        }
    }
    wave = istft(re, im, T, m.num_fft, m.hop_length, m.sample_rate);
    for (auto& s : wave.samples) s = std::clamp(s, -1.0f, 1.0f);
    return wave;
}

}  // namespace condfoley::dsp
