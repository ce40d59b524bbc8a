// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>

#include "condfoley/dsp/augment.hpp"
#include "condfoley/dsp/fft.hpp"
#include "condfoley/dsp/griffin_lim.hpp"
#include "condfoley/dsp/mel.hpp"
#include "condfoley/dsp/onsets.hpp"
#include "condfoley/dsp/spec_io.hpp"
#include "condfoley/dsp/wav.hpp"

using namespace condfoley;
using namespace condfoley::dsp;

namespace {

// O(n^2) DFT oracle
std::vector<std::complex<double>> naive_dft(const std::vector<float>& x) {
    const size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (size_t i = 0; i < n; ++i) {
            const double ang = -2.0 * M_PI * static_cast<double>(k * i) / static_cast<double>(n);
            acc += static_cast<double>(x[i]) * std::complex<double>(std::cos(ang), std::sin(ang));
        }
        out[k] = acc;
    }
    return out;
}

Waveform sine_wave(double freq, double secs, float amp = 0.5f, int sr = kDefaultSampleRate) {
    Waveform w;
    w.sample_rate = sr;
    w.samples.resize(static_cast<size_t>(secs * sr));
    for (size_t i = 0; i < w.samples.size(); ++i)
        w.samples[i] = amp * static_cast<float>(std::sin(2.0 * M_PI * freq * i / sr));
    return w;
}

Waveform silence(double secs, int sr = kDefaultSampleRate) {
    Waveform w;
    w.sample_rate = sr;
    w.samples.assign(static_cast<size_t>(secs * sr), 0.0f);
    return w;
}

// decaying harmonic tone injected at t0 (the synthetic corpus impact shape)
void add_impact(Waveform& w, double t0, double freq, float amp, double decay = 0.08) {
    const int sr = w.sample_rate;
    const auto start = static_cast<int64_t>(t0 * sr);
    const auto len = static_cast<int64_t>(0.4 * sr);
    for (int64_t i = 0; i < len && start + i < static_cast<int64_t>(w.samples.size()); ++i) {
        const double t = static_cast<double>(i) / sr;
        w.samples[static_cast<size_t>(start + i)] +=
            amp * static_cast<float>(std::sin(2.0 * M_PI * freq * t) * std::exp(-t / decay));
    }
}

double mel_l2(const MelSpectrogram& a, const MelSpectrogram& b) {
    REQUIRE(a.values.size() == b.values.size());
    double acc = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        const double d = static_cast<double>(a.values[i]) - b.values[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(a.values.size()));
}

}  // namespace

TEST_CASE("fft matches naive DFT") {
    Rng rng(11);
    for (int n : {8, 64, 256, 1024}) {
        std::vector<float> x(static_cast<size_t>(n));
        for (auto& v : x) v = rng.normal();
        auto bins = rfft(x.data(), n);
        auto ref = naive_dft(x);
        for (int k = 0; k <= n / 2; ++k)
            CHECK(std::abs(std::complex<double>(bins[static_cast<size_t>(k)]) - ref[static_cast<size_t>(k)]) <
                  1e-3 * (1.0 + std::abs(ref[static_cast<size_t>(k)])));
        // round trip
        auto back = irfft(bins, n);
        for (int i = 0; i < n; ++i)
            CHECK(std::abs(back[static_cast<size_t>(i)] - x[static_cast<size_t>(i)]) < 1e-4);
    }
}

TEST_CASE("mel filterbank: default bank shape and coverage") {
    auto bank = mel_filterbank(80, 1024, 22050);
    CHECK(bank.num_mels == 80);
    CHECK(bank.num_bins == 513);
    // row sums > 0, rows nonnegative and unimodal
    for (int m = 0; m < 80; ++m) {
        double row_sum = 0.0;
        int dir = 1;  // 1 rising, -1 falling
        float prev = bank.at(m, 0);
        bool unimodal = true;
        for (int k = 0; k < bank.num_bins; ++k) {
            const float v = bank.at(m, k);
            CHECK(v >= 0.0f);
            row_sum += v;
            if (dir == 1 && v < prev - 1e-7f) dir = -1;
            else if (dir == -1 && v > prev + 1e-7f) unimodal = false;
            prev = v;
        }
        CHECK(row_sum > 0.0);
        CHECK(unimodal);
    }
    // every bin below Nyquist covered by at least one filter
    for (int k = 0; k < bank.num_bins - 1; ++k) {
        float best = 0.0f;
        for (int m = 0; m < 80; ++m) best = std::max(best, bank.at(m, k));
        CHECK(best > 0.0f);
    }
}

TEST_CASE("mel filterbank: degenerate single filter") {
    auto bank = mel_filterbank(1, 4, 8000);
    CHECK(bank.num_bins == 3);
    float peak = 0.0f;
    for (int k = 0; k < 3; ++k) peak = std::max(peak, bank.at(0, k));
    CHECK(peak == doctest::Approx(1.0f));
    // all bins below Nyquist covered
    CHECK(bank.at(0, 0) > 0.0f);
    CHECK(bank.at(0, 1) > 0.0f);
}

TEST_CASE("mel filterbank: centers match the mel-scale formula") {
    auto bank = mel_filterbank(8, 256, 8000);
    // independent computation: m = 2595*log10(1 + f/700) on 10 evenly spaced
    // mel points between 0 and Nyquist
    const double mel_hi = 2595.0 * std::log10(1.0 + 4000.0 / 700.0);
    for (int m = 0; m < 8; ++m) {
        const double mel_c = mel_hi * (m + 1) / 9.0;
        const double hz_c = 700.0 * (std::pow(10.0, mel_c / 2595.0) - 1.0);
        CHECK(bank.center_hz[static_cast<size_t>(m)] == doctest::Approx(hz_c).epsilon(1e-4));
        if (m > 0) CHECK(bank.center_hz[static_cast<size_t>(m)] > bank.center_hz[static_cast<size_t>(m - 1)]);
    }
}

TEST_CASE("mel filterbank: rejects under-determined bank") {
    CHECK_THROWS(mel_filterbank(600, 1024, 22050));
    CHECK_THROWS(mel_filterbank(0, 1024, 22050));
    CHECK_THROWS(mel_filterbank(8, 1000, 22050));  // not a power of two
}

TEST_CASE("mel spectrogram: silence is exactly log(eps)") {
    MelConfig cfg;
    auto m = compute_mel_spectrogram(silence(2.0), cfg);
    for (float v : m.values) CHECK(v == doctest::Approx(std::log(kLogEps)));
}

TEST_CASE("mel spectrogram: 440 Hz sine peaks at the nearest-center band") {
    MelConfig cfg;
    auto m = compute_mel_spectrogram(sine_wave(440.0, 2.0), cfg);
    auto bank = mel_filterbank(cfg.num_mels, cfg.num_fft, cfg.sample_rate);
    int nearest = 0;
    for (int b = 1; b < cfg.num_mels; ++b)
        if (std::abs(bank.center_hz[static_cast<size_t>(b)] - 440.0f) <
            std::abs(bank.center_hz[static_cast<size_t>(nearest)] - 440.0f))
            nearest = b;
    // argmax band of the mid frame
    const int t = m.num_frames / 2;
    int argmax = 0;
    for (int f = 1; f < m.num_mels; ++f)
        if (m.at(t, f) > m.at(t, argmax)) argmax = f;
    CHECK(argmax == nearest);
}

TEST_CASE("mel spectrogram: hop arithmetic is exact") {
    MelConfig cfg;
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const int n = rng.uniform_int(cfg.num_fft, 3 * cfg.num_fft + 5000);
        Waveform w;
        w.samples.assign(static_cast<size_t>(n), 0.01f);
        auto m = compute_mel_spectrogram(w, cfg);
        CHECK(m.num_frames == 1 + (n - cfg.num_fft) / cfg.hop_length);
    }
    // default 2 s clip is compatible with the 12-wide code grid
    auto m = compute_mel_spectrogram(silence(2.0), cfg);
    CHECK(m.num_frames == 192);
    CHECK(m.num_frames % 12 == 0);
}

TEST_CASE("mel spectrogram: too-short waveform raises") {
    Waveform w;
    w.samples.assign(100, 0.1f);
    CHECK_THROWS(compute_mel_spectrogram(w, MelConfig{}));
}

TEST_CASE("griffin-lim: silent spectrogram inverts to near-silence") {
    auto m = compute_mel_spectrogram(silence(2.0), MelConfig{});
    auto w = griffin_lim_invert(m, 8);
    double rms = 0.0;
    float peak = 0.0f;
    for (float s : w.samples) {
        rms += static_cast<double>(s) * s;
        peak = std::max(peak, std::abs(s));
    }
    rms = std::sqrt(rms / static_cast<double>(w.samples.size()));
    CHECK(rms < 1e-3);
    CHECK(peak < 1e-3);
    // length contract: about T*hop
    CHECK(std::abs(static_cast<double>(w.samples.size()) - 192.0 * 225.0) < 1100.0);
}

TEST_CASE("griffin-lim: 440 Hz round trip keeps the dominant band") {
    MelConfig cfg;
    auto original = compute_mel_spectrogram(sine_wave(440.0, 2.0), cfg);
    auto w = griffin_lim_invert(original, 60);
    w.samples.resize(static_cast<size_t>(2.0 * cfg.sample_rate), 0.0f);
    auto rebuilt = compute_mel_spectrogram(w, cfg);

    const int t = original.num_frames / 2;
    auto argmax_band = [&](const MelSpectrogram& m) {
        int a = 0;
        for (int f = 1; f < m.num_mels; ++f)
            if (m.at(t, f) > m.at(t, a)) a = f;
        return a;
    };
    CHECK(std::abs(argmax_band(original) - argmax_band(rebuilt)) <= 1);
}

TEST_CASE("griffin-lim: more iterations do not increase mel error") {
    MelConfig cfg;
    Waveform src = sine_wave(523.0, 2.0, 0.4f);
    add_impact(src, 0.7, 880.0, 0.5f);
    auto target = compute_mel_spectrogram(src, cfg);

    auto err_for = [&](int iters) {
        auto w = griffin_lim_invert(target, iters);
        w.samples.resize(src.samples.size(), 0.0f);
        return mel_l2(target, compute_mel_spectrogram(w, cfg));
    };
    const double e1 = err_for(1);
    const double e60 = err_for(60);
    CHECK(e60 <= e1 + 1e-9);
}

TEST_CASE("griffin-lim is deterministic") {
    auto m = compute_mel_spectrogram(sine_wave(660.0, 2.0), MelConfig{});
    auto a = griffin_lim_invert(m, 4);
    auto b = griffin_lim_invert(m, 4);
    CHECK(a.samples == b.samples);
}

TEST_CASE("onsets: silence gives an empty list") {
    auto onsets = detect_onsets(silence(2.0));
    CHECK(onsets.size() == 0);
}

TEST_CASE("onsets: two injected impacts are found near their times") {
    Waveform w = silence(2.0);
    add_impact(w, 0.3, 440.0, 0.8f);
    add_impact(w, 1.2, 660.0, 0.6f);
    auto onsets = detect_onsets(w);
    REQUIRE(onsets.size() == 2);
    CHECK(std::abs(onsets.times[0] - 0.3) < 0.05);
    CHECK(std::abs(onsets.times[1] - 1.2) < 0.05);
    CHECK(onsets.times[0] < onsets.times[1]);
}

TEST_CASE("onsets: single impact has confidence 1") {
    Waveform w = silence(2.0);
    add_impact(w, 0.5, 523.0, 0.9f);
    auto onsets = detect_onsets(w);
    REQUIRE(onsets.size() == 1);
    CHECK(onsets.confidences[0] == doctest::Approx(1.0));
}

TEST_CASE("spec_augment: zero widths are the identity") {
    auto m = compute_mel_spectrogram(sine_wave(440.0, 2.0), MelConfig{});
    Rng rng(3);
    auto out = spec_augment(m, rng, 0, 0);
    CHECK(out.values == m.values);
}

TEST_CASE("spec_augment: altered-cell count stays within the mask bound") {
    MelSpectrogram m;
    m.num_frames = 100;
    m.num_mels = 80;
    m.values.assign(8000, 1.0f);
    Rng rng(9);
    auto out = spec_augment(m, rng, 8, 10, -5.0f);
    CHECK(out.num_frames == 100);
    CHECK(out.num_mels == 80);
    int altered = 0;
    for (size_t i = 0; i < m.values.size(); ++i)
        if (out.values[i] != m.values[i]) {
            CHECK(out.values[i] == -5.0f);
            ++altered;
        }
    CHECK(altered <= 8 * 100 + 80 * 10);
}

TEST_CASE("spec_augment: deterministic under a fixed seed") {
    auto m = compute_mel_spectrogram(sine_wave(880.0, 2.0), MelConfig{});
    Rng a(42), b(42);
    CHECK(spec_augment(m, a, 8, 10).values == spec_augment(m, b, 8, 10).values);
    CHECK_THROWS(spec_augment(m, a, 80, 0));
}

TEST_CASE("wav round trip within quantization") {
    Waveform w = sine_wave(330.0, 0.5, 0.7f);
    const std::string path = "test_roundtrip.wav";
    write_wav(path, w);
    auto r = read_wav(path);
    REQUIRE(r.samples.size() == w.samples.size());
    CHECK(r.sample_rate == w.sample_rate);
    for (size_t i = 0; i < w.samples.size(); ++i)
        CHECK(std::abs(r.samples[i] - w.samples[i]) < 1.0f / 32000.0f);
    std::remove(path.c_str());
}

TEST_CASE("spectrogram save/load round trip") {
    auto m = compute_mel_spectrogram(sine_wave(440.0, 2.0), MelConfig{});
    const std::string path = "test_spec.f32";
    save_spectrogram(path, m);
    auto r = load_spectrogram(path);
    CHECK(r.values == m.values);
    CHECK(r.num_frames == m.num_frames);
    CHECK(r.hop_length == m.hop_length);
    std::remove(path.c_str());
    std::remove((path + ".json").c_str());
}
