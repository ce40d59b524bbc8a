// SPDX-License-Identifier: Apache-2.0
#include "condfoley/generator/generate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace condfoley::generator {

namespace {

// plain-array embedding of a fed-back code at a given sequence position
nn::NdArray embed_code_row(const GeneratorModel& model, const codec::CodecModel& codec, int code,
                           int pos) {
    const int d = codec.config().embed_dim;
    const int w = model.gcfg.model_width;
    const auto& cb = codec.codebook()->value;
    const auto& proj = model.params.get("cond.audio_proj.w")->value;  // [d, w]
    const auto& bias = model.params.get("cond.audio_proj.b")->value;
    const auto& seg = model.params.get("cond.segment")->value;
    const auto& posn = model.params.get("cond.position")->value;

    nn::NdArray row({1, w});
    for (int j = 0; j < w; ++j) {
        float acc = bias[j];
        for (int i = 0; i < d; ++i) acc += cb[static_cast<int64_t>(code) * d + i] * proj[static_cast<int64_t>(i) * w + j];
        row[j] = acc + seg[static_cast<int64_t>(static_cast<int>(conditioning::SegmentTag::kOutAudio)) * w + j] +
                 posn[static_cast<int64_t>(pos) * w + j];
    }
    return row;
}

int sample_from_logits(const std::vector<float>& logits, const GenerationParams& p, Rng& rng) {
    const int K = static_cast<int>(logits.size());
    auto argmax = [&] {
        int best = 0;
        for (int k = 1; k < K; ++k)
            if (logits[static_cast<size_t>(k)] > logits[static_cast<size_t>(best)]) best = k;
        return best;
    };
    if (p.temperature <= 1e-6f || p.top_k <= 1) return argmax();

    const int k_eff = std::min(p.top_k, K);
    std::vector<int> idx(static_cast<size_t>(K));
    for (int i = 0; i < K; ++i) idx[static_cast<size_t>(i)] = i;
    std::partial_sort(idx.begin(), idx.begin() + k_eff, idx.end(), [&](int a, int b) {
        return logits[static_cast<size_t>(a)] != logits[static_cast<size_t>(b)]
                   ? logits[static_cast<size_t>(a)] > logits[static_cast<size_t>(b)]
                   : a < b;
    });
    std::vector<double> probs(static_cast<size_t>(k_eff));
    const double mx = logits[static_cast<size_t>(idx[0])];
    double z = 0.0;
    for (int i = 0; i < k_eff; ++i) {
        probs[static_cast<size_t>(i)] =
            std::exp((static_cast<double>(logits[static_cast<size_t>(idx[static_cast<size_t>(i)])]) - mx) / p.temperature);
        z += probs[static_cast<size_t>(i)];
    }
    double u = rng.uniform() * z;
    for (int i = 0; i < k_eff; ++i) {
        u -= probs[static_cast<size_t>(i)];
        if (u <= 0.0) return idx[static_cast<size_t>(i)];
    }
    return idx[static_cast<size_t>(k_eff - 1)];
}

std::vector<int> sample_codes_from_session(InferenceSession& session, const GeneratorModel& model,
                                           const codec::CodecModel& codec, int count,
                                           int next_feed_pos, const GenerationParams& params,
                                           Rng& rng) {
    std::vector<int> codes;
    codes.reserve(static_cast<size_t>(count));
    for (int i = 0; i < count; ++i) {
        const int code = sample_from_logits(session.last_logits(), params, rng);
        codes.push_back(code);
        if (i + 1 < count)
            session.append(embed_code_row(model, codec, code, next_feed_pos + i));
    }
    return codes;
}

}  // namespace

codec::CodeGrid sample_codes(const conditioning::TokenSequence& prefix, const GeneratorModel& model,
                             const codec::CodecModel& codec, const GenerationParams& params) {
    require(prefix.target_codes.empty(), "sample_codes: expected an inference prefix");
    InferenceSession session(model.tf);
    session.append(prefix.embeddings->value);
    Rng rng(params.seed);
    const int cells = codec.config().grid_t * codec.config().grid_f;
    const auto seq = sample_codes_from_session(session, model, codec, cells, prefix.embeddings->value.dim(0),
                                               params, rng);
    return codec::raster_unflatten(seq, codec.config().grid_t, codec.config().grid_f);
}

dsp::Waveform generate_long(const data::VideoClip& input_video, const data::ClipPair& cond,
                            const GeneratorModel& model, const codec::CodecModel& codec,
                            const GenerationParams& params) {
    const int fps = input_video.frame_rate;
    const int frames = input_video.num_frames();
    require(frames % fps == 0, "generate_long: whole-second clips only");
    const int n_sec = frames / fps;
    require(n_sec >= 2, "generate_long: clip must be at least 2 s");

    const int grid_t = codec.config().grid_t;  // per 2 s window
    const int grid_f = codec.config().grid_f;
    const int per_sec = grid_t / 2;
    const int G = per_sec * n_sec;

    // full-video per-frame tokens once; window tokens are slices
    auto full_feats = model.cond.video_net().per_frame_features(nn::constant(input_video.frames));

    nn::Tensor cond_feats;
    dsp::MelSpectrogram cond_mel;
    if (!params.drop_conditioning) {
        cond_feats = conditioning::video_tokens(cond.cond_video, model.cond.video_net());
        cond_mel = dsp::compute_mel_spectrogram(cond.cond_audio, model.mel_cfg);
    }

    Rng rng(params.seed);
    std::vector<int> codes(static_cast<size_t>(G) * grid_f, -1);

    auto window_start = [&](int tt) {
        const int lo = 2 * ((tt - grid_t / 2) / 2);
        return std::clamp(lo, 0, G - grid_t);
    };

    InferenceSession session(model.tf);
    int g0_cur = -1;
    int prefix_rows = 0;
    for (int tt = 0; tt < G; ++tt) {
        const int g0 = window_start(tt);
        if (g0 != g0_cur) {
            g0_cur = g0;
            // rebuild the window prefix: cond blocks + sliced input tokens
            conditioning::BuildOptions opts;
            opts.drop_conditioning = params.drop_conditioning;
            if (!params.drop_conditioning) {
                opts.cond_video_tokens = cond_feats;
                opts.cond_mel = &cond_mel;
            }
            const int frame0 = g0 * fps * 2 / grid_t;  // even g0 keeps this integral
            opts.input_video_tokens =
                slice_rows(full_feats, frame0, model.ccfg.frames_per_clip);
            auto seq = conditioning::build_sequence(cond, std::nullopt, model.cond, codec,
                                                    model.mel_cfg, opts);
            session = InferenceSession(model.tf);
            session.append(seq.embeddings->value);
            prefix_rows = seq.embeddings->value.dim(0);
            // feed codes already generated inside this window
            const int known = (tt - g0) * grid_f;
            for (int i = 0; i < known; ++i)
                session.append(embed_code_row(model, codec,
                                              codes[static_cast<size_t>(g0 * grid_f + i)],
                                              prefix_rows + i));
        }
        for (int ff = 0; ff < grid_f; ++ff) {
            const int local = (tt - g0) * grid_f + ff;
            const int code = sample_from_logits(session.last_logits(), params, rng);
            codes[static_cast<size_t>(tt * grid_f + ff)] = code;
            // the window's final slot is never fed back (nothing left to predict)
            if (local + 1 < grid_t * grid_f)
                session.append(embed_code_row(model, codec, code, prefix_rows + local));
        }
    }

    // decode 2 s windows at 50% overlap and cross-fade columns linearly
    const int cols_per_window = codec.config().in_frames;  // 192
    const int half = cols_per_window / 2;
    const int total_cols = half * n_sec;
    std::vector<codec::CodeGrid> grids;
    for (int w = 0; w + 2 <= n_sec; ++w) {
        codec::CodeGrid g;
        g.grid_t = grid_t;
        g.grid_f = grid_f;
        g.indices.assign(codes.begin() + static_cast<int64_t>(w) * per_sec * grid_f,
                         codes.begin() + static_cast<int64_t>(w) * per_sec * grid_f + grid_t * grid_f);
        grids.push_back(std::move(g));
    }
    const auto window_specs = codec.spectrograms_from_codes(grids);

    dsp::MelSpectrogram full;
    full.num_frames = total_cols;
    full.num_mels = codec.config().in_mels;
    full.num_fft = window_specs[0].num_fft;
    full.hop_length = window_specs[0].hop_length;
    full.sample_rate = window_specs[0].sample_rate;
    full.values.assign(static_cast<size_t>(total_cols) * full.num_mels, 0.0f);
    std::vector<float> wsum(static_cast<size_t>(total_cols), 0.0f);
    for (size_t w = 0; w < window_specs.size(); ++w) {
        const int c0 = static_cast<int>(w) * half;
        for (int c = 0; c < cols_per_window; ++c) {
            const float weight =
                static_cast<float>(std::min(c + 1, cols_per_window - c)) / static_cast<float>(half);
            for (int f = 0; f < full.num_mels; ++f)
                full.at(c0 + c, f) += weight * window_specs[w].at(c, f);
            wsum[static_cast<size_t>(c0 + c)] += weight;
        }
    }
    for (int c = 0; c < total_cols; ++c)
        for (int f = 0; f < full.num_mels; ++f) full.at(c, f) /= std::max(wsum[static_cast<size_t>(c)], 1e-6f);

    auto wave = dsp::griffin_lim_invert(full, params.griffin_lim_iters, params.nnls_iters);
    wave.samples.resize(static_cast<size_t>(n_sec) * wave.sample_rate, 0.0f);
    return wave;
}

dsp::Waveform generate_soundtrack(const data::ClipPair& pair, const GeneratorModel& model,
                                  const codec::CodecModel& codec, const GenerationParams& params) {
    return generate_long(pair.input_video, pair, model, codec, params);
}

std::vector<dsp::Waveform> generate_candidates(const data::ClipPair& pair,
                                               const GeneratorModel& model,
                                               const codec::CodecModel& codec,
                                               const GenerationParams& params, int count) {
    require(count >= 1, "generate_candidates: count must be >= 1");
    conditioning::BuildOptions opts;
    opts.drop_conditioning = params.drop_conditioning;
    auto seq = conditioning::build_sequence(pair, std::nullopt, model.cond, codec, model.mel_cfg, opts);

    InferenceSession base(model.tf);
    base.append(seq.embeddings->value);
    const int prefix_rows = seq.embeddings->value.dim(0);
    const int cells = codec.config().grid_t * codec.config().grid_f;

    // per-candidate seeds drawn up front so threading cannot reorder them
    Rng master(params.seed);
    std::vector<uint64_t> seeds;
    for (int c = 0; c < count; ++c) seeds.push_back(master.next());

    std::vector<codec::CodeGrid> grids(static_cast<size_t>(count));
    const int n_threads = std::max(1, params.threads);
    std::vector<std::thread> workers;
    std::atomic<int> cursor{0};
    for (int t = 0; t < n_threads; ++t)
        workers.emplace_back([&] {
            for (int c = cursor.fetch_add(1); c < count; c = cursor.fetch_add(1)) {
                InferenceSession session = base;
                Rng rng(seeds[static_cast<size_t>(c)]);
                GenerationParams p = params;
                auto seq_codes = sample_codes_from_session(session, model, codec, cells, prefix_rows, p, rng);
                grids[static_cast<size_t>(c)] =
                    codec::raster_unflatten(seq_codes, codec.config().grid_t, codec.config().grid_f);
            }
        });
    for (auto& w : workers) w.join();

    const auto specs = codec.spectrograms_from_codes(grids);
    std::vector<dsp::Waveform> waves(static_cast<size_t>(count));
    std::vector<std::thread> inverters;
    cursor = 0;
    for (int t = 0; t < n_threads; ++t)
        inverters.emplace_back([&] {
            for (int c = cursor.fetch_add(1); c < count; c = cursor.fetch_add(1)) {
                auto w = dsp::griffin_lim_invert(specs[static_cast<size_t>(c)],
                                                 params.griffin_lim_iters, params.nnls_iters);
                w.samples.resize(static_cast<size_t>(2) * w.sample_rate, 0.0f);
                waves[static_cast<size_t>(c)] = std::move(w);
            }
        });
    for (auto& w : inverters) w.join();
    return waves;
}

}  // namespace condfoley::generator
