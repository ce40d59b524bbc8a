// SPDX-License-Identifier: Apache-2.0
#include "condfoley/baselines/onset_transfer.hpp"

#include <algorithm>
#include <cmath>

namespace condfoley::baselines {

dsp::Waveform onset_transfer_generate(const data::VideoClip& input_video,
                                      const data::VideoClip& cond_video,
                                      const dsp::Waveform& cond_audio, const OnsetNet& net,
                                      const OnsetTransferParams& params) {
    const auto input_onsets = net.detect_video_onsets(input_video, params.threshold, params.nms_frames);
    const auto cond_onsets = net.detect_video_onsets(cond_video, params.threshold, params.nms_frames);
    if (cond_onsets.empty())
        throw std::runtime_error(
            "onset_transfer: no onsets detected in the conditional video; the copy-paste "
            "baseline needs discrete sound events");

    const int sr = cond_audio.sample_rate;
    // snippet per conditional onset: up to the next onset or the cap
    struct Snippet {
        int64_t start, len;
    };
    std::vector<Snippet> snippets;
    for (size_t i = 0; i < cond_onsets.size(); ++i) {
        const double t0 = cond_onsets[i];
        double t1 = t0 + params.max_snippet;
        if (i + 1 < cond_onsets.size()) t1 = std::min(t1, cond_onsets[i + 1]);
        t1 = std::min(t1, cond_audio.duration());
        const auto s0 = static_cast<int64_t>(t0 * sr);
        const auto len = std::max<int64_t>(0, static_cast<int64_t>(t1 * sr) - s0);
        if (len > 0) snippets.push_back({s0, len});
    }
    require(!snippets.empty(), "onset_transfer: conditional onsets yielded no audio snippets");

    dsp::Waveform out;
    out.sample_rate = sr;
    out.samples.assign(static_cast<size_t>(input_video.duration() * sr), 0.0f);

    Rng rng(params.seed);
    for (double t : input_onsets) {
        const auto& sn = snippets[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(snippets.size()) - 1))];
        const auto dst0 = static_cast<int64_t>(t * sr);
        for (int64_t i = 0; i < sn.len && dst0 + i < static_cast<int64_t>(out.samples.size()); ++i)
            out.samples[static_cast<size_t>(dst0 + i)] += cond_audio.samples[static_cast<size_t>(sn.start + i)];
    }

    // overlaps summed, then peak-normalized into range
    float peak = 0.0f;
    for (float s : out.samples) peak = std::max(peak, std::abs(s));
    if (peak > 0.99f)
        for (auto& s : out.samples) s *= 0.99f / peak;
    return out;
}

}  // namespace condfoley::baselines
