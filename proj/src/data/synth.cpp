// SPDX-License-Identifier: Apache-2.0
#include "condfoley/data/synth.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "condfoley/data/frames.hpp"
#include "condfoley/dsp/wav.hpp"

namespace condfoley::data {

namespace fs = std::filesystem;

nlohmann::json SynthConfig::to_json() const {
    return {{"materials", materials},     {"num_videos", num_videos},
            {"seed", seed},               {"min_duration", min_duration},
            {"max_duration", max_duration}, {"fps", fps},
            {"width", width},             {"height", height},
            {"sample_rate", sample_rate}, {"min_event_gap", min_event_gap},
            {"max_event_gap", max_event_gap}, {"hue_jitter", hue_jitter},
            {"fixed_duration", fixed_duration}, {"fixed_events", fixed_events},
            {"action_mode", action_mode}};
}

double material_fundamental(int material) {
    return 440.0 * std::pow(2.0, static_cast<double>(material) / 4.0);
}

void render_hit_tone(dsp::Waveform& out, double t0, int material, float amp) {
    const double f0 = material_fundamental(material);
    const int sr = out.sample_rate;
    const auto start = static_cast<int64_t>(std::llround(t0 * sr));
    const auto len = static_cast<int64_t>(0.45 * sr);
    for (int64_t i = 0; i < len && start + i < static_cast<int64_t>(out.samples.size()); ++i) {
        const double t = static_cast<double>(i) / sr;
        double v = 0.0;
        for (int h = 1; h <= 4; ++h) v += (0.6 / h) * std::sin(2.0 * M_PI * f0 * h * t);
        out.samples[static_cast<size_t>(start + i)] +=
            amp * static_cast<float>(v * std::exp(-t / 0.08));
    }
}

void render_scratch_noise(dsp::Waveform& out, double t0, int material, float amp, Rng& rng) {
    const double f0 = material_fundamental(material);
    const int sr = out.sample_rate;
    const auto start = static_cast<int64_t>(std::llround(t0 * sr));
    const auto len = static_cast<int64_t>(0.3 * sr);
    constexpr int kPartials = 40;
    double freq[kPartials], phase[kPartials];
    for (int p = 0; p < kPartials; ++p) {
        freq[p] = f0 * std::pow(2.0, rng.uniform(-0.125, 0.125));  // quarter-octave band
        phase[p] = rng.uniform(0.0, 2.0 * M_PI);
    }
    std::vector<double> raw(static_cast<size_t>(len));
    for (int64_t i = 0; i < len; ++i) {
        const double t = static_cast<double>(i) / sr;
        double v = 0.0;
        for (int p = 0; p < kPartials; ++p) v += std::sin(2.0 * M_PI * freq[p] * t + phase[p]);
        raw[static_cast<size_t>(i)] = v;
    }
    // Flatten the band noise with a moving-RMS normalizer; narrowband phasor
    // sums fade deeply, and those fades would read as spurious onsets.
    const int64_t win = sr * 15 / 1000;
    std::vector<double> flat(static_cast<size_t>(len));
    for (int64_t i = 0; i < len; ++i) {
        const int64_t a = std::max<int64_t>(0, i - win / 2);
        const int64_t b = std::min<int64_t>(len - 1, i + win / 2);
        double acc = 0.0;
        for (int64_t j = a; j <= b; ++j) acc += raw[static_cast<size_t>(j)] * raw[static_cast<size_t>(j)];
        const double rms = std::sqrt(acc / static_cast<double>(b - a + 1));
        flat[static_cast<size_t>(i)] = raw[static_cast<size_t>(i)] / std::max(rms, 1e-4);
    }
    const double att = 0.01, rel = 0.14;
    for (int64_t i = 0; i < len && start + i < static_cast<int64_t>(out.samples.size()); ++i) {
        const double t = static_cast<double>(i) / sr;
        const double t_left = 0.3 - t;
        double env = 1.0;
        if (t < att) env = t / att;
        else if (t_left < rel) env = t_left / rel;
        out.samples[static_cast<size_t>(start + i)] += amp * static_cast<float>(0.5 * env * flat[static_cast<size_t>(i)]);
    }
}

namespace {

void hsv_to_rgb(double h, double s, double v, uint8_t* rgb) {
    h = h - std::floor(h);
    const double c = v * s;
    const double hp = h * 6.0;
    const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (hp < 1) { r = c; g = x; }
    else if (hp < 2) { r = x; g = c; }
    else if (hp < 3) { g = c; b = x; }
    else if (hp < 4) { g = x; b = c; }
    else if (hp < 5) { r = x; b = c; }
    else { r = c; b = x; }
    rgb[0] = static_cast<uint8_t>(std::lround((r + v - c) * 255.0));
    rgb[1] = static_cast<uint8_t>(std::lround((g + v - c) * 255.0));
    rgb[2] = static_cast<uint8_t>(std::lround((b + v - c) * 255.0));
}

void draw_disc(Image& img, double cx, double cy, double radius, const uint8_t* color) {
    const int y0 = std::max(0, static_cast<int>(cy - radius - 1));
    const int y1 = std::min(img.height - 1, static_cast<int>(cy + radius + 1));
    const int x0 = std::max(0, static_cast<int>(cx - radius - 1));
    const int x1 = std::min(img.width - 1, static_cast<int>(cx + radius + 1));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double d = std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy));
            double a = radius + 0.5 - d;  // 1px anti-aliased edge
            if (a <= 0.0) continue;
            a = std::min(a, 1.0);
            uint8_t* px = img.px(y, x);
            for (int c = 0; c < 3; ++c)
                px[c] = static_cast<uint8_t>(std::lround(px[c] * (1.0 - a) + color[c] * a));
        }
}

struct EventTrack {
    std::vector<double> times;
    std::vector<double> x_pos;  // event anchor x
    std::vector<float> amps;
};

EventTrack plan_events(const SynthConfig& cfg, double duration, Rng& rng) {
    EventTrack ev;
    const double frame_dt = 1.0 / cfg.fps;
    auto snap = [&](double t) { return std::round(t * cfg.fps) * frame_dt; };
    if (cfg.fixed_events > 0) {
        const double usable = duration - 1.4;
        for (int i = 0; i < cfg.fixed_events; ++i) {
            double t = 0.6 + usable * (i + 0.35 + 0.3 * rng.uniform()) / cfg.fixed_events;
            ev.times.push_back(snap(t));
        }
    } else {
        double t = 0.5 + rng.uniform(0.0, 0.4);
        while (t < duration - 0.8) {
            ev.times.push_back(snap(t));
            t += rng.uniform(cfg.min_event_gap, cfg.max_event_gap);
        }
    }
    for (size_t i = 0; i < ev.times.size(); ++i) {
        ev.x_pos.push_back(rng.uniform(24.0, cfg.width - 24.0));
        ev.amps.push_back(static_cast<float>(rng.uniform(0.55, 0.8)));
    }
    return ev;
}

void generate_record(const SynthConfig& cfg, const std::string& root, VideoRecord& rec, Rng rng) {
    const double duration = cfg.fixed_duration > 0.0
                                ? cfg.fixed_duration
                                : rng.uniform(cfg.min_duration, cfg.max_duration);
    rec.frame_count = static_cast<int>(std::lround(duration * cfg.fps));
    rec.duration = static_cast<double>(rec.frame_count) / cfg.fps;
    rec.frame_rate = cfg.fps;
    rec.has_labels = true;

    const EventTrack ev = plan_events(cfg, rec.duration, rng);
    rec.impact_times = ev.times;

    // audio
    dsp::Waveform wav;
    wav.sample_rate = cfg.sample_rate;
    wav.samples.assign(static_cast<size_t>(rec.duration * cfg.sample_rate), 0.0f);
    for (size_t i = 0; i < ev.times.size(); ++i) {
        if (rec.action == Action::kHit)
            render_hit_tone(wav, ev.times[i], rec.material, ev.amps[i]);
        else
            render_scratch_noise(wav, ev.times[i], rec.material, ev.amps[i], rng);
    }
    for (auto& s : wav.samples) s = std::clamp(s, -1.0f, 1.0f);

    const fs::path dir = fs::path(root) / rec.id;
    fs::create_directories(dir / "frames");
    dsp::write_wav((dir / "audio.wav").string(), wav);
    rec.wav_path = rec.id + "/audio.wav";
    rec.frames_dir = rec.id + "/frames";

    // video
    const double surface_y = 0.75 * cfg.height;
    const double hue = (static_cast<double>(rec.material) +
                        rng.uniform(-cfg.hue_jitter, cfg.hue_jitter) * cfg.materials) /
                       cfg.materials;
    uint8_t band_color[3];
    hsv_to_rgb(hue, 0.55, 0.55 + rng.uniform(-0.05, 0.05), band_color);
    const uint8_t bg[3] = {26, 26, 32};
    const uint8_t disc_color[3] = {232, 232, 236};
    const double radius = 7.0;
    const double rest_y = surface_y - radius - 34.0;
    const double contact_y = surface_y - radius;

    Image img;
    img.width = cfg.width;
    img.height = cfg.height;
    img.rgb.resize(static_cast<size_t>(cfg.width) * cfg.height * 3);

    char name[32];
    for (int fidx = 0; fidx < rec.frame_count; ++fidx) {
        const double t = static_cast<double>(fidx) / cfg.fps;
        // background + surface band
        for (int y = 0; y < cfg.height; ++y) {
            const uint8_t* src = y >= static_cast<int>(surface_y) ? band_color : bg;
            for (int x = 0; x < cfg.width; ++x) {
                uint8_t* px = img.px(y, x);
                px[0] = src[0];
                px[1] = src[1];
                px[2] = src[2];
            }
        }
        // striker position: event windows animate the contact, the spans
        // between them travel linearly toward the next anchor
        double cy = rec.action == Action::kHit ? rest_y : contact_y;
        const double half_win = rec.action == Action::kHit ? 0.35 : 0.0;
        const double win_len = rec.action == Action::kHit ? 0.35 : 0.3;
        auto anchor_x = [&](size_t i) {
            return rec.action == Action::kHit ? ev.x_pos[i] : ev.x_pos[i] - 15.0;
        };
        double cx = ev.x_pos.empty() ? cfg.width / 2.0 : anchor_x(0);
        for (size_t i = 0; i < ev.times.size(); ++i) {
            const double w0 = ev.times[i] - half_win;
            const double w1 = ev.times[i] + win_len;
            if (t < w0) {
                if (i == 0) break;  // still resting at the first anchor
                // travel from the previous event's end toward this anchor
                const double p0 = ev.times[i - 1] + (rec.action == Action::kHit ? 0.35 : 0.3);
                const double u = std::clamp((t - p0) / std::max(w0 - p0, 1e-6), 0.0, 1.0);
                const double from = rec.action == Action::kHit ? ev.x_pos[i - 1] : ev.x_pos[i - 1] + 15.0;
                cx = from + (anchor_x(i) - from) * u;
                break;
            }
            if (t <= w1) {
                if (rec.action == Action::kHit) {
                    cx = ev.x_pos[i];
                    const double u = (t - ev.times[i]) / 0.35;
                    cy = contact_y - (contact_y - rest_y) * u * u;
                } else {
                    const double u = std::clamp((t - ev.times[i]) / 0.3, 0.0, 1.0);
                    cx = ev.x_pos[i] - 15.0 + 30.0 * u;
                }
                break;
            }
            cx = rec.action == Action::kHit ? ev.x_pos[i] : ev.x_pos[i] + 15.0;
        }
        draw_disc(img, cx, cy, radius, disc_color);

        std::snprintf(name, sizeof(name), "/frame_%05d.png", fidx);
        write_png((dir / "frames").string() + name, img);
    }

    // per-record sidecar
    nlohmann::json meta;
    meta["schema_version"] = DatasetManifest::kSchemaVersion;
    meta["id"] = rec.id;
    meta["duration"] = rec.duration;
    meta["frame_rate"] = rec.frame_rate;
    meta["material"] = rec.material;
    meta["action"] = action_name(rec.action);
    meta["impact_times"] = rec.impact_times;
    std::ofstream mf(dir / "meta.json");
    mf << meta.dump(2) << "\n";
}

}  // namespace

DatasetManifest synth_generate_dataset(const SynthConfig& cfg, const std::string& out_root) {
    require(cfg.materials >= 2, "synth: need at least 2 materials");
    require(cfg.num_videos >= 2, "synth: need at least 2 videos");
    fs::create_directories(out_root);

    DatasetManifest m;
    m.root = out_root;
    m.corpus_params = cfg.to_json();
    m.records.resize(static_cast<size_t>(cfg.num_videos));

    Rng master(cfg.seed);
    std::vector<Rng> per_record;
    for (int i = 0; i < cfg.num_videos; ++i) per_record.push_back(master.fork(static_cast<uint64_t>(i)));

    for (int i = 0; i < cfg.num_videos; ++i) {
        auto& rec = m.records[static_cast<size_t>(i)];
        char id[24];
        std::snprintf(id, sizeof(id), "vid_%04d", i);
        rec.id = id;
        rec.material = i % cfg.materials;
        if (cfg.action_mode == 0) rec.action = Action::kHit;
        else if (cfg.action_mode == 1) rec.action = Action::kScratch;
        else rec.action = ((i % cfg.materials + i / cfg.materials) % 2 == 0) ? Action::kHit
                                                                             : Action::kScratch;
    }

    // parallel per record; each record owns a forked stream
    const int n_threads = std::max(1, cfg.threads);
    std::vector<std::thread> workers;
    std::atomic<int> next{0};
    for (int t = 0; t < n_threads; ++t)
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < cfg.num_videos; i = next.fetch_add(1))
                generate_record(cfg, out_root, m.records[static_cast<size_t>(i)], per_record[static_cast<size_t>(i)]);
        });
    for (auto& w : workers) w.join();

    // splits disjoint by source video: deterministic shuffle then 80/10/10
    std::vector<int> order(static_cast<size_t>(cfg.num_videos));
    for (int i = 0; i < cfg.num_videos; ++i) order[static_cast<size_t>(i)] = i;
    Rng split_rng(cfg.seed ^ 0x5b1ce5UL);
    for (int i = cfg.num_videos - 1; i > 0; --i)
        std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(split_rng.uniform_int(0, i))]);
    const int n_test = cfg.num_videos >= 8 ? std::max(2, cfg.num_videos / 10) : 1;
    const int n_val = std::max(1, cfg.num_videos / 10);
    for (int i = 0; i < cfg.num_videos; ++i) {
        const auto& id = m.records[static_cast<size_t>(order[static_cast<size_t>(i)])].id;
        if (i < n_test) m.test_ids.push_back(id);
        else if (i < n_test + n_val) m.val_ids.push_back(id);
        else m.train_ids.push_back(id);
    }
    std::sort(m.test_ids.begin(), m.test_ids.end());
    std::sort(m.val_ids.begin(), m.val_ids.end());
    std::sort(m.train_ids.begin(), m.train_ids.end());

    save_manifest(m);
    return m;
}

}  // namespace condfoley::data
