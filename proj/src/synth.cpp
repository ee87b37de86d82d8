#include "reduxcorr/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "reduxcorr/annotations.hpp"
#include "reduxcorr/wav.hpp"

namespace reduxcorr::synth {

namespace {

constexpr double kPi = 3.14159265358979323846;

double db_to_amp(double db) { return std::pow(10.0, db / 20.0); }

// Short raised-cosine fades so segment edges don't click.
void apply_fades(std::vector<float>& samples, std::uint32_t rate) {
    const std::size_t ramp = std::min<std::size_t>(rate / 100, samples.size() / 2);
    for (std::size_t i = 0; i < ramp; ++i) {
        const auto g = static_cast<float>(0.5 - 0.5 * std::cos(kPi * static_cast<double>(i) /
                                                               static_cast<double>(ramp)));
        samples[i] *= g;
        samples[samples.size() - 1 - i] *= g;
    }
}

struct Segment {
    std::string kind;  // tone | noise | pulse
    double start_s = 0;
    double end_s = 0;
    double f0_hz = 0;
    double amp_db = 0;
    double rolloff = 0;  // dB/octave
    double score = 0;
    int level = -1;  // reduction label; -1 for unlabeled segment kinds
};

struct ChannelPlan {
    std::vector<float> samples;
    std::vector<Segment> segments;
};

ChannelPlan plan_channel(const SynthConfig& config, Rng& rng) {
    const std::uint32_t rate = config.sample_rate;
    const auto total = static_cast<std::size_t>(config.duration_s * rate);
    ChannelPlan plan;
    plan.samples.assign(total, 0.0f);

    double t = 0.0;
    while (t < config.duration_s - 1.0) {
        t += rng.uniform(0.2, 0.8);  // leading silence
        if (t >= config.duration_s - 1.0) break;

        Segment seg;
        seg.start_s = t;
        const double pick = rng.uniform();
        std::vector<float> chunk;
        if (pick < 0.65) {
            seg.kind = "tone";
            const double dur = rng.uniform(0.6, 2.5);
            seg.f0_hz = rng.uniform(110.0, 320.0);
            seg.amp_db = rng.uniform(-30.0, -8.0);
            seg.rolloff = rng.uniform(-12.0, -2.0);
            chunk = make_tone(rate, dur, seg.f0_hz, seg.amp_db, seg.rolloff, 0.02, 5.0);

            // Planted label: linear score over the normalized segment
            // parameters plus noise, quantized into 0..3.
            const double f0h = (seg.f0_hz - 110.0) / 210.0;
            const double loud = (seg.amp_db + 30.0) / 22.0;
            const double flat = (seg.rolloff + 12.0) / 10.0;
            seg.score = kWeightF0 * f0h + kWeightLoud * loud + kWeightFlat * flat +
                        rng.gaussian(0.0, kLabelNoiseSd);
            seg.level = 0;
            for (double threshold : kThresholds) {
                if (seg.score >= threshold) ++seg.level;
            }
        } else if (pick < 0.85) {
            seg.kind = "noise";
            const double dur = rng.uniform(0.4, 1.5);
            seg.amp_db = rng.uniform(-26.0, -10.0);
            chunk = make_noise(rate, dur, seg.amp_db, rng);
        } else {
            seg.kind = "pulse";
            const double dur = rng.uniform(0.4, 1.0);
            seg.amp_db = rng.uniform(-20.0, -10.0);
            const double pa = rng.uniform(6.0, 10.0);
            const double pb = pa * rng.uniform(1.3, 1.6);
            seg.f0_hz = 2000.0 / (pa + pb);  // mean rate of the alternating train
            chunk = make_pulse_train(rate, dur, pa, pb, db_to_amp(seg.amp_db));
        }

        const auto start = static_cast<std::size_t>(seg.start_s * rate);
        const std::size_t len = std::min(chunk.size(), total - start);
        std::copy(chunk.begin(), chunk.begin() + static_cast<std::ptrdiff_t>(len),
                  plan.samples.begin() + static_cast<std::ptrdiff_t>(start));
        seg.end_s = seg.start_s + static_cast<double>(len) / rate;
        t = seg.end_s;
        plan.segments.push_back(seg);
    }
    return plan;
}

int confused_level(int level, Rng& rng) {
    const double u = rng.uniform();
    if (u < 0.60) return level;
    if (u < 0.78) return std::min(level + 1, 3);
    if (u < 0.92) return std::max(level - 1, 0);
    return static_cast<int>(rng.uniform_int(0, 3));
}

// Pragmatic-function tag for a labeled region, biased by level so some tags
// genuinely sit above/below the global mean reduction.
const char* pick_tag(int level, Rng& rng) {
    static const char* high[] = {"UC", "TC", "DP", "TG"};
    static const char* low[] = {"PO", "FI", "PC", "RE", "PW", "PF", "NEG"};
    if (level >= 2 && rng.uniform() < 0.7) {
        return high[rng.uniform_int(0, 3)];
    }
    if (level <= 1 && rng.uniform() < 0.7) {
        return low[rng.uniform_int(0, 6)];
    }
    return annotations::kFunctionTags[static_cast<std::size_t>(rng.uniform_int(0, 10))];
}

}  // namespace

std::vector<float> make_tone(std::uint32_t rate, double seconds, double f0_hz, double amp_db,
                             double rolloff_db_per_oct, double vibrato_depth, double vibrato_hz) {
    const auto len = static_cast<std::size_t>(seconds * rate);
    std::vector<float> out(len);
    const double amp = db_to_amp(amp_db);

    // Harmonic stack with per-octave rolloff; keep clear of Nyquist even at
    // the vibrato's highest excursion.
    const double f_max = f0_hz * (1.0 + vibrato_depth);
    const int harmonics = std::max(1, std::min(12, static_cast<int>(0.45 * rate / f_max)));
    std::vector<double> gains(static_cast<std::size_t>(harmonics));
    double norm = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
        gains[static_cast<std::size_t>(h - 1)] =
            std::pow(10.0, rolloff_db_per_oct * std::log2(static_cast<double>(h)) / 20.0);
        norm += gains[static_cast<std::size_t>(h - 1)];
    }
    for (auto& g : gains) g *= amp / norm;

    double phase = 0.0;
    const double dt = 1.0 / rate;
    for (std::size_t i = 0; i < len; ++i) {
        const double tt = static_cast<double>(i) * dt;
        const double f = f0_hz * (1.0 + vibrato_depth * std::sin(2.0 * kPi * vibrato_hz * tt));
        phase += 2.0 * kPi * f * dt;
        double s = 0.0;
        for (int h = 1; h <= harmonics; ++h) {
            s += gains[static_cast<std::size_t>(h - 1)] * std::sin(phase * h);
        }
        out[i] = static_cast<float>(s);
    }
    apply_fades(out, rate);
    return out;
}

std::vector<float> make_noise(std::uint32_t rate, double seconds, double amp_db, Rng& rng) {
    const auto len = static_cast<std::size_t>(seconds * rate);
    std::vector<float> out(len);
    // Uniform white noise scaled so its RMS matches amp_db (uniform RMS is
    // peak/sqrt(3)).
    const double peak = db_to_amp(amp_db) * std::sqrt(3.0);
    for (auto& s : out) s = static_cast<float>(peak * rng.uniform(-1.0, 1.0));
    apply_fades(out, rate);
    return out;
}

std::vector<float> make_pulse_train(std::uint32_t rate, double seconds, double period_a_ms,
                                    double period_b_ms, double amp) {
    const auto len = static_cast<std::size_t>(seconds * rate);
    std::vector<float> out(len, 0.0f);
    // Exponentially decaying clicks at alternating intervals: strong period
    // jitter, the classic creak signature.
    const double decay = 1500.0;  // 1/s
    double t = 0.0;
    bool use_a = true;
    while (t < seconds) {
        const auto start = static_cast<std::size_t>(t * rate);
        const auto tail = std::min<std::size_t>(len - start, rate / 200);  // 5 ms
        for (std::size_t i = 0; i < tail; ++i) {
            const double e = amp * std::exp(-decay * static_cast<double>(i) / rate);
            out[start + i] += static_cast<float>(e);
        }
        t += (use_a ? period_a_ms : period_b_ms) / 1000.0;
        use_a = !use_a;
    }
    apply_fades(out, rate);
    return out;
}

SynthSummary generate_corpus(const SynthConfig& config) {
    namespace fs = std::filesystem;
    if (config.out_dir.empty()) throw std::invalid_argument("synth: output directory required");
    if (config.conversations < 1) throw std::invalid_argument("synth: need >= 1 conversation");
    if (config.duration_s < 5.0) throw std::invalid_argument("synth: duration too short");
    const fs::path root(config.out_dir);
    fs::create_directories(root / "audio");

    SynthSummary summary;
    std::ofstream manifest(root / "manifest.csv", std::ios::trunc);
    std::ofstream truth(root / "ground_truth.txt", std::ios::trunc);
    if (!manifest || !truth) throw std::runtime_error("synth: cannot write into " + config.out_dir);

    truth << "seed=" << config.seed << "\n";
    truth << "w_f0=" << fmt_num(kWeightF0) << "\n";
    truth << "w_loud=" << fmt_num(kWeightLoud) << "\n";
    truth << "w_flat=" << fmt_num(kWeightFlat) << "\n";
    truth << "noise_sd=" << fmt_num(kLabelNoiseSd) << "\n";
    truth << "thresholds=" << fmt_num(kThresholds[0]) << ';' << fmt_num(kThresholds[1]) << ';'
          << fmt_num(kThresholds[2]) << "\n";
    truth << "conversation,channel,start_ms,end_ms,kind,f0_hz,amp_db,rolloff_db_per_oct,score,level\n";

    for (int c = 0; c < config.conversations; ++c) {
        char id[16];
        std::snprintf(id, sizeof(id), "SYN_%03d", c + 1);
        summary.conversation_ids.emplace_back(id);

        std::vector<std::vector<float>> channels;
        std::ofstream reduction(root / "audio" / (std::string(id) + ".reduction.csv"),
                                std::ios::trunc);
        std::ofstream reduction_b(root / "audio" / (std::string(id) + ".reduction_b.csv"),
                                  std::ios::trunc);
        std::ofstream functions(root / "audio" / (std::string(id) + ".functions.csv"),
                                std::ios::trunc);
        reduction << "channel,start_ms,end_ms,label\n";
        reduction_b << "channel,start_ms,end_ms,label\n";
        functions << "channel,start_ms,end_ms,tag\n";

        for (int ch = 0; ch < 2; ++ch) {
            const char* channel = ch == 0 ? "left" : "right";
            // One self-contained stream per (conversation, channel): results
            // never depend on generation order.
            Rng rng(config.seed * 1000003ull + static_cast<std::uint64_t>(c) * 2ull +
                    static_cast<std::uint64_t>(ch));
            auto plan = plan_channel(config, rng);

            for (const auto& seg : plan.segments) {
                const auto start_ms = static_cast<long long>(std::llround(seg.start_s * 1000.0));
                const auto end_ms = static_cast<long long>(std::llround(seg.end_s * 1000.0));
                if (end_ms <= start_ms) continue;
                truth << id << ',' << channel << ',' << start_ms << ',' << end_ms << ','
                      << seg.kind << ',' << fmt_num(seg.f0_hz) << ',' << fmt_num(seg.amp_db)
                      << ',' << fmt_num(seg.rolloff) << ',' << fmt_num(seg.score) << ','
                      << seg.level << "\n";
                if (seg.level < 0) continue;
                reduction << channel << ',' << start_ms << ',' << end_ms << ',' << seg.level
                          << "\n";
                reduction_b << channel << ',' << start_ms << ',' << end_ms << ','
                            << confused_level(seg.level, rng) << "\n";
                if (rng.uniform() < 0.5) {
                    functions << channel << ',' << start_ms << ',' << end_ms << ','
                              << pick_tag(seg.level, rng) << "\n";
                }
            }
            channels.push_back(std::move(plan.samples));
        }

        const std::string wav_rel = "audio/" + std::string(id) + ".wav";
        wav::write_wav_pcm16((root / wav_rel).string(), config.sample_rate, channels);
        manifest << id << ',' << wav_rel << ",0," << static_cast<long long>(config.duration_s * 1000)
                 << "\n";
    }

    summary.manifest_path = (root / "manifest.csv").string();
    summary.ground_truth_path = (root / "ground_truth.txt").string();
    if (!manifest || !truth) throw std::runtime_error("synth: write failed in " + config.out_dir);
    return summary;
}

}  // namespace reduxcorr::synth
