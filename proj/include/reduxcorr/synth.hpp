#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reduxcorr/util.hpp"

namespace reduxcorr::synth {

// Deterministic mini-corpus generator: a desk-scale stand-in for a real
// labeled dialog corpus. Each conversation is a two-channel WAV of
// interleaved silence, harmonic tones (vibrato + planted spectral rolloff),
// noise bursts, and jittered pulse trains. Tone segments carry reduction
// labels derived from a planted linear score over the segment parameters,
// plus a confusion-noised second-annotator copy and pragmatic-function tags.
struct SynthConfig {
    std::uint64_t seed = 1;
    int conversations = 4;
    double duration_s = 150.0;
    std::uint32_t sample_rate = 16000;
    std::string out_dir;
};

struct SynthSummary {
    std::vector<std::string> conversation_ids;
    std::string manifest_path;
    std::string ground_truth_path;
};

SynthSummary generate_corpus(const SynthConfig& config);

// Planted label model: score = w_f0*f0height + w_loud*loudness + w_flat*flatness
// + gaussian noise, quantized at the thresholds into levels 0..3.
constexpr double kWeightF0 = 0.40;
constexpr double kWeightLoud = 0.35;
constexpr double kWeightFlat = 0.25;
constexpr double kLabelNoiseSd = 0.08;
constexpr double kThresholds[3] = {0.30, 0.50, 0.70};

// Signal building blocks, exposed for tests.
std::vector<float> make_tone(std::uint32_t rate, double seconds, double f0_hz, double amp_db,
                             double rolloff_db_per_oct, double vibrato_depth = 0.0,
                             double vibrato_hz = 5.0);
std::vector<float> make_noise(std::uint32_t rate, double seconds, double amp_db, Rng& rng);
// Pulse train with alternating periods (period_a_ms, period_b_ms).
std::vector<float> make_pulse_train(std::uint32_t rate, double seconds, double period_a_ms,
                                    double period_b_ms, double amp);

}  // namespace reduxcorr::synth
