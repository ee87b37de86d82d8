#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "reduxcorr/base_signals.hpp"

namespace reduxcorr::midlevel {

// The 17 window-level prosodic features, in canonical (column) order.
enum class FeatureKind {
    tl,  // pitch lowness vs speaker p25/p10
    th,  // pitch highness vs speaker p75/p90
    vo,  // speaker-normalized intensity
    np,  // narrow pitch range
    wp,  // wide pitch range
    cr,  // creakiness
    vf,  // voicing fraction
    re,  // cepstral closeness to the speaker mean
    en,  // cepstral distance from the speaker mean
    le,  // lengthening (inverse cepstral flux)
    sr,  // speaking-rate proxy: mean |delta intensity|
    sf,  // speech fraction
    pd,  // pitch-peak / intensity-peak disalignment
    st,  // mean spectral tilt
    tr,  // tilt range
    tf,  // tilt above speaker median
    tm,  // tilt near speaker median
};
constexpr int kNumKinds = 17;
constexpr int kNumSpans = 5;
constexpr int kNumFeatures = kNumKinds * kNumSpans;  // 85

const char* kind_code(FeatureKind kind);  // "tl", "th", ...

// Context windows in frame offsets relative to the predicted frame f:
// A [f-25,f-10), B [f-10,f-2), C [f-2,f+2), D [f+2,f+10), E [f+10,f+25)
// (i.e. -250~-100, -100~-20, -20~20, 20~100, 100~250 ms at the 10 ms hop).
struct SpanDef {
    char code;
    int begin_off;
    int end_off;
};
constexpr std::array<SpanDef, kNumSpans> kSpans = {{
    {'A', -25, -10},
    {'B', -10, -2},
    {'C', -2, 2},
    {'D', 2, 10},
    {'E', 10, 25},
}};

struct WindowFeature {
    double value = 0.0;
    double coverage = 0.0;  // qualifying frames / nominal window size
};

// Evaluates one feature over the nominal frame range [frame_begin, frame_end)
// (clipped to the channel internally). No qualifying frame -> {0, 0}.
// Notes on qualification: tl/th/np/wp/cr/re/en average over voiced frames;
// vo/sf count speech frames; le/sr need the predecessor frame (which may lie
// just outside the window) to also be speech; vf needs >= 1 speech frame;
// pd needs a voiced and a speech frame; st/tr/tf/tm use frames with a tilt
// estimate. sf's denominator is the clipped window (silence is informative),
// so its coverage only reflects edge clipping.
WindowFeature feature_over_window(FeatureKind kind, std::int64_t frame_begin,
                                  std::int64_t frame_end,
                                  const base_signals::BaseSignals& signals,
                                  const base_signals::SpeakerBaseline& baseline);

// 85 values + coverages, kind-major / span-minor (tl_A, tl_B, ..., tm_E).
struct FeatureVector {
    std::array<double, kNumFeatures> values{};
    std::array<double, kNumFeatures> coverage{};
    std::size_t frame = 0;
    bool baseline_reliable = true;
};

FeatureVector assemble_vector(std::size_t frame, const base_signals::BaseSignals& signals,
                              const base_signals::SpeakerBaseline& baseline);

// One FeatureVector per frame of [frame_begin, frame_end).
std::vector<FeatureVector> feature_matrix(const base_signals::BaseSignals& signals,
                                          const base_signals::SpeakerBaseline& baseline,
                                          std::size_t frame_begin, std::size_t frame_end);

// Canonical 85 column names ("tl_A".."tm_E") and their order checksum
// (FNV-1a of the comma-joined names), used to guard model/feature pairings.
const std::vector<std::string>& column_names();
std::uint64_t columns_checksum();

// Feature-matrix CSV. Header:
// conversation,channel,frame,tl_A,...,tm_E,coverage_min
struct FeatureRow {
    std::string conversation;
    std::string channel;  // "left" / "right"
    std::size_t frame = 0;
    std::array<double, kNumFeatures> values{};
    double coverage_min = 0.0;
};

void write_feature_csv(const std::string& path, const std::string& conversation,
                       const std::string& channel, const std::vector<FeatureVector>& rows);
std::vector<FeatureRow> read_feature_csv(const std::string& path);

}  // namespace reduxcorr::midlevel
