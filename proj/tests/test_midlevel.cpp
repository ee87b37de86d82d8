#include <array>
#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "reduxcorr/midlevel.hpp"
#include "reduxcorr/util.hpp"
#include "test_support.hpp"

using reduxcorr::Rng;
namespace base_signals = reduxcorr::base_signals;
namespace midlevel = reduxcorr::midlevel;
using base_signals::BaseSignals;
using base_signals::SpeakerBaseline;
using midlevel::FeatureKind;

namespace {

// A fixture honoring the production invariants: voiced frames are speech
// frames, pitch is positive exactly where voiced, creak lives on voiced
// frames, tilt values exist only where has_tilt is set.
BaseSignals random_signals(std::size_t frames, std::uint64_t seed) {
    Rng rng(seed);
    BaseSignals bs;
    bs.frame_count = frames;
    bs.sample_rate = 16000;
    bs.pitch_hz.assign(frames, 0.0f);
    bs.voiced.assign(frames, 0);
    bs.intensity_db.assign(frames, -96.0f);
    bs.cepstrum.assign(frames * base_signals::kCepstrumOrder, 0.0);
    bs.tilt_db_per_oct.assign(frames, 0.0f);
    bs.has_tilt.assign(frames, 0);
    bs.speech.assign(frames, 0);
    bs.creak.assign(frames, 0.0f);
    for (std::size_t f = 0; f < frames; ++f) {
        const bool speech = rng.uniform() < 0.7;
        bs.speech[f] = speech;
        if (speech) {
            bs.intensity_db[f] = static_cast<float>(rng.uniform(-60.0, -10.0));
            const bool voiced = rng.uniform() < 0.7;
            bs.voiced[f] = voiced;
            if (voiced) {
                bs.pitch_hz[f] = static_cast<float>(rng.uniform(80.0, 400.0));
                bs.creak[f] = static_cast<float>(rng.uniform(0.0, 1.0));
            }
            if (rng.uniform() < 0.8) {
                bs.has_tilt[f] = 1;
                bs.tilt_db_per_oct[f] = static_cast<float>(rng.uniform(-14.0, 2.0));
            }
            for (int q = 0; q < base_signals::kCepstrumOrder; ++q) {
                bs.cepstrum[f * base_signals::kCepstrumOrder + static_cast<std::size_t>(q)] =
                    rng.uniform(-2.0, 2.0);
            }
        }
    }
    return bs;
}

// Minimal fixture: everything silent/unvoiced until individual frames are set.
BaseSignals blank_signals(std::size_t frames) {
    BaseSignals bs;
    bs.frame_count = frames;
    bs.sample_rate = 16000;
    bs.pitch_hz.assign(frames, 0.0f);
    bs.voiced.assign(frames, 0);
    bs.intensity_db.assign(frames, -96.0f);
    bs.cepstrum.assign(frames * base_signals::kCepstrumOrder, 0.0);
    bs.tilt_db_per_oct.assign(frames, 0.0f);
    bs.has_tilt.assign(frames, 0);
    bs.speech.assign(frames, 0);
    bs.creak.assign(frames, 0.0f);
    return bs;
}

SpeakerBaseline simple_baseline() {
    SpeakerBaseline b;
    b.pitch_p10 = 100;
    b.pitch_p25 = 150;
    b.pitch_p50 = 200;
    b.pitch_p75 = 250;
    b.pitch_p90 = 300;
    b.intensity_mean = -30;
    b.intensity_sd = 5;
    b.mean_cepstrum.fill(0.0);
    b.tilt_median = -4;
    b.tilt_iqr = 2;
    b.cepstral_delta = 1.0;
    b.flux_phi = 1.0;
    b.reliable = true;
    return b;
}

}  // namespace

TEST_CASE("assembled vectors equal independent per-window calls, exactly") {
    const auto bs = random_signals(400, 99);
    const auto b = base_signals::build_baseline(bs);
    // The span table, restated independently of the library's constant.
    struct Span {
        int begin, end;
    };
    const Span spans[5] = {{-25, -10}, {-10, -2}, {-2, 2}, {2, 10}, {10, 25}};

    Rng rng(123);
    for (int trial = 0; trial < 100; ++trial) {
        const auto frame = static_cast<std::size_t>(rng.uniform_int(0, 399));
        const auto vec = midlevel::assemble_vector(frame, bs, b);
        CHECK(vec.frame == frame);
        for (int k = 0; k < midlevel::kNumKinds; ++k) {
            for (int s = 0; s < 5; ++s) {
                const auto wf = midlevel::feature_over_window(
                    static_cast<FeatureKind>(k),
                    static_cast<std::int64_t>(frame) + spans[s].begin,
                    static_cast<std::int64_t>(frame) + spans[s].end, bs, b);
                CAPTURE(frame);
                CAPTURE(k);
                CAPTURE(s);
                // Bitwise: the matrix must be the window computation, not an
                // approximation of it.
                CHECK(vec.values[static_cast<std::size_t>(k * 5 + s)] == wf.value);
                CHECK(vec.coverage[static_cast<std::size_t>(k * 5 + s)] == wf.coverage);
            }
        }
    }
}

TEST_CASE("pitch lowness/highness against the speaker percentiles") {
    auto bs = blank_signals(10);
    const auto b = simple_baseline();
    bs.speech[4] = bs.voiced[4] = 1;
    bs.pitch_hz[4] = 140.0f;  // 10 Hz under p25, band is 50 Hz wide
    auto wf = midlevel::feature_over_window(FeatureKind::tl, 0, 10, bs, b);
    CHECK(wf.value == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(wf.coverage == doctest::Approx(0.1));
    CHECK(midlevel::feature_over_window(FeatureKind::th, 0, 10, bs, b).value == 0.0);

    bs.pitch_hz[4] = 260.0f;  // 10 Hz over p75
    CHECK(midlevel::feature_over_window(FeatureKind::tl, 0, 10, bs, b).value == 0.0);
    CHECK(midlevel::feature_over_window(FeatureKind::th, 0, 10, bs, b).value ==
          doctest::Approx(0.2).epsilon(1e-9));

    bs.pitch_hz[4] = 40.0f;  // far below p10: clamped
    CHECK(midlevel::feature_over_window(FeatureKind::tl, 0, 10, bs, b).value == 1.0);
}

TEST_CASE("intensity z-score") {
    auto bs = blank_signals(5);
    const auto b = simple_baseline();
    bs.speech[1] = 1;
    bs.intensity_db[1] = -25.0f;  // one sd above the mean
    const auto wf = midlevel::feature_over_window(FeatureKind::vo, 0, 5, bs, b);
    CHECK(wf.value == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(wf.coverage == doctest::Approx(0.2));
}

TEST_CASE("narrow and wide pitch range") {
    auto bs = blank_signals(8);
    const auto b = simple_baseline();  // speaker IQR = 100

    for (std::size_t f = 0; f < 4; ++f) {
        bs.speech[f] = bs.voiced[f] = 1;
        bs.pitch_hz[f] = 200.0f;  // window IQR 0
    }
    CHECK(midlevel::feature_over_window(FeatureKind::np, 0, 4, bs, b).value == 1.0);
    CHECK(midlevel::feature_over_window(FeatureKind::wp, 0, 4, bs, b).value == 0.0);

    const float spread[4] = {100.0f, 200.0f, 300.0f, 400.0f};  // window IQR 150
    for (std::size_t f = 0; f < 4; ++f) bs.pitch_hz[f] = spread[f];
    CHECK(midlevel::feature_over_window(FeatureKind::np, 0, 4, bs, b).value == 0.0);
    CHECK(midlevel::feature_over_window(FeatureKind::wp, 0, 4, bs, b).value ==
          doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("voicing fraction and creak means") {
    auto bs = blank_signals(10);
    const auto b = simple_baseline();
    for (std::size_t f = 0; f < 4; ++f) bs.speech[f] = 1;
    bs.voiced[0] = bs.voiced[2] = 1;
    bs.pitch_hz[0] = bs.pitch_hz[2] = 200.0f;
    bs.creak[0] = 0.3f;
    bs.creak[2] = 0.7f;

    const auto vf = midlevel::feature_over_window(FeatureKind::vf, 0, 10, bs, b);
    CHECK(vf.value == doctest::Approx(0.5));
    CHECK(vf.coverage == doctest::Approx(0.4));

    const auto cr = midlevel::feature_over_window(FeatureKind::cr, 0, 10, bs, b);
    CHECK(cr.value == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(cr.coverage == doctest::Approx(0.2));
}

TEST_CASE("cepstral closeness and distance against the speaker delta") {
    auto bs = blank_signals(4);
    const auto b = simple_baseline();  // mean cepstrum 0, delta 1
    bs.speech[1] = bs.voiced[1] = 1;
    bs.pitch_hz[1] = 200.0f;
    bs.cepstrum[1 * base_signals::kCepstrumOrder] = 1.0;  // distance exactly delta

    CHECK(midlevel::feature_over_window(FeatureKind::re, 0, 4, bs, b).value ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
    CHECK(midlevel::feature_over_window(FeatureKind::en, 0, 4, bs, b).value == 0.0);

    bs.cepstrum[1 * base_signals::kCepstrumOrder] = 2.0;  // distance 2*delta
    CHECK(midlevel::feature_over_window(FeatureKind::en, 0, 4, bs, b).value ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lengthening and rate use the predecessor frame, even outside the window") {
    auto bs = blank_signals(6);
    const auto b = simple_baseline();  // flux phi 1
    bs.speech[2] = bs.speech[3] = 1;
    bs.intensity_db[2] = -20.0f;
    bs.intensity_db[3] = -26.0f;
    // Identical cepstra: flux 0 -> lengthening 1.
    const auto le = midlevel::feature_over_window(FeatureKind::le, 3, 4, bs, b);
    CHECK(le.value == doctest::Approx(1.0));
    CHECK(le.coverage == doctest::Approx(1.0));

    const auto sr = midlevel::feature_over_window(FeatureKind::sr, 3, 4, bs, b);
    CHECK(sr.value == doctest::Approx(6.0).epsilon(1e-6));

    // Frame 2's predecessor is silent: the pair does not qualify.
    CHECK(midlevel::feature_over_window(FeatureKind::le, 2, 3, bs, b).coverage == 0.0);
}

TEST_CASE("speech fraction counts silence as signal") {
    auto bs = blank_signals(20);
    const auto b = simple_baseline();
    bs.speech[0] = bs.speech[1] = 1;
    const auto half = midlevel::feature_over_window(FeatureKind::sf, 0, 4, bs, b);
    CHECK(half.value == doctest::Approx(0.5));
    CHECK(half.coverage == doctest::Approx(1.0));

    // All-silence window: the value is informative (0), coverage full.
    const auto silent = midlevel::feature_over_window(FeatureKind::sf, 10, 14, bs, b);
    CHECK(silent.value == 0.0);
    CHECK(silent.coverage == doctest::Approx(1.0));

    // Clipped at the channel edge: coverage reports the clipping.
    const auto clipped = midlevel::feature_over_window(FeatureKind::sf, -2, 2, bs, b);
    CHECK(clipped.coverage == doctest::Approx(0.5));
}

TEST_CASE("peak disalignment with first-frame tie-break") {
    auto bs = blank_signals(10);
    const auto b = simple_baseline();
    for (std::size_t f = 0; f < 10; ++f) {
        bs.speech[f] = 1;
        bs.intensity_db[f] = -40.0f;
    }
    bs.intensity_db[7] = -20.0f;  // intensity peak at frame 7
    bs.voiced[3] = 1;
    bs.pitch_hz[3] = 200.0f;  // pitch peak at frame 3
    const auto pd = midlevel::feature_over_window(FeatureKind::pd, 0, 10, bs, b);
    CHECK(pd.value == doctest::Approx(0.4));
    CHECK(pd.coverage == doctest::Approx(1.0));

    // Equal intensities everywhere: the peak is the first speech frame.
    bs.intensity_db[7] = -40.0f;
    const auto tied = midlevel::feature_over_window(FeatureKind::pd, 0, 10, bs, b);
    CHECK(tied.value == doctest::Approx(0.3));  // |3 - 0| / 10

    // No voiced frame in the window: undefined -> {0, 0}.
    bs.voiced[3] = 0;
    bs.pitch_hz[3] = 0.0f;
    const auto undefined = midlevel::feature_over_window(FeatureKind::pd, 0, 10, bs, b);
    CHECK(undefined.value == 0.0);
    CHECK(undefined.coverage == 0.0);
}

TEST_CASE("tilt summaries over a three-frame window") {
    auto bs = blank_signals(20);
    const auto b = simple_baseline();  // tilt median -4, iqr 2
    const float tilts[3] = {-6.0f, -4.0f, -2.0f};
    for (std::size_t f = 10; f < 13; ++f) {
        bs.has_tilt[f] = 1;
        bs.tilt_db_per_oct[f] = tilts[f - 10];
    }
    CHECK(midlevel::feature_over_window(FeatureKind::st, 10, 13, bs, b).value ==
          doctest::Approx(-4.0).epsilon(1e-6));
    CHECK(midlevel::feature_over_window(FeatureKind::tr, 10, 13, bs, b).value ==
          doctest::Approx(4.0).epsilon(1e-6));
    // tf: clamp0((t - med)/iqr) -> {0, 0, 1} -> 1/3.
    CHECK(midlevel::feature_over_window(FeatureKind::tf, 10, 13, bs, b).value ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    // tm: clamp01(1 - |t - med|/iqr) -> {0, 1, 0} -> 1/3.
    CHECK(midlevel::feature_over_window(FeatureKind::tm, 10, 13, bs, b).value ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-6));
    CHECK(midlevel::feature_over_window(FeatureKind::st, 10, 13, bs, b).coverage ==
          doctest::Approx(1.0));
}

TEST_CASE("empty or out-of-range windows yield {0, 0}") {
    const auto bs = blank_signals(10);
    const auto b = simple_baseline();
    for (int k = 0; k < midlevel::kNumKinds; ++k) {
        const auto kind = static_cast<FeatureKind>(k);
        CHECK(midlevel::feature_over_window(kind, 5, 5, bs, b).coverage == 0.0);
        CHECK(midlevel::feature_over_window(kind, 8, 3, bs, b).coverage == 0.0);
        CHECK(midlevel::feature_over_window(kind, -30, -10, bs, b).coverage == 0.0);
        CHECK(midlevel::feature_over_window(kind, 10, 40, bs, b).coverage == 0.0);
    }
}

TEST_CASE("stationary signals give identical symmetric spans") {
    auto bs = blank_signals(100);
    for (std::size_t f = 0; f < 100; ++f) {
        bs.speech[f] = bs.voiced[f] = bs.has_tilt[f] = 1;
        bs.pitch_hz[f] = 220.0f;
        bs.intensity_db[f] = -25.0f;
        bs.tilt_db_per_oct[f] = -6.0f;
        bs.creak[f] = 0.25f;
        for (int q = 0; q < base_signals::kCepstrumOrder; ++q) {
            bs.cepstrum[f * base_signals::kCepstrumOrder + static_cast<std::size_t>(q)] = 0.5;
        }
    }
    const auto b = simple_baseline();
    const auto vec = midlevel::assemble_vector(50, bs, b);  // all windows interior
    for (int k = 0; k < midlevel::kNumKinds; ++k) {
        CAPTURE(k);
        // Span A (15 frames) vs E (15): identical nominal size and content.
        CHECK(vec.values[static_cast<std::size_t>(k * 5 + 0)] ==
              vec.values[static_cast<std::size_t>(k * 5 + 4)]);
        CHECK(vec.coverage[static_cast<std::size_t>(k * 5 + 0)] ==
              vec.coverage[static_cast<std::size_t>(k * 5 + 4)]);
        // Span B (8) vs D (8).
        CHECK(vec.values[static_cast<std::size_t>(k * 5 + 1)] ==
              vec.values[static_cast<std::size_t>(k * 5 + 3)]);
        CHECK(vec.coverage[static_cast<std::size_t>(k * 5 + 1)] ==
              vec.coverage[static_cast<std::size_t>(k * 5 + 3)]);
    }
}

TEST_CASE("value and coverage ranges hold on random fixtures") {
    const auto bs = random_signals(300, 7);
    const auto b = base_signals::build_baseline(bs);
    for (std::size_t frame = 0; frame < 300; frame += 3) {
        const auto vec = midlevel::assemble_vector(frame, bs, b);
        for (int i = 0; i < midlevel::kNumFeatures; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const auto kind = static_cast<FeatureKind>(i / 5);
            CAPTURE(frame);
            CAPTURE(i);
            CHECK(vec.coverage[idx] >= 0.0);
            CHECK(vec.coverage[idx] <= 1.0);
            CHECK(std::isfinite(vec.values[idx]));
            switch (kind) {
                case FeatureKind::tl:
                case FeatureKind::th:
                case FeatureKind::np:
                case FeatureKind::cr:
                case FeatureKind::re:
                case FeatureKind::le:
                case FeatureKind::tm:
                case FeatureKind::vf:
                case FeatureKind::sf:
                    CHECK(vec.values[idx] >= 0.0);
                    CHECK(vec.values[idx] <= 1.0);
                    break;
                case FeatureKind::wp:
                case FeatureKind::en:
                case FeatureKind::sr:
                case FeatureKind::tr:
                case FeatureKind::pd:
                    CHECK(vec.values[idx] >= 0.0);
                    break;
                default:
                    break;  // vo and st are signed
            }
        }
    }
}

TEST_CASE("column names and checksum") {
    const auto& names = midlevel::column_names();
    REQUIRE(names.size() == 85);
    CHECK(names.front() == "tl_A");
    CHECK(names[4] == "tl_E");
    CHECK(names[5] == "th_A");
    CHECK(names.back() == "tm_E");

    std::string joined;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) joined += ',';
        joined += names[i];
    }
    CHECK(midlevel::columns_checksum() == reduxcorr::fnv1a64(joined));
}

TEST_CASE("feature matrix bounds and CSV round-trip") {
    const auto bs = random_signals(80, 21);
    const auto b = base_signals::build_baseline(bs);
    CHECK_THROWS(midlevel::feature_matrix(bs, b, 0, 81));
    CHECK_THROWS(midlevel::feature_matrix(bs, b, 50, 40));

    const auto rows = midlevel::feature_matrix(bs, b, 10, 60);
    REQUIRE(rows.size() == 50);
    CHECK(rows.front().frame == 10);
    CHECK(rows.back().frame == 59);

    testsupport::TempDir dir;
    const auto path = dir.str("features.csv");
    midlevel::write_feature_csv(path, "EN_001", "left", rows);
    const auto loaded = midlevel::read_feature_csv(path);
    REQUIRE(loaded.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(loaded[i].conversation == "EN_001");
        CHECK(loaded[i].channel == "left");
        CHECK(loaded[i].frame == rows[i].frame);
        double coverage_min = 1.0;
        for (int c = 0; c < midlevel::kNumFeatures; ++c) {
            const auto idx = static_cast<std::size_t>(c);
            const double expected = rows[i].values[idx];
            // 6-significant-digit serialization.
            CHECK(loaded[i].values[idx] ==
                  doctest::Approx(expected).epsilon(1e-5).scale(1e-5));
            coverage_min = std::min(coverage_min, rows[i].coverage[idx]);
        }
        CHECK(loaded[i].coverage_min == doctest::Approx(coverage_min).epsilon(1e-5).scale(1e-5));
    }
}

TEST_CASE("feature CSV rejects a mismatched header") {
    testsupport::TempDir dir;
    const auto path = dir.str("bad.csv");
    testsupport::write_text(path, "conversation,channel,frame,bogus\nEN,left,0,1\n");
    CHECK_THROWS_WITH_AS(midlevel::read_feature_csv(path), doctest::Contains("header"),
                         std::runtime_error);
}
