#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "reduxcorr/signal_io.hpp"
#include "reduxcorr/util.hpp"
#include "reduxcorr/wav.hpp"
#include "test_support.hpp"

using reduxcorr::Rng;
using testsupport::TempDir;
using testsupport::write_text;
namespace signal_io = reduxcorr::signal_io;
namespace wav = reduxcorr::wav;

TEST_CASE("PCM16 wav round-trips within one quantization step") {
    TempDir dir;
    Rng rng(3);
    std::vector<std::vector<float>> channels(2, std::vector<float>(5000));
    for (auto& channel : channels) {
        for (auto& s : channel) s = static_cast<float>(rng.uniform(-0.9, 0.9));
    }
    const auto path = dir.str("stereo.wav");
    wav::write_wav_pcm16(path, 16000, channels);

    const auto loaded = signal_io::load_recording(path, "conv");
    CHECK(loaded.sample_rate == 16000);
    CHECK(loaded.conversation_id == "conv");
    CHECK_FALSE(loaded.mono_duplicated);
    REQUIRE(loaded.channels.size() == 2);
    REQUIRE(loaded.num_samples() == 5000);
    for (int ch = 0; ch < 2; ++ch) {
        for (std::size_t i = 0; i < 5000; ++i) {
            CHECK(std::abs(loaded.channels[static_cast<std::size_t>(ch)][i] -
                           channels[static_cast<std::size_t>(ch)][i]) <= 1.0f / 32767.0f);
        }
    }
}

TEST_CASE("mono wav is duplicated into two channels") {
    TempDir dir;
    std::vector<std::vector<float>> mono(1, std::vector<float>(1000, 0.25f));
    const auto path = dir.str("mono.wav");
    wav::write_wav_pcm16(path, 8000, mono);

    const auto loaded = signal_io::load_recording(path);
    CHECK(loaded.mono_duplicated);
    REQUIRE(loaded.channels.size() == 2);
    CHECK(loaded.channels[0] == loaded.channels[1]);
}

TEST_CASE("load_recording rejects bad inputs") {
    TempDir dir;
    CHECK_THROWS_WITH_AS(signal_io::load_recording(dir.str("absent.wav")),
                         doctest::Contains("absent.wav"), std::runtime_error);

    // Sample rates below 8 kHz cannot carry the analysis bands.
    std::vector<std::vector<float>> mono(1, std::vector<float>(100, 0.0f));
    const auto slow = dir.str("slow.wav");
    wav::write_wav_pcm16(slow, 4000, mono);
    CHECK_THROWS_AS(signal_io::load_recording(slow), std::runtime_error);

    write_text(dir.str("not_a.wav"), "RIFFgarbage");
    CHECK_THROWS_AS(signal_io::load_recording(dir.str("not_a.wav")), std::runtime_error);
}

TEST_CASE("frame clock arithmetic") {
    signal_io::FrameClock clock{16000, 16000};
    CHECK(clock.frame_count() == 100);
    CHECK(clock.hop_samples() == 160);
    CHECK(clock.window_samples() == 400);

    // 300 s of audio -> 30000 frames at the 10 ms hop.
    signal_io::FrameClock long_clock{16000, 16000 * 300};
    CHECK(long_clock.frame_count() == 30000);

    // Mid-track windows are centered: start = frame midpoint - window/2.
    CHECK(clock.analysis_start_sample(50) == 50 * 160 + 80 - 200);
    // Edge windows clamp to stay inside the track.
    CHECK(clock.analysis_start_sample(0) == 0);
    const auto last = clock.frame_count() - 1;
    CHECK(clock.analysis_start_sample(last) == 16000 - 400);

    // A trailing partial hop contributes no frame.
    signal_io::FrameClock ragged{16000, 16000 + 159};
    CHECK(ragged.frame_count() == 100);
}

TEST_CASE("time_to_frame floors to the containing frame") {
    CHECK(signal_io::time_to_frame(0.0) == 0);
    CHECK(signal_io::time_to_frame(9.99) == 0);
    CHECK(signal_io::time_to_frame(10.0) == 1);
    CHECK(signal_io::time_to_frame(250.0) == 25);
    CHECK(signal_io::time_to_frame(1005.0) == 100);
    CHECK_THROWS_AS(signal_io::time_to_frame(-1.0), std::invalid_argument);
}

TEST_CASE("manifest parsing") {
    TempDir dir;
    const auto manifest = dir.str("manifest.csv");
    write_text(manifest,
               "# corpus index\n"
               "EN_001,audio/EN_001.wav,0,300000\n"
               "\n"
               "EN_002,/abs/EN_002.wav,1500,9000\n");
    const auto entries = signal_io::parse_manifest(manifest);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].conversation_id == "EN_001");
    // Relative wav paths resolve against the manifest's directory.
    CHECK(entries[0].wav_path == dir.str("audio/EN_001.wav"));
    CHECK(entries[0].annotated_start_ms == 0);
    CHECK(entries[0].annotated_end_ms == 300000);
    CHECK(entries[1].wav_path == "/abs/EN_002.wav");
    CHECK(entries[1].annotated_start_ms == 1500);
}

TEST_CASE("manifest errors carry line numbers") {
    TempDir dir;
    const auto manifest = dir.str("manifest.csv");

    write_text(manifest, "EN_001,a.wav,0,300000\nEN_002,b.wav,five,9000\n");
    CHECK_THROWS_WITH_AS(signal_io::parse_manifest(manifest), doctest::Contains(":2"),
                         std::runtime_error);

    write_text(manifest, "EN_001,a.wav,5000,5000\n");
    CHECK_THROWS_AS(signal_io::parse_manifest(manifest), std::runtime_error);

    write_text(manifest, "EN_001,a.wav,0\n");
    CHECK_THROWS_AS(signal_io::parse_manifest(manifest), std::runtime_error);

    write_text(manifest, "# nothing but comments\n");
    CHECK_THROWS_AS(signal_io::parse_manifest(manifest), std::runtime_error);
}
