#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace reduxcorr::signal_io {

// A loaded conversation: exactly two equal-length channels (left/right
// speaker), samples normalized to [-1, 1], sample_rate >= 8000 Hz.
struct AudioRecording {
    std::string conversation_id;
    std::uint32_t sample_rate = 0;
    std::vector<std::vector<float>> channels;  // size 2
    bool mono_duplicated = false;

    std::size_t num_samples() const { return channels.empty() ? 0 : channels[0].size(); }
};

// 10 ms hop / 25 ms analysis window frame clock over a track.
struct FrameClock {
    std::uint32_t sample_rate = 0;
    std::size_t num_samples = 0;

    static constexpr int hop_ms = 10;
    static constexpr int window_ms = 25;

    // floor(channel_length_ms / 10)
    std::size_t frame_count() const {
        return static_cast<std::size_t>(
            (static_cast<std::uint64_t>(num_samples) * 100) / sample_rate);
    }
    std::size_t hop_samples() const { return sample_rate / 100; }
    std::size_t window_samples() const { return static_cast<std::size_t>(sample_rate) * 25 / 1000; }
    // First sample of frame i (frames are half-open [i*10ms, (i+1)*10ms)).
    std::size_t frame_start_sample(std::size_t i) const { return i * hop_samples(); }
    // Start of the 25 ms analysis window centered on frame i, clamped so the
    // window stays inside the track.
    std::size_t analysis_start_sample(std::size_t i) const;
};

// floor(t_ms / 10); throws std::invalid_argument for negative t.
std::size_t time_to_frame(double t_ms);

// Loads a WAV file into a two-channel recording. Mono input is duplicated
// (mono_duplicated set). Throws std::runtime_error on unreadable files,
// unsupported codecs, zero-length audio, or sample_rate < 8000.
AudioRecording load_recording(const std::string& path, const std::string& conversation_id = "");

// One manifest line: which file to analyze and over what annotated range.
struct ManifestEntry {
    std::string conversation_id;
    std::string wav_path;  // resolved relative to the manifest's directory
    double annotated_start_ms = 0;
    double annotated_end_ms = 0;
};

// Parses a corpus manifest: CSV lines `conversation_id,wav_path,start_ms,end_ms`,
// blank lines and #-comments skipped. Errors carry line numbers.
std::vector<ManifestEntry> parse_manifest(const std::string& path);

}  // namespace reduxcorr::signal_io
