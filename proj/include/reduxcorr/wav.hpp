#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace reduxcorr::wav {

// Audio loaded from a RIFF/WAVE file. Samples are float in [-1, 1], one
// vector per channel. A mono file is duplicated into two identical channels
// so downstream code can always address "left" and "right".
struct WavData {
    std::uint32_t sample_rate = 0;
    std::vector<std::vector<float>> channels;
    bool mono_duplicated = false;  // true when channel 1 is a copy of channel 0
};

// Reads a PCM16 or IEEE float32 WAV file. Throws std::runtime_error with the
// file path and a reason on anything unreadable: missing file, bad magic,
// unsupported format tag / bit depth, truncated data chunk.
WavData read_wav(const std::string& path);

// Writes interleaved PCM16. channels must be non-empty and equal-length.
// Samples are clamped to [-1, 1] before quantization.
void write_wav_pcm16(const std::string& path, std::uint32_t sample_rate,
                     const std::vector<std::vector<float>>& channels);

}  // namespace reduxcorr::wav
