#include "reduxcorr/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace reduxcorr::wav {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) {
    throw std::runtime_error("wav: " + path + ": " + why);
}

std::uint16_t rd_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t rd_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void wr_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

void wr_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
    out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

}  // namespace

WavData read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open file");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12) fail(path, "file too short for RIFF header");
    if (std::memcmp(bytes.data(), "RIFF", 4) != 0) fail(path, "not a RIFF file");
    if (std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) fail(path, "not a WAVE file");

    std::uint16_t format_tag = 0;
    std::uint16_t num_channels = 0;
    std::uint32_t sample_rate = 0;
    std::uint16_t bits_per_sample = 0;
    bool have_fmt = false;

    const unsigned char* data_ptr = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
        const std::uint32_t chunk_len = rd_u32(bytes.data() + pos + 4);
        const std::size_t body = pos + 8;
        if (body + chunk_len > bytes.size()) {
            if (std::memcmp(id, "data", 4) == 0) fail(path, "truncated data chunk");
            fail(path, "truncated chunk");
        }
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (chunk_len < 16) fail(path, "fmt chunk too short");
            format_tag = rd_u16(bytes.data() + body);
            num_channels = rd_u16(bytes.data() + body + 2);
            sample_rate = rd_u32(bytes.data() + body + 4);
            bits_per_sample = rd_u16(bytes.data() + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data_ptr = bytes.data() + body;
            data_len = chunk_len;
        }
        pos = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
    }

    if (!have_fmt) fail(path, "missing fmt chunk");
    if (data_ptr == nullptr) fail(path, "missing data chunk");
    if (num_channels == 0) fail(path, "zero channels");
    if (sample_rate == 0) fail(path, "zero sample rate");

    // WAVE_FORMAT_EXTENSIBLE (0xFFFE) is not handled; the corpora here are
    // plain PCM16 or float32.
    const bool pcm16 = (format_tag == 1 && bits_per_sample == 16);
    const bool f32 = (format_tag == 3 && bits_per_sample == 32);
    if (!pcm16 && !f32) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "unsupported format (tag=%u, bits=%u); need PCM16 or float32",
                      format_tag, bits_per_sample);
        fail(path, buf);
    }

    const std::size_t bytes_per_sample = pcm16 ? 2 : 4;
    const std::size_t frame_bytes = bytes_per_sample * num_channels;
    const std::size_t num_frames = data_len / frame_bytes;

    WavData out;
    out.sample_rate = sample_rate;
    out.channels.assign(num_channels, std::vector<float>(num_frames));
    for (std::size_t f = 0; f < num_frames; ++f) {
        const unsigned char* p = data_ptr + f * frame_bytes;
        for (std::uint16_t c = 0; c < num_channels; ++c) {
            if (pcm16) {
                const std::int16_t s = static_cast<std::int16_t>(rd_u16(p + 2 * c));
                out.channels[c][f] = static_cast<float>(s) / 32768.0f;
            } else {
                float s;
                std::memcpy(&s, p + 4 * c, 4);
                out.channels[c][f] = s;
            }
        }
    }

    if (num_channels == 1) {
        out.channels.push_back(out.channels[0]);
        out.mono_duplicated = true;
    }
    return out;
}

void write_wav_pcm16(const std::string& path, std::uint32_t sample_rate,
                     const std::vector<std::vector<float>>& channels) {
    if (channels.empty()) throw std::invalid_argument("wav: write: no channels");
    const std::size_t num_frames = channels[0].size();
    for (const auto& ch : channels) {
        if (ch.size() != num_frames) throw std::invalid_argument("wav: write: unequal channel lengths");
    }
    const auto num_channels = static_cast<std::uint16_t>(channels.size());
    const std::uint32_t data_len = static_cast<std::uint32_t>(num_frames * num_channels * 2);

    std::vector<unsigned char> out;
    out.reserve(44 + data_len);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    wr_u32(out, 36 + data_len);
    out.insert(out.end(), {'W', 'A', 'V', 'E'});
    out.insert(out.end(), {'f', 'm', 't', ' '});
    wr_u32(out, 16);
    wr_u16(out, 1);  // PCM
    wr_u16(out, num_channels);
    wr_u32(out, sample_rate);
    wr_u32(out, sample_rate * num_channels * 2);  // byte rate
    wr_u16(out, static_cast<std::uint16_t>(num_channels * 2));  // block align
    wr_u16(out, 16);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    wr_u32(out, data_len);

    for (std::size_t f = 0; f < num_frames; ++f) {
        for (std::uint16_t c = 0; c < num_channels; ++c) {
            // Same 1/32768 step as the reader, so a round trip stays within
            // half a step (full-scale +1.0 clips to 32767).
            const float s = std::clamp(channels[c][f], -1.0f, 1.0f);
            const auto q = static_cast<std::int16_t>(
                std::clamp(std::lrintf(s * 32768.0f), -32768L, 32767L));
            wr_u16(out, static_cast<std::uint16_t>(q));
        }
    }

    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("wav: " + path + ": cannot open for writing");
    os.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!os) throw std::runtime_error("wav: " + path + ": write failed");
}

}  // namespace reduxcorr::wav
