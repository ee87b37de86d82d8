#include "reduxcorr/signal_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "reduxcorr/util.hpp"
#include "reduxcorr/wav.hpp"

namespace reduxcorr::signal_io {

std::size_t FrameClock::analysis_start_sample(std::size_t i) const {
    const std::size_t win = window_samples();
    if (num_samples <= win) return 0;
    const std::size_t hop = hop_samples();
    // Center the 25 ms window on the frame's midpoint, then clamp into range.
    const std::int64_t center = static_cast<std::int64_t>(i * hop + hop / 2);
    std::int64_t start = center - static_cast<std::int64_t>(win) / 2;
    start = std::max<std::int64_t>(0, start);
    start = std::min<std::int64_t>(start, static_cast<std::int64_t>(num_samples - win));
    return static_cast<std::size_t>(start);
}

std::size_t time_to_frame(double t_ms) {
    if (t_ms < 0 || !std::isfinite(t_ms)) {
        throw std::invalid_argument("time_to_frame: t must be finite and >= 0");
    }
    return static_cast<std::size_t>(std::floor(t_ms / 10.0));
}

AudioRecording load_recording(const std::string& path, const std::string& conversation_id) {
    wav::WavData data = wav::read_wav(path);
    if (data.channels.empty() || data.channels[0].empty()) {
        throw std::runtime_error("load_recording: " + path + ": zero-length audio");
    }
    if (data.sample_rate < 8000) {
        throw std::runtime_error("load_recording: " + path + ": sample rate " +
                                 std::to_string(data.sample_rate) + " below 8000 Hz minimum");
    }
    if (data.channels.size() > 2) {
        throw std::runtime_error("load_recording: " + path + ": more than 2 channels");
    }

    AudioRecording rec;
    rec.conversation_id = conversation_id;
    rec.sample_rate = data.sample_rate;
    rec.channels = std::move(data.channels);
    rec.mono_duplicated = data.mono_duplicated;
    if (rec.channels[0].size() != rec.channels[1].size()) {
        throw std::runtime_error("load_recording: " + path + ": channels differ in length");
    }
    for (const auto& ch : rec.channels) {
        for (float s : ch) {
            if (!std::isfinite(s)) {
                throw std::runtime_error("load_recording: " + path + ": non-finite sample");
            }
        }
    }
    return rec;
}

namespace {

std::string dirname_of(const std::string& path) {
    const auto pos = path.find_last_of('/');
    if (pos == std::string::npos) return ".";
    if (pos == 0) return "/";
    return path.substr(0, pos);
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("manifest: " + path + ": cannot open file");
    const std::string base = dirname_of(path);

    std::vector<ManifestEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto fields = split_csv_line(t);
        if (fields.size() != 4) {
            throw std::runtime_error("manifest: " + path + ":" + std::to_string(lineno) +
                                     ": expected 4 fields (conversation_id,wav_path,start_ms,end_ms), got " +
                                     std::to_string(fields.size()));
        }
        ManifestEntry e;
        e.conversation_id = fields[0];
        e.wav_path = fields[1].empty() || fields[1][0] == '/' ? fields[1] : base + "/" + fields[1];
        try {
            e.annotated_start_ms = std::stod(fields[2]);
            e.annotated_end_ms = std::stod(fields[3]);
        } catch (const std::exception&) {
            throw std::runtime_error("manifest: " + path + ":" + std::to_string(lineno) +
                                     ": start_ms/end_ms must be numeric");
        }
        if (e.conversation_id.empty()) {
            throw std::runtime_error("manifest: " + path + ":" + std::to_string(lineno) +
                                     ": empty conversation_id");
        }
        if (!(e.annotated_start_ms >= 0) || !(e.annotated_end_ms > e.annotated_start_ms)) {
            throw std::runtime_error("manifest: " + path + ":" + std::to_string(lineno) +
                                     ": need 0 <= start_ms < end_ms");
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw std::runtime_error("manifest: " + path + ": no entries");
    return entries;
}

}  // namespace reduxcorr::signal_io
