#include "reduxcorr/midlevel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "reduxcorr/kernels.hpp"
#include "reduxcorr/util.hpp"

namespace reduxcorr::midlevel {

namespace {

constexpr double kEps = 1e-9;

// Guarded division denominators: degenerate speaker spreads fall back to a
// tiny epsilon so every value stays finite and deterministic.
double guarded(double denom) { return denom > kEps ? denom : kEps; }

using base_signals::BaseSignals;
using base_signals::SpeakerBaseline;

double cep_distance(const BaseSignals& bs, std::size_t f, const SpeakerBaseline& b) {
    return std::sqrt(kernels::l2sq_f64(bs.cepstrum_row(f), b.mean_cepstrum.data(),
                                       base_signals::kCepstrumOrder));
}

double cep_flux(const BaseSignals& bs, std::size_t f) {
    return std::sqrt(kernels::l2sq_f64(bs.cepstrum_row(f), bs.cepstrum_row(f - 1),
                                       base_signals::kCepstrumOrder));
}

}  // namespace

const char* kind_code(FeatureKind kind) {
    static const char* codes[kNumKinds] = {"tl", "th", "vo", "np", "wp", "cr", "vf", "re", "en",
                                           "le", "sr", "sf", "pd", "st", "tr", "tf", "tm"};
    return codes[static_cast<int>(kind)];
}

WindowFeature feature_over_window(FeatureKind kind, std::int64_t frame_begin,
                                  std::int64_t frame_end, const BaseSignals& bs,
                                  const SpeakerBaseline& b) {
    const auto nominal = static_cast<double>(frame_end - frame_begin);
    if (frame_end <= frame_begin) return {0.0, 0.0};
    const std::size_t lo =
        static_cast<std::size_t>(std::max<std::int64_t>(frame_begin, 0));
    const std::size_t hi = static_cast<std::size_t>(
        std::clamp<std::int64_t>(frame_end, 0, static_cast<std::int64_t>(bs.frame_count)));
    if (hi <= lo) return {0.0, 0.0};

    // Most kinds are means of per-frame terms over their qualifying frames.
    double sum = 0.0;
    std::size_t count = 0;
    const auto mean_result = [&]() -> WindowFeature {
        if (count == 0) return {0.0, 0.0};
        return {sum / static_cast<double>(count), static_cast<double>(count) / nominal};
    };

    switch (kind) {
        case FeatureKind::tl: {
            const double denom = guarded(b.pitch_p25 - b.pitch_p10);
            for (std::size_t f = lo; f < hi; ++f) {
                if (!bs.voiced[f]) continue;
                sum += clamp01((b.pitch_p25 - bs.pitch_hz[f]) / denom);
                ++count;
            }
            return mean_result();
        }
        case FeatureKind::th: {
            const double denom = guarded(b.pitch_p90 - b.pitch_p75);
            for (std::size_t f = lo; f < hi; ++f) {
                if (!bs.voiced[f]) continue;
                sum += clamp01((bs.pitch_hz[f] - b.pitch_p75) / denom);
                ++count;
            }
            return mean_result();
        }
        case FeatureKind::vo: {
            // A degenerate (constant-intensity) baseline z-scores with sd 1.
            const double sd = b.intensity_sd > kEps ? b.intensity_sd : 1.0;
            for (std::size_t f = lo; f < hi; ++f) {
                if (!bs.speech[f]) continue;
                sum += (bs.intensity_db[f] - b.intensity_mean) / sd;
                ++count;
            }
            return mean_result();
        }
        case FeatureKind::np:
        case FeatureKind::wp: {
            std::vector<double> pitches;
            for (std::size_t f = lo; f < hi; ++f) {
                if (bs.voiced[f]) pitches.push_back(bs.pitch_hz[f]);
            }
            if (pitches.empty()) return {0.0, 0.0};
            std::sort(pitches.begin(), pitches.end());
            const double window_iqr =
                percentile_sorted(pitches, 0.75) - percentile_sorted(pitches, 0.25);
            const double ratio = window_iqr / guarded(b.pitch_p75 - b.pitch_p25);
            const double value =
                kind == FeatureKind::np ? clamp01(1.0 - ratio) : clamp0(ratio - 1.0);
            return {value, static_cast<double>(pitches.size()) / nominal};
        }
        case FeatureKind::cr: {
            for (std::size_t f = lo; f < hi; ++f) {
                if (!bs.voiced[f]) continue;
                sum += bs.creak[f];
                ++count;
            }
            return mean_result();
        }
        case FeatureKind::vf: {
            std::size_t speech_n = 0, voiced_n = 0;
            for (std::size_t f = lo; f < hi; ++f) {
                if (bs.speech[f]) ++speech_n;
                if (bs.voiced[f]) ++voiced_n;
            }
            if (speech_n == 0) return {0.0, 0.0};
            return {static_cast<double>(voiced_n) / static_cast<double>(speech_n),
                    static_cast<double>(speech_n) / nominal};
        }
        case FeatureKind::re: {
            const double delta = guarded(b.cepstral_delta);
            for (std::size_t f = lo; f < hi; ++f) {
                if (!bs.voiced[f]) continue;
                sum += std::exp(-cep_distance(bs, f, b) / delta);
                ++count;
            }
            return mean_result();
        }
        case FeatureKind::en: {
            const double delta = guarded(b.cepstral_delta);
            for (std::size_t f = lo; f < hi; ++f) {
                if (!bs.voiced[f]) continue;
                sum += clamp0(cep_distance(bs, f, b) / delta - 1.0);
                ++count;
            }
            return mean_result();
        }
        case FeatureKind::le: {
            const double phi = guarded(b.flux_phi);
            for (std::size_t f = std::max<std::size_t>(lo, 1); f < hi; ++f) {
                if (!bs.speech[f] || !bs.speech[f - 1]) continue;
                sum += 1.0 / (1.0 + cep_flux(bs, f) / phi);
                ++count;
            }
            return mean_result();
        }
        case FeatureKind::sr: {
            for (std::size_t f = std::max<std::size_t>(lo, 1); f < hi; ++f) {
                if (!bs.speech[f] || !bs.speech[f - 1]) continue;
                sum += std::abs(static_cast<double>(bs.intensity_db[f]) - bs.intensity_db[f - 1]);
                ++count;
            }
            return mean_result();
        }
        case FeatureKind::sf: {
            std::size_t speech_n = 0;
            for (std::size_t f = lo; f < hi; ++f) {
                if (bs.speech[f]) ++speech_n;
            }
            // Silence is informative here: every in-range frame carries data,
            // so coverage only reflects edge clipping.
            return {static_cast<double>(speech_n) / static_cast<double>(hi - lo),
                    static_cast<double>(hi - lo) / nominal};
        }
        case FeatureKind::pd: {
            bool have_pitch = false, have_int = false;
            std::size_t pitch_f = 0, int_f = 0;
            float pitch_best = 0, int_best = 0;
            std::size_t speech_n = 0;
            for (std::size_t f = lo; f < hi; ++f) {
                if (bs.voiced[f] && (!have_pitch || bs.pitch_hz[f] > pitch_best)) {
                    have_pitch = true;
                    pitch_best = bs.pitch_hz[f];
                    pitch_f = f;
                }
                if (bs.speech[f]) {
                    ++speech_n;
                    if (!have_int || bs.intensity_db[f] > int_best) {
                        have_int = true;
                        int_best = bs.intensity_db[f];
                        int_f = f;
                    }
                }
            }
            if (!have_pitch || !have_int) return {0.0, 0.0};
            const double dist = pitch_f > int_f ? static_cast<double>(pitch_f - int_f)
                                                : static_cast<double>(int_f - pitch_f);
            return {dist / nominal, static_cast<double>(speech_n) / nominal};
        }
        case FeatureKind::st: {
            for (std::size_t f = lo; f < hi; ++f) {
                if (!bs.has_tilt[f]) continue;
                sum += bs.tilt_db_per_oct[f];
                ++count;
            }
            return mean_result();
        }
        case FeatureKind::tr: {
            double mn = 0, mx = 0;
            for (std::size_t f = lo; f < hi; ++f) {
                if (!bs.has_tilt[f]) continue;
                if (count == 0) {
                    mn = mx = bs.tilt_db_per_oct[f];
                } else {
                    mn = std::min(mn, static_cast<double>(bs.tilt_db_per_oct[f]));
                    mx = std::max(mx, static_cast<double>(bs.tilt_db_per_oct[f]));
                }
                ++count;
            }
            if (count == 0) return {0.0, 0.0};
            return {mx - mn, static_cast<double>(count) / nominal};
        }
        case FeatureKind::tf: {
            const double iqr = guarded(b.tilt_iqr);
            for (std::size_t f = lo; f < hi; ++f) {
                if (!bs.has_tilt[f]) continue;
                sum += clamp0((bs.tilt_db_per_oct[f] - b.tilt_median) / iqr);
                ++count;
            }
            return mean_result();
        }
        case FeatureKind::tm: {
            const double iqr = guarded(b.tilt_iqr);
            for (std::size_t f = lo; f < hi; ++f) {
                if (!bs.has_tilt[f]) continue;
                sum += clamp01(1.0 - std::abs(bs.tilt_db_per_oct[f] - b.tilt_median) / iqr);
                ++count;
            }
            return mean_result();
        }
    }
    return {0.0, 0.0};
}

FeatureVector assemble_vector(std::size_t frame, const BaseSignals& bs,
                              const SpeakerBaseline& b) {
    FeatureVector out;
    out.frame = frame;
    out.baseline_reliable = b.reliable;
    const auto f = static_cast<std::int64_t>(frame);
    for (int k = 0; k < kNumKinds; ++k) {
        for (int s = 0; s < kNumSpans; ++s) {
            const auto wf = feature_over_window(static_cast<FeatureKind>(k), f + kSpans[s].begin_off,
                                                f + kSpans[s].end_off, bs, b);
            out.values[k * kNumSpans + s] = wf.value;
            out.coverage[k * kNumSpans + s] = wf.coverage;
        }
    }
    return out;
}

std::vector<FeatureVector> feature_matrix(const BaseSignals& bs, const SpeakerBaseline& b,
                                          std::size_t frame_begin, std::size_t frame_end) {
    if (frame_end > bs.frame_count || frame_begin > frame_end) {
        throw std::invalid_argument("feature_matrix: frame range outside recording");
    }
    std::vector<FeatureVector> rows;
    rows.reserve(frame_end - frame_begin);
    for (std::size_t f = frame_begin; f < frame_end; ++f) {
        rows.push_back(assemble_vector(f, bs, b));
    }
    return rows;
}

const std::vector<std::string>& column_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        out.reserve(kNumFeatures);
        for (int k = 0; k < kNumKinds; ++k) {
            for (const auto& span : kSpans) {
                out.push_back(std::string(kind_code(static_cast<FeatureKind>(k))) + "_" +
                              span.code);
            }
        }
        return out;
    }();
    return names;
}

std::uint64_t columns_checksum() {
    static const std::uint64_t sum = [] {
        std::string joined;
        for (const auto& name : column_names()) {
            if (!joined.empty()) joined += ',';
            joined += name;
        }
        return fnv1a64(joined);
    }();
    return sum;
}

void write_feature_csv(const std::string& path, const std::string& conversation,
                       const std::string& channel, const std::vector<FeatureVector>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("features: " + path + ": cannot open for writing");
    out << "conversation,channel,frame";
    for (const auto& name : column_names()) out << ',' << name;
    out << ",coverage_min\n";
    for (const auto& row : rows) {
        out << conversation << ',' << channel << ',' << row.frame;
        double cov_min = 1.0;
        for (int i = 0; i < kNumFeatures; ++i) {
            out << ',' << fmt_num(row.values[i]);
            cov_min = std::min(cov_min, row.coverage[i]);
        }
        out << ',' << fmt_num(cov_min) << "\n";
    }
    if (!out) throw std::runtime_error("features: " + path + ": write failed");
}

std::vector<FeatureRow> read_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("features: " + path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("features: " + path + ": empty file");

    // Guard against schema drift: the header must spell out the exact
    // canonical column set.
    std::string expected = "conversation,channel,frame";
    for (const auto& name : column_names()) expected += "," + name;
    expected += ",coverage_min";
    if (trim(line) != expected) {
        throw std::runtime_error("features: " + path + ": unexpected header (column mismatch)");
    }

    std::vector<FeatureRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != static_cast<std::size_t>(kNumFeatures) + 4) {
            throw std::runtime_error("features: " + path + ":" + std::to_string(lineno) +
                                     ": wrong field count");
        }
        FeatureRow row;
        row.conversation = fields[0];
        row.channel = fields[1];
        try {
            row.frame = static_cast<std::size_t>(std::stoull(fields[2]));
            for (int i = 0; i < kNumFeatures; ++i) row.values[i] = std::stod(fields[3 + i]);
            row.coverage_min = std::stod(fields[3 + kNumFeatures]);
        } catch (const std::exception&) {
            throw std::runtime_error("features: " + path + ":" + std::to_string(lineno) +
                                     ": non-numeric field");
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace reduxcorr::midlevel
