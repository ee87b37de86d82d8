#include "reduxcorr/base_signals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "reduxcorr/fft.hpp"
#include "reduxcorr/kernels.hpp"
#include "reduxcorr/signal_io.hpp"
#include "reduxcorr/util.hpp"

namespace reduxcorr::base_signals {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Power-domain equivalent of the -96 dB floor.
const double kPowerFloor = std::pow(10.0, kSilenceFloorDb / 10.0);

signal_io::FrameClock make_clock(const std::vector<float>& samples, std::uint32_t rate) {
    if (samples.empty()) throw std::invalid_argument("base_signals: empty sample buffer");
    if (rate < 8000) throw std::invalid_argument("base_signals: sample rate below 8000 Hz");
    return signal_io::FrameClock{rate, samples.size()};
}

// Shared per-frame spectral machinery: one Hamming-windowed, zero-padded FFT
// feeds both the cepstrum and the 1/3-octave tilt. Padding to 4x the window
// keeps several bins inside even the lowest (100 Hz) band.
struct SpectralPlan {
    std::size_t win = 0;
    std::size_t nfft = 0;
    std::vector<double> hamming;
    double ref_power = 1.0;          // (sum of window)^2: full-scale power reference
    std::vector<double> cos_tables;  // kCepstrumOrder rows of cos(2*pi*q*k/nfft), k=1..nfft/2-1
    std::vector<std::pair<std::size_t, std::size_t>> bands;  // bin ranges per 1/3-octave band

    explicit SpectralPlan(std::uint32_t rate) {
        win = static_cast<std::size_t>(rate) * 25 / 1000;
        nfft = fft::next_pow2(4 * win);
        hamming.resize(win);
        double wsum = 0.0;
        for (std::size_t i = 0; i < win; ++i) {
            hamming[i] = 0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                                static_cast<double>(win - 1));
            wsum += hamming[i];
        }
        ref_power = wsum * wsum;

        const std::size_t half = nfft / 2;
        cos_tables.resize(static_cast<std::size_t>(kCepstrumOrder) * (half - 1));
        for (int q = 1; q <= kCepstrumOrder; ++q) {
            double* row = cos_tables.data() + static_cast<std::size_t>(q - 1) * (half - 1);
            for (std::size_t k = 1; k < half; ++k) {
                row[k - 1] = std::cos(2.0 * kPi * q * static_cast<double>(k) /
                                      static_cast<double>(nfft));
            }
        }
        bands = band_bins(rate, nfft);
    }

    // 1/3-octave bands: centers 100*2^(k/3) Hz up to 0.9*Nyquist, edges at
    // center*2^(+-1/6); consecutive bands share edges, so bins partition.
    static std::vector<std::pair<std::size_t, std::size_t>> band_bins(std::uint32_t rate,
                                                                      std::size_t nfft) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        const double nyquist = rate / 2.0;
        const double bin_hz = static_cast<double>(rate) / static_cast<double>(nfft);
        const std::size_t nbins = nfft / 2 + 1;
        for (int k = 0;; ++k) {
            const double center = 100.0 * std::pow(2.0, k / 3.0);
            if (center > 0.9 * nyquist) break;
            const double lo = center * std::pow(2.0, -1.0 / 6.0);
            const double hi = center * std::pow(2.0, 1.0 / 6.0);
            auto first = static_cast<std::size_t>(std::ceil(lo / bin_hz));
            auto last = static_cast<std::size_t>(std::ceil(hi / bin_hz));  // exclusive: f < hi
            first = std::min(first, nbins);
            last = std::min(last, nbins);
            out.emplace_back(first, last);
        }
        return out;
    }
};

// Least-squares slope of live-band dB against band index/3 (octaves).
std::optional<double> tilt_from_band_power(const std::vector<double>& power,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& bands) {
    std::vector<double> xs, ys;
    xs.reserve(bands.size());
    ys.reserve(bands.size());
    for (std::size_t k = 0; k < bands.size(); ++k) {
        double p = 0.0;
        for (std::size_t b = bands[k].first; b < bands[k].second && b < power.size(); ++b) {
            p += power[b];
        }
        if (p <= kPowerFloor) continue;  // floored band: not live
        xs.push_back(static_cast<double>(k) / 3.0);
        ys.push_back(10.0 * std::log10(p));
    }
    if (xs.size() < 6) return std::nullopt;
    const auto n = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    if (sxx <= 0) return std::nullopt;
    return sxy / sxx;
}

// One frame: window, pad, transform; emit normalized power spectrum.
void frame_power_spectrum(const SpectralPlan& plan, const std::vector<float>& samples,
                          std::size_t start, std::vector<double>& padded,
                          std::vector<double>& power) {
    padded.assign(plan.nfft, 0.0);
    for (std::size_t i = 0; i < plan.win; ++i) {
        padded[i] = static_cast<double>(samples[start + i]) * plan.hamming[i];
    }
    const auto spec = fft::rfft(padded);
    power.resize(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) {
        power[k] = std::norm(spec[k]) / plan.ref_power;
    }
}

// Real cepstrum c1..c12 from the floored log-magnitude spectrum. The log
// spectrum is mean-centered first: cq (q>=1) is unaffected mathematically,
// and a floored (flat) silence spectrum then yields exactly zero.
void cepstrum_from_power(const SpectralPlan& plan, const std::vector<double>& power, double* out) {
    const std::size_t half = plan.nfft / 2;
    static thread_local std::vector<double> logmag;
    logmag.resize(half + 1);
    bool any_live = false;
    for (std::size_t k = 0; k <= half; ++k) {
        any_live = any_live || power[k] > kPowerFloor;
        logmag[k] = 0.5 * std::log(std::max(power[k], kPowerFloor));
    }
    if (!any_live) {  // fully floored (silent) frame: no spectral shape at all
        std::fill_n(out, kCepstrumOrder, 0.0);
        return;
    }
    double total = logmag[0] + logmag[half];
    for (std::size_t k = 1; k < half; ++k) total += 2.0 * logmag[k];
    const double mean = total / static_cast<double>(plan.nfft);
    for (std::size_t k = 0; k <= half; ++k) logmag[k] -= mean;

    const double inv_n = 1.0 / static_cast<double>(plan.nfft);
    for (int q = 1; q <= kCepstrumOrder; ++q) {
        const double* row = plan.cos_tables.data() + static_cast<std::size_t>(q - 1) * (half - 1);
        const double interior = kernels::dot_f64(row, logmag.data() + 1, half - 1);
        const double edges = logmag[0] + ((q % 2 == 0) ? logmag[half] : -logmag[half]);
        out[q - 1] = inv_n * (edges + 2.0 * interior);
    }
}

double mean_square_db(const std::vector<float>& samples, std::size_t start, std::size_t len) {
    if (len == 0) return kSilenceFloorDb;
    const double ms = static_cast<double>(kernels::sumsq_f32(samples.data() + start, len)) /
                      static_cast<double>(len);
    if (ms <= kPowerFloor) return kSilenceFloorDb;
    return 10.0 * std::log10(ms);
}

}  // namespace

std::vector<float> track_intensity(const std::vector<float>& samples, std::uint32_t sample_rate) {
    const auto clock = make_clock(samples, sample_rate);
    const std::size_t win = std::min(clock.window_samples(), samples.size());
    std::vector<float> out(clock.frame_count());
    for (std::size_t f = 0; f < out.size(); ++f) {
        out[f] = static_cast<float>(mean_square_db(samples, clock.analysis_start_sample(f), win));
    }
    return out;
}

SpeechFlags detect_speech(const std::vector<float>& intensity) {
    if (intensity.empty()) throw std::invalid_argument("detect_speech: empty intensity series");
    std::vector<double> sorted(intensity.begin(), intensity.end());
    std::sort(sorted.begin(), sorted.end());
    const double p95 = percentile_sorted(sorted, 0.95);
    // Guard just above the silence floor so an all-silence channel (every
    // frame at -96 dB) yields no speech frames.
    const double threshold = std::max(p95 - 25.0, kSilenceFloorDb + 0.5);
    SpeechFlags out;
    out.threshold_db = threshold;
    out.speech.resize(intensity.size());
    for (std::size_t f = 0; f < intensity.size(); ++f) {
        out.speech[f] = intensity[f] >= threshold ? 1 : 0;
    }
    return out;
}

PitchTrack track_pitch(const std::vector<float>& samples, std::uint32_t sample_rate) {
    const auto flags = detect_speech(track_intensity(samples, sample_rate));
    return track_pitch(samples, sample_rate, flags.speech);
}

PitchTrack track_pitch(const std::vector<float>& samples, std::uint32_t sample_rate,
                       const std::vector<std::uint8_t>& speech) {
    const auto clock = make_clock(samples, sample_rate);
    const std::size_t frames = clock.frame_count();
    if (speech.size() != frames) throw std::invalid_argument("track_pitch: speech flags misaligned");

    PitchTrack out;
    out.pitch_hz.assign(frames, 0.0f);
    out.voiced.assign(frames, 0);

    const std::size_t win = static_cast<std::size_t>(sample_rate) * 40 / 1000;
    const std::size_t lag_min = sample_rate / 500;
    const std::size_t lag_max = sample_rate / 50;
    if (samples.size() < win + lag_max + 1 || lag_min < 2) return out;  // track too short: all unvoiced

    // Prefix sums of squared samples give every lag's window energy in O(1).
    std::vector<double> sq_prefix(samples.size() + 1, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        sq_prefix[i + 1] = sq_prefix[i] + static_cast<double>(samples[i]) * samples[i];
    }
    const auto energy = [&](std::size_t s, std::size_t n) { return sq_prefix[s + n] - sq_prefix[s]; };

    const std::size_t hop = clock.hop_samples();
    const std::int64_t max_start = static_cast<std::int64_t>(samples.size() - win - lag_max);
    std::vector<float> nac(lag_max + 1, 0.0f);

    for (std::size_t f = 0; f < frames; ++f) {
        if (!speech[f]) continue;  // voicing requires a speech frame
        std::int64_t s64 = static_cast<std::int64_t>(f * hop + hop / 2) -
                           static_cast<std::int64_t>(win) / 2;
        s64 = std::clamp<std::int64_t>(s64, 0, max_start);
        const auto s = static_cast<std::size_t>(s64);

        const double e0 = energy(s, win);
        if (e0 <= kPowerFloor * static_cast<double>(win)) continue;

        float gmax = -1.0f;
        for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
            const double elag = energy(s + lag, win);
            if (elag <= 0.0) {
                nac[lag] = 0.0f;
                continue;
            }
            const double num = kernels::dot_f32(samples.data() + s, samples.data() + s + lag, win);
            nac[lag] = static_cast<float>(num / std::sqrt(e0 * elag));
            gmax = std::max(gmax, nac[lag]);
        }
        if (gmax < 0.45f) continue;

        // Octave safety: among near-best local maxima, prefer the smallest lag
        // (the highest candidate frequency) to avoid halving errors.
        std::size_t best = 0;
        for (std::size_t lag = lag_min; lag <= lag_max; ++lag) {
            const bool left_ok = lag == lag_min || nac[lag] >= nac[lag - 1];
            const bool right_ok = lag == lag_max || nac[lag] >= nac[lag + 1];
            if (left_ok && right_ok && nac[lag] >= gmax - 0.02f) {
                best = lag;
                break;
            }
        }
        if (best == 0) continue;

        double period = static_cast<double>(best);
        if (best > lag_min && best < lag_max) {
            const double ym = nac[best - 1], y0 = nac[best], yp = nac[best + 1];
            const double denom = ym - 2.0 * y0 + yp;
            if (std::abs(denom) > 1e-12) {
                period += std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
            }
        }
        const double hz = std::clamp(static_cast<double>(sample_rate) / period, 50.0, 500.0);
        out.pitch_hz[f] = static_cast<float>(hz);
        out.voiced[f] = 1;
    }
    return out;
}

std::vector<double> track_cepstrum(const std::vector<float>& samples, std::uint32_t sample_rate) {
    const auto clock = make_clock(samples, sample_rate);
    const SpectralPlan plan(sample_rate);
    const std::size_t frames = clock.frame_count();
    std::vector<double> out(frames * kCepstrumOrder, 0.0);
    if (samples.size() < plan.win) return out;
    std::vector<double> padded, power;
    for (std::size_t f = 0; f < frames; ++f) {
        frame_power_spectrum(plan, samples, clock.analysis_start_sample(f), padded, power);
        cepstrum_from_power(plan, power, out.data() + f * kCepstrumOrder);
    }
    return out;
}

TiltTrack track_tilt(const std::vector<float>& samples, std::uint32_t sample_rate) {
    const auto clock = make_clock(samples, sample_rate);
    const SpectralPlan plan(sample_rate);
    const std::size_t frames = clock.frame_count();
    TiltTrack out;
    out.tilt_db_per_oct.assign(frames, 0.0f);
    out.has_tilt.assign(frames, 0);
    if (samples.size() < plan.win) return out;
    std::vector<double> padded, power;
    for (std::size_t f = 0; f < frames; ++f) {
        frame_power_spectrum(plan, samples, clock.analysis_start_sample(f), padded, power);
        if (const auto tilt = tilt_from_band_power(power, plan.bands)) {
            out.tilt_db_per_oct[f] = static_cast<float>(*tilt);
            out.has_tilt[f] = 1;
        }
    }
    return out;
}

std::optional<double> tilt_from_power_spectrum(const std::vector<double>& power,
                                               std::uint32_t sample_rate, std::size_t nfft) {
    if (power.size() != nfft / 2 + 1) {
        throw std::invalid_argument("tilt_from_power_spectrum: expected nfft/2+1 bins");
    }
    return tilt_from_band_power(power, SpectralPlan::band_bins(sample_rate, nfft));
}

std::vector<float> compute_creak(const std::vector<float>& pitch_hz,
                                 const std::vector<std::uint8_t>& voiced, double pitch_p10) {
    if (pitch_hz.size() != voiced.size()) {
        throw std::invalid_argument("compute_creak: pitch/voiced series misaligned");
    }
    const std::size_t n = pitch_hz.size();
    std::vector<float> out(n, 0.0f);
    for (std::size_t f = 0; f < n; ++f) {
        if (!voiced[f]) continue;
        // Jitter: mean absolute relative period difference between adjacent
        // voiced frames within +-2 frames of f.
        double jitter_sum = 0.0;
        int jitter_n = 0;
        const std::size_t lo = f >= 2 ? f - 2 : 0;
        const std::size_t hi = std::min(f + 2, n - 1);
        for (std::size_t i = lo; i < hi; ++i) {
            if (!voiced[i] || !voiced[i + 1]) continue;
            const double t0 = 1.0 / pitch_hz[i];
            const double t1 = 1.0 / pitch_hz[i + 1];
            jitter_sum += std::abs(t1 - t0) / (0.5 * (t0 + t1));
            ++jitter_n;
        }
        const double jitter = jitter_n > 0 ? clamp01(jitter_sum / jitter_n) : 0.0;
        const double low = pitch_hz[f] < pitch_p10 ? 1.0 : 0.0;
        out[f] = static_cast<float>(0.5 * (jitter + low));
    }
    return out;
}

BaseSignals compute_base_signals(const std::vector<float>& samples, std::uint32_t sample_rate) {
    const auto clock = make_clock(samples, sample_rate);
    BaseSignals bs;
    bs.frame_count = clock.frame_count();
    bs.sample_rate = sample_rate;

    bs.intensity_db = track_intensity(samples, sample_rate);
    auto flags = detect_speech(bs.intensity_db);
    bs.speech = std::move(flags.speech);
    bs.speech_threshold_db = flags.threshold_db;

    auto pitch = track_pitch(samples, sample_rate, bs.speech);
    bs.pitch_hz = std::move(pitch.pitch_hz);
    bs.voiced = std::move(pitch.voiced);

    // Fused spectral pass: cepstrum and tilt share one FFT per frame.
    const SpectralPlan plan(sample_rate);
    bs.cepstrum.assign(bs.frame_count * kCepstrumOrder, 0.0);
    bs.tilt_db_per_oct.assign(bs.frame_count, 0.0f);
    bs.has_tilt.assign(bs.frame_count, 0);
    if (samples.size() >= plan.win) {
        std::vector<double> padded, power;
        for (std::size_t f = 0; f < bs.frame_count; ++f) {
            frame_power_spectrum(plan, samples, clock.analysis_start_sample(f), padded, power);
            cepstrum_from_power(plan, power, bs.cepstrum.data() + f * kCepstrumOrder);
            if (const auto tilt = tilt_from_band_power(power, plan.bands)) {
                bs.tilt_db_per_oct[f] = static_cast<float>(*tilt);
                bs.has_tilt[f] = 1;
            }
        }
    }

    std::vector<double> voiced_pitches;
    for (std::size_t f = 0; f < bs.frame_count; ++f) {
        if (bs.voiced[f]) voiced_pitches.push_back(bs.pitch_hz[f]);
    }
    std::sort(voiced_pitches.begin(), voiced_pitches.end());
    const double p10 = voiced_pitches.empty() ? 0.0 : percentile_sorted(voiced_pitches, 0.10);
    bs.creak = compute_creak(bs.pitch_hz, bs.voiced, p10);
    return bs;
}

SpeakerBaseline build_baseline(const BaseSignals& bs) {
    SpeakerBaseline b;
    b.speech_threshold_db = bs.speech_threshold_db;

    std::vector<double> voiced_pitches;
    std::vector<std::size_t> voiced_idx;
    for (std::size_t f = 0; f < bs.frame_count; ++f) {
        if (bs.voiced[f]) {
            voiced_pitches.push_back(bs.pitch_hz[f]);
            voiced_idx.push_back(f);
        }
    }
    b.voiced_frames = voiced_pitches.size();
    if (!voiced_pitches.empty()) {
        std::sort(voiced_pitches.begin(), voiced_pitches.end());
        b.pitch_p10 = percentile_sorted(voiced_pitches, 0.10);
        b.pitch_p25 = percentile_sorted(voiced_pitches, 0.25);
        b.pitch_p50 = percentile_sorted(voiced_pitches, 0.50);
        b.pitch_p75 = percentile_sorted(voiced_pitches, 0.75);
        b.pitch_p90 = percentile_sorted(voiced_pitches, 0.90);
    }

    std::vector<double> speech_intensity;
    for (std::size_t f = 0; f < bs.frame_count; ++f) {
        if (bs.speech[f]) speech_intensity.push_back(bs.intensity_db[f]);
    }
    b.speech_frames = speech_intensity.size();
    if (!speech_intensity.empty()) {
        double sum = 0;
        for (double v : speech_intensity) sum += v;
        b.intensity_mean = sum / static_cast<double>(speech_intensity.size());
        if (speech_intensity.size() >= 2) {
            double ss = 0;
            for (double v : speech_intensity) ss += (v - b.intensity_mean) * (v - b.intensity_mean);
            b.intensity_sd = std::sqrt(ss / static_cast<double>(speech_intensity.size() - 1));
        }
    }

    if (!voiced_idx.empty()) {
        for (std::size_t f : voiced_idx) {
            const double* row = bs.cepstrum_row(f);
            for (int j = 0; j < kCepstrumOrder; ++j) b.mean_cepstrum[j] += row[j];
        }
        for (int j = 0; j < kCepstrumOrder; ++j) {
            b.mean_cepstrum[j] /= static_cast<double>(voiced_idx.size());
        }
        std::vector<double> dists;
        dists.reserve(voiced_idx.size());
        for (std::size_t f : voiced_idx) {
            dists.push_back(std::sqrt(
                kernels::l2sq_f64(bs.cepstrum_row(f), b.mean_cepstrum.data(), kCepstrumOrder)));
        }
        std::sort(dists.begin(), dists.end());
        b.cepstral_delta = percentile_sorted(dists, 0.50);
    }

    // Flux between consecutive speech frames.
    std::vector<double> fluxes;
    for (std::size_t f = 1; f < bs.frame_count; ++f) {
        if (bs.speech[f] && bs.speech[f - 1]) {
            fluxes.push_back(std::sqrt(
                kernels::l2sq_f64(bs.cepstrum_row(f), bs.cepstrum_row(f - 1), kCepstrumOrder)));
        }
    }
    if (!fluxes.empty()) {
        std::sort(fluxes.begin(), fluxes.end());
        b.flux_phi = percentile_sorted(fluxes, 0.50);
    }

    std::vector<double> tilts;
    for (std::size_t f = 0; f < bs.frame_count; ++f) {
        if (bs.speech[f] && bs.has_tilt[f]) tilts.push_back(bs.tilt_db_per_oct[f]);
    }
    if (!tilts.empty()) {
        std::sort(tilts.begin(), tilts.end());
        b.tilt_median = percentile_sorted(tilts, 0.50);
        b.tilt_iqr = percentile_sorted(tilts, 0.75) - percentile_sorted(tilts, 0.25);
    }

    b.reliable = b.voiced_frames >= 100 && b.speech_frames >= 100;
    return b;
}

void write_base_signals_csv(const std::string& path, const BaseSignals& bs) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("base_signals: " + path + ": cannot open for writing");
    out << "frame,pitch_hz,voiced,intensity_db,tilt_db_per_oct,speech,creak";
    for (int j = 1; j <= kCepstrumOrder; ++j) out << ",c" << j;
    out << "\n";
    for (std::size_t f = 0; f < bs.frame_count; ++f) {
        out << f << ',' << fmt_num(bs.voiced[f] ? bs.pitch_hz[f] : 0.0) << ','
            << int(bs.voiced[f]) << ',' << fmt_num(bs.intensity_db[f]) << ','
            << (bs.has_tilt[f] ? fmt_num(bs.tilt_db_per_oct[f]) : "NA") << ','
            << int(bs.speech[f]) << ',' << fmt_num(bs.creak[f]);
        const double* row = bs.cepstrum_row(f);
        for (int j = 0; j < kCepstrumOrder; ++j) out << ',' << fmt_num(row[j]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("base_signals: " + path + ": write failed");
}

}  // namespace reduxcorr::base_signals
