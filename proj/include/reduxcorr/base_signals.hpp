#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reduxcorr::base_signals {

constexpr int kCepstrumOrder = 12;
constexpr double kSilenceFloorDb = -96.0;

// Per-frame low-level signals for one channel. All series share frame_count.
// pitch_hz is 0 where unvoiced; tilt_db_per_oct is meaningful only where
// has_tilt is set.
struct BaseSignals {
    std::size_t frame_count = 0;
    std::uint32_t sample_rate = 0;
    std::vector<float> pitch_hz;
    std::vector<std::uint8_t> voiced;
    std::vector<float> intensity_db;
    std::vector<double> cepstrum;  // frame_count x 12, row-major (c1..c12)
    std::vector<float> tilt_db_per_oct;
    std::vector<std::uint8_t> has_tilt;
    std::vector<std::uint8_t> speech;
    std::vector<float> creak;
    double speech_threshold_db = kSilenceFloorDb;

    const double* cepstrum_row(std::size_t f) const { return cepstrum.data() + f * kCepstrumOrder; }
};

// Per-speaker normalization statistics. `reliable` is false when fewer than
// 100 voiced or 100 speech frames qualified; values are still populated with
// whatever could be computed (zeros where nothing qualified).
struct SpeakerBaseline {
    double pitch_p10 = 0, pitch_p25 = 0, pitch_p50 = 0, pitch_p75 = 0, pitch_p90 = 0;
    double intensity_mean = 0, intensity_sd = 0;
    std::array<double, kCepstrumOrder> mean_cepstrum{};
    double tilt_median = 0, tilt_iqr = 0;
    double speech_threshold_db = kSilenceFloorDb;
    double cepstral_delta = 0;  // median distance of voiced cepstra to the mean cepstrum
    double flux_phi = 0;        // median cepstral flux between consecutive speech frames
    std::size_t voiced_frames = 0;
    std::size_t speech_frames = 0;
    bool reliable = false;
};

struct PitchTrack {
    std::vector<float> pitch_hz;  // 0 where unvoiced
    std::vector<std::uint8_t> voiced;
};

struct SpeechFlags {
    std::vector<std::uint8_t> speech;
    double threshold_db = kSilenceFloorDb;
};

// 10*log10(mean squared amplitude over the 25 ms window), floored at -96 dB.
std::vector<float> track_intensity(const std::vector<float>& samples, std::uint32_t sample_rate);

// Speech iff intensity >= (95th-percentile intensity - 25 dB). The threshold
// is additionally floored just above -96 dB so an all-silence channel reports
// no speech.
SpeechFlags detect_speech(const std::vector<float>& intensity);

// Normalized-autocorrelation pitch over a 40 ms window, search range
// 50-500 Hz. Voiced iff peak normalized autocorrelation >= 0.45 and the frame
// is a speech frame. The two-argument form derives speech flags internally.
PitchTrack track_pitch(const std::vector<float>& samples, std::uint32_t sample_rate);
PitchTrack track_pitch(const std::vector<float>& samples, std::uint32_t sample_rate,
                       const std::vector<std::uint8_t>& speech);

// Real cepstrum c1..c12 of each 25 ms Hamming-windowed frame (frames x 12,
// row-major). The log-magnitude spectrum is floored at the -96 dB equivalent,
// so digital silence yields exactly zero coefficients.
std::vector<double> track_cepstrum(const std::vector<float>& samples, std::uint32_t sample_rate);

// Spectral tilt (dB/octave) per frame: least-squares slope of 1/3-octave band
// energy (dB) against band index/3. Absent where fewer than 6 bands rise
// above the -96 dB floor.
struct TiltTrack {
    std::vector<float> tilt_db_per_oct;
    std::vector<std::uint8_t> has_tilt;
};
TiltTrack track_tilt(const std::vector<float>& samples, std::uint32_t sample_rate);

// Tilt of one one-sided power spectrum (nfft/2+1 bins, full-scale-referenced
// power). Exposed so planted-slope spectra can be checked without audio.
// Bands have center frequencies 100*2^(k/3) Hz up to 0.9*Nyquist; band k
// spans centers*2^(-1/6)..2^(1/6); nullopt if fewer than 6 live bands.
std::optional<double> tilt_from_power_spectrum(const std::vector<double>& power,
                                               std::uint32_t sample_rate, std::size_t nfft);

// Creak score in [0,1]: mean of (a) clamped local period jitter over +-2
// frames and (b) a low-pitch indicator (pitch < p10); 0 where unvoiced.
std::vector<float> compute_creak(const std::vector<float>& pitch_hz,
                                 const std::vector<std::uint8_t>& voiced, double pitch_p10);

// Full per-channel pass: intensity -> speech -> pitch -> spectral frame
// analysis (cepstrum + tilt share one FFT per frame) -> creak.
BaseSignals compute_base_signals(const std::vector<float>& samples, std::uint32_t sample_rate);

SpeakerBaseline build_baseline(const BaseSignals& signals);

// CSV dump, header: frame,pitch_hz,voiced,intensity_db,tilt_db_per_oct,speech,creak,c1..c12
void write_base_signals_csv(const std::string& path, const BaseSignals& signals);

}  // namespace reduxcorr::base_signals
