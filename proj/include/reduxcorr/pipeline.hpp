#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "reduxcorr/models.hpp"

namespace reduxcorr::pipeline {

// Run configuration parsed from a plain-text key=value file (# comments and
// blank lines skipped; unknown keys rejected). Relative `manifest` and `out`
// paths resolve against the config file's directory; a --out flag on the
// command line overrides `out` after loading.
struct RunConfig {
    std::string manifest;                      // corpus manifest CSV
    std::string language = "en";               // tag stamped into reports/models
    std::vector<std::string> holdout;          // conversation ids, ';'-separated in the file
    std::string model = "linear";              // linear | knn
    int k = models::kDefaultK;                 // knn neighbor count
    double lambda = models::kDefaultRidge;     // linear ridge strength
    std::string out;                           // output directory (default: <config dir>/run)
    std::uint64_t seed = 1;                    // synth determinism
    bool dump_base_signals = false;            // extract also writes per-frame base signals
    int synth_conversations = 4;               // synth corpus shape
    double synth_duration_s = 150.0;
    std::uint32_t synth_rate = 16000;
};

RunConfig load_run_config(const std::string& path);

// Label files live next to the audio: `<stem>.wav` pairs with
// `<stem>.reduction.csv`, `<stem>.reduction_b.csv` (second annotator) and
// `<stem>.functions.csv`.
std::string sibling_label_path(const std::string& wav_path, const std::string& kind);

// Per-channel feature extraction over the manifest's annotated ranges.
// Writes <out>/features/<conversation>_<left|right>.csv, plus
// <out>/base/<conversation>_<left|right>.csv when dump_base_signals is set.
void cmd_extract(const RunConfig& config);

// Per-column Pearson correlation of extracted features against frame labels,
// pooled over the whole manifest. Writes <out>/correlations.csv and the
// |r|-filtered <out>/correlations_strong.csv.
void cmd_correlate(const RunConfig& config);

// Fits the configured predictor on all labeled frames outside the holdout
// conversations. Writes <out>/model_<language>_<model>.txt.
void cmd_train(const RunConfig& config);

// Scores the saved model on the holdout conversations' labeled frames.
// Writes <out>/eval_<language>_<model>.csv.
void cmd_evaluate(const RunConfig& config);

// Inter-annotator comparison over every conversation that has a second
// annotator file. Writes <out>/confusion.csv and <out>/agreement.csv.
void cmd_agreement(const RunConfig& config);

// Reduction-level distribution and per-pragmatic-function statistics pooled
// over the manifest. Writes <out>/reduction_distribution.csv and
// <out>/function_stats.csv.
void cmd_functions(const RunConfig& config);

// Generates the deterministic synthetic mini-corpus into `out`, along with a
// ready-to-run `run.config` for the commands above.
void cmd_synth(const RunConfig& config);

// Loads the config (applying the optional out override) and dispatches to the
// command. Throws std::invalid_argument for an unknown command name.
void run_command(const std::string& command, const std::string& config_path,
                 const std::string& out_override = "");

}  // namespace reduxcorr::pipeline
