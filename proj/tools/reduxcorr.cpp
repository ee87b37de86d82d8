// reduxcorr: batch prosodic-feature pipeline over labeled dialog audio.
//
//   reduxcorr <extract|correlate|train|evaluate|agreement|functions|synth>
//             --config <path> [--out <dir>]
//
// All behavior is driven by the key=value config file; --out overrides its
// output directory. Exit status 0 on success, 1 with a one-line reason on
// stderr otherwise.

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "reduxcorr/kernels.hpp"
#include "reduxcorr/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"mid-level prosodic features, reduction correlations, and baseline predictors"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    bool show_backend = false;
    app.add_flag("--backend", show_backend, "print the selected compute backend to stderr");

    static const char* kCommands[] = {"extract",   "correlate", "train",    "evaluate",
                                      "agreement", "functions", "synth"};
    static const char* kDescriptions[] = {
        "compute per-frame feature vectors over the manifest's annotated ranges",
        "correlate extracted features with reduction labels",
        "fit the configured predictor on non-holdout labeled frames",
        "score the saved model on the holdout conversations",
        "inter-annotator confusion matrix and correlation",
        "reduction distribution and per-pragmatic-function statistics",
        "generate the deterministic synthetic mini-corpus"};
    for (int i = 0; i < 7; ++i) {
        auto* sub = app.add_subcommand(kCommands[i], kDescriptions[i]);
        sub->add_option("--config", config_path, "run configuration file")->required();
        sub->add_option("--out", out_override, "override the config's output directory");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (show_backend) {
            std::cerr << "backend: " << reduxcorr::kernels::backend_name(
                                            reduxcorr::kernels::active_backend())
                      << "\n";
        }
        reduxcorr::pipeline::run_command(app.get_subcommands().front()->get_name(), config_path,
                                         out_override);
    } catch (const std::exception& e) {
        std::cerr << "reduxcorr: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
