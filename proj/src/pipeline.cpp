#include "reduxcorr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>
#include <thread>

#include "reduxcorr/annotations.hpp"
#include "reduxcorr/base_signals.hpp"
#include "reduxcorr/midlevel.hpp"
#include "reduxcorr/signal_io.hpp"
#include "reduxcorr/stats.hpp"
#include "reduxcorr/synth.hpp"
#include "reduxcorr/util.hpp"

namespace reduxcorr::pipeline {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void config_fail(const std::string& path, int line, const std::string& reason) {
    throw std::runtime_error("config: " + path + ":" + std::to_string(line) + ": " + reason);
}

std::string resolve_against(const fs::path& base_dir, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return p.lexically_normal().string();
    return (base_dir / p).lexically_normal().string();
}

long long parse_integer(const std::string& path, int line, const std::string& key,
                        const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        config_fail(path, line, key + " must be an integer, got '" + value + "'");
    }
}

double parse_real(const std::string& path, int line, const std::string& key,
                  const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        config_fail(path, line, key + " must be a number, got '" + value + "'");
    }
}

// Manifest entries sorted by conversation id with ids verified unique; all
// pooled outputs merge in this order so reruns are diffable.
std::vector<signal_io::ManifestEntry> load_sorted_manifest(const RunConfig& config) {
    if (config.manifest.empty()) {
        throw std::runtime_error("config is missing manifest= (required by this command)");
    }
    auto entries = signal_io::parse_manifest(config.manifest);
    std::sort(entries.begin(), entries.end(),
              [](const auto& a, const auto& b) { return a.conversation_id < b.conversation_id; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].conversation_id == entries[i - 1].conversation_id) {
            throw std::runtime_error("manifest: duplicate conversation id '" +
                                     entries[i].conversation_id + "'");
        }
    }
    return entries;
}

void check_holdout_ids(const std::vector<signal_io::ManifestEntry>& entries,
                       const std::vector<std::string>& holdout) {
    for (const auto& id : holdout) {
        const bool known = std::any_of(entries.begin(), entries.end(), [&](const auto& e) {
            return e.conversation_id == id;
        });
        if (!known) throw std::runtime_error("holdout conversation '" + id + "' not in manifest");
    }
}

bool is_holdout(const RunConfig& config, const std::string& id) {
    return std::find(config.holdout.begin(), config.holdout.end(), id) != config.holdout.end();
}

// Runs fn(i) for i in [0, n) on a small worker pool; per-index failures are
// re-thrown on the caller thread in index order.
template <typename Fn>
void parallel_for_index(std::size_t n, Fn fn) {
    if (n == 0) return;
    const auto workers =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), n));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

const char* channel_name(int ch) { return ch == 0 ? "left" : "right"; }

std::string feature_csv_path(const RunConfig& config, const std::string& conversation,
                             const std::string& channel) {
    return (fs::path(config.out) / "features" / (conversation + "_" + channel + ".csv")).string();
}

// [ceil(start/10), ceil(end/10)) — the frame range covered by [start_ms, end_ms).
std::size_t frame_floor(double ms) { return static_cast<std::size_t>(std::ceil(ms / 10.0)); }

// Frame labels for one channel, sized to cover every region (regions are the
// source of truth here; audio length clipping happens at extraction time).
annotations::FrameLabels channel_labels(const std::vector<annotations::ReductionRegion>& regions,
                                        const std::string& channel) {
    std::size_t frame_count = 0;
    for (const auto& region : regions) {
        if (region.channel == channel) frame_count = std::max(frame_count, frame_floor(region.end_ms));
    }
    return annotations::regions_to_frames(regions, frame_count, channel);
}

// Feature rows joined with reduction labels, pooled in manifest order.
struct LabeledData {
    std::vector<double> X;  // rows x 85, row-major
    std::vector<double> y;
    std::vector<std::string> row_conversation;

    std::size_t rows() const { return y.size(); }
};

LabeledData load_labeled_data(const RunConfig& config,
                              const std::vector<signal_io::ManifestEntry>& entries) {
    LabeledData data;
    for (const auto& entry : entries) {
        const auto regions = annotations::parse_regions(sibling_label_path(entry.wav_path, "reduction"));
        for (int ch = 0; ch < 2; ++ch) {
            const std::string channel = channel_name(ch);
            const auto path = feature_csv_path(config, entry.conversation_id, channel);
            if (!fs::exists(path)) {
                throw std::runtime_error("missing feature file " + path + " (run extract first)");
            }
            const auto rows = midlevel::read_feature_csv(path);
            if (!rows.empty() && rows.front().conversation != entry.conversation_id) {
                throw std::runtime_error(path + ": conversation column says '" +
                                         rows.front().conversation + "', manifest says '" +
                                         entry.conversation_id + "'");
            }
            const auto labels = channel_labels(regions, channel);
            for (const auto& row : rows) {
                if (row.frame >= labels.level.size() || !labels.labeled(row.frame)) continue;
                data.X.insert(data.X.end(), row.values.begin(), row.values.end());
                data.y.push_back(static_cast<double>(labels.level[row.frame]));
                data.row_conversation.push_back(entry.conversation_id);
            }
        }
    }
    return data;
}

std::ofstream open_report(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write " + path.string());
    return file;
}

void finish_report(std::ofstream& file, const fs::path& path) {
    file.flush();
    if (!file) throw std::runtime_error("write failed: " + path.string());
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) out += ';';
        out += id;
    }
    return out;
}

std::string model_path(const RunConfig& config) {
    return (fs::path(config.out) / ("model_" + config.language + "_" + config.model + ".txt"))
        .string();
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw std::runtime_error("config: cannot open " + path);
    const fs::path base_dir = fs::path(path).parent_path();

    RunConfig config;
    bool saw_out = false;
    std::string line;
    int line_no = 0;
    while (std::getline(file, line)) {
        ++line_no;
        const std::string text = trim(line);
        if (text.empty() || text[0] == '#') continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) config_fail(path, line_no, "expected key=value");
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));

        if (key == "manifest") {
            config.manifest = resolve_against(base_dir, value);
        } else if (key == "language") {
            if (value.empty() || value.find_first_of(", \t") != std::string::npos) {
                config_fail(path, line_no, "language must be a single token");
            }
            config.language = value;
        } else if (key == "holdout") {
            config.holdout.clear();
            std::size_t begin = 0;
            while (begin <= value.size()) {
                const auto end = value.find(';', begin);
                const auto piece = trim(value.substr(begin, end == std::string::npos
                                                                ? std::string::npos
                                                                : end - begin));
                if (!piece.empty()) config.holdout.push_back(piece);
                if (end == std::string::npos) break;
                begin = end + 1;
            }
        } else if (key == "model") {
            if (value != "linear" && value != "knn") {
                config_fail(path, line_no, "model must be linear or knn, got '" + value + "'");
            }
            config.model = value;
        } else if (key == "k") {
            const auto v = parse_integer(path, line_no, key, value);
            if (v < 1) config_fail(path, line_no, "k must be >= 1");
            config.k = static_cast<int>(v);
        } else if (key == "lambda") {
            const auto v = parse_real(path, line_no, key, value);
            if (v <= 0) config_fail(path, line_no, "lambda must be positive");
            config.lambda = v;
        } else if (key == "out") {
            config.out = resolve_against(base_dir, value);
            saw_out = true;
        } else if (key == "seed") {
            const auto v = parse_integer(path, line_no, key, value);
            if (v < 0) config_fail(path, line_no, "seed must be non-negative");
            config.seed = static_cast<std::uint64_t>(v);
        } else if (key == "dump_base_signals") {
            if (value != "0" && value != "1") config_fail(path, line_no, "dump_base_signals must be 0 or 1");
            config.dump_base_signals = value == "1";
        } else if (key == "synth_conversations") {
            const auto v = parse_integer(path, line_no, key, value);
            if (v < 1) config_fail(path, line_no, "synth_conversations must be >= 1");
            config.synth_conversations = static_cast<int>(v);
        } else if (key == "synth_duration_s") {
            const auto v = parse_real(path, line_no, key, value);
            if (v <= 0) config_fail(path, line_no, "synth_duration_s must be positive");
            config.synth_duration_s = v;
        } else if (key == "synth_rate") {
            const auto v = parse_integer(path, line_no, key, value);
            if (v < 8000) config_fail(path, line_no, "synth_rate must be >= 8000");
            config.synth_rate = static_cast<std::uint32_t>(v);
        } else {
            config_fail(path, line_no, "unknown key '" + key + "'");
        }
    }
    if (!saw_out) config.out = resolve_against(base_dir, "run");
    return config;
}

std::string sibling_label_path(const std::string& wav_path, const std::string& kind) {
    fs::path p(wav_path);
    p.replace_extension();  // drop .wav
    return p.string() + "." + kind + ".csv";
}

void cmd_extract(const RunConfig& config) {
    const auto entries = load_sorted_manifest(config);
    fs::create_directories(fs::path(config.out) / "features");
    if (config.dump_base_signals) fs::create_directories(fs::path(config.out) / "base");

    parallel_for_index(entries.size(), [&](std::size_t i) {
        const auto& entry = entries[i];
        const auto recording = signal_io::load_recording(entry.wav_path, entry.conversation_id);
        for (int ch = 0; ch < 2; ++ch) {
            const std::string channel = channel_name(ch);
            const auto signals =
                base_signals::compute_base_signals(recording.channels[static_cast<std::size_t>(ch)],
                                                   recording.sample_rate);
            const auto baseline = base_signals::build_baseline(signals);
            const auto frame_begin =
                std::min(frame_floor(entry.annotated_start_ms), signals.frame_count);
            const auto frame_end = std::min(frame_floor(entry.annotated_end_ms), signals.frame_count);
            if (frame_begin >= frame_end) {
                throw std::runtime_error(entry.conversation_id +
                                         ": annotated range covers no frames of the audio");
            }
            const auto features = midlevel::feature_matrix(signals, baseline, frame_begin, frame_end);
            midlevel::write_feature_csv(feature_csv_path(config, entry.conversation_id, channel),
                                        entry.conversation_id, channel, features);
            if (config.dump_base_signals) {
                const auto base_path = fs::path(config.out) / "base" /
                                       (entry.conversation_id + "_" + channel + ".csv");
                base_signals::write_base_signals_csv(base_path.string(), signals);
            }
        }
    });
}

void cmd_correlate(const RunConfig& config) {
    const auto entries = load_sorted_manifest(config);
    const auto data = load_labeled_data(config, entries);
    if (data.rows() == 0) throw std::runtime_error("correlate: no labeled frames in the corpus");

    const auto correlations =
        stats::column_correlations(data.X, data.rows(), midlevel::kNumFeatures, data.y);

    const fs::path all_path = fs::path(config.out) / "correlations.csv";
    const fs::path strong_path = fs::path(config.out) / "correlations_strong.csv";
    auto all = open_report(all_path);
    auto strong = open_report(strong_path);
    const std::string header = "language,kind,span,r,n\n";
    all << header;
    strong << header;
    for (int i = 0; i < midlevel::kNumFeatures; ++i) {
        const auto& entry = correlations[static_cast<std::size_t>(i)];
        const char* kind = midlevel::kind_code(static_cast<midlevel::FeatureKind>(i / 5));
        const char span = midlevel::kSpans[static_cast<std::size_t>(i % 5)].code;
        std::string row = config.language;
        row += ',';
        row += kind;
        row += ',';
        row += span;
        row += ',';
        row += entry.defined ? fmt_num(entry.r) : "NA";
        row += ',';
        row += std::to_string(entry.n);
        row += '\n';
        all << row;
        if (entry.defined && std::abs(entry.r) > stats::kStrongCorrelation) strong << row;
    }
    finish_report(all, all_path);
    finish_report(strong, strong_path);
}

void cmd_train(const RunConfig& config) {
    const auto entries = load_sorted_manifest(config);
    check_holdout_ids(entries, config.holdout);

    std::vector<signal_io::ManifestEntry> train_entries;
    for (const auto& entry : entries) {
        if (!is_holdout(config, entry.conversation_id)) train_entries.push_back(entry);
    }
    if (train_entries.empty()) throw std::runtime_error("train: every conversation is held out");

    const auto data = load_labeled_data(config, train_entries);
    if (data.rows() == 0) throw std::runtime_error("train: no labeled frames outside the holdout");

    std::vector<std::string> conversations;
    for (const auto& entry : train_entries) conversations.push_back(entry.conversation_id);

    if (config.model == "linear") {
        auto model = models::train_linear(data.X, data.y, data.rows(), config.lambda);
        model.language = config.language;
        model.conversations = conversations;
        models::save_linear(model_path(config), model);
    } else {
        auto model = models::train_knn(data.X, data.y, data.rows(), config.k);
        model.language = config.language;
        model.conversations = conversations;
        models::save_knn(model_path(config), model);
    }
}

void cmd_evaluate(const RunConfig& config) {
    if (config.holdout.empty()) {
        throw std::runtime_error("evaluate: config names no holdout conversations");
    }
    const auto entries = load_sorted_manifest(config);
    check_holdout_ids(entries, config.holdout);

    std::vector<signal_io::ManifestEntry> holdout_entries;
    for (const auto& entry : entries) {
        if (is_holdout(config, entry.conversation_id)) holdout_entries.push_back(entry);
    }
    const auto data = load_labeled_data(config, holdout_entries);
    if (data.rows() == 0) throw std::runtime_error("evaluate: no labeled frames in the holdout");

    std::vector<double> predictions;
    if (config.model == "linear") {
        const auto model = models::load_linear(model_path(config));
        predictions = models::predict_linear(model, data.X, data.rows());
    } else {
        const auto model = models::load_knn(model_path(config));
        predictions = models::predict_knn(model, data.X, data.rows());
    }
    auto report = models::evaluate(predictions, data.y);
    report.holdout_ids = config.holdout;

    const fs::path path = fs::path(config.out) /
                          ("eval_" + config.language + "_" + config.model + ".csv");
    auto file = open_report(path);
    file << "r,n,holdout\n";
    file << (report.r ? fmt_num(*report.r) : "NA") << ',' << report.n << ','
         << join_ids(report.holdout_ids) << '\n';
    finish_report(file, path);
}

void cmd_agreement(const RunConfig& config) {
    const auto entries = load_sorted_manifest(config);

    annotations::ConfusionResult total;
    std::size_t compared = 0;
    for (const auto& entry : entries) {
        const auto path_b = sibling_label_path(entry.wav_path, "reduction_b");
        if (!fs::exists(path_b)) continue;
        const auto a = annotations::parse_regions(sibling_label_path(entry.wav_path, "reduction"));
        const auto b = annotations::parse_regions(path_b);
        const auto result = annotations::confusion_matrix(a, b);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                total.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
                    result.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            }
        }
        total.paired += result.paired;
        total.unpaired_a += result.unpaired_a;
        total.unpaired_b += result.unpaired_b;
        ++compared;
    }
    if (compared == 0) {
        throw std::runtime_error("agreement: no second-annotator (*.reduction_b.csv) files found");
    }

    // Pooled correlation straight from the summed confusion counts: each cell
    // (a, b) contributes `count` label pairs.
    std::vector<double> a_levels, b_levels;
    a_levels.reserve(total.paired);
    b_levels.reserve(total.paired);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const auto count = total.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            a_levels.insert(a_levels.end(), count, static_cast<double>(i));
            b_levels.insert(b_levels.end(), count, static_cast<double>(j));
        }
    }
    const auto r = stats::pearson(a_levels, b_levels);

    annotations::write_confusion_csv((fs::path(config.out) / "confusion.csv").string(), total);
    const fs::path path = fs::path(config.out) / "agreement.csv";
    auto file = open_report(path);
    file << "r,pairs,unpaired_a,unpaired_b\n";
    file << (r ? fmt_num(*r) : "NA") << ',' << total.paired << ',' << total.unpaired_a << ','
         << total.unpaired_b << '\n';
    finish_report(file, path);
}

void cmd_functions(const RunConfig& config) {
    const auto entries = load_sorted_manifest(config);

    // Pool labels and function regions across conversations by rewriting each
    // region's channel to a "<conversation>/<channel>" key.
    std::map<std::string, annotations::FrameLabels> labels_by_key;
    std::vector<annotations::FunctionRegion> pooled_regions;
    annotations::FrameLabels pooled_labels;
    for (const auto& entry : entries) {
        const auto regions = annotations::parse_regions(sibling_label_path(entry.wav_path, "reduction"));
        const auto functions_path = sibling_label_path(entry.wav_path, "functions");
        std::vector<annotations::FunctionRegion> function_regions;
        if (fs::exists(functions_path)) {
            function_regions = annotations::parse_function_regions(functions_path);
        }
        for (int ch = 0; ch < 2; ++ch) {
            const std::string channel = channel_name(ch);
            const std::string key = entry.conversation_id + "/" + channel;
            auto labels = channel_labels(regions, channel);
            pooled_labels.level.insert(pooled_labels.level.end(), labels.level.begin(),
                                       labels.level.end());
            pooled_labels.labeled_frames += labels.labeled_frames;
            labels_by_key.emplace(key, std::move(labels));
            for (const auto& region : function_regions) {
                if (region.channel != channel) continue;
                auto keyed = region;
                keyed.channel = key;
                pooled_regions.push_back(std::move(keyed));
            }
        }
    }
    if (pooled_labels.labeled_frames == 0) {
        throw std::runtime_error("functions: no labeled frames in the corpus");
    }

    const auto distribution = stats::reduction_distribution(pooled_labels);
    const fs::path dist_path = fs::path(config.out) / "reduction_distribution.csv";
    auto dist_file = open_report(dist_path);
    dist_file << "pct0,pct1,pct2,pct3,mean,sd,n\n";
    dist_file << fmt_num(distribution.pct[0]) << ',' << fmt_num(distribution.pct[1]) << ','
              << fmt_num(distribution.pct[2]) << ',' << fmt_num(distribution.pct[3]) << ','
              << fmt_num(distribution.mean) << ',' << fmt_num(distribution.sd) << ','
              << distribution.n << '\n';
    finish_report(dist_file, dist_path);

    const auto tag_stats = stats::function_stats(pooled_regions, labels_by_key, distribution.mean);
    const fs::path stats_path = fs::path(config.out) / "function_stats.csv";
    auto stats_file = open_report(stats_path);
    stats_file << "tag,mean,n,t,p,bonferroni,pct0,pct1,pct2,pct3\n";
    for (const auto& tag : tag_stats) {
        stats_file << tag.tag << ',' << (tag.n > 0 ? fmt_num(tag.mean) : "NA") << ',' << tag.n
                   << ',' << (tag.has_test ? fmt_num(tag.t) : "NA") << ','
                   << (tag.has_test ? fmt_num(tag.p) : "NA") << ',' << (tag.bonferroni ? 1 : 0)
                   << ',' << fmt_num(tag.pct[0]) << ',' << fmt_num(tag.pct[1]) << ','
                   << fmt_num(tag.pct[2]) << ',' << fmt_num(tag.pct[3]) << '\n';
    }
    finish_report(stats_file, stats_path);
}

void cmd_synth(const RunConfig& config) {
    if (config.out.empty()) throw std::runtime_error("synth: config names no out= directory");
    synth::SynthConfig synth_config;
    synth_config.seed = config.seed;
    synth_config.conversations = config.synth_conversations;
    synth_config.duration_s = config.synth_duration_s;
    synth_config.sample_rate = config.synth_rate;
    synth_config.out_dir = config.out;
    const auto summary = synth::generate_corpus(synth_config);

    // A ready-to-run config next to the corpus: the last conversation is the
    // default holdout unless the synth config already named one.
    const auto holdout =
        config.holdout.empty() ? summary.conversation_ids.back() : join_ids(config.holdout);
    const fs::path path = fs::path(config.out) / "run.config";
    auto file = open_report(path);
    file << "# generated by `reduxcorr synth` (seed " << config.seed << ")\n";
    file << "manifest=manifest.csv\n";
    file << "language=" << config.language << "\n";
    file << "model=" << config.model << "\n";
    file << "k=" << config.k << "\n";
    file << "lambda=" << fmt_num(config.lambda) << "\n";
    file << "holdout=" << holdout << "\n";
    file << "out=run\n";
    file << "seed=" << config.seed << "\n";
    finish_report(file, path);
}

void run_command(const std::string& command, const std::string& config_path,
                 const std::string& out_override) {
    auto config = load_run_config(config_path);
    if (!out_override.empty()) config.out = fs::path(out_override).lexically_normal().string();

    if (command == "extract") {
        cmd_extract(config);
    } else if (command == "correlate") {
        cmd_correlate(config);
    } else if (command == "train") {
        cmd_train(config);
    } else if (command == "evaluate") {
        cmd_evaluate(config);
    } else if (command == "agreement") {
        cmd_agreement(config);
    } else if (command == "functions") {
        cmd_functions(config);
    } else if (command == "synth") {
        cmd_synth(config);
    } else {
        throw std::invalid_argument("unknown command '" + command + "'");
    }
}

}  // namespace reduxcorr::pipeline
