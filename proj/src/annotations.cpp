#include "reduxcorr/annotations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <tuple>

#include "reduxcorr/stats.hpp"
#include "reduxcorr/util.hpp"

namespace reduxcorr::annotations {

const std::array<const char*, 11> kFunctionTags = {"PO", "FI", "PC", "UC", "RE", "PW",
                                                   "DP", "TC", "TG", "PF", "NEG"};

namespace {

[[noreturn]] void fail(const std::string& path, int lineno, const std::string& why) {
    throw std::runtime_error("regions: " + path + ":" + std::to_string(lineno) + ": " + why);
}

int parse_level(const std::string& raw, const std::string& path, int lineno) {
    // Numeric levels or the alias alphabet e/n/r/rr.
    if (raw == "0" || raw == "e") return 0;
    if (raw == "1" || raw == "n") return 1;
    if (raw == "2" || raw == "r") return 2;
    if (raw == "3" || raw == "rr") return 3;
    fail(path, lineno, "unknown label '" + raw + "' (expected 0-3 or e/n/r/rr)");
}

struct RawRow {
    std::string channel;
    double start_ms;
    double end_ms;
    std::string label;
    int lineno;
};

std::vector<RawRow> parse_rows(const std::string& path, const std::string& label_column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("regions: " + path + ": cannot open file");
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("regions: " + path + ": empty file");
    const std::string expected = "channel,start_ms,end_ms," + label_column;
    if (trim(line) != expected) {
        throw std::runtime_error("regions: " + path + ": expected header '" + expected + "'");
    }

    std::vector<RawRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) fail(path, lineno, "expected 4 fields");
        RawRow row;
        row.channel = fields[0];
        if (row.channel != "left" && row.channel != "right") {
            fail(path, lineno, "channel must be 'left' or 'right', got '" + row.channel + "'");
        }
        try {
            row.start_ms = std::stod(fields[1]);
            row.end_ms = std::stod(fields[2]);
        } catch (const std::exception&) {
            fail(path, lineno, "start_ms/end_ms must be numeric");
        }
        if (!(row.start_ms < row.end_ms)) fail(path, lineno, "start_ms must be < end_ms");
        if (row.start_ms < 0) fail(path, lineno, "start_ms must be >= 0");
        row.label = fields[3];
        row.lineno = lineno;
        rows.push_back(std::move(row));
    }
    return rows;
}

void check_no_overlap(const std::vector<RawRow>& rows, const std::string& path) {
    std::vector<const RawRow*> sorted;
    sorted.reserve(rows.size());
    for (const auto& r : rows) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const RawRow* a, const RawRow* b) {
        return std::tie(a->channel, a->start_ms) < std::tie(b->channel, b->start_ms);
    });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i]->channel == sorted[i - 1]->channel &&
            sorted[i]->start_ms < sorted[i - 1]->end_ms) {
            throw std::runtime_error("regions: " + path + ": lines " +
                                     std::to_string(sorted[i - 1]->lineno) + " and " +
                                     std::to_string(sorted[i]->lineno) + " overlap on channel " +
                                     sorted[i]->channel);
        }
    }
}

}  // namespace

std::vector<ReductionRegion> parse_regions(const std::string& path) {
    const auto rows = parse_rows(path, "label");
    check_no_overlap(rows, path);
    std::vector<ReductionRegion> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        out.push_back({row.channel, row.start_ms, row.end_ms,
                       parse_level(row.label, path, row.lineno)});
    }
    return out;
}

std::vector<FunctionRegion> parse_function_regions(const std::string& path) {
    const auto rows = parse_rows(path, "tag");
    std::vector<FunctionRegion> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const bool known = std::any_of(kFunctionTags.begin(), kFunctionTags.end(),
                                       [&](const char* t) { return row.label == t; });
        if (!known) fail(path, row.lineno, "unknown function tag '" + row.label + "'");
        out.push_back({row.channel, row.start_ms, row.end_ms, row.label});
    }
    return out;
}

FrameLabels regions_to_frames(const std::vector<ReductionRegion>& regions,
                              std::size_t frame_count, const std::string& channel,
                              std::size_t* clipped_regions) {
    FrameLabels out;
    out.level.assign(frame_count, -1);
    std::size_t clipped = 0;
    for (const auto& region : regions) {
        if (region.channel != channel) continue;
        // Frame f is labeled when its start time f*10ms lies in [start, end).
        const auto first = static_cast<std::size_t>(std::ceil(region.start_ms / 10.0));
        auto last = static_cast<std::size_t>(std::ceil(region.end_ms / 10.0));
        if (last > frame_count) {
            last = frame_count;
            ++clipped;
        }
        for (std::size_t f = first; f < last; ++f) {
            if (out.level[f] < 0) ++out.labeled_frames;
            out.level[f] = static_cast<std::int8_t>(region.level);
        }
    }
    if (clipped_regions) *clipped_regions = clipped;
    return out;
}

ConfusionResult confusion_matrix(const std::vector<ReductionRegion>& a,
                                 const std::vector<ReductionRegion>& b) {
    std::map<std::tuple<std::string, double, double>, int> index;
    for (const auto& region : a) {
        index[{region.channel, region.start_ms, region.end_ms}] = region.level;
    }
    ConfusionResult out;
    std::size_t matched_b = 0;
    for (const auto& region : b) {
        const auto it = index.find({region.channel, region.start_ms, region.end_ms});
        if (it == index.end()) {
            ++out.unpaired_b;
            continue;
        }
        ++matched_b;
        ++out.counts[static_cast<std::size_t>(it->second)][static_cast<std::size_t>(region.level)];
    }
    out.paired = matched_b;
    out.unpaired_a = a.size() - matched_b;
    return out;
}

std::optional<double> agreement_correlation(const std::vector<ReductionRegion>& a,
                                            const std::vector<ReductionRegion>& b) {
    std::map<std::tuple<std::string, double, double>, int> index;
    for (const auto& region : a) {
        index[{region.channel, region.start_ms, region.end_ms}] = region.level;
    }
    std::vector<double> xs, ys;
    for (const auto& region : b) {
        const auto it = index.find({region.channel, region.start_ms, region.end_ms});
        if (it == index.end()) continue;
        xs.push_back(static_cast<double>(it->second));
        ys.push_back(static_cast<double>(region.level));
    }
    return stats::pearson(xs, ys);
}

LabelCounts label_counts(const std::vector<ReductionRegion>& regions) {
    LabelCounts out;
    for (const auto& region : regions) {
        const auto level = static_cast<std::size_t>(region.level);
        ++out.regions[level];
        const auto first = static_cast<std::int64_t>(std::ceil(region.start_ms / 10.0));
        const auto last = static_cast<std::int64_t>(std::ceil(region.end_ms / 10.0));
        out.frames[level] += static_cast<std::size_t>(std::max<std::int64_t>(last - first, 0));
    }
    return out;
}

void write_confusion_csv(const std::string& path, const ConfusionResult& result) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("confusion: " + path + ": cannot open for writing");
    out << "label,b0,b1,b2,b3\n";
    for (int a = 0; a < 4; ++a) {
        out << 'a' << a;
        for (int b = 0; b < 4; ++b) out << ',' << result.counts[a][b];
        out << "\n";
    }
    if (!out) throw std::runtime_error("confusion: " + path + ": write failed");
}

}  // namespace reduxcorr::annotations
