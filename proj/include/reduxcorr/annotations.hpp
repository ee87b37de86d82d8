#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reduxcorr::annotations {

// One perceived-reduction region: level 0 (enunciated) .. 3 (strongly
// reduced) over [start_ms, end_ms) on one channel.
struct ReductionRegion {
    std::string channel;  // "left" / "right"
    double start_ms = 0;
    double end_ms = 0;
    int level = 0;
};

// One pragmatic-function region; tags from the closed 11-tag set.
struct FunctionRegion {
    std::string channel;
    double start_ms = 0;
    double end_ms = 0;
    std::string tag;
};

extern const std::array<const char*, 11> kFunctionTags;  // PO FI PC UC RE PW DP TC TG PF NEG

// Per-frame labels; absent outside labeled regions.
struct FrameLabels {
    std::vector<std::int8_t> level;  // -1 = unlabeled
    std::size_t labeled_frames = 0;

    bool labeled(std::size_t f) const { return level[f] >= 0; }
};

// Parses `channel,start_ms,end_ms,label` CSV (header required). Labels are
// 0-3 or the aliases e/n/r/rr. Errors (unknown label, start >= end, overlap
// on a channel) name the offending line numbers.
std::vector<ReductionRegion> parse_regions(const std::string& path);

// Same shape with `tag` instead of `label`; tags must come from kFunctionTags.
// Overlap on a channel is permitted (multiple annotation tiers).
std::vector<FunctionRegion> parse_function_regions(const std::string& path);

// Frame f takes the level of the region containing f's start time. Regions
// reaching past frame_count are clipped (clipped_regions counts them).
FrameLabels regions_to_frames(const std::vector<ReductionRegion>& regions,
                              std::size_t frame_count, const std::string& channel,
                              std::size_t* clipped_regions = nullptr);

// Pairs regions by identical (channel, start, end); counts[a][b] = regions
// labeled a by A and b by B. unpaired_a/unpaired_b count unmatched regions.
struct ConfusionResult {
    std::array<std::array<std::size_t, 4>, 4> counts{};
    std::size_t unpaired_a = 0;
    std::size_t unpaired_b = 0;
    std::size_t paired = 0;
};
ConfusionResult confusion_matrix(const std::vector<ReductionRegion>& a,
                                 const std::vector<ReductionRegion>& b);

// Pearson r over paired region labels; nullopt when fewer than 2 pairs or
// either side has zero variance.
std::optional<double> agreement_correlation(const std::vector<ReductionRegion>& a,
                                            const std::vector<ReductionRegion>& b);

// Region counts and duration-weighted frame totals per level.
struct LabelCounts {
    std::array<std::size_t, 4> regions{};
    std::array<std::size_t, 4> frames{};  // duration_ms / 10 per region, summed
};
LabelCounts label_counts(const std::vector<ReductionRegion>& regions);

void write_confusion_csv(const std::string& path, const ConfusionResult& result);

}  // namespace reduxcorr::annotations
