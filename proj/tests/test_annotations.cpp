#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "reduxcorr/annotations.hpp"
#include "reduxcorr/util.hpp"
#include "test_support.hpp"

using reduxcorr::Rng;
namespace annotations = reduxcorr::annotations;
using annotations::ReductionRegion;
using testsupport::TempDir;
using testsupport::write_text;

namespace {

std::vector<ReductionRegion> make_regions(const std::vector<int>& levels) {
    std::vector<ReductionRegion> regions;
    double t = 0;
    for (int level : levels) {
        regions.push_back({"left", t, t + 500, level});
        t += 500;
    }
    return regions;
}

}  // namespace

TEST_CASE("region parsing with numeric labels and aliases") {
    TempDir dir;
    const auto path = dir.str("labels.csv");
    write_text(path,
               "channel,start_ms,end_ms,label\n"
               "left,1000,1500,2\n"
               "left,1500,2000,rr\n"
               "right,0,800,e\n"
               "right,900,1000,n\n"
               "right,1000,1200,r\n");
    const auto regions = annotations::parse_regions(path);
    REQUIRE(regions.size() == 5);
    CHECK(regions[0].channel == "left");
    CHECK(regions[0].start_ms == 1000);
    CHECK(regions[0].end_ms == 1500);
    CHECK(regions[0].level == 2);
    CHECK(regions[1].level == 3);  // rr
    CHECK(regions[2].level == 0);  // e
    CHECK(regions[3].level == 1);  // n
    CHECK(regions[4].level == 2);  // r
}

TEST_CASE("alias and numeric files describing the same regions parse identically") {
    TempDir dir;
    write_text(dir.str("n.csv"),
               "channel,start_ms,end_ms,label\nleft,0,100,0\nleft,100,200,1\n"
               "left,200,300,2\nleft,300,400,3\n");
    write_text(dir.str("a.csv"),
               "channel,start_ms,end_ms,label\nleft,0,100,e\nleft,100,200,n\n"
               "left,200,300,r\nleft,300,400,rr\n");
    const auto numeric = annotations::parse_regions(dir.str("n.csv"));
    const auto alias = annotations::parse_regions(dir.str("a.csv"));
    REQUIRE(numeric.size() == alias.size());
    for (std::size_t i = 0; i < numeric.size(); ++i) {
        CHECK(numeric[i].level == alias[i].level);
        CHECK(numeric[i].start_ms == alias[i].start_ms);
    }
}

TEST_CASE("region parsing errors carry line numbers") {
    TempDir dir;
    const auto path = dir.str("labels.csv");

    write_text(path, "channel,start_ms,end_ms,label\nleft,0,500,4\n");
    CHECK_THROWS_WITH_AS(annotations::parse_regions(path), doctest::Contains(":2"),
                         std::runtime_error);

    write_text(path, "channel,start_ms,end_ms,label\nleft,500,500,1\n");
    CHECK_THROWS_AS(annotations::parse_regions(path), std::runtime_error);

    write_text(path, "channel,start_ms,end_ms,label\nmiddle,0,500,1\n");
    CHECK_THROWS_AS(annotations::parse_regions(path), std::runtime_error);

    // Overlap on one channel names both offending lines.
    write_text(path,
               "channel,start_ms,end_ms,label\n"
               "left,0,1000,1\n"
               "right,0,1000,2\n"
               "left,900,1200,2\n");
    try {
        annotations::parse_regions(path);
        FAIL("expected an overlap error");
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        CHECK(what.find("lines 2 and 4") != std::string::npos);
        CHECK(what.find("left") != std::string::npos);
    }

    // Same span on different channels is not an overlap.
    write_text(path, "channel,start_ms,end_ms,label\nleft,0,1000,1\nright,0,1000,2\n");
    CHECK(annotations::parse_regions(path).size() == 2);
}

TEST_CASE("function region parsing enforces the tag set but allows overlap") {
    TempDir dir;
    const auto path = dir.str("functions.csv");
    write_text(path,
               "channel,start_ms,end_ms,tag\n"
               "left,0,1000,PO\n"
               "left,500,1500,TC\n"
               "right,0,400,NEG\n");
    const auto regions = annotations::parse_function_regions(path);
    REQUIRE(regions.size() == 3);
    CHECK(regions[1].tag == "TC");

    write_text(path, "channel,start_ms,end_ms,tag\nleft,0,1000,XX\n");
    CHECK_THROWS_WITH_AS(annotations::parse_function_regions(path), doctest::Contains("XX"),
                         std::runtime_error);
}

TEST_CASE("regions map onto frame labels by containing-start-time") {
    std::vector<ReductionRegion> regions = {{"left", 1000, 1500, 2}};
    const auto labels = annotations::regions_to_frames(regions, 200, "left");
    REQUIRE(labels.level.size() == 200);
    CHECK(labels.labeled_frames == 50);
    for (std::size_t f = 0; f < 200; ++f) {
        if (f >= 100 && f < 150) {
            CHECK(labels.level[f] == 2);
        } else {
            CHECK(labels.level[f] == -1);
        }
    }

    // Half-open boundaries: [0,20) then [20,40) split exactly at frame 2.
    std::vector<ReductionRegion> tight = {{"left", 0, 20, 1}, {"left", 20, 40, 3}};
    const auto boundary = annotations::regions_to_frames(tight, 4, "left");
    CHECK(boundary.level[0] == 1);
    CHECK(boundary.level[1] == 1);
    CHECK(boundary.level[2] == 3);
    CHECK(boundary.level[3] == 3);

    // Unaligned starts round up to the first frame starting inside the region.
    std::vector<ReductionRegion> offset = {{"left", 1005, 2000, 1}};
    const auto rounded = annotations::regions_to_frames(offset, 200, "left");
    CHECK(rounded.level[100] == -1);
    CHECK(rounded.level[101] == 1);

    // Other channels and empty inputs label nothing.
    CHECK(annotations::regions_to_frames(regions, 200, "right").labeled_frames == 0);
    CHECK(annotations::regions_to_frames({}, 50, "left").labeled_frames == 0);

    // Regions reaching past the frame count are clipped and counted.
    std::size_t clipped = 0;
    const auto short_track = annotations::regions_to_frames(regions, 120, "left", &clipped);
    CHECK(clipped == 1);
    CHECK(short_track.labeled_frames == 20);
}

TEST_CASE("frame labels re-aggregate to each region's level") {
    Rng rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ReductionRegion> regions;
        double t = 0;
        for (int i = 0; i < 12; ++i) {
            t += rng.uniform(0, 300);
            const double end = t + rng.uniform(50, 800);
            regions.push_back({"left", t, end, static_cast<int>(rng.uniform_int(0, 3))});
            t = end;
        }
        const auto frame_count = static_cast<std::size_t>(t / 10.0) + 10;
        const auto labels = annotations::regions_to_frames(regions, frame_count, "left");
        for (const auto& region : regions) {
            const auto first = static_cast<std::size_t>(std::ceil(region.start_ms / 10.0));
            const auto last = static_cast<std::size_t>(std::ceil(region.end_ms / 10.0));
            for (std::size_t f = first; f < last && f < frame_count; ++f) {
                REQUIRE(labels.level[f] == region.level);
            }
        }
    }
}

TEST_CASE("confusion matrix against itself is diagonal; row sums match counts") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<int> levels;
        const auto n = static_cast<std::size_t>(rng.uniform_int(1, 40));
        for (std::size_t i = 0; i < n; ++i) levels.push_back(static_cast<int>(rng.uniform_int(0, 3)));
        const auto regions = make_regions(levels);
        const auto result = annotations::confusion_matrix(regions, regions);
        CHECK(result.paired == n);
        CHECK(result.unpaired_a == 0);
        CHECK(result.unpaired_b == 0);
        std::array<std::size_t, 4> per_level{};
        for (int level : levels) ++per_level[static_cast<std::size_t>(level)];
        for (std::size_t a = 0; a < 4; ++a) {
            for (std::size_t b = 0; b < 4; ++b) {
                CHECK(result.counts[a][b] == (a == b ? per_level[a] : 0));
            }
        }
    }
}

TEST_CASE("confusion matrix pairs by identical span and reports strays") {
    // A all 1, B all 2 over the same segmentation.
    const auto a = make_regions({1, 1, 1});
    auto b = a;
    for (auto& region : b) region.level = 2;
    const auto result = annotations::confusion_matrix(a, b);
    CHECK(result.counts[1][2] == 3);
    CHECK(result.paired == 3);

    // B with one extra region and one missing.
    auto b2 = a;
    b2.pop_back();
    b2.push_back({"right", 0, 100, 0});
    const auto strays = annotations::confusion_matrix(a, b2);
    CHECK(strays.paired == 2);
    CHECK(strays.unpaired_a == 1);
    CHECK(strays.unpaired_b == 1);
}

TEST_CASE("agreement correlation: exact endpoints and the definitional oracle") {
    const auto a = make_regions({0, 1, 2, 3, 1});
    CHECK(annotations::agreement_correlation(a, a) == 1.0);

    auto reversed = a;
    for (auto& region : reversed) region.level = 3 - region.level;
    CHECK(annotations::agreement_correlation(a, reversed) == -1.0);

    // A=[0,1,2,3,1], B=[1,1,2,2,0]: direct evaluation of the Pearson
    // definition gives 2.6/sqrt(5.2*2.8) = 13/sqrt(364).
    auto b = a;
    const int b_levels[5] = {1, 1, 2, 2, 0};
    for (std::size_t i = 0; i < 5; ++i) b[i].level = b_levels[i];
    const auto r = annotations::agreement_correlation(a, b);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(13.0 / std::sqrt(364.0)).epsilon(1e-12));
    CHECK(*r == doctest::Approx(0.6814).epsilon(1e-4));

    // Zero variance on either side: undefined.
    const auto flat = make_regions({2, 2, 2});
    CHECK_FALSE(annotations::agreement_correlation(flat, flat).has_value());
    // Fewer than two pairs: undefined.
    const auto one = make_regions({1});
    CHECK_FALSE(annotations::agreement_correlation(one, one).has_value());
}

TEST_CASE("label counts tally regions and duration-weighted frames") {
    std::vector<ReductionRegion> regions = {
        {"left", 0, 1000, 0},   // 100 frames
        {"left", 1000, 1250, 1},// 25 frames
        {"right", 0, 300, 1},   // 30 frames
        {"right", 300, 310, 3}, // 1 frame
    };
    const auto counts = annotations::label_counts(regions);
    CHECK(counts.regions[0] == 1);
    CHECK(counts.regions[1] == 2);
    CHECK(counts.regions[2] == 0);
    CHECK(counts.regions[3] == 1);
    CHECK(counts.frames[0] == 100);
    CHECK(counts.frames[1] == 55);
    CHECK(counts.frames[3] == 1);

    const auto empty = annotations::label_counts({});
    for (std::size_t l = 0; l < 4; ++l) {
        CHECK(empty.regions[l] == 0);
        CHECK(empty.frames[l] == 0);
    }
}

TEST_CASE("confusion CSV has labeled axes") {
    TempDir dir;
    const auto a = make_regions({0, 1, 2, 3});
    const auto result = annotations::confusion_matrix(a, a);
    const auto path = dir.str("confusion.csv");
    annotations::write_confusion_csv(path, result);
    const auto text = testsupport::read_text(path);
    CHECK(text == "label,b0,b1,b2,b3\na0,1,0,0,0\na1,0,1,0,0\na2,0,0,1,0\na3,0,0,0,1\n");
}
