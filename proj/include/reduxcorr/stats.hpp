#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "reduxcorr/annotations.hpp"

namespace reduxcorr::stats {

// |r| threshold for the "strong correlation" filtered view.
constexpr double kStrongCorrelation = 0.06;

// Sample Pearson correlation. nullopt when n < 2 or either side has zero
// variance. Exactly affine inputs (y = a*x + b, bitwise) return exactly
// +-1 so identity/reversal cases are not blurred by rounding.
std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y);

// Per-column correlation of a row-major matrix against y. Zero-variance
// columns are reported undefined rather than dropped.
struct CorrEntry {
    bool defined = false;
    double r = 0.0;
    std::size_t n = 0;
};
std::vector<CorrEntry> column_correlations(const std::vector<double>& matrix, std::size_t rows,
                                           std::size_t cols, const std::vector<double>& y);

// One-sample, one-sided t-test (alternative: mean > mu0). p is the upper-tail
// probability of Student's t with n-1 df, integrated numerically. A zero
// sample sd degenerates to p = 0 / 1 / 0.5 for mean >, <, = mu0 (t = +-inf/0).
struct TTestResult {
    double t = 0.0;
    double p = 1.0;
    std::size_t n = 0;
};
TTestResult one_sided_t_test(const std::vector<double>& samples, double mu0);

// Upper-tail probability P(T > t) for Student's t with df degrees of freedom.
double t_upper_tail(double t, double df);

// survive[i] = p[i] < alpha/m.
std::vector<std::uint8_t> bonferroni_gate(const std::vector<double>& p_values, double alpha,
                                          std::size_t m);

// Distribution of frame labels: per-level percentages (summing to 100), mean,
// and sample sd of the level values. Throws when no frame is labeled.
struct Distribution {
    std::array<double, 4> pct{};
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;
};
Distribution reduction_distribution(const annotations::FrameLabels& labels);

// Per-tag reduction statistics. Each function-tagged region contributes one
// sample: the mean reduction level of its labeled frames; regions overlapping
// no reduction label are excluded. The t-test compares the samples against
// global_mean; the Bonferroni gate uses alpha = 0.05 and m = number of tags
// that produced a test.
struct TagStats {
    std::string tag;
    std::size_t n = 0;          // regions with >= 1 overlapping labeled frame
    double mean = 0.0;          // mean of region samples
    bool has_test = false;      // n >= 2
    double t = 0.0;
    double p = 1.0;
    bool bonferroni = false;
    std::array<double, 4> pct{};  // frame-level distribution within the tag's regions
};
std::vector<TagStats> function_stats(const std::vector<annotations::FunctionRegion>& regions,
                                     const std::map<std::string, annotations::FrameLabels>& labels,
                                     double global_mean, double alpha = 0.05);

}  // namespace reduxcorr::stats
