#include "reduxcorr/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reduxcorr/kernels.hpp"

namespace reduxcorr::stats {

namespace {

// Exact-affine pre-check: when y is bitwise a*x + b the correlation is
// exactly +-1 by definition; computing it numerically would land at
// 0.9999... instead.
std::optional<double> exact_affine_sign(const std::vector<double>& x,
                                        const std::vector<double>& y) {
    std::size_t j = 0;
    while (j < x.size() && x[j] == x[0]) ++j;
    if (j == x.size()) return std::nullopt;  // x constant: not affine-detectable
    const double a = (y[j] - y[0]) / (x[j] - x[0]);
    if (a == 0.0 || !std::isfinite(a)) return std::nullopt;
    const double b = y[0] - a * x[0];
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (y[k] != a * x[k] + b) return std::nullopt;
    }
    return std::copysign(1.0, a);
}

}  // namespace

std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;

    if (const auto sign = exact_affine_sign(x, y)) return sign;

    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);

    std::vector<double> dx(n), dy(n);
    for (std::size_t i = 0; i < n; ++i) {
        dx[i] = x[i] - mx;
        dy[i] = y[i] - my;
    }
    const double sxy = kernels::dot_f64(dx.data(), dy.data(), n);
    const double sxx = kernels::dot_f64(dx.data(), dx.data(), n);
    const double syy = kernels::dot_f64(dy.data(), dy.data(), n);
    if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<CorrEntry> column_correlations(const std::vector<double>& matrix, std::size_t rows,
                                           std::size_t cols, const std::vector<double>& y) {
    if (matrix.size() != rows * cols) throw std::invalid_argument("column_correlations: bad matrix shape");
    if (y.size() != rows) throw std::invalid_argument("column_correlations: y length mismatch");
    std::vector<CorrEntry> out(cols);
    std::vector<double> column(rows);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) column[r] = matrix[r * cols + c];
        CorrEntry& entry = out[c];
        entry.n = rows;
        if (const auto r = pearson(column, y)) {
            entry.defined = true;
            entry.r = *r;
        }
    }
    return out;
}

namespace {

double t_log_norm(double df) {
    return std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
           0.5 * std::log(df * 3.14159265358979323846);
}

// Student's t density for df degrees of freedom, normalized via lgamma.
double t_pdf(double x, double df) {
    return std::exp(t_log_norm(df) - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

// Tail integrand after substituting u = 1/x: f(1/u)/u^2. Near u=0 this
// behaves like u^(df-1), so the far tail becomes a short, smooth integral.
double t_pdf_tail(double u, double df) {
    if (u <= 0.0) return df == 1.0 ? std::exp(t_log_norm(df)) : 0.0;
    return std::exp(t_log_norm(df) - (df + 1.0) / 2.0 * std::log1p(1.0 / (df * u * u)) -
                    2.0 * std::log(u));
}

double simpson(double (*f)(double, double), double df, double a, double b) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (f(a, df) + 4.0 * f(m, df) + f(b, df));
}

double adaptive_simpson(double (*f)(double, double), double df, double a, double b, double whole,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(f, df, a, m);
    const double right = simpson(f, df, m, b);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, df, a, m, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, df, m, b, right, tol / 2.0, depth - 1);
}

double integrate(double (*f)(double, double), double df, double a, double b) {
    if (b <= a) return 0.0;
    return adaptive_simpson(f, df, a, b, simpson(f, df, a, b), 1e-12, 48);
}

}  // namespace

double t_upper_tail(double t, double df) {
    if (df < 1.0) throw std::invalid_argument("t_upper_tail: df must be >= 1");
    if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
    const double a = std::abs(t);
    // Moderate t: integrate the density from 0. Large t: integrate the
    // substituted tail, which stays well conditioned for any magnitude.
    double p_pos;  // P(T > |t|)
    if (a <= 8.0) {
        p_pos = 0.5 - integrate(t_pdf, df, 0.0, a);
    } else {
        p_pos = integrate(t_pdf_tail, df, 0.0, 1.0 / a);
    }
    const double p = t >= 0 ? p_pos : 1.0 - p_pos;
    return std::clamp(p, 0.0, 1.0);
}

TTestResult one_sided_t_test(const std::vector<double>& samples, double mu0) {
    const std::size_t n = samples.size();
    if (n < 2) throw std::invalid_argument("one_sided_t_test: need at least 2 samples");
    double mean = 0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    TTestResult out;
    out.n = n;
    if (sd == 0.0) {
        if (mean > mu0) {
            out.t = std::numeric_limits<double>::infinity();
            out.p = 0.0;
        } else if (mean < mu0) {
            out.t = -std::numeric_limits<double>::infinity();
            out.p = 1.0;
        } else {
            out.t = 0.0;
            out.p = 0.5;
        }
        return out;
    }
    out.t = (mean - mu0) / (sd / std::sqrt(static_cast<double>(n)));
    out.p = t_upper_tail(out.t, static_cast<double>(n - 1));
    return out;
}

std::vector<std::uint8_t> bonferroni_gate(const std::vector<double>& p_values, double alpha,
                                          std::size_t m) {
    if (m < 1) throw std::invalid_argument("bonferroni_gate: m must be >= 1");
    std::vector<std::uint8_t> out(p_values.size());
    const double threshold = alpha / static_cast<double>(m);
    for (std::size_t i = 0; i < p_values.size(); ++i) out[i] = p_values[i] < threshold ? 1 : 0;
    return out;
}

Distribution reduction_distribution(const annotations::FrameLabels& labels) {
    std::array<std::size_t, 4> counts{};
    std::size_t total = 0;
    for (std::size_t f = 0; f < labels.level.size(); ++f) {
        if (labels.level[f] < 0) continue;
        ++counts[static_cast<std::size_t>(labels.level[f])];
        ++total;
    }
    if (total == 0) throw std::runtime_error("reduction_distribution: no labeled frames");

    Distribution out;
    out.n = total;
    double mean = 0;
    for (int l = 0; l < 4; ++l) {
        out.pct[l] = 100.0 * static_cast<double>(counts[l]) / static_cast<double>(total);
        mean += static_cast<double>(l) * static_cast<double>(counts[l]);
    }
    mean /= static_cast<double>(total);
    out.mean = mean;
    if (total >= 2) {
        double ss = 0;
        for (int l = 0; l < 4; ++l) {
            ss += static_cast<double>(counts[l]) * (l - mean) * (l - mean);
        }
        out.sd = std::sqrt(ss / static_cast<double>(total - 1));
    }
    return out;
}

std::vector<TagStats> function_stats(const std::vector<annotations::FunctionRegion>& regions,
                                     const std::map<std::string, annotations::FrameLabels>& labels,
                                     double global_mean, double alpha) {
    std::vector<TagStats> out;
    for (const char* tag : annotations::kFunctionTags) {
        TagStats stats;
        stats.tag = tag;
        std::vector<double> samples;  // one per region: mean level of its labeled frames
        std::array<std::size_t, 4> frame_counts{};
        std::size_t frame_total = 0;
        for (const auto& region : regions) {
            if (region.tag != tag) continue;
            const auto it = labels.find(region.channel);
            if (it == labels.end()) continue;
            const auto& channel_labels = it->second;
            const auto first = static_cast<std::size_t>(std::ceil(region.start_ms / 10.0));
            const auto last = std::min(static_cast<std::size_t>(std::ceil(region.end_ms / 10.0)),
                                       channel_labels.level.size());
            double sum = 0;
            std::size_t n = 0;
            for (std::size_t f = first; f < last; ++f) {
                if (channel_labels.level[f] < 0) continue;
                const auto level = static_cast<std::size_t>(channel_labels.level[f]);
                sum += static_cast<double>(level);
                ++frame_counts[level];
                ++frame_total;
                ++n;
            }
            if (n == 0) continue;  // no overlapping reduction label: excluded
            samples.push_back(sum / static_cast<double>(n));
        }

        stats.n = samples.size();
        if (!samples.empty()) {
            double mean = 0;
            for (double v : samples) mean += v;
            stats.mean = mean / static_cast<double>(samples.size());
        }
        if (samples.size() >= 2) {
            const auto test = one_sided_t_test(samples, global_mean);
            stats.has_test = true;
            stats.t = test.t;
            stats.p = test.p;
        }
        if (frame_total > 0) {
            for (int l = 0; l < 4; ++l) {
                stats.pct[l] =
                    100.0 * static_cast<double>(frame_counts[l]) / static_cast<double>(frame_total);
            }
        }
        out.push_back(std::move(stats));
    }

    // Bonferroni across the tags that actually produced a test.
    std::size_t m = 0;
    for (const auto& stats : out) {
        if (stats.has_test) ++m;
    }
    if (m > 0) {
        for (auto& stats : out) {
            if (stats.has_test) stats.bonferroni = stats.p < alpha / static_cast<double>(m);
        }
    }
    return out;
}

}  // namespace reduxcorr::stats
