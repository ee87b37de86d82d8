#include "reduxcorr/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "reduxcorr/kernels.hpp"
#include "reduxcorr/midlevel.hpp"
#include "reduxcorr/stats.hpp"
#include "reduxcorr/util.hpp"

namespace reduxcorr::models {

namespace {

void check_shape(const std::vector<double>& X, std::size_t rows, const char* who) {
    if (X.size() != rows * static_cast<std::size_t>(kNumFeatures)) {
        throw std::invalid_argument(std::string(who) + ": matrix size does not match rows x 85");
    }
}

// In-place Cholesky factorization + solve for a symmetric positive definite
// system. Row-major n x n.
std::vector<double> cholesky_solve(std::vector<double>& M, const std::vector<double>& v,
                                   std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double* row_j = M.data() + j * n;
        for (std::size_t i = j; i < n; ++i) {
            double* row_i = M.data() + i * n;
            const double s = row_i[j] - kernels::dot_f64(row_i, row_j, j);
            if (i == j) {
                if (s <= 0.0) throw std::runtime_error("cholesky: matrix not positive definite");
                row_j[j] = std::sqrt(s);
            } else {
                row_i[j] = s / row_j[j];
            }
        }
    }
    // Forward substitution: L z = v.
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = (v[i] - kernels::dot_f64(M.data() + i * n, z.data(), i)) / M[i * n + i];
    }
    // Back substitution: L^T w = z.
    std::vector<double> w(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = z[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= M[k * n + ii] * w[k];
        w[ii] = s / M[ii * n + ii];
    }
    return w;
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (const auto& part : parts) {
        if (!out.empty()) out += sep;
        out += part;
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// key=value header lines up to (and not including) the first line containing
// a comma; returns that first CSV line through `csv_header`.
std::map<std::string, std::string> read_header(std::ifstream& in, const std::string& path,
                                               std::string& csv_header) {
    std::map<std::string, std::string> header;
    std::string line;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos || t.find(',') < eq) {
            csv_header = t;
            return header;
        }
        header[t.substr(0, eq)] = t.substr(eq + 1);
    }
    throw std::runtime_error("model: " + path + ": truncated file (no data section)");
}

double header_num(const std::map<std::string, std::string>& header, const std::string& key,
                  const std::string& path) {
    const auto it = header.find(key);
    if (it == header.end()) throw std::runtime_error("model: " + path + ": missing key " + key);
    return std::stod(it->second);
}

std::string header_str(const std::map<std::string, std::string>& header, const std::string& key,
                       const std::string& path) {
    const auto it = header.find(key);
    if (it == header.end()) throw std::runtime_error("model: " + path + ": missing key " + key);
    return it->second;
}

}  // namespace

void Standardizer::transform_row(const double* in, double* out) const {
    for (std::size_t c = 0; c < mean.size(); ++c) {
        out[c] = zero_variance[c] ? 0.0 : (in[c] - mean[c]) / sd[c];
    }
}

std::vector<double> Standardizer::transform(const std::vector<double>& matrix,
                                            std::size_t rows) const {
    const std::size_t cols = mean.size();
    if (matrix.size() != rows * cols) throw std::invalid_argument("standardizer: bad matrix shape");
    std::vector<double> out(matrix.size());
    for (std::size_t r = 0; r < rows; ++r) {
        transform_row(matrix.data() + r * cols, out.data() + r * cols);
    }
    return out;
}

std::vector<double> Standardizer::inverse_row(const std::vector<double>& standardized) const {
    if (standardized.size() != mean.size()) {
        throw std::invalid_argument("standardizer: bad row length");
    }
    std::vector<double> out(standardized.size());
    for (std::size_t c = 0; c < mean.size(); ++c) {
        out[c] = zero_variance[c] ? mean[c] : standardized[c] * sd[c] + mean[c];
    }
    return out;
}

Standardizer fit_standardizer(const std::vector<double>& matrix, std::size_t rows,
                              std::size_t cols) {
    if (rows < 2) throw std::invalid_argument("fit_standardizer: need at least 2 rows");
    if (matrix.size() != rows * cols) throw std::invalid_argument("fit_standardizer: bad shape");
    Standardizer s;
    s.mean.assign(cols, 0.0);
    s.sd.assign(cols, 0.0);
    s.zero_variance.assign(cols, 0);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) s.mean[c] += matrix[r * cols + c];
    }
    for (std::size_t c = 0; c < cols; ++c) s.mean[c] /= static_cast<double>(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = matrix[r * cols + c] - s.mean[c];
            s.sd[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        s.sd[c] = std::sqrt(s.sd[c] / static_cast<double>(rows - 1));
        if (s.sd[c] == 0.0) s.zero_variance[c] = 1;
    }
    return s;
}

LinearModel train_linear(const std::vector<double>& X, const std::vector<double>& y,
                         std::size_t rows, double lambda) {
    check_shape(X, rows, "train_linear");
    if (y.size() != rows) throw std::invalid_argument("train_linear: y length mismatch");
    if (rows <= static_cast<std::size_t>(kNumFeatures)) {
        throw std::invalid_argument("train_linear: need more rows than features (underdetermined)");
    }
    if (lambda <= 0.0) throw std::invalid_argument("train_linear: lambda must be positive");

    // Columns of the augmented matrix [X 1], contiguous for the dot kernel.
    const std::size_t n = kNumFeatures + 1;
    std::vector<double> cols(n * rows);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < static_cast<std::size_t>(kNumFeatures); ++c) {
            cols[c * rows + r] = X[r * kNumFeatures + c];
        }
        cols[kNumFeatures * rows + r] = 1.0;
    }

    std::vector<double> M(n * n);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double mij = kernels::dot_f64(cols.data() + i * rows, cols.data() + j * rows, rows);
            M[i * n + j] = mij;
            M[j * n + i] = mij;
        }
        v[i] = kernels::dot_f64(cols.data() + i * rows, y.data(), rows);
    }
    for (std::size_t c = 0; c < static_cast<std::size_t>(kNumFeatures); ++c) {
        M[c * n + c] += lambda;  // ridge on features only, not the intercept
    }

    const auto w = cholesky_solve(M, v, n);
    LinearModel model;
    model.weights.assign(w.begin(), w.begin() + kNumFeatures);
    model.intercept = w[kNumFeatures];
    model.lambda = lambda;
    model.rows = rows;
    model.columns_checksum = midlevel::columns_checksum();
    return model;
}

double predict_linear(const LinearModel& model, const double* row) {
    return kernels::dot_f64(model.weights.data(), row, kNumFeatures) + model.intercept;
}

std::vector<double> predict_linear(const LinearModel& model, const std::vector<double>& X,
                                   std::size_t rows) {
    check_shape(X, rows, "predict_linear");
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = predict_linear(model, X.data() + r * kNumFeatures);
    }
    return out;
}

KnnModel train_knn(const std::vector<double>& X, const std::vector<double>& y, std::size_t rows,
                   int k) {
    check_shape(X, rows, "train_knn");
    if (y.size() != rows) throw std::invalid_argument("train_knn: y length mismatch");
    if (k < 1 || static_cast<std::size_t>(k) > rows) {
        throw std::invalid_argument("train_knn: need 1 <= k <= rows");
    }
    KnnModel model;
    model.standardizer = fit_standardizer(X, rows, kNumFeatures);
    model.train_matrix = model.standardizer.transform(X, rows);
    model.train_labels = y;
    model.rows = rows;
    model.k = k;
    model.columns_checksum = midlevel::columns_checksum();
    return model;
}

double predict_knn(const KnnModel& model, const double* row) {
    std::vector<double> q(kNumFeatures);
    model.standardizer.transform_row(row, q.data());

    // (distance, row index) pairs; the lexicographic order makes ties at the
    // k-th distance break toward the lower index.
    std::vector<std::pair<double, std::size_t>> dist(model.rows);
    for (std::size_t r = 0; r < model.rows; ++r) {
        dist[r] = {kernels::l2sq_f64(q.data(), model.train_matrix.data() + r * kNumFeatures,
                                     kNumFeatures),
                   r};
    }
    const auto k = static_cast<std::size_t>(model.k);
    if (k < dist.size()) {
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k) - 1,
                         dist.end());
        dist.resize(k);
    }
    std::sort(dist.begin(), dist.end());

    double sum = 0.0;
    for (const auto& [d, r] : dist) sum += model.train_labels[r];
    return sum / static_cast<double>(dist.size());
}

std::vector<double> predict_knn(const KnnModel& model, const std::vector<double>& X,
                                std::size_t rows) {
    check_shape(X, rows, "predict_knn");
    std::vector<double> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = predict_knn(model, X.data() + r * kNumFeatures);
    }
    return out;
}

EvalReport evaluate(const std::vector<double>& predictions, const std::vector<double>& labels) {
    if (predictions.size() != labels.size()) {
        throw std::invalid_argument("evaluate: prediction/label length mismatch");
    }
    if (predictions.size() < 2) throw std::invalid_argument("evaluate: need at least 2 pairs");
    EvalReport report;
    report.n = predictions.size();
    report.r = stats::pearson(predictions, labels);
    return report;
}

HoldoutSplit split_by_holdout(const std::vector<std::string>& row_conversations,
                              const std::vector<std::string>& holdout_ids) {
    const std::set<std::string> holdout(holdout_ids.begin(), holdout_ids.end());
    std::set<std::string> seen(row_conversations.begin(), row_conversations.end());
    for (const auto& id : holdout) {
        if (seen.find(id) == seen.end()) {
            throw std::invalid_argument("split_by_holdout: unknown holdout conversation " + id);
        }
    }
    HoldoutSplit split;
    for (std::size_t r = 0; r < row_conversations.size(); ++r) {
        if (holdout.count(row_conversations[r])) {
            split.test_rows.push_back(r);
        } else {
            split.train_rows.push_back(r);
        }
    }
    if (split.train_rows.empty()) {
        throw std::invalid_argument("split_by_holdout: empty training set");
    }
    split.train_fraction = static_cast<double>(split.train_rows.size()) /
                           static_cast<double>(row_conversations.size());
    return split;
}

void save_linear(const std::string& path, const LinearModel& model) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("model: " + path + ": cannot open for writing");
    out << "kind=linear\n";
    out << "language=" << model.language << "\n";
    out << "lambda=" << fmt_num(model.lambda) << "\n";
    out << "rows=" << model.rows << "\n";
    out << "columns_checksum=" << model.columns_checksum << "\n";
    out << "conversations=" << join(model.conversations, ';') << "\n";
    out << "feature,coefficient\n";
    const auto& names = midlevel::column_names();
    for (int c = 0; c < kNumFeatures; ++c) {
        out << names[static_cast<std::size_t>(c)] << ',' << fmt_num(model.weights[c]) << "\n";
    }
    out << "intercept," << fmt_num(model.intercept) << "\n";
    if (!out) throw std::runtime_error("model: " + path + ": write failed");
}

LinearModel load_linear(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("model: " + path + ": cannot open file");
    std::string csv_header;
    const auto header = read_header(in, path, csv_header);
    if (header_str(header, "kind", path) != "linear") {
        throw std::runtime_error("model: " + path + ": not a linear model file");
    }
    if (csv_header != "feature,coefficient") {
        throw std::runtime_error("model: " + path + ": unexpected data header");
    }
    LinearModel model;
    model.language = header_str(header, "language", path);
    model.lambda = header_num(header, "lambda", path);
    model.rows = static_cast<std::size_t>(header_num(header, "rows", path));
    model.columns_checksum = std::stoull(header_str(header, "columns_checksum", path));
    model.conversations = split(header_str(header, "conversations", path), ';');
    if (model.columns_checksum != midlevel::columns_checksum()) {
        throw std::runtime_error("model: " + path + ": column checksum mismatch");
    }

    const auto& names = midlevel::column_names();
    model.weights.assign(kNumFeatures, 0.0);
    std::string line;
    int idx = 0;
    bool have_intercept = false;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != 2) throw std::runtime_error("model: " + path + ": bad weight row");
        if (fields[0] == "intercept") {
            model.intercept = std::stod(fields[1]);
            have_intercept = true;
            continue;
        }
        if (idx >= kNumFeatures || fields[0] != names[static_cast<std::size_t>(idx)]) {
            throw std::runtime_error("model: " + path + ": weight rows out of order at '" +
                                     fields[0] + "'");
        }
        model.weights[static_cast<std::size_t>(idx)] = std::stod(fields[1]);
        ++idx;
    }
    if (idx != kNumFeatures || !have_intercept) {
        throw std::runtime_error("model: " + path + ": incomplete weight rows");
    }
    return model;
}

void save_knn(const std::string& path, const KnnModel& model) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("model: " + path + ": cannot open for writing");
    out << "kind=knn\n";
    out << "language=" << model.language << "\n";
    out << "k=" << model.k << "\n";
    out << "rows=" << model.rows << "\n";
    out << "columns_checksum=" << model.columns_checksum << "\n";
    out << "conversations=" << join(model.conversations, ';') << "\n";
    out << "section,values\n";
    const auto write_row = [&](const char* name, const std::vector<double>& vals) {
        out << name;
        for (double v : vals) out << ',' << fmt_num(v);
        out << "\n";
    };
    write_row("mean", model.standardizer.mean);
    write_row("sd", model.standardizer.sd);
    out << "zero";
    for (auto z : model.standardizer.zero_variance) out << ',' << int(z);
    out << "\n";
    for (std::size_t r = 0; r < model.rows; ++r) {
        out << "row," << fmt_num(model.train_labels[r]);
        const double* row = model.train_matrix.data() + r * kNumFeatures;
        for (int c = 0; c < kNumFeatures; ++c) out << ',' << fmt_num(row[c]);
        out << "\n";
    }
    if (!out) throw std::runtime_error("model: " + path + ": write failed");
}

KnnModel load_knn(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("model: " + path + ": cannot open file");
    std::string csv_header;
    const auto header = read_header(in, path, csv_header);
    if (header_str(header, "kind", path) != "knn") {
        throw std::runtime_error("model: " + path + ": not a knn model file");
    }
    if (csv_header != "section,values") {
        throw std::runtime_error("model: " + path + ": unexpected data header");
    }
    KnnModel model;
    model.language = header_str(header, "language", path);
    model.k = static_cast<int>(header_num(header, "k", path));
    model.rows = static_cast<std::size_t>(header_num(header, "rows", path));
    model.columns_checksum = std::stoull(header_str(header, "columns_checksum", path));
    model.conversations = split(header_str(header, "conversations", path), ';');
    if (model.columns_checksum != midlevel::columns_checksum()) {
        throw std::runtime_error("model: " + path + ": column checksum mismatch");
    }

    model.train_matrix.reserve(model.rows * kNumFeatures);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string& section = fields[0];
        const auto parse_values = [&](std::size_t offset, std::vector<double>& dst) {
            for (std::size_t i = offset; i < fields.size(); ++i) dst.push_back(std::stod(fields[i]));
        };
        if (section == "mean") {
            parse_values(1, model.standardizer.mean);
        } else if (section == "sd") {
            parse_values(1, model.standardizer.sd);
        } else if (section == "zero") {
            for (std::size_t i = 1; i < fields.size(); ++i) {
                model.standardizer.zero_variance.push_back(fields[i] == "1" ? 1 : 0);
            }
        } else if (section == "row") {
            if (fields.size() != kNumFeatures + 2) {
                throw std::runtime_error("model: " + path + ": bad training row");
            }
            model.train_labels.push_back(std::stod(fields[1]));
            parse_values(2, model.train_matrix);
        } else {
            throw std::runtime_error("model: " + path + ": unknown section '" + section + "'");
        }
    }
    if (model.standardizer.mean.size() != kNumFeatures ||
        model.standardizer.sd.size() != kNumFeatures ||
        model.standardizer.zero_variance.size() != kNumFeatures ||
        model.train_labels.size() != model.rows ||
        model.train_matrix.size() != model.rows * kNumFeatures) {
        throw std::runtime_error("model: " + path + ": incomplete data sections");
    }
    return model;
}

}  // namespace reduxcorr::models
