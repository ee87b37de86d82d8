#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace reduxcorr::models {

constexpr int kNumFeatures = 85;
constexpr double kDefaultRidge = 1e-6;
constexpr int kDefaultK = 5;

// Column-wise z-scoring fitted on a training matrix. Columns with zero sd
// are flagged and transform to 0.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<std::uint8_t> zero_variance;

    void transform_row(const double* in, double* out) const;
    std::vector<double> transform(const std::vector<double>& matrix, std::size_t rows) const;
    std::vector<double> inverse_row(const std::vector<double>& standardized) const;
};
Standardizer fit_standardizer(const std::vector<double>& matrix, std::size_t rows,
                              std::size_t cols);

struct LinearModel {
    std::vector<double> weights;  // kNumFeatures
    double intercept = 0.0;
    double lambda = kDefaultRidge;
    std::string language;
    std::vector<std::string> conversations;
    std::size_t rows = 0;
    std::uint64_t columns_checksum = 0;
};

// Least squares on the augmented system [X 1] via normal equations with a
// ridge term lambda on the feature block only (never the intercept), solved
// by Cholesky — the ridge makes the system positive definite even with
// constant or duplicated columns. Refuses rows <= 85 (underdetermined).
LinearModel train_linear(const std::vector<double>& X, const std::vector<double>& y,
                         std::size_t rows, double lambda = kDefaultRidge);

double predict_linear(const LinearModel& model, const double* row);
std::vector<double> predict_linear(const LinearModel& model, const std::vector<double>& X,
                                   std::size_t rows);

struct KnnModel {
    Standardizer standardizer;
    std::vector<double> train_matrix;  // standardized, rows x kNumFeatures
    std::vector<double> train_labels;
    std::size_t rows = 0;
    int k = kDefaultK;
    std::string language;
    std::vector<std::string> conversations;
    std::uint64_t columns_checksum = 0;
};

KnnModel train_knn(const std::vector<double>& X, const std::vector<double>& y, std::size_t rows,
                   int k = kDefaultK);

// Mean label of the k nearest standardized rows by Euclidean distance; ties
// at the k-th distance break toward the lower row index.
double predict_knn(const KnnModel& model, const double* row);
std::vector<double> predict_knn(const KnnModel& model, const std::vector<double>& X,
                                std::size_t rows);

struct EvalReport {
    std::optional<double> r;  // nullopt: undefined (constant predictions)
    std::size_t n = 0;
    std::vector<std::string> holdout_ids;
};
EvalReport evaluate(const std::vector<double>& predictions, const std::vector<double>& labels);

// Partition row indices by conversation id. Throws on a holdout id missing
// from the rows or an empty training side.
struct HoldoutSplit {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    double train_fraction = 0.0;
};
HoldoutSplit split_by_holdout(const std::vector<std::string>& row_conversations,
                              const std::vector<std::string>& holdout_ids);

// Plain-text model files: key=value header, then CSV rows (feature,coefficient
// for linear; standardizer and training rows for knn).
void save_linear(const std::string& path, const LinearModel& model);
LinearModel load_linear(const std::string& path);
void save_knn(const std::string& path, const KnnModel& model);
KnnModel load_knn(const std::string& path);

}  // namespace reduxcorr::models
