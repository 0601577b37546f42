#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace optpred {

/// Dense row-major feature matrix.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

/// Squared-error boosting hyperparameters. Defaults follow the reference
/// configuration this project standardizes on.
struct GbtConfig {
    int n_estimators = 750;
    int max_depth = 7;
    double learning_rate = 0.03;
    double min_child_weight = 4.0;  // min sample count per child under squared loss
    double colsample_bytree = 0.7;
    double subsample = 0.7;
    std::uint64_t seed = 0;
    int n_threads = 4;  // execution hint only; results are thread-count independent

    void validate() const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf output (unshrunk mean residual)

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    double value_at(std::span<const double> x) const;
    int depth() const;
};

struct TrainedModel {
    std::vector<RegressionTree> trees;
    double base_score = 0.0;
    std::size_t feature_count = 0;
    GbtConfig config;
    std::uint64_t train_fingerprint = 0;
};

struct ModelFormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Gradient boosting with exact greedy splits. Deterministic for a fixed
/// (data, config, seed) regardless of n_threads: candidate splits are
/// evaluated per feature and reduced in fixed feature order, ties broken by
/// lowest feature index then lowest threshold.
TrainedModel fit(const Matrix& features, std::span<const double> targets, const GbtConfig& cfg);

std::vector<double> predict(const TrainedModel& model, const Matrix& features);
double predict_row(const TrainedModel& model, std::span<const double> x);

/// JSON model file with a version tag and config echo; load(save(m)) predicts
/// bit-identically to m.
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

/// Midpoint threshold between two adjacent distinct feature values, nudged
/// down when rounding would land on the upper value. Part of the documented
/// model-file semantics (rows with x <= threshold go left).
double split_threshold(double lo, double hi);

}  // namespace optpred
