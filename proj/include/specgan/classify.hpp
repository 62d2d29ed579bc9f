#pragma once

// Spectrum-sensing classifiers trained from scratch: a CART random forest
// (Gini splits, bootstrap bagging) and an RBF-kernel SVM solved by SMO.

#include "specgan/common.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace specgan::classify {

struct RandomForestParams {
    std::size_t n_trees = 100;
    int max_depth = 10;                  ///< <= 0 means unlimited
    std::size_t features_per_split = 0;  ///< 0 means round(sqrt(d))
    std::size_t min_samples_split = 2;
    bool bootstrap = true;
};

struct TreeNode {
    std::int32_t feature = -1;  ///< -1 marks a leaf
    double threshold = 0.0;     ///< go left when x[feature] <= threshold
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::array<std::uint32_t, 2> counts{};  ///< training label distribution reaching the node
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root

    Label predict(const double* row) const;
    std::size_t depth() const;
};

struct RandomForestModel {
    std::vector<DecisionTree> trees;
    RandomForestParams params;
    std::size_t feature_dim = 0;
    std::uint64_t seed = 0;
    /// Set when training saw a single class; every tree is then a constant leaf.
    bool single_class = false;
};

RandomForestModel train_random_forest(const Matrix& features, const Labels& labels,
                                      const RandomForestParams& params, std::uint64_t seed);

/// Per-dimension z-score. Constant dimensions get unit scale.
struct Standardizer {
    Vector mean;
    Vector scale;

    static Standardizer fit(const Matrix& rows);
    static Standardizer identity(std::size_t dim);
    Matrix apply(const Matrix& rows) const;
};

struct SvmParams {
    double c = 1.0;
    std::optional<double> gamma;  ///< default 1 / (d * var) of the standardized reference rows
    double tol = 1e-3;
    std::size_t max_passes = 200;
    bool standardize = true;
};

struct SvmRbfModel {
    Matrix support_vectors;  ///< standardized coordinates
    Vector dual_coef;        ///< alpha_i * y_i per support vector
    double bias = 0.0;
    double gamma = 1.0;
    double c = 1.0;
    Standardizer standardizer;

    double decision(const RowVector& raw_row) const;
    Vector decision(const Matrix& raw_rows) const;
};

/// Solver-side view of a finished SMO run, for invariant checks.
struct SvmSolverState {
    Vector alpha;            ///< one per training row
    Vector y;                ///< +-1
    Vector cached_decision;  ///< solver's running f(x_i)
    std::size_t passes = 0;
};

/// `reference_rows` supply the standardization constants (and default gamma);
/// when null the training rows themselves are used.
SvmRbfModel train_svm_rbf(const Matrix& features, const Labels& labels, const SvmParams& params,
                          std::uint64_t seed, const Matrix* reference_rows = nullptr,
                          SvmSolverState* solver_state = nullptr);

enum class ClassifierKind : std::uint8_t { RandomForest = 0, SvmRbf = 1 };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_from_string(const std::string& name);

struct ClassifierParams {
    RandomForestParams rf;
    SvmParams svm;
};

using ClassifierModel = std::variant<RandomForestModel, SvmRbfModel>;

ClassifierModel train_classifier(ClassifierKind kind, const Matrix& features, const Labels& labels,
                                 const ClassifierParams& params, std::uint64_t seed,
                                 const Matrix* reference_rows = nullptr);

/// RF: majority vote with ties to label 0. SVM: label 1 iff f(x) > 0.
Labels predict(const RandomForestModel& model, const Matrix& features);
Labels predict(const SvmRbfModel& model, const Matrix& features);
Labels predict(const ClassifierModel& model, const Matrix& features);

double accuracy(const Labels& predicted, const Labels& truth);
double accuracy(const ClassifierModel& model, const Matrix& features, const Labels& labels);

// SCLF model records.
void write_sclf(std::ostream& os, const ClassifierModel& model);
ClassifierModel read_sclf(std::istream& is);
void save_sclf(const std::filesystem::path& path, const ClassifierModel& model);
ClassifierModel load_sclf(const std::filesystem::path& path);

}  // namespace specgan::classify
