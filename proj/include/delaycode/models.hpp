#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "delaycode/features.hpp"

namespace delaycode {

/// Sorted, duplicate-free class labels; class index = position.
class LabelSpace {
public:
    LabelSpace() = default;
    explicit LabelSpace(std::vector<std::string> labels);

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    const std::string& operator[](std::size_t i) const { return labels_[i]; }

    /// -1 when absent.
    int index_of(const std::string& label) const;
    bool contains(const std::string& label) const { return index_of(label) >= 0; }

    /// Throws UnknownLabel.
    std::vector<int> encode(const std::vector<std::string>& labels) const;

    bool operator==(const LabelSpace&) const = default;

private:
    std::vector<std::string> labels_;
};

/// Per-class scores over a label space; non-negative and summing to one.
struct ScoredPrediction {
    LabelSpace labels;
    Eigen::VectorXd scores;

    double score(const std::string& label) const;
    /// Highest score; ties resolve to the lexicographically smallest label.
    std::size_t argmax() const;
    const std::string& top_label() const { return labels[argmax()]; }
};

std::size_t argmax_first(const Eigen::Ref<const Eigen::VectorXd>& v);

// ---------------------------------------------------------------------------
// Random forest

struct RandomForestConfig {
    int n_trees = 100;
    int max_depth = 0;           // 0 = unlimited
    int min_leaf = 1;
    int features_per_split = 0;  // 0 = ceil(sqrt(d))
    bool bootstrap = true;
    std::uint64_t seed = 42;
};

struct DecisionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int vote = 0;                                  // leaf majority class
        std::vector<std::pair<int, int>> class_counts;  // leaf (class, count), class ascending
    };
    std::vector<Node> nodes;  // nodes[0] is the root

    int leaf_for(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct RandomForestModel {
    std::vector<DecisionTree> trees;
    int n_classes = 0;
    int dimension = 0;
    RandomForestConfig config;
};

/// `y` holds class indices in [0, n_classes).
RandomForestModel train_random_forest(const FeatureMatrix& X, const std::vector<int>& y, int n_classes,
                                      const RandomForestConfig& config);

// ---------------------------------------------------------------------------
// Linear SVM, one-vs-rest

struct LinearSvmConfig {
    double C = 1.0;
    int max_epochs = 300;
    double tolerance = 1e-6;  // relative objective improvement
    std::uint64_t seed = 42;
};

struct LinearSvmModel {
    Eigen::MatrixXd weights;  // n_classes x dimension
    Eigen::VectorXd bias;
    LinearSvmConfig config;
    /// Primal objective after each epoch, per class. Not serialised.
    std::vector<std::vector<double>> objective_trace;

    int n_classes() const noexcept { return static_cast<int>(weights.rows()); }
    int dimension() const noexcept { return static_cast<int>(weights.cols()); }
};

LinearSvmModel train_linear_svm(const FeatureMatrix& X, const std::vector<int>& y, int n_classes,
                                const LinearSvmConfig& config);

/// 0.5*|w|^2 + C * sum hinge(1 - s_i (w.x_i + b)) for the binary problem class-vs-rest.
double svm_objective(const FeatureMatrix& X, const std::vector<int>& y, int positive_class,
                     const Eigen::Ref<const Eigen::VectorXd>& w, double b, double C);

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& margins);

// ---------------------------------------------------------------------------
// Uniform baseline and constant predictor

enum class UniformMode { uniform, prior };

struct UniformModel {
    int n_classes = 0;
    UniformMode mode = UniformMode::uniform;
    Eigen::VectorXd priors;  // sums to one
    std::uint64_t seed = 42;
};

UniformModel train_uniform(const std::vector<int>& y, int n_classes, UniformMode mode, std::uint64_t seed);

/// Draws a class index: 1/k each (uniform) or by prior frequency (prior).
int sample_label(const UniformModel& model, std::mt19937_64& rng);

struct ConstantModel {
    int n_classes = 1;
    int label = 0;
};

// ---------------------------------------------------------------------------

using Classifier = std::variant<UniformModel, RandomForestModel, LinearSvmModel, ConstantModel>;

enum class Algorithm { uniform, random_forest, svm };

std::string to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct ModelConfig {
    RandomForestConfig forest;
    LinearSvmConfig svm;
    UniformMode uniform_mode = UniformMode::uniform;
};

/// Scores aligned with class indices; throws DimensionMismatch.
Eigen::VectorXd predict_scores(const Classifier& model, const FeatureVector& x);
int classifier_dimension(const Classifier& model);
int classifier_classes(const Classifier& model);

ScoredPrediction predict(const Classifier& model, const LabelSpace& labels, const FeatureVector& x);

Classifier train_classifier(Algorithm algorithm, const FeatureMatrix& X, const std::vector<int>& y, int n_classes,
                            const ModelConfig& config, std::uint64_t seed);

nlohmann::json to_json(const Classifier& model);
Classifier classifier_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

/// Stable 64-bit mixing used to derive child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);
std::uint64_t hash_string(const std::string& s);

/// Row order that depends only on row content and label, never on input order.
std::vector<int> canonical_row_order(const FeatureMatrix& X, const std::vector<int>& y);

}  // namespace delaycode
