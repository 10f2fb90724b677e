#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "delaycode/conformal.hpp"
#include "delaycode/features.hpp"
#include "delaycode/models.hpp"

namespace delaycode {

struct NodeTrainConfig {
    TfidfConfig tfidf;
    ModelConfig models;
};

/// Calibrated multi-class classifier at one node of the code tree, with the
/// TF-IDF model its inputs go through.
struct NodeModel {
    Algorithm algorithm = Algorithm::svm;
    LabelSpace labels;
    TfidfModel tfidf;
    CalibratedModel calibrated;
    bool constant = false;
    std::size_t train_rows = 0;

    FeatureVector features(const std::string& normalized_text) const;
    ScoredPrediction scores(const std::string& normalized_text) const;
    PredictionSet predict_set(const std::string& normalized_text, double epsilon) const;
};

/// Which rows of the node's input each training stage read.
struct NodeTrainingTrace {
    std::vector<std::size_t> proper;
    std::vector<std::size_t> calibration;
};

/// Class-stratified halving: per class, half the rows (rounded down) go to
/// calibration; single-instance classes land on a random side.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_half_split(
    const std::vector<std::string>& labels, std::mt19937_64& rng);

/// Fits TF-IDF on the proper-training half, trains `algorithm` there and
/// calibrates on the other half. Nodes with one label (or fewer than two rows)
/// become constant predictors.
NodeModel train_node(const std::vector<std::string>& texts, const std::vector<std::string>& labels,
                     Algorithm algorithm, const NodeTrainConfig& config, std::uint64_t seed,
                     NodeTrainingTrace* trace = nullptr, const TfidfModel* shared_tfidf = nullptr);

nlohmann::json node_model_json(const NodeModel& node);

}  // namespace delaycode
