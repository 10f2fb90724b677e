#include "delaycode/node_model.hpp"

#include <algorithm>
#include <map>

#include "delaycode/error.hpp"
#include "delaycode/log.hpp"

namespace delaycode {

FeatureVector NodeModel::features(const std::string& normalized_text) const {
    if (constant) return FeatureVector(static_cast<Eigen::Index>(tfidf.dimension()));
    return transform(tfidf, normalized_text);
}

ScoredPrediction NodeModel::scores(const std::string& normalized_text) const {
    return predict(calibrated.base, labels, features(normalized_text));
}

PredictionSet NodeModel::predict_set(const std::string& normalized_text, double epsilon) const {
    return delaycode::predict_set(calibrated, features(normalized_text), epsilon);
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_half_split(
    const std::vector<std::string>& labels, std::mt19937_64& rng) {
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::vector<std::size_t> proper, calibration;
    std::bernoulli_distribution coin(0.5);
    for (auto& [label, rows] : by_class) {
        if (rows.size() == 1) {
            (coin(rng) ? calibration : proper).push_back(rows.front());
            continue;
        }
        std::shuffle(rows.begin(), rows.end(), rng);
        const std::size_t n_cal = rows.size() / 2;
        calibration.insert(calibration.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_cal));
        proper.insert(proper.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_cal), rows.end());
    }
    std::sort(proper.begin(), proper.end());
    std::sort(calibration.begin(), calibration.end());
    return {proper, calibration};
}

namespace {

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
}

}  // namespace

NodeModel train_node(const std::vector<std::string>& texts, const std::vector<std::string>& labels,
                     Algorithm algorithm, const NodeTrainConfig& config, std::uint64_t seed,
                     NodeTrainingTrace* trace, const TfidfModel* shared_tfidf) {
    if (texts.size() != labels.size()) throw LengthMismatch("node texts and labels differ in length");
    if (texts.empty()) throw InsufficientData("node has no training rows");

    NodeModel node;
    node.algorithm = algorithm;
    node.train_rows = texts.size();
    node.labels = LabelSpace(labels);

    if (texts.size() < 2) log::warn("node with a single training row; using a constant predictor");
    if (node.labels.size() == 1) {
        node.constant = true;
        node.calibrated = uncalibrated_constant(node.labels);
        if (trace) {
            trace->proper.resize(texts.size());
            for (std::size_t i = 0; i < texts.size(); ++i) trace->proper[i] = i;
        }
        return node;
    }

    std::mt19937_64 rng(mix_seed(seed, 0x5917));
    auto [proper, calibration] = stratified_half_split(labels, rng);
    if (calibration.empty() || proper.empty()) {
        // two rows of distinct single-instance classes may land on one side
        std::vector<std::size_t> all = proper.empty() ? calibration : proper;
        proper.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(all.size() - all.size() / 2));
        calibration.assign(all.begin() + static_cast<std::ptrdiff_t>(proper.size()), all.end());
    }
    if (trace) {
        trace->proper = proper;
        trace->calibration = calibration;
    }

    const auto proper_texts = pick(texts, proper);
    if (shared_tfidf) {
        node.tfidf = *shared_tfidf;
    } else if (algorithm != Algorithm::uniform) {
        node.tfidf = fit_tfidf(proper_texts, config.tfidf);
    }
    const FeatureMatrix X = transform_all(node.tfidf, proper_texts);
    const std::vector<int> y = node.labels.encode(pick(labels, proper));
    Classifier base = train_classifier(algorithm, X, y, static_cast<int>(node.labels.size()), config.models,
                                       mix_seed(seed, 0x77));

    std::vector<FeatureVector> X_cal;
    X_cal.reserve(calibration.size());
    for (std::size_t i : calibration) X_cal.push_back(transform(node.tfidf, texts[i]));
    node.calibrated = calibrate(std::move(base), node.labels, X_cal, pick(labels, calibration));
    return node;
}

nlohmann::json node_model_json(const NodeModel& node) {
    return {{"algorithm", to_string(node.algorithm)},
            {"labels", node.labels.labels()},
            {"constant", node.constant},
            {"train_rows", node.train_rows},
            {"classifier", to_json(node.calibrated.base)}};
}

}  // namespace delaycode
