#include <algorithm>
#include <cmath>
#include <numeric>

#include "delaycode/error.hpp"
#include "delaycode/models.hpp"

namespace delaycode {

LabelSpace::LabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

int LabelSpace::index_of(const std::string& label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) return -1;
    return static_cast<int>(it - labels_.begin());
}

std::vector<int> LabelSpace::encode(const std::vector<std::string>& labels) const {
    std::vector<int> out;
    out.reserve(labels.size());
    for (const auto& l : labels) {
        const int i = index_of(l);
        if (i < 0) throw UnknownLabel("label '" + l + "' is not in the label space");
        out.push_back(i);
    }
    return out;
}

double ScoredPrediction::score(const std::string& label) const {
    const int i = labels.index_of(label);
    if (i < 0) throw UnknownLabel("label '" + label + "' is not in the label space");
    return scores[i];
}

std::size_t ScoredPrediction::argmax() const { return argmax_first(scores); }

std::size_t argmax_first(const Eigen::Ref<const Eigen::VectorXd>& v) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return static_cast<std::size_t>(best);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    // splitmix64 finaliser over the combined state
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_string(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<int> canonical_row_order(const FeatureMatrix& X, const std::vector<int>& y) {
    std::vector<int> order(static_cast<std::size_t>(X.rows()));
    std::iota(order.begin(), order.end(), 0);
    auto less = [&](int a, int b) {
        if (y[a] != y[b]) return y[a] < y[b];
        FeatureMatrix::InnerIterator ia(X, a), ib(X, b);
        for (; ia && ib; ++ia, ++ib) {
            if (ia.index() != ib.index()) return ia.index() < ib.index();
            if (ia.value() != ib.value()) return ia.value() < ib.value();
        }
        return !ia && static_cast<bool>(ib);
    };
    std::stable_sort(order.begin(), order.end(), less);
    return order;
}

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& margins) {
    const double top = margins.maxCoeff();
    Eigen::VectorXd e = (margins.array() - top).exp();
    return e / e.sum();
}

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::uniform: return "uniform";
        case Algorithm::random_forest: return "random_forest";
        case Algorithm::svm: return "svm";
    }
    return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "uniform") return Algorithm::uniform;
    if (s == "random_forest" || s == "rf") return Algorithm::random_forest;
    if (s == "svm") return Algorithm::svm;
    throw ConfigError("unknown algorithm '" + s + "'");
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Eigen::VectorXd forest_scores(const RandomForestModel& m, const FeatureVector& x) {
    const Eigen::VectorXd dense = Eigen::VectorXd(x);
    Eigen::VectorXd votes = Eigen::VectorXd::Zero(m.n_classes);
    for (const auto& tree : m.trees) votes[tree.nodes[static_cast<std::size_t>(tree.leaf_for(dense))].vote] += 1.0;
    return votes / static_cast<double>(m.trees.size());
}

}  // namespace

int classifier_dimension(const Classifier& model) {
    return std::visit(overloaded{
                          [](const UniformModel&) { return -1; },
                          [](const ConstantModel&) { return -1; },
                          [](const RandomForestModel& m) { return m.dimension; },
                          [](const LinearSvmModel& m) { return m.dimension(); },
                      },
                      model);
}

int classifier_classes(const Classifier& model) {
    return std::visit(overloaded{
                          [](const UniformModel& m) { return m.n_classes; },
                          [](const ConstantModel& m) { return m.n_classes; },
                          [](const RandomForestModel& m) { return m.n_classes; },
                          [](const LinearSvmModel& m) { return m.n_classes(); },
                      },
                      model);
}

Eigen::VectorXd predict_scores(const Classifier& model, const FeatureVector& x) {
    const int dim = classifier_dimension(model);
    if (dim >= 0 && x.size() != dim)
        throw DimensionMismatch("feature dimension " + std::to_string(x.size()) + " != model dimension " +
                                std::to_string(dim));
    return std::visit(overloaded{
                          [](const UniformModel& m) -> Eigen::VectorXd {
                              if (m.mode == UniformMode::prior) return m.priors;
                              return Eigen::VectorXd::Constant(m.n_classes, 1.0 / m.n_classes);
                          },
                          [](const ConstantModel& m) -> Eigen::VectorXd {
                              Eigen::VectorXd s = Eigen::VectorXd::Zero(m.n_classes);
                              s[m.label] = 1.0;
                              return s;
                          },
                          [&](const RandomForestModel& m) -> Eigen::VectorXd { return forest_scores(m, x); },
                          [&](const LinearSvmModel& m) -> Eigen::VectorXd {
                              Eigen::VectorXd margins = m.weights * x + m.bias;
                              return softmax(margins);
                          },
                      },
                      model);
}

ScoredPrediction predict(const Classifier& model, const LabelSpace& labels, const FeatureVector& x) {
    if (static_cast<std::size_t>(classifier_classes(model)) != labels.size())
        throw DimensionMismatch("label space size does not match the model");
    return ScoredPrediction{labels, predict_scores(model, x)};
}

Classifier train_classifier(Algorithm algorithm, const FeatureMatrix& X, const std::vector<int>& y, int n_classes,
                            const ModelConfig& config, std::uint64_t seed) {
    if (static_cast<std::size_t>(X.rows()) != y.size())
        throw DimensionMismatch("X has " + std::to_string(X.rows()) + " rows but y has " + std::to_string(y.size()));
    if (n_classes == 1) return ConstantModel{1, 0};
    switch (algorithm) {
        case Algorithm::uniform: return train_uniform(y, n_classes, config.uniform_mode, seed);
        case Algorithm::random_forest: {
            RandomForestConfig c = config.forest;
            c.seed = seed;
            return train_random_forest(X, y, n_classes, c);
        }
        case Algorithm::svm: {
            LinearSvmConfig c = config.svm;
            c.seed = seed;
            return train_linear_svm(X, y, n_classes, c);
        }
    }
    throw ConfigError("unknown algorithm");
}

// ---------------------------------------------------------------------------
// serialisation

nlohmann::json to_json(const Classifier& model) {
    using nlohmann::json;
    return std::visit(
        overloaded{
            [](const UniformModel& m) -> json {
                return {{"type", "uniform"},
                        {"n_classes", m.n_classes},
                        {"mode", m.mode == UniformMode::uniform ? "uniform" : "prior"},
                        {"priors", std::vector<double>(m.priors.data(), m.priors.data() + m.priors.size())},
                        {"seed", m.seed}};
            },
            [](const ConstantModel& m) -> json {
                return {{"type", "constant"}, {"n_classes", m.n_classes}, {"label", m.label}};
            },
            [](const RandomForestModel& m) -> json {
                json trees = json::array();
                for (const auto& t : m.trees) {
                    std::vector<int> feature, left, right, vote;
                    std::vector<double> threshold;
                    json counts = json::array();
                    for (const auto& n : t.nodes) {
                        feature.push_back(n.feature);
                        threshold.push_back(n.threshold);
                        left.push_back(n.left);
                        right.push_back(n.right);
                        vote.push_back(n.vote);
                        std::vector<int> flat;
                        for (const auto& [c, k] : n.class_counts) {
                            flat.push_back(c);
                            flat.push_back(k);
                        }
                        counts.push_back(flat);
                    }
                    trees.push_back({{"feature", feature},
                                     {"threshold", threshold},
                                     {"left", left},
                                     {"right", right},
                                     {"vote", vote},
                                     {"counts", counts}});
                }
                return {{"type", "random_forest"},
                        {"n_classes", m.n_classes},
                        {"dimension", m.dimension},
                        {"config",
                         {{"n_trees", m.config.n_trees},
                          {"max_depth", m.config.max_depth},
                          {"min_leaf", m.config.min_leaf},
                          {"features_per_split", m.config.features_per_split},
                          {"bootstrap", m.config.bootstrap},
                          {"criterion", "gini"},
                          {"seed", m.config.seed}}},
                        {"trees", trees}};
            },
            [](const LinearSvmModel& m) -> json {
                json w = json::array();
                for (Eigen::Index c = 0; c < m.weights.rows(); ++c) {
                    std::vector<double> row(static_cast<std::size_t>(m.weights.cols()));
                    for (Eigen::Index j = 0; j < m.weights.cols(); ++j) row[static_cast<std::size_t>(j)] = m.weights(c, j);
                    w.push_back(row);
                }
                return {{"type", "svm"},
                        {"n_classes", m.n_classes()},
                        {"dimension", m.dimension()},
                        {"weights", w},
                        {"bias", std::vector<double>(m.bias.data(), m.bias.data() + m.bias.size())},
                        {"config",
                         {{"C", m.config.C},
                          {"max_epochs", m.config.max_epochs},
                          {"tolerance", m.config.tolerance},
                          {"seed", m.config.seed},
                          {"decomposition", "one_vs_rest"},
                          {"scores", "softmax_over_margins"}}}};
            },
        },
        model);
}

Classifier classifier_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "uniform") {
        UniformModel m;
        m.n_classes = j.at("n_classes").get<int>();
        m.mode = j.at("mode").get<std::string>() == "prior" ? UniformMode::prior : UniformMode::uniform;
        const auto p = j.at("priors").get<std::vector<double>>();
        m.priors = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
        m.seed = j.at("seed").get<std::uint64_t>();
        return m;
    }
    if (type == "constant") return ConstantModel{j.at("n_classes").get<int>(), j.at("label").get<int>()};
    if (type == "random_forest") {
        RandomForestModel m;
        m.n_classes = j.at("n_classes").get<int>();
        m.dimension = j.at("dimension").get<int>();
        const auto& c = j.at("config");
        m.config.n_trees = c.at("n_trees").get<int>();
        m.config.max_depth = c.at("max_depth").get<int>();
        m.config.min_leaf = c.at("min_leaf").get<int>();
        m.config.features_per_split = c.at("features_per_split").get<int>();
        m.config.bootstrap = c.at("bootstrap").get<bool>();
        m.config.seed = c.at("seed").get<std::uint64_t>();
        for (const auto& jt : j.at("trees")) {
            const auto feature = jt.at("feature").get<std::vector<int>>();
            const auto threshold = jt.at("threshold").get<std::vector<double>>();
            const auto left = jt.at("left").get<std::vector<int>>();
            const auto right = jt.at("right").get<std::vector<int>>();
            const auto vote = jt.at("vote").get<std::vector<int>>();
            const auto& counts = jt.at("counts");
            DecisionTree t;
            t.nodes.resize(feature.size());
            for (std::size_t i = 0; i < feature.size(); ++i) {
                auto& n = t.nodes[i];
                n.feature = feature[i];
                n.threshold = threshold[i];
                n.left = left[i];
                n.right = right[i];
                n.vote = vote[i];
                const auto flat = counts.at(i).get<std::vector<int>>();
                for (std::size_t k = 0; k + 1 < flat.size(); k += 2) n.class_counts.emplace_back(flat[k], flat[k + 1]);
            }
            m.trees.push_back(std::move(t));
        }
        return m;
    }
    if (type == "svm") {
        LinearSvmModel m;
        const int k = j.at("n_classes").get<int>();
        const int d = j.at("dimension").get<int>();
        m.weights.resize(k, d);
        const auto& w = j.at("weights");
        for (int c = 0; c < k; ++c)
            for (int f = 0; f < d; ++f) m.weights(c, f) = w.at(static_cast<std::size_t>(c)).at(static_cast<std::size_t>(f)).get<double>();
        const auto b = j.at("bias").get<std::vector<double>>();
        m.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
        const auto& c = j.at("config");
        m.config.C = c.at("C").get<double>();
        m.config.max_epochs = c.at("max_epochs").get<int>();
        m.config.tolerance = c.at("tolerance").get<double>();
        m.config.seed = c.at("seed").get<std::uint64_t>();
        return m;
    }
    throw DataError("unknown model type '" + type + "'");
}

nlohmann::json to_json(const ModelConfig& config) {
    return {{"random_forest",
             {{"n_trees", config.forest.n_trees},
              {"max_depth", config.forest.max_depth},
              {"min_leaf", config.forest.min_leaf},
              {"features_per_split", config.forest.features_per_split},
              {"bootstrap", config.forest.bootstrap}}},
            {"svm",
             {{"C", config.svm.C}, {"max_epochs", config.svm.max_epochs}, {"tolerance", config.svm.tolerance}}},
            {"uniform_mode", config.uniform_mode == UniformMode::uniform ? "uniform" : "prior"}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
    ModelConfig c;
    const auto& rf = j.at("random_forest");
    c.forest.n_trees = rf.at("n_trees").get<int>();
    c.forest.max_depth = rf.at("max_depth").get<int>();
    c.forest.min_leaf = rf.at("min_leaf").get<int>();
    c.forest.features_per_split = rf.at("features_per_split").get<int>();
    c.forest.bootstrap = rf.at("bootstrap").get<bool>();
    const auto& svm = j.at("svm");
    c.svm.C = svm.at("C").get<double>();
    c.svm.max_epochs = svm.at("max_epochs").get<int>();
    c.svm.tolerance = svm.at("tolerance").get<double>();
    c.uniform_mode = j.at("uniform_mode").get<std::string>() == "prior" ? UniformMode::prior : UniformMode::uniform;
    return c;
}

}  // namespace delaycode
