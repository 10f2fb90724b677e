#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "delaycode/error.hpp"
#include "delaycode/models.hpp"

namespace delaycode {

int DecisionTree::leaf_for(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    int i = 0;
    while (nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const Node& n = nodes[static_cast<std::size_t>(i)];
        i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return i;
}

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // sum_c cL^2/nL + sum_c cR^2/nR; larger is purer
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXf& X, const std::vector<std::vector<int>>& row_features, const std::vector<int>& y,
                int n_classes, const RandomForestConfig& config, int mtry, std::uint64_t seed)
        : X_(X), rows_(row_features), y_(y), k_(n_classes), config_(config), mtry_(mtry), rng_(seed),
          features_(static_cast<std::size_t>(X.cols())), stamp_(static_cast<std::size_t>(X.cols()), 0) {
        std::iota(features_.begin(), features_.end(), 0);
        counts_.resize(static_cast<std::size_t>(k_));
        left_.resize(static_cast<std::size_t>(k_));
        right_.resize(static_cast<std::size_t>(k_));
    }

    DecisionTree build(std::vector<int> samples) {
        samples_ = std::move(samples);
        DecisionTree tree;
        struct Task {
            int node;
            std::size_t begin, end;
            int depth;
        };
        tree.nodes.emplace_back();
        std::vector<Task> stack{{0, 0, samples_.size(), 0}};
        while (!stack.empty()) {
            const Task t = stack.back();
            stack.pop_back();
            node_counts(t.begin, t.end);
            const std::size_t n = t.end - t.begin;
            const bool pure = std::count_if(counts_.begin(), counts_.end(), [](int c) { return c > 0; }) <= 1;
            const bool depth_limited = config_.max_depth > 0 && t.depth >= config_.max_depth;
            Split split;
            if (!pure && !depth_limited && n >= static_cast<std::size_t>(2 * config_.min_leaf))
                split = find_split(t.begin, t.end);
            if (split.feature < 0) {
                make_leaf(tree.nodes[static_cast<std::size_t>(t.node)]);
                continue;
            }
            const auto col = X_.col(split.feature);
            auto mid = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                      samples_.begin() + static_cast<std::ptrdiff_t>(t.end),
                                      [&](int s) { return col[s] <= split.threshold; });
            const std::size_t m = static_cast<std::size_t>(mid - samples_.begin());
            const int left = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& node = tree.nodes[static_cast<std::size_t>(t.node)];
            node.feature = split.feature;
            node.threshold = split.threshold;
            node.left = left;
            node.right = left + 1;
            stack.push_back({left + 1, m, t.end, t.depth + 1});
            stack.push_back({left, t.begin, m, t.depth + 1});
        }
        return tree;
    }

private:
    void node_counts(std::size_t begin, std::size_t end) {
        std::fill(counts_.begin(), counts_.end(), 0);
        for (std::size_t i = begin; i < end; ++i) ++counts_[static_cast<std::size_t>(y_[static_cast<std::size_t>(samples_[i])])];
    }

    void make_leaf(DecisionTree::Node& node) const {
        node.feature = -1;
        node.class_counts.clear();
        int best = 0;
        for (int c = 0; c < k_; ++c) {
            if (counts_[static_cast<std::size_t>(c)] > 0) node.class_counts.emplace_back(c, counts_[static_cast<std::size_t>(c)]);
            if (counts_[static_cast<std::size_t>(c)] > counts_[static_cast<std::size_t>(best)]) best = c;
        }
        node.vote = best;
    }

    Split find_split(std::size_t begin, std::size_t end) {
        const double n = static_cast<double>(end - begin);
        double parent = 0.0;
        for (int c : counts_) parent += static_cast<double>(c) * c;
        parent /= n;

        // features with a nonzero value somewhere in the node; the rest are
        // constant and can be skipped without touching the column
        ++epoch_;
        for (std::size_t i = begin; i < end; ++i)
            for (int f : rows_[static_cast<std::size_t>(samples_[i])]) stamp_[static_cast<std::size_t>(f)] = epoch_;

        Split best;
        best.score = parent + 1e-12 * n;
        int visited = 0;
        const std::size_t d = features_.size();
        for (std::size_t i = 0; i < d && visited < mtry_; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, d - 1);
            std::swap(features_[i], features_[pick(rng_)]);
            const int f = features_[i];
            if (stamp_[static_cast<std::size_t>(f)] != epoch_) continue;
            if (evaluate_feature(f, begin, end, best)) ++visited;
        }
        return best;
    }

    // Returns false when the feature is constant over the node.
    bool evaluate_feature(int f, std::size_t begin, std::size_t end, Split& best) {
        const auto col = X_.col(f);
        values_.clear();
        for (std::size_t i = begin; i < end; ++i) {
            const int s = samples_[i];
            const float v = col[s];
            if (v != 0.0f) values_.emplace_back(v, y_[static_cast<std::size_t>(s)]);
        }
        const std::size_t n = end - begin;
        const std::size_t n_zero = n - values_.size();
        if (values_.empty()) return false;
        std::sort(values_.begin(), values_.end());
        if (n_zero == 0 && values_.front().first == values_.back().first) return false;

        // zero block counts = node counts - nonzero counts
        zero_ = counts_;
        for (const auto& [v, c] : values_) --zero_[static_cast<std::size_t>(c)];

        std::fill(left_.begin(), left_.end(), 0);
        right_ = counts_;
        double sq_left = 0.0, sq_right = 0.0;
        for (int c : right_) sq_right += static_cast<double>(c) * c;
        std::size_t n_left = 0;

        const auto move_one = [&](int c) {
            auto& l = left_[static_cast<std::size_t>(c)];
            auto& r = right_[static_cast<std::size_t>(c)];
            sq_left += 2.0 * l + 1.0;
            sq_right -= 2.0 * r - 1.0;
            ++l;
            --r;
            ++n_left;
        };
        const auto move_zero_block = [&] {
            for (int c = 0; c < k_; ++c) {
                const int z = zero_[static_cast<std::size_t>(c)];
                if (z == 0) continue;
                auto& l = left_[static_cast<std::size_t>(c)];
                auto& r = right_[static_cast<std::size_t>(c)];
                sq_left += static_cast<double>(z) * (2.0 * l + z);
                sq_right -= static_cast<double>(z) * (2.0 * r - z);
                l += z;
                r -= z;
            }
            n_left += n_zero;
        };
        const std::size_t min_leaf = static_cast<std::size_t>(config_.min_leaf);
        const auto consider = [&](double lo, double hi) {
            if (n_left < min_leaf || n - n_left < min_leaf) return;
            const double score = sq_left / static_cast<double>(n_left) + sq_right / static_cast<double>(n - n_left);
            if (score > best.score) {
                best.score = score;
                best.feature = f;
                best.threshold = 0.5 * (lo + hi);
            }
        };

        // sweep groups of equal value in ascending order; the zero block sits
        // between the negative and positive values
        std::size_t i = 0;
        bool zero_pending = n_zero > 0;
        bool have_prev = false;
        double prev = 0.0;
        while (i < values_.size() || zero_pending) {
            const bool zero_next = zero_pending && (i == values_.size() || values_[i].first > 0.0f);
            const double v = zero_next ? 0.0 : static_cast<double>(values_[i].first);
            if (have_prev) consider(prev, v);
            if (zero_next) {
                move_zero_block();
                zero_pending = false;
            } else {
                const float group = values_[i].first;
                while (i < values_.size() && values_[i].first == group) move_one(values_[i++].second);
            }
            prev = v;
            have_prev = true;
        }
        return true;
    }

    const Eigen::MatrixXf& X_;
    const std::vector<std::vector<int>>& rows_;
    const std::vector<int>& y_;
    int k_;
    const RandomForestConfig& config_;
    int mtry_;
    std::mt19937_64 rng_;
    std::vector<int> features_;
    std::vector<unsigned> stamp_;
    unsigned epoch_ = 0;
    std::vector<int> samples_;
    std::vector<int> counts_, left_, right_, zero_;
    std::vector<std::pair<float, int>> values_;
};

}  // namespace

RandomForestModel train_random_forest(const FeatureMatrix& X, const std::vector<int>& y, int n_classes,
                                      const RandomForestConfig& config) {
    if (static_cast<std::size_t>(X.rows()) != y.size())
        throw DimensionMismatch("X has " + std::to_string(X.rows()) + " rows but y has " + std::to_string(y.size()));
    if (y.empty()) throw InsufficientData("random forest needs at least one training row");
    if (config.n_trees < 1) throw ConfigError("n_trees must be >= 1");

    // canonical order makes the forest independent of input row order
    const std::vector<int> order = canonical_row_order(X, y);
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    Eigen::MatrixXf dense = Eigen::MatrixXf::Zero(n, d);
    std::vector<int> labels(static_cast<std::size_t>(n));
    std::vector<std::vector<int>> row_features(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) {
        const int src = order[static_cast<std::size_t>(r)];
        labels[static_cast<std::size_t>(r)] = y[static_cast<std::size_t>(src)];
        for (FeatureMatrix::InnerIterator it(X, src); it; ++it) {
            if (it.value() == 0.0) continue;
            dense(r, it.index()) = static_cast<float>(it.value());
            row_features[static_cast<std::size_t>(r)].push_back(static_cast<int>(it.index()));
        }
    }

    const int mtry = config.features_per_split > 0
                         ? std::min<int>(config.features_per_split, static_cast<int>(std::max<Eigen::Index>(d, 1)))
                         : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max<Eigen::Index>(d, 1)))));

    RandomForestModel model;
    model.n_classes = n_classes;
    model.dimension = static_cast<int>(d);
    model.config = config;
    model.trees.reserve(static_cast<std::size_t>(config.n_trees));
    for (int t = 0; t < config.n_trees; ++t) {
        const std::uint64_t tree_seed = mix_seed(config.seed, static_cast<std::uint64_t>(t));
        std::mt19937_64 boot(mix_seed(tree_seed, 0xB007));
        std::vector<int> samples(static_cast<std::size_t>(n));
        if (config.bootstrap) {
            std::uniform_int_distribution<int> pick(0, static_cast<int>(n) - 1);
            for (auto& s : samples) s = pick(boot);
        } else {
            std::iota(samples.begin(), samples.end(), 0);
        }
        TreeBuilder builder(dense, row_features, labels, n_classes, config, mtry, tree_seed);
        model.trees.push_back(builder.build(std::move(samples)));
    }
    return model;
}

}  // namespace delaycode
