#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "delaycode/corpus.hpp"
#include "delaycode/hierarchy.hpp"

namespace delaycode {

enum class Approach { flat, hierarchical };

std::string to_string(Approach a);
Approach approach_from_string(const std::string& s);

struct ExperimentConfig {
    Approach approach = Approach::hierarchical;
    Algorithm algorithm = Algorithm::svm;
    int n_folds = 10;
    std::uint64_t seed = 42;
    double epsilon = 0.05;
    bool abstain = false;
    bool exclude_numeric_only = false;  // informational; filtering happens when the corpus is loaded
    std::vector<LabelDay> targets{LabelDay::day0, LabelDay::day10};
    bool include_tkl = true;
    HierarchyConfig model;
    int jobs = 1;

    /// Throws ConfigError.
    void validate() const;
};

/// "hierarchical/svm", "flat/uniform", ...
std::string config_id(Approach approach, Algorithm algorithm);
std::string tkl_config_id(Approach approach);

struct FoldScore {
    std::string config;
    std::string node;  // "L1", "L2", "L3", "L2/D", "L3/DPR"
    int day = 0;       // 0 or 10
    int fold = 0;
    double f1 = 0.0;

    auto operator<=>(const FoldScore&) const = default;
};

struct ScoreAggregate {
    std::string config;
    std::string node;
    int day = 0;
    std::size_t n = 0;
    double mean = 0.0;
    double std = 0.0;  // sample (n-1)
};

struct FoldScoreTable {
    std::vector<FoldScore> rows;

    /// Sorted by (config, node, day, fold).
    void sort();
    void append(const FoldScoreTable& other);
    std::vector<ScoreAggregate> aggregates() const;
    /// Per-fold values for one (config, node, day), ordered by fold.
    std::vector<double> values(const std::string& config, const std::string& node, int day) const;
    double mean_of(const std::string& config, const std::string& node, int day) const;
};

/// Fold index per row. Rows are grouped by label, shuffled within each group,
/// concatenated in label order and dealt round-robin.
std::vector<int> stratified_folds(const std::vector<std::string>& labels, int n_folds, std::uint64_t seed);

/// Which corpus rows a training stage of one node read.
struct AuditEvent {
    int fold = 0;
    std::string config;
    std::string node;   // node path, e.g. "root", "D.PR", "flat"
    std::string stage;  // "proper" (TF-IDF fit and training) or "calibration"
    const std::vector<std::size_t>* rows = nullptr;
};

struct ExperimentHooks {
    std::function<void(const AuditEvent&)> audit;
    std::function<void(int fold, const std::vector<std::size_t>& test_rows)> on_fold;
};

/// Cross-conformal protocol: per fold, train and calibrate on the remaining
/// folds and score the held-out fold against the requested label days.
FoldScoreTable run_experiment(const Corpus& corpus, const ExperimentConfig& config, const ExperimentHooks& hooks = {});

/// Manual-classification ceiling: macro-F1 of day-0 labels against day-10 labels
/// on each fold's test split, at `level` over the whole split.
std::vector<double> tkl_score(const Corpus& corpus, int level, int n_folds = 10, std::uint64_t seed = 42);

/// Evaluated nodes of a hierarchy: the root plus every node with two or more children.
std::vector<std::string> evaluated_nodes(const CodeHierarchy& h);

}  // namespace delaycode
