#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace delaycode {

/// Blocks (rows) by treatments (columns). Within a block the highest score gets
/// rank 1; ties share the average rank.
struct RankMatrix {
    Eigen::MatrixXd scores;
    std::vector<std::string> treatments;
    std::vector<std::string> blocks;

    /// Throws IncompleteBlock for non-finite cells.
    Eigen::MatrixXd ranks() const;
    Eigen::VectorXd average_ranks() const;
};

/// Average ranks of `values`, 1-based, ascending order (smallest value gets rank 1).
Eigen::VectorXd average_ranks_ascending(const std::vector<double>& values);

enum class Adjustment { none, bonferroni, holm };

Adjustment adjustment_from_string(const std::string& s);
std::string to_string(Adjustment a);

struct TestResult {
    std::string method;
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    bool degenerate = false;
    std::vector<std::string> treatments;
    Eigen::VectorXd mean_ranks;  // pooled (Kruskal-Wallis) or within-block (Friedman) rank means
    Eigen::MatrixXd pairwise_p;  // symmetric, unit diagonal; empty for omnibus tests
    Eigen::MatrixXd pairwise_statistic;
    Adjustment adjustment = Adjustment::none;
    std::map<double, double> critical_difference;  // alpha -> CD
    std::size_t n_blocks = 0;
};

/// Throws InsufficientData for fewer than two groups or an empty group. All
/// values equal gives H = 0, p = 1 and `degenerate`.
TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups, std::vector<std::string> names = {});

/// Conover-Iman pairwise comparisons on pooled ranks with Student-t (N - k df).
TestResult conover_posthoc(const std::vector<std::vector<double>>& groups, std::vector<std::string> names = {},
                           Adjustment adjustment = Adjustment::none);

TestResult friedman(const RankMatrix& matrix);

/// Pairwise p from the studentized range; CD for alpha 0.05 and 0.10.
TestResult nemenyi_posthoc(const RankMatrix& matrix);

double nemenyi_critical_difference(int k, std::size_t n_blocks, double alpha);

std::vector<double> adjust_p_values(const std::vector<double>& p, Adjustment adjustment);

nlohmann::json to_json(const TestResult& r);

}  // namespace delaycode
