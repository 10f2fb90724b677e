#include "delaycode/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "delaycode/distributions.hpp"
#include "delaycode/error.hpp"

namespace delaycode {

Eigen::VectorXd average_ranks_ascending(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    Eigen::VectorXd r(static_cast<Eigen::Index>(n));
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t t = i; t <= j; ++t) r(static_cast<Eigen::Index>(order[t])) = avg;
        i = j + 1;
    }
    return r;
}

Eigen::MatrixXd RankMatrix::ranks() const {
    if (!scores.allFinite()) throw IncompleteBlock("rank matrix has missing or non-finite cells");
    Eigen::MatrixXd r(scores.rows(), scores.cols());
    for (Eigen::Index b = 0; b < scores.rows(); ++b) {
        std::vector<double> negated(static_cast<std::size_t>(scores.cols()));
        for (Eigen::Index j = 0; j < scores.cols(); ++j) negated[static_cast<std::size_t>(j)] = -scores(b, j);
        r.row(b) = average_ranks_ascending(negated).transpose();
    }
    return r;
}

Eigen::VectorXd RankMatrix::average_ranks() const { return ranks().colwise().mean().transpose(); }

Adjustment adjustment_from_string(const std::string& s) {
    if (s == "none") return Adjustment::none;
    if (s == "bonferroni") return Adjustment::bonferroni;
    if (s == "holm") return Adjustment::holm;
    throw ConfigError("unknown p-value adjustment '" + s + "'");
}

std::string to_string(Adjustment a) {
    switch (a) {
        case Adjustment::bonferroni: return "bonferroni";
        case Adjustment::holm: return "holm";
        default: return "none";
    }
}

std::vector<double> adjust_p_values(const std::vector<double>& p, Adjustment adjustment) {
    const double m = static_cast<double>(p.size());
    std::vector<double> out = p;
    if (adjustment == Adjustment::bonferroni) {
        for (double& v : out) v = std::min(1.0, v * m);
    } else if (adjustment == Adjustment::holm) {
        std::vector<std::size_t> order(p.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
        double running = 0.0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            running = std::max(running, std::min(1.0, (m - static_cast<double>(i)) * p[order[i]]));
            out[order[i]] = running;
        }
    }
    return out;
}

namespace {

struct Pooled {
    std::size_t N = 0;
    int k = 0;
    std::vector<std::size_t> sizes;
    Eigen::VectorXd rank_sums;
    Eigen::VectorXd ranks;  // all pooled ranks
    double tie_term = 0.0;  // sum (t^3 - t)
};

Pooled pool(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw InsufficientData("rank tests need at least two groups");
    Pooled p;
    p.k = static_cast<int>(groups.size());
    std::vector<double> all;
    for (const auto& g : groups) {
        if (g.empty()) throw InsufficientData("rank tests need non-empty groups");
        for (double v : g)
            if (!std::isfinite(v)) throw NonFinite("non-finite score in rank test input");
        p.sizes.push_back(g.size());
        all.insert(all.end(), g.begin(), g.end());
    }
    p.N = all.size();
    p.ranks = average_ranks_ascending(all);
    p.rank_sums = Eigen::VectorXd::Zero(p.k);
    std::size_t offset = 0;
    for (int g = 0; g < p.k; ++g) {
        for (std::size_t i = 0; i < p.sizes[static_cast<std::size_t>(g)]; ++i)
            p.rank_sums(g) += p.ranks(static_cast<Eigen::Index>(offset + i));
        offset += p.sizes[static_cast<std::size_t>(g)];
    }
    std::vector<double> sorted = all;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i);
        p.tie_term += t * t * t - t;
        i = j;
    }
    return p;
}

std::vector<std::string> default_names(std::vector<std::string> names, std::size_t k) {
    if (names.empty())
        for (std::size_t i = 0; i < k; ++i) names.push_back("g" + std::to_string(i + 1));
    if (names.size() != k) throw LengthMismatch("treatment names do not match the number of groups");
    return names;
}

double kw_statistic(const Pooled& p, bool& degenerate) {
    const double N = static_cast<double>(p.N);
    double s = 0.0;
    for (int g = 0; g < p.k; ++g) s += p.rank_sums(g) * p.rank_sums(g) / static_cast<double>(p.sizes[static_cast<std::size_t>(g)]);
    const double h = 12.0 / (N * (N + 1.0)) * s - 3.0 * (N + 1.0);
    const double correction = 1.0 - p.tie_term / (N * N * N - N);
    degenerate = !(correction > 1e-14);
    if (degenerate) return 0.0;
    return std::max(0.0, h / correction);
}

Eigen::VectorXd mean_ranks_of(const Pooled& p) {
    Eigen::VectorXd m(p.k);
    for (int g = 0; g < p.k; ++g) m(g) = p.rank_sums(g) / static_cast<double>(p.sizes[static_cast<std::size_t>(g)]);
    return m;
}

void fill_pairwise(TestResult& r, int k, const std::function<std::pair<double, double>(int, int)>& pair_test,
                   Adjustment adjustment) {
    r.pairwise_p = Eigen::MatrixXd::Identity(k, k);
    r.pairwise_statistic = Eigen::MatrixXd::Zero(k, k);
    std::vector<double> raw;
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const auto [stat, p] = pair_test(i, j);
            r.pairwise_statistic(i, j) = r.pairwise_statistic(j, i) = stat;
            raw.push_back(std::clamp(p, 0.0, 1.0));
            pairs.emplace_back(i, j);
        }
    const auto adj = adjust_p_values(raw, adjustment);
    for (std::size_t t = 0; t < pairs.size(); ++t) {
        const auto [i, j] = pairs[t];
        r.pairwise_p(i, j) = r.pairwise_p(j, i) = adj[t];
    }
    r.adjustment = adjustment;
}

}  // namespace

TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups, std::vector<std::string> names) {
    const Pooled p = pool(groups);
    TestResult r;
    r.method = "kruskal_wallis";
    r.treatments = default_names(std::move(names), groups.size());
    r.statistic = kw_statistic(p, r.degenerate);
    r.df = p.k - 1;
    r.p_value = r.degenerate ? 1.0 : dist::chi2_sf(r.statistic, r.df);
    r.mean_ranks = mean_ranks_of(p);
    return r;
}

TestResult conover_posthoc(const std::vector<std::vector<double>>& groups, std::vector<std::string> names,
                           Adjustment adjustment) {
    const Pooled p = pool(groups);
    TestResult r;
    r.method = "conover";
    r.treatments = default_names(std::move(names), groups.size());
    r.statistic = kw_statistic(p, r.degenerate);
    const double N = static_cast<double>(p.N);
    const double k = p.k;
    r.df = N - k;
    r.p_value = r.degenerate ? 1.0 : dist::chi2_sf(r.statistic, k - 1);
    r.mean_ranks = mean_ranks_of(p);
    const double s2 = (p.ranks.squaredNorm() - N * (N + 1.0) * (N + 1.0) / 4.0) / (N - 1.0);
    const double base = r.df > 0 ? s2 * (N - 1.0 - r.statistic) / r.df : 0.0;
    const Eigen::VectorXd m = r.mean_ranks;
    fill_pairwise(
        r, p.k,
        [&](int i, int j) -> std::pair<double, double> {
            const double diff = std::fabs(m(i) - m(j));
            if (r.degenerate || diff == 0.0) return {0.0, 1.0};
            const double se2 = base * (1.0 / static_cast<double>(p.sizes[static_cast<std::size_t>(i)]) +
                                       1.0 / static_cast<double>(p.sizes[static_cast<std::size_t>(j)]));
            if (!(se2 > 0.0) || r.df <= 0) return {std::numeric_limits<double>::infinity(), 0.0};
            const double t = diff / std::sqrt(se2);
            return {t, dist::t_two_sided(t, r.df)};
        },
        adjustment);
    return r;
}

namespace {

void check_matrix(const RankMatrix& m) {
    if (m.scores.rows() < 2) throw InsufficientData("Friedman needs at least two blocks");
    if (m.scores.cols() < 2) throw InsufficientData("Friedman needs at least two treatments");
    if (!m.treatments.empty() && static_cast<Eigen::Index>(m.treatments.size()) != m.scores.cols())
        throw LengthMismatch("treatment names do not match the matrix");
}

}  // namespace

double nemenyi_critical_difference(int k, std::size_t n_blocks, double alpha) {
    if (k < 2 || n_blocks == 0) throw InsufficientData("critical difference needs k >= 2 and n >= 1");
    return dist::nemenyi_q(alpha, k) * std::sqrt(k * (k + 1.0) / (6.0 * static_cast<double>(n_blocks)));
}

TestResult friedman(const RankMatrix& matrix) {
    check_matrix(matrix);
    const Eigen::MatrixXd ranks = matrix.ranks();
    const double n = static_cast<double>(ranks.rows());
    const double k = static_cast<double>(ranks.cols());
    TestResult r;
    r.method = "friedman";
    r.treatments = default_names(matrix.treatments, static_cast<std::size_t>(ranks.cols()));
    r.mean_ranks = ranks.colwise().mean().transpose();
    r.n_blocks = static_cast<std::size_t>(ranks.rows());
    r.statistic = 12.0 * n / (k * (k + 1.0)) * (r.mean_ranks.squaredNorm() - k * (k + 1.0) * (k + 1.0) / 4.0);
    if (std::fabs(r.statistic) < 1e-12) r.statistic = 0.0;
    r.df = k - 1.0;
    r.p_value = dist::chi2_sf(r.statistic, r.df);
    r.degenerate = (ranks.array() == (k + 1.0) / 2.0).all();
    return r;
}

TestResult nemenyi_posthoc(const RankMatrix& matrix) {
    TestResult r = friedman(matrix);
    r.method = "nemenyi";
    const int k = static_cast<int>(r.mean_ranks.size());
    const double n = static_cast<double>(r.n_blocks);
    const double se = std::sqrt(k * (k + 1.0) / (6.0 * n));
    fill_pairwise(
        r, k,
        [&](int i, int j) -> std::pair<double, double> {
            const double q = std::fabs(r.mean_ranks(i) - r.mean_ranks(j)) * std::sqrt(2.0) / se;
            if (q == 0.0) return {0.0, 1.0};
            return {q, 1.0 - dist::studentized_range_cdf(q, k)};
        },
        Adjustment::none);
    for (double alpha : {0.05, 0.10}) r.critical_difference[alpha] = nemenyi_critical_difference(k, r.n_blocks, alpha);
    return r;
}

nlohmann::json to_json(const TestResult& r) {
    nlohmann::json j = {{"method", r.method},   {"statistic", r.statistic}, {"df", r.df},
                        {"p_value", r.p_value}, {"degenerate", r.degenerate}, {"treatments", r.treatments}};
    j["mean_ranks"] = std::vector<double>(r.mean_ranks.data(), r.mean_ranks.data() + r.mean_ranks.size());
    if (r.pairwise_p.size()) {
        nlohmann::json p = nlohmann::json::array(), s = nlohmann::json::array();
        for (Eigen::Index i = 0; i < r.pairwise_p.rows(); ++i) {
            nlohmann::json pr = nlohmann::json::array(), sr = nlohmann::json::array();
            for (Eigen::Index c = 0; c < r.pairwise_p.cols(); ++c) {
                pr.push_back(r.pairwise_p(i, c));
                sr.push_back(std::isfinite(r.pairwise_statistic(i, c)) ? nlohmann::json(r.pairwise_statistic(i, c))
                                                                        : nlohmann::json(nullptr));
            }
            p.push_back(pr);
            s.push_back(sr);
        }
        j["pairwise_p"] = p;
        j["pairwise_statistic"] = s;
        j["adjustment"] = to_string(r.adjustment);
    }
    if (r.n_blocks) j["n_blocks"] = r.n_blocks;
    if (!r.critical_difference.empty()) {
        nlohmann::json cd = nlohmann::json::object();
        for (const auto& [alpha, v] : r.critical_difference) {
            char key[16];
            std::snprintf(key, sizeof key, "%.2f", alpha);
            cd[key] = v;
        }
        j["critical_difference"] = cd;
    }
    return j;
}

}  // namespace delaycode
