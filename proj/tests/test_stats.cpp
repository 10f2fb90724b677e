#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "delaycode/cd_diagram.hpp"
#include "delaycode/distributions.hpp"
#include "delaycode/error.hpp"
#include "delaycode/stats.hpp"

using namespace delaycode;

namespace {

RankMatrix matrix_of(const std::vector<std::vector<double>>& rows) {
    RankMatrix m;
    m.scores.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    for (std::size_t j = 0; j < rows[0].size(); ++j) m.treatments.push_back("t" + std::to_string(j));
    for (std::size_t i = 0; i < rows.size(); ++i) m.blocks.push_back("b" + std::to_string(i));
    return m;
}

// 10 blocks x 4 treatments without ties
RankMatrix nemenyi_example() {
    std::vector<std::vector<double>> rows;
    for (int b = 0; b < 10; ++b) {
        std::vector<double> r;
        for (int t = 0; t < 4; ++t) r.push_back(((b * 7 + t * 3) % 11) / 10.0 + t * 0.15);
        rows.push_back(r);
    }
    return matrix_of(rows);
}

}  // namespace

TEST_CASE("chi-square survival against Boost.Math") {
    for (double df : {1.0, 2.0, 3.0, 5.0, 9.0, 20.0, 57.0}) {
        boost::math::chi_squared_distribution<double> d(df);
        for (double x : {0.01, 0.3, 1.0, 2.5, 4.0, 7.2, 10.0, 25.0, 60.0, 120.0}) {
            CAPTURE(df);
            CAPTURE(x);
            CHECK(std::fabs(dist::chi2_sf(x, df) - boost::math::cdf(boost::math::complement(d, x))) <= 1e-8);
            CHECK(std::fabs(dist::chi2_cdf(x, df) - boost::math::cdf(d, x)) <= 1e-8);
        }
    }
    CHECK(dist::chi2_sf(0.0, 3.0) == 1.0);
}

TEST_CASE("t survival against Boost.Math") {
    for (double df : {1.0, 2.0, 4.0, 10.0, 27.0, 100.0, 1000.0}) {
        boost::math::students_t_distribution<double> d(df);
        for (double t : {-4.0, -1.5, -0.2, 0.0, 0.4, 1.0, 2.1, 3.5, 7.0, 15.0}) {
            CAPTURE(df);
            CAPTURE(t);
            CHECK(std::fabs(dist::t_sf(t, df) - boost::math::cdf(boost::math::complement(d, t))) <= 1e-8);
            CHECK(std::fabs(dist::t_two_sided(t, df) - 2.0 * boost::math::cdf(boost::math::complement(d, std::fabs(t)))) <=
                  1e-8);
        }
    }
}

TEST_CASE("normal cdf against Boost.Math") {
    boost::math::normal_distribution<double> n;
    for (double z : {-8.0, -3.0, -1.0, 0.0, 0.5, 2.0, 6.0}) {
        CHECK(std::fabs(dist::normal_cdf(z) - boost::math::cdf(n, z)) <= 1e-12);
        CHECK(std::fabs(dist::normal_pdf(z) - boost::math::pdf(n, z)) <= 1e-14);
    }
}

TEST_CASE("studentized range reduces to the normal difference for k = 2") {
    // range of two standard normals is |Z1 - Z2| ~ sqrt(2)|N(0,1)|
    boost::math::normal_distribution<double> n;
    for (double q : {0.5, 1.0, 2.0, 2.77, 4.0}) {
        const double expected = 2.0 * boost::math::cdf(n, q / std::sqrt(2.0)) - 1.0;
        CHECK(std::fabs(dist::studentized_range_cdf(q, 2) - expected) <= 1e-8);
    }
}

TEST_CASE("Nemenyi q values") {
    // studentized range quantiles / sqrt 2 at infinite df, frozen from scipy.stats.studentized_range
    const struct {
        int k;
        double alpha, q;
    } ref[] = {{2, 0.05, 1.9599639845400534}, {3, 0.05, 2.343700586378409}, {4, 0.05, 2.569031772546482},
               {5, 0.05, 2.7277743708703763}, {6, 0.05, 2.8497054196100016}, {8, 0.05, 3.030878449614413},
               {10, 0.05, 3.163683577053373}, {2, 0.10, 1.6448536269514722}, {4, 0.10, 2.2913414968880566},
               {10, 0.10, 2.9198888400615384}};
    for (const auto& r : ref) {
        CAPTURE(r.k);
        CHECK(dist::nemenyi_q(r.alpha, r.k) == doctest::Approx(r.q).epsilon(1e-6));
        CHECK(dist::nemenyi_table_q(r.alpha, r.k) == doctest::Approx(r.q).epsilon(1e-3));
    }
    CHECK(dist::nemenyi_table_q(0.05, 40) == 0.0);
}

TEST_CASE("critical difference k=4 n=10") {
    const double cd = nemenyi_critical_difference(4, 10, 0.05);
    CHECK(std::fabs(cd - 1.483) <= 0.002);
    CHECK(cd == doctest::Approx(1.4832311854364129).epsilon(1e-6));
    CHECK(nemenyi_critical_difference(4, 10, 0.10) < cd);
}

TEST_CASE("Kruskal-Wallis on three separated groups") {
    TestResult r = kruskal_wallis({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    CHECK(r.statistic == doctest::Approx(7.2).epsilon(1e-12));
    CHECK(r.df == 2.0);
    CHECK(r.p_value == doctest::Approx(0.02732372244729252).epsilon(1e-9));
    CHECK(r.mean_ranks[0] == doctest::Approx(2.0));
}

TEST_CASE("Kruskal-Wallis with ties") {
    // frozen from scipy.stats.kruskal
    TestResult r = kruskal_wallis({{1, 2, 2, 3}, {2, 3, 3, 4, 5}, {4, 5, 5, 6}});
    CHECK(r.statistic == doctest::Approx(7.956410256410258).epsilon(1e-10));
    CHECK(r.p_value == doctest::Approx(0.018719207781263528).epsilon(1e-8));
}

TEST_CASE("Kruskal-Wallis edge cases") {
    TestResult same = kruskal_wallis({{0.3, 0.5, 0.9}, {0.3, 0.5, 0.9}});
    CHECK(std::fabs(same.statistic) <= 1e-12);
    CHECK(same.p_value == doctest::Approx(1.0));

    TestResult flat = kruskal_wallis({{0.5, 0.5}, {0.5, 0.5, 0.5}});
    CHECK(flat.degenerate);
    CHECK(flat.p_value == 1.0);

    CHECK_THROWS_AS(kruskal_wallis({{1.0, 2.0}}), InsufficientData);
    CHECK_THROWS_AS(kruskal_wallis({{1.0}, {}}), InsufficientData);
}

TEST_CASE("Conover against an independent computation") {
    // frozen from a direct scipy evaluation of the same statistic
    const std::vector<std::vector<double>> g = {
        {0.3, 0.8, 0.3, -1.3, 0.9, 0.4, -0.5, 0.6, 0.4, 0.3},
        {5.0, 5.5, 4.3, 4.8, 4.5, 5.6, 5.0, 4.7, 4.2, 4.7},
        {10.0, 9.7, 11.3, 11.0, 7.3, 8.1, 9.8, 9.6, 10.2, 10.2}};
    TestResult r = conover_posthoc(g, {"a", "b", "c"});
    CHECK(r.pairwise_statistic(0, 1) == doctest::Approx(7.44590346696928).epsilon(1e-9));
    CHECK(r.pairwise_statistic(0, 2) == doctest::Approx(14.89180693393856).epsilon(1e-9));
    CHECK(r.pairwise_p(0, 1) == doctest::Approx(5.2096323565970024e-08).epsilon(1e-5));
    CHECK(r.pairwise_p(1, 2) == doctest::Approx(5.2096323565970024e-08).epsilon(1e-5));
    CHECK(r.pairwise_p(0, 2) == doctest::Approx(1.533253577507101e-14).epsilon(1e-3));
    for (int i = 0; i < 3; ++i) {
        CHECK(r.pairwise_p(i, i) == 1.0);
        for (int j = 0; j < 3; ++j) {
            CHECK(r.pairwise_p(i, j) == r.pairwise_p(j, i));
            if (i != j) CHECK(r.pairwise_p(i, j) < 0.01);
        }
    }
}

TEST_CASE("Conover on a duplicated group") {
    TestResult r = conover_posthoc({{1, 5, 9, 2}, {1, 5, 9, 2}, {20, 21, 22, 23}});
    CHECK(r.pairwise_p(0, 1) == doctest::Approx(1.0));
    CHECK(r.pairwise_p(0, 2) < 0.05);
}

TEST_CASE("p-value adjustments") {
    const std::vector<double> p = {0.01, 0.04, 0.03, 0.2};
    const auto b = adjust_p_values(p, Adjustment::bonferroni);
    const auto h = adjust_p_values(p, Adjustment::holm);
    CHECK(b[0] == doctest::Approx(0.04));
    CHECK(b[3] == doctest::Approx(0.8));
    CHECK(adjust_p_values({0.5, 0.3}, Adjustment::bonferroni)[0] == 1.0);
    // holm: sorted 0.01*4, 0.03*3, 0.04*2, 0.2*1 with running max
    CHECK(h[0] == doctest::Approx(0.04));
    CHECK(h[2] == doctest::Approx(0.09));
    CHECK(h[1] == doctest::Approx(0.09));
    CHECK(h[3] == doctest::Approx(0.2));
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(h[i] >= p[i]);
        CHECK(h[i] <= b[i]);
    }
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 200; ++t) {
        std::vector<double> q(7);
        for (auto& x : q) x = u(rng);
        auto adj = adjust_p_values(q, Adjustment::holm);
        for (std::size_t i = 0; i < q.size(); ++i) CHECK(adj[i] >= q[i]);
    }
    CHECK(adjustment_from_string("holm") == Adjustment::holm);
    CHECK_THROWS_AS(adjustment_from_string("sidak"), ConfigError);
}

TEST_CASE("Friedman with identical orderings") {
    RankMatrix m = matrix_of({{3, 2, 1}, {3, 2, 1}, {3, 2, 1}, {3, 2, 1}});
    TestResult r = friedman(m);
    CHECK(r.statistic == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(r.df == 2.0);
    CHECK(r.p_value == doctest::Approx(0.018315638888734182).epsilon(1e-9));
    CHECK(m.average_ranks()[0] == 1.0);  // highest score ranks first
}

TEST_CASE("Friedman against scipy") {
    TestResult r = friedman(nemenyi_example());
    CHECK(r.statistic == doctest::Approx(6.24).epsilon(1e-10));
    CHECK(r.p_value == doctest::Approx(0.10049996206334051).epsilon(1e-8));
}

TEST_CASE("Friedman edge cases") {
    TestResult flat = friedman(matrix_of({{0.5, 0.5, 0.5}, {0.2, 0.2, 0.2}}));
    CHECK(flat.statistic == doctest::Approx(0.0));
    CHECK(flat.p_value == doctest::Approx(1.0));

    RankMatrix a = nemenyi_example();
    RankMatrix b = a;
    b.scores = a.scores.colwise().reverse();
    CHECK(friedman(a).statistic == doctest::Approx(friedman(b).statistic).epsilon(1e-12));

    RankMatrix bad = matrix_of({{0.1, 0.2}, {0.3, 0.4}});
    bad.scores(1, 0) = std::nan("");
    CHECK_THROWS_AS(friedman(bad), IncompleteBlock);
}

TEST_CASE("Nemenyi pairwise p against scipy") {
    // average ranks (3.1, 2.5, 2.7, 1.7); p from scipy.stats.studentized_range.sf
    TestResult r = nemenyi_posthoc(nemenyi_example());
    CHECK(r.mean_ranks[0] == doctest::Approx(3.1));
    CHECK(r.mean_ranks[3] == doctest::Approx(1.7));
    CHECK(r.pairwise_p(0, 1) == doctest::Approx(0.7263486172622506).epsilon(1e-6));
    CHECK(r.pairwise_p(0, 2) == doctest::Approx(0.8998835057401947).epsilon(1e-6));
    CHECK(r.pairwise_p(0, 3) == doctest::Approx(0.07245072458336188).epsilon(1e-6));
    CHECK(r.pairwise_p(1, 2) == doctest::Approx(0.9857232855453055).epsilon(1e-6));
    CHECK(r.pairwise_p(1, 3) == doctest::Approx(0.5083531516134434).epsilon(1e-6));
    CHECK(r.pairwise_p(2, 3) == doctest::Approx(0.30694968254063404).epsilon(1e-6));
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(std::fabs(r.pairwise_p(i, j) - r.pairwise_p(j, i)) <= 1e-12);
    CHECK(r.critical_difference.at(0.05) == doctest::Approx(1.4832311854364129).epsilon(1e-6));
}

TEST_CASE("Nemenyi with equal rank means") {
    TestResult r = nemenyi_posthoc(matrix_of({{1, 2}, {2, 1}}));
    CHECK(r.pairwise_p(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("rank statistics are invariant under monotone transforms") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<std::vector<double>> groups(3, std::vector<double>(8));
    for (auto& g : groups)
        for (auto& v : g) v = u(rng);
    auto transform = [](double x) { return std::exp(3.0 * x) - 7.0; };
    auto tg = groups;
    for (auto& g : tg)
        for (auto& v : g) v = transform(v);
    CHECK(kruskal_wallis(groups).statistic == doctest::Approx(kruskal_wallis(tg).statistic).epsilon(1e-12));
    CHECK((conover_posthoc(groups).pairwise_p - conover_posthoc(tg).pairwise_p).norm() <= 1e-12);

    RankMatrix m = nemenyi_example();
    RankMatrix tm = m;
    tm.scores = m.scores.unaryExpr([](double x) { return std::log(x + 1.0) * 5.0; });
    CHECK(friedman(m).statistic == doctest::Approx(friedman(tm).statistic).epsilon(1e-12));
    CHECK((nemenyi_posthoc(m).pairwise_p - nemenyi_posthoc(tm).pairwise_p).norm() <= 1e-12);
}

TEST_CASE("average ranks with ties") {
    Eigen::VectorXd r = average_ranks_ascending({0.3, 0.1, 0.3, 0.9});
    CHECK(r[0] == 2.5);
    CHECK(r[1] == 1.0);
    CHECK(r[2] == 2.5);
    CHECK(r[3] == 4.0);
    RankMatrix m = matrix_of({{0.5, 0.5, 0.1}});
    CHECK(m.ranks()(0, 0) == 1.5);
    CHECK(m.ranks().row(0).sum() == doctest::Approx(6.0));
}

TEST_CASE("critical difference groups") {
    CHECK(cd_groups({1.0, 1.5, 2.0}, 1.5) == std::vector<std::vector<std::size_t>>{{0, 1, 2}});
    // only 1 and 2 are within CD; 2 and 3.9 are 1.9 apart
    CHECK(cd_groups({1.0, 2.0, 3.9}, 1.5) == std::vector<std::vector<std::size_t>>{{0, 1}});
    CHECK(cd_groups({1.0, 2.0, 3.0, 3.5}, 1.2) == std::vector<std::vector<std::size_t>>{{0, 1}, {1, 2}, {2, 3}});
    CHECK(cd_groups({1.0, 2.0, 2.5, 3.5}, 1.6) == std::vector<std::vector<std::size_t>>{{0, 1, 2}, {1, 2, 3}});
    CHECK(cd_groups({2.0}, 1.0).empty());

    CdDiagram single = make_cd_diagram({"svm"}, {1.0}, 1.0);
    CHECK(single.groups.empty());
    CHECK(render_svg(single).find("<svg") == 0);

    CdDiagram d = make_cd_diagram(nemenyi_posthoc(nemenyi_example()), 0.05);
    CHECK(d.treatments.front() == "t3");  // best average rank first
    CHECK(d.ranks.front() == doctest::Approx(1.7));
    CHECK(to_json(d).at("groups").size() == d.groups.size());
}

TEST_CASE("test result json") {
    TestResult r = kruskal_wallis({{1, 2, 3}, {4, 5, 6}}, {"x", "y"});
    auto j = to_json(r);
    CHECK(j.at("method").get<std::string>() == r.method);
    CHECK(j.at("p_value").get<double>() == r.p_value);
}
