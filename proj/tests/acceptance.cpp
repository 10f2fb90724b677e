// One PASS/FAIL line per acceptance criterion; exits 1 if any fail.
// Usage: acceptance_tests [work_dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "delaycode/cli.hpp"
#include "delaycode/distributions.hpp"
#include "delaycode/evaluation.hpp"
#include "delaycode/log.hpp"
#include "delaycode/metrics.hpp"
#include "delaycode/node_model.hpp"
#include "delaycode/report.hpp"
#include "delaycode/stats.hpp"
#include "delaycode/synth.hpp"

using namespace delaycode;
namespace fs = std::filesystem;

namespace {

// tolerances
constexpr double kUniformLo = 0.20, kUniformHi = 0.30;
constexpr double kSolutionSpaceFactor = 3.0;
constexpr double kLearnedGap = 0.30;
constexpr double kUnseenDrop = 0.15;
constexpr double kStableDrift = 0.05;
constexpr double kCoverageSlack = 0.02;
constexpr double kF1OracleTol = 1e-12;
constexpr double kCdTol = 0.002;
constexpr double kSfTol = 1e-8;
constexpr double kExcludeGap = 0.08;

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
    std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    if (!ok) ++failures;
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void cli_or_die(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const auto t0 = std::chrono::steady_clock::now();
    const int code = run_cli(args, out, err);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string line;
    for (const auto& a : args) line += " " + a;
    std::cerr << "[acceptance] delaycode" << line << " (" << fmt::format("{:.0f}", secs) << " s)\n";
    if (code != 0) {
        std::cerr << err.str();
        throw std::runtime_error("delaycode" + line + " exited with " + std::to_string(code));
    }
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
    return s;
}

// brute-force macro-F1 over an explicit confusion matrix
double oracle_macro_f1(const std::vector<std::string>& t, const std::vector<std::string>& p) {
    std::set<std::string> classes(t.begin(), t.end());
    classes.insert(p.begin(), p.end());
    std::vector<std::string> cls(classes.begin(), classes.end());
    const std::size_t k = cls.size();
    std::vector<std::vector<long>> cm(k, std::vector<long>(k, 0));
    auto idx = [&](const std::string& s) {
        return static_cast<std::size_t>(std::lower_bound(cls.begin(), cls.end(), s) - cls.begin());
    };
    for (std::size_t i = 0; i < t.size(); ++i) ++cm[idx(t[i])][idx(p[i])];
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        long tp = cm[c][c], col = 0, row = 0;
        for (std::size_t j = 0; j < k; ++j) {
            col += cm[j][c];
            row += cm[c][j];
        }
        const double prec = col ? static_cast<double>(tp) / col : 0.0;
        const double rec = row ? static_cast<double>(tp) / row : 0.0;
        sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    }
    return sum / static_cast<double>(k);
}

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

void uniform_baseline() {
    GeneratorSpec s;
    s.leaves = grid_leaves(4, 1, 1);
    s.frequency = ClassFrequency::balanced;
    s.n_records = 4000;
    Corpus c;
    c.records = generate(s).records;
    ExperimentConfig cfg;
    cfg.approach = Approach::flat;
    cfg.algorithm = Algorithm::uniform;
    cfg.include_tkl = false;
    const FoldScoreTable t = run_experiment(c, cfg);
    const auto v = t.values("flat/uniform", "L1", 0);
    const double m = t.mean_of("flat/uniform", "L1", 0);
    report(v.size() == 10 && m >= kUniformLo && m <= kUniformHi, "uniform-baseline",
           fmt::format("flat uniform mean macro-F1 {:.3f} over {} folds, want [{:.2f}, {:.2f}]", m, v.size(), kUniformLo,
                       kUniformHi));
}

void conformal_validity() {
    GeneratorSpec spec;
    spec.leaves = grid_leaves(2, 2, 2);
    spec.frequency = ClassFrequency::balanced;
    spec.n_records = 9000;
    spec.w_leaf = 0.12;  // weak signal so sets are not all singletons
    spec.w_level2 = 0.05;
    spec.w_level1 = 0.05;
    spec.seed = 17;
    GeneratedCorpus g = generate(spec);
    std::mt19937_64 rng(23);
    std::shuffle(g.records.begin(), g.records.end(), rng);
    std::vector<std::string> texts, labels;
    for (std::size_t i = 0; i < 4000; ++i) {
        texts.push_back(g.records[i].normalized_text);
        labels.push_back(g.records[i].code_day0.condensed());
    }
    const NodeModel node = train_node(texts, labels, Algorithm::svm, NodeTrainConfig{}, 5);
    bool ok = true;
    std::string detail;
    for (double eps : {0.05, 0.1, 0.2}) {
        std::size_t covered = 0, n = 0;
        for (std::size_t i = 4000; i < g.records.size(); ++i, ++n)
            covered += node.predict_set(g.records[i].normalized_text, eps).contains(g.records[i].code_day0.condensed());
        const double cov = static_cast<double>(covered) / static_cast<double>(n);
        ok = ok && n == 5000 && cov >= 1.0 - eps - kCoverageSlack;
        detail += fmt::format("{}eps {:.2f} coverage {:.4f} (min {:.2f})", detail.empty() ? "" : "; ", eps, cov,
                              1.0 - eps - kCoverageSlack);
    }
    report(ok, "conformal-validity", detail + ", n_test 5000");
}

void macro_f1_oracle() {
    std::mt19937_64 rng(2024);
    const std::vector<std::string> alphabet = {"A", "B", "C", "D", "E", "F"};
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 30)(rng);
        const std::size_t k = std::uniform_int_distribution<std::size_t>(1, alphabet.size())(rng);
        std::uniform_int_distribution<std::size_t> pick(0, k - 1);
        std::vector<std::string> t, p;
        for (std::size_t i = 0; i < n; ++i) {
            t.push_back(alphabet[pick(rng)]);
            p.push_back(alphabet[pick(rng)]);
        }
        worst = std::max(worst, std::fabs(macro_f1(t, p) - oracle_macro_f1(t, p)));
    }
    report(worst <= kF1OracleTol, "macro-f1-oracle", fmt::format("max deviation {:.1e} over 1000 instances", worst));
}

void statistics_oracles() {
    std::vector<std::string> bad;
    const TestResult kw = kruskal_wallis({{1, 2, 3}, {4, 5, 6}, {7, 8, 9}});
    if (std::fabs(kw.statistic - 7.2) > 1e-9 || std::fabs(kw.p_value - 0.0273) > 5e-5) bad.push_back("kruskal-wallis");
    const TestResult fr = friedman(matrix_of({{3, 2, 1}, {3, 2, 1}, {3, 2, 1}, {3, 2, 1}}));
    if (std::fabs(fr.statistic - 8.0) > 1e-9 || std::fabs(fr.p_value - 0.0183) > 5e-5) bad.push_back("friedman");
    const double cd = nemenyi_critical_difference(4, 10, 0.05);
    if (std::fabs(cd - 1.483) > kCdTol) bad.push_back("critical difference");

    double worst = 0.0;
    for (double df : {1.0, 2.0, 3.0, 5.0, 9.0, 20.0, 57.0}) {
        boost::math::chi_squared_distribution<double> d(df);
        for (double x : {0.01, 0.3, 1.0, 2.5, 4.0, 7.2, 10.0, 25.0, 60.0, 120.0})
            worst = std::max(worst, std::fabs(dist::chi2_sf(x, df) - boost::math::cdf(boost::math::complement(d, x))));
    }
    for (double df : {1.0, 2.0, 4.0, 10.0, 27.0, 100.0, 1000.0}) {
        boost::math::students_t_distribution<double> d(df);
        for (double t : {-4.0, -1.5, -0.2, 0.0, 0.4, 1.0, 2.1, 3.5, 7.0, 15.0})
            worst = std::max(worst, std::fabs(dist::t_sf(t, df) - boost::math::cdf(boost::math::complement(d, t))));
    }
    if (worst > kSfTol) bad.push_back("survival functions");

    // monotone transforms leave every rank statistic unchanged
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<std::vector<double>> groups(3, std::vector<double>(8));
    for (auto& g : groups)
        for (auto& v : g) v = u(rng);
    auto tg = groups;
    for (auto& g : tg)
        for (auto& v : g) v = std::exp(3.0 * v) - 7.0;
    std::vector<std::vector<double>> rows;
    for (int b = 0; b < 10; ++b) {
        std::vector<double> r;
        for (int t = 0; t < 4; ++t) r.push_back(((b * 7 + t * 3) % 11) / 10.0 + t * 0.15);
        rows.push_back(r);
    }
    RankMatrix m = matrix_of(rows), tm = m;
    tm.scores = m.scores.unaryExpr([](double x) { return std::log(x + 1.0) * 5.0; });
    const bool invariant =
        std::fabs(kruskal_wallis(groups).statistic - kruskal_wallis(tg).statistic) <= 1e-12 &&
        (conover_posthoc(groups).pairwise_p - conover_posthoc(tg).pairwise_p).norm() <= 1e-12 &&
        std::fabs(friedman(m).statistic - friedman(tm).statistic) <= 1e-12 &&
        (nemenyi_posthoc(m).pairwise_p - nemenyi_posthoc(tm).pairwise_p).norm() <= 1e-12;
    if (!invariant) bad.push_back("monotone invariance");

    report(bad.empty(), "statistics-oracles",
           fmt::format("KW H {:.4f} p {:.4f}; Friedman {:.4f} p {:.4f}; CD {:.4f}; max sf deviation {:.1e}; "
                       "monotone invariance {}{}",
                       kw.statistic, kw.p_value, fr.statistic, fr.p_value, cd, worst, invariant ? "ok" : "broken",
                       bad.empty() ? "" : "; failing: " + join(bad)));
}

// level-2 codes whose day-10 labels include level-3 codes never seen at day 0
std::set<std::string> nodes_with_unseen_revisions(const std::vector<EventRecord>& records) {
    std::map<std::string, std::set<std::string>> day0, day10;
    for (const auto& r : records) {
        day0[r.code_day0.prefix(2)].insert(r.code_day0.condensed());
        if (r.code_day10.prefix(2) == r.code_day0.prefix(2)) day10[r.code_day0.prefix(2)].insert(r.code_day10.condensed());
    }
    std::set<std::string> out;
    for (const auto& [node, codes] : day10)
        for (const auto& c : codes)
            if (!day0[node].count(c)) out.insert(node);
    return out;
}

void preset_criteria(const fs::path& work) {
    const fs::path corpus = work / "preset.csv";
    cli_or_die({"synth", "--preset", "paper", "--out", corpus.string()});
    const fs::path full = work / "results", again = work / "results_again", excl = work / "results_exclude";
    cli_or_die({"evaluate", "--corpus", corpus.string(), "--approach", "both", "--algos", "uniform,rf,svm", "--seed",
                "42", "--out", full.string()});
    const FoldScoreTable t = read_scores_csv((full / "scores.csv").string());
    auto mean = [&](const std::string& config, const std::string& node, int day) {
        return t.mean_of(config, node, day);
    };

    {
        const double h = mean("hierarchical/uniform", "L3", 0), f = mean("flat/uniform", "L3", 0);
        report(h >= kSolutionSpaceFactor * f, "solution-space",
               fmt::format("level-3 uniform hierarchical {:.3f} vs flat {:.3f} (ratio {:.1f}, want >= {:.0f})", h, f,
                           h / f, kSolutionSpaceFactor));
    }
    {
        bool ok = true;
        std::string d;
        for (const char* alg : {"svm", "random_forest"}) {
            const double h = mean(std::string("hierarchical/") + alg, "L2", 0);
            const double f = mean(std::string("flat/") + alg, "L2", 0);
            ok = ok && h > f;
            d += fmt::format("{}{} hierarchical {:.3f} vs flat {:.3f}", d.empty() ? "" : "; ", alg, h, f);
        }
        report(ok, "hierarchical-over-flat", "level-2 macro-F1 " + d);
    }
    {
        bool ok = true;
        std::string d;
        for (const char* ap : {"flat", "hierarchical"}) {
            const double uni = mean(std::string(ap) + "/uniform", "L1", 0);
            for (const char* alg : {"svm", "random_forest"}) {
                const double v = mean(std::string(ap) + "/" + alg, "L1", 0);
                ok = ok && v >= uni + kLearnedGap;
                d += fmt::format("{}{}/{} {:.3f}", d.empty() ? "" : "; ", ap, alg, v);
            }
            d += fmt::format(" vs uniform {:.3f}", uni);
        }
        report(ok, "learned-over-uniform", fmt::format("level-1 macro-F1 {} (gap >= {:.2f})", d, kLearnedGap));
    }
    {
        bool ok = true;
        std::string d;
        for (const char* ap : {"flat", "hierarchical"}) {
            const std::string p = ap;
            double tkl[3], svm[3], uni[3];
            for (int l = 0; l < 3; ++l) {
                const std::string node = "L" + std::to_string(l + 1);
                tkl[l] = mean(p + "/tkl", node, 10);
                svm[l] = mean(p + "/svm", node, 10);
                uni[l] = mean(p + "/uniform", node, 10);
                ok = ok && tkl[l] > svm[l] && svm[l] >= uni[l];
            }
            ok = ok && tkl[0] > tkl[1] && tkl[1] > tkl[2];
            d += fmt::format("{}{} tkl {:.3f}/{:.3f}/{:.3f} svm {:.3f}/{:.3f}/{:.3f} uniform {:.3f}/{:.3f}/{:.3f}",
                             d.empty() ? "" : "; ", ap, tkl[0], tkl[1], tkl[2], svm[0], svm[1], svm[2], uni[0], uni[1],
                             uni[2]);
        }
        report(ok, "tkl-ceiling", "day-10 levels 1/2/3: " + d);
    }
    {
        // the corpus as evaluate loaded it: min-label-count 100 on day 0
        const Corpus c = load_corpus(corpus.string());
        const std::set<std::string> unseen = nodes_with_unseen_revisions(c.records);
        const std::string cfg = "hierarchical/svm";
        bool ok = !unseen.empty();
        std::string d;
        double worst_other = 0.0;
        std::string worst_node;
        std::set<std::string> nodes;
        for (const auto& r : t.rows)
            if (r.config == cfg && r.node.find('/') != std::string::npos) nodes.insert(r.node);
        for (const auto& node : nodes) {
            const double drop = mean(cfg, node, 0) - mean(cfg, node, 10);
            const std::string code = node.substr(3);
            if (node.rfind("L3/", 0) == 0 && unseen.count(code)) {
                ok = ok && drop >= kUnseenDrop;
                d += fmt::format("{}{} {:.3f} -> {:.3f}", d.empty() ? "" : "; ", code, mean(cfg, node, 0),
                                 mean(cfg, node, 10));
            } else if (std::fabs(drop) > worst_other) {
                worst_other = std::fabs(drop);
                worst_node = node;
            }
        }
        ok = ok && worst_other <= kStableDrift;
        report(ok, "unseen-class-degradation",
               fmt::format("svm day 0 -> day 10 {} (drop >= {:.2f}); other nodes max drift {:.3f} at {} (<= {:.2f})",
                           d.empty() ? "no node with unseen day-10 codes" : d, kUnseenDrop, worst_other, worst_node,
                           kStableDrift));
    }

    cli_or_die({"evaluate", "--corpus", corpus.string(), "--approach", "both", "--algos", "uniform,rf,svm", "--seed",
                "42", "--out", again.string()});
    {
        const std::string a = read_all(full / "scores.csv"), b = read_all(again / "scores.csv");
        report(!a.empty() && a == b, "determinism",
               fmt::format("scores.csv of two full evaluate runs {} ({} bytes)", a == b ? "identical" : "differ",
                           a.size()));
    }

    cli_or_die({"evaluate", "--corpus", corpus.string(), "--approach", "both", "--algos", "svm", "--seed", "42",
                "--exclude-numeric-only", "--out", excl.string()});
    {
        const FoldScoreTable e = read_scores_csv((excl / "scores.csv").string());
        bool ok = true;
        std::string d;
        for (const char* ap : {"flat", "hierarchical"}) {
            const std::string cfg = std::string(ap) + "/svm";
            const double with = mean(cfg, "L1", 0), without = e.mean_of(cfg, "L1", 0);
            ok = ok && std::fabs(with - without) < kExcludeGap;
            d += fmt::format("{}{} {:.3f} -> {:.3f}", d.empty() ? "" : "; ", ap, with, without);
        }
        report(ok, "exclude-numeric-only", "level-1 svm mean F1 " + d + fmt::format(" (|change| < {:.2f})", kExcludeGap));
    }
}

}  // namespace

int main(int argc, char** argv) {
    log::init_from_env();
    const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "delaycode_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        uniform_baseline();
        conformal_validity();
        macro_f1_oracle();
        statistics_oracles();
        preset_criteria(work);
    } catch (const std::exception& e) {
        std::cout << "FAIL acceptance run aborted: " << e.what() << std::endl;
        ++failures;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << fmt::format("{} failing, {:.0f} s", failures, secs) << std::endl;
    if (argc <= 1) fs::remove_all(work);
    return failures == 0 ? 0 : 1;
}
