#include "delaycode/evaluation.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "delaycode/error.hpp"
#include "delaycode/log.hpp"
#include "delaycode/metrics.hpp"

namespace delaycode {

std::string to_string(Approach a) { return a == Approach::flat ? "flat" : "hierarchical"; }

Approach approach_from_string(const std::string& s) {
    if (s == "flat") return Approach::flat;
    if (s == "hierarchical" || s == "hier") return Approach::hierarchical;
    throw ConfigError("unknown approach '" + s + "'");
}

void ExperimentConfig::validate() const {
    if (n_folds < 2) throw ConfigError("n_folds must be at least 2, got " + std::to_string(n_folds));
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    if (targets.empty()) throw ConfigError("no evaluation targets");
    if (jobs < 1) throw ConfigError("jobs must be positive");
}

std::string config_id(Approach approach, Algorithm algorithm) { return to_string(approach) + "/" + to_string(algorithm); }
std::string tkl_config_id(Approach approach) { return to_string(approach) + "/tkl"; }

void FoldScoreTable::sort() { std::sort(rows.begin(), rows.end()); }

void FoldScoreTable::append(const FoldScoreTable& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
    sort();
}

std::vector<ScoreAggregate> FoldScoreTable::aggregates() const {
    std::map<std::tuple<std::string, std::string, int>, std::vector<double>> groups;
    for (const auto& r : rows) groups[{r.config, r.node, r.day}].push_back(r.f1);
    std::vector<ScoreAggregate> out;
    for (const auto& [key, v] : groups)
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v.size(), mean(v), sample_std(v)});
    return out;
}

std::vector<double> FoldScoreTable::values(const std::string& config, const std::string& node, int day) const {
    std::vector<std::pair<int, double>> v;
    for (const auto& r : rows)
        if (r.config == config && r.node == node && r.day == day) v.emplace_back(r.fold, r.f1);
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (const auto& p : v) out.push_back(p.second);
    return out;
}

double FoldScoreTable::mean_of(const std::string& config, const std::string& node, int day) const {
    const auto v = values(config, node, day);
    if (v.empty()) throw DataError("no scores for " + config + " " + node + " day " + std::to_string(day));
    return mean(v);
}

std::vector<int> stratified_folds(const std::vector<std::string>& labels, int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw ConfigError("n_folds must be at least 2");
    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
    std::mt19937_64 rng(mix_seed(seed, hash_string("folds")));
    std::vector<int> fold(labels.size(), 0);
    std::size_t position = 0;
    for (auto& [label, rows] : by_class) {
        std::shuffle(rows.begin(), rows.end(), rng);
        for (std::size_t r : rows) fold[r] = static_cast<int>(position++ % static_cast<std::size_t>(n_folds));
    }
    return fold;
}

std::vector<std::string> evaluated_nodes(const CodeHierarchy& h) {
    std::vector<std::string> out{""};
    for (const auto& l1 : h.root.children) {
        if (l1.children.size() >= 2) out.push_back(l1.label);
        for (const auto& l2 : l1.children)
            if (l2.children.size() >= 2) out.push_back(l2.label);
    }
    return out;
}

namespace {

int day_number(LabelDay d) { return d == LabelDay::day0 ? 0 : 10; }

std::string node_id(const std::string& prefix) {
    if (prefix.empty()) return "L1";
    return (prefix.size() == 1 ? "L2/" : "L3/") + prefix;
}

int node_level(const std::string& prefix) { return prefix.empty() ? 1 : (prefix.size() == 1 ? 2 : 3); }

/// Prefix of the node's parent path a code must match to belong to the node.
bool under(const AttributionCode& code, const std::string& prefix) {
    return prefix.empty() || code.prefix(node_level(prefix) - 1) == prefix;
}

std::string day10_label(const AttributionCode& code, const std::string& prefix) {
    return under(code, prefix) ? code.prefix(node_level(prefix)) : std::string(kOutsideNode);
}

struct Slice {
    std::vector<std::string> truth0, truth10, pred;
};

double slice_f1(const Slice& s, LabelDay day) {
    if (s.pred.empty()) return 0.0;
    return day == LabelDay::day0 ? macro_f1(s.truth0, s.pred) : macro_f1(s.truth10, s.pred, kOutsideNode);
}

/// Point (and abstention) decision for a node, following the evaluation rules.
struct Decider {
    const NodeModel* node;
    bool sample;
    double epsilon;
    bool abstain;
    std::mt19937_64 rng;

    /// Empty when the instance is withheld.
    std::optional<std::string> operator()(const std::string& text) {
        const ScoredPrediction sp = node->scores(text);
        const PredictionSet ps = prediction_set_from_scores(node->calibrated, sp.scores, epsilon);
        if (abstain) {
            if (ps.set.size() != 1) return std::nullopt;
            return ps.set.front();
        }
        if (sample) {
            const auto& u = std::get<UniformModel>(node->calibrated.base);
            return node->labels[static_cast<std::size_t>(sample_label(u, rng))];
        }
        return ps.point;
    }
};

Decider make_decider(const NodeModel& node, const ExperimentConfig& c, int fold, const std::string& path) {
    const bool sample = std::holds_alternative<UniformModel>(node.calibrated.base);
    std::mt19937_64 rng(mix_seed(mix_seed(c.seed, static_cast<std::uint64_t>(fold) + 1), hash_string("eval:" + path)));
    return Decider{&node, sample, c.epsilon, c.abstain, rng};
}

void push_scores(FoldScoreTable& t, const std::string& config, const std::string& node, int fold,
                 const std::vector<LabelDay>& days, const Slice& s) {
    for (LabelDay d : days) t.rows.push_back({config, node, day_number(d), fold, slice_f1(s, d)});
}

void push_level_means(FoldScoreTable& t, const std::string& config, int fold, const std::vector<LabelDay>& days,
                      const std::map<std::string, Slice>& slices) {
    for (int level : {2, 3}) {
        for (LabelDay d : days) {
            std::vector<double> v;
            for (const auto& [prefix, s] : slices)
                if (node_level(prefix) == level) v.push_back(slice_f1(s, d));
            if (!v.empty()) t.rows.push_back({config, "L" + std::to_string(level), day_number(d), fold, mean(v)});
        }
    }
}

std::vector<EventRecord> pick(const std::vector<EventRecord>& records, const std::vector<std::size_t>& idx) {
    std::vector<EventRecord> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(records[i]);
    return out;
}

void report_traces(const ExperimentHooks& hooks, std::mutex& mu, int fold, const std::string& config,
                   const NodeTraceMap& traces, const std::vector<std::size_t>& train_rows) {
    if (!hooks.audit) return;
    std::lock_guard lock(mu);
    for (const auto& [path, trace] : traces) {
        for (const auto& [stage, local] : {std::pair{"proper", &trace.proper}, std::pair{"calibration", &trace.calibration}}) {
            std::vector<std::size_t> rows;
            rows.reserve(local->size());
            for (std::size_t i : *local) rows.push_back(train_rows[i]);
            hooks.audit(AuditEvent{fold, config, path, stage, &rows});
        }
    }
}

std::map<std::string, Slice> hierarchical_slices(const std::vector<std::string>& nodes, const Corpus& corpus,
                                                 const std::vector<std::size_t>& test_rows) {
    std::map<std::string, Slice> slices;
    for (const auto& prefix : nodes) {
        Slice& s = slices[prefix];
        for (std::size_t i : test_rows) {
            const auto& r = corpus.records[i];
            if (!under(r.code_day0, prefix)) continue;
            s.truth0.push_back(r.code_day0.prefix(node_level(prefix)));
            s.truth10.push_back(day10_label(r.code_day10, prefix));
        }
    }
    return slices;
}

FoldScoreTable hierarchical_fold(const Corpus& corpus, const ExperimentConfig& c, int fold,
                                 const std::vector<std::size_t>& train_rows, const std::vector<std::size_t>& test_rows,
                                 const std::vector<std::string>& nodes, const ExperimentHooks& hooks,
                                 std::mutex& mu) {
    const std::string id = config_id(c.approach, c.algorithm);
    HierarchyConfig hc = c.model;
    hc.seed = mix_seed(c.seed, static_cast<std::uint64_t>(fold));
    NodeTraceMap traces;
    const HierarchicalModel model =
        train_hierarchical(pick(corpus.records, train_rows), c.algorithm, hc, hooks.audit ? &traces : nullptr);
    report_traces(hooks, mu, fold, id, traces, train_rows);

    FoldScoreTable t;
    std::map<std::string, Slice> kept;
    for (const auto& prefix : nodes) {
        const NodeModel* node = nullptr;
        if (prefix.empty()) {
            node = &model.root;
        } else if (prefix.size() == 1) {
            auto it = model.level2.find(prefix);
            if (it != model.level2.end()) node = &it->second;
        } else {
            auto it = model.level3.find(prefix);
            if (it != model.level3.end()) node = &it->second;
        }
        if (!node) throw InsufficientData("fold " + std::to_string(fold) + " trained no model for node " + node_id(prefix));
        Decider decide = make_decider(*node, c, fold, node_path(prefix));
        Slice s;
        std::size_t seen = 0;
        for (std::size_t i : test_rows) {
            const auto& r = corpus.records[i];
            if (!under(r.code_day0, prefix)) continue;
            ++seen;
            auto p = decide(r.normalized_text);
            if (!p) continue;
            s.truth0.push_back(r.code_day0.prefix(node_level(prefix)));
            s.truth10.push_back(day10_label(r.code_day10, prefix));
            s.pred.push_back(std::move(*p));
        }
        if (seen == 0)
            throw InsufficientData("fold " + std::to_string(fold) + " has no test rows for node " + node_id(prefix));
        push_scores(t, id, node_id(prefix), fold, c.targets, s);
        kept.emplace(prefix, std::move(s));
    }
    push_level_means(t, id, fold, c.targets, kept);
    return t;
}

FoldScoreTable flat_fold(const Corpus& corpus, const ExperimentConfig& c, int fold,
                         const std::vector<std::size_t>& train_rows, const std::vector<std::size_t>& test_rows,
                         const ExperimentHooks& hooks, std::mutex& mu) {
    const std::string id = config_id(c.approach, c.algorithm);
    HierarchyConfig hc = c.model;
    hc.seed = mix_seed(c.seed, static_cast<std::uint64_t>(fold));
    NodeTraceMap traces;
    const FlatModel model = train_flat(pick(corpus.records, train_rows), c.algorithm, hc, hooks.audit ? &traces : nullptr);
    report_traces(hooks, mu, fold, id, traces, train_rows);

    Decider decide = make_decider(model.node, c, fold, "flat");
    std::array<Slice, 3> slices;
    for (std::size_t i : test_rows) {
        const auto& r = corpus.records[i];
        auto p = decide(r.normalized_text);
        if (!p) continue;
        const AttributionCode pred = parse_code(*p);
        for (int level = 1; level <= 3; ++level) {
            Slice& s = slices[static_cast<std::size_t>(level - 1)];
            s.truth0.push_back(r.code_day0.prefix(level));
            s.truth10.push_back(r.code_day10.prefix(level));
            s.pred.push_back(pred.prefix(level));
        }
    }
    FoldScoreTable t;
    for (int level = 1; level <= 3; ++level)
        push_scores(t, id, "L" + std::to_string(level), fold, c.targets, slices[static_cast<std::size_t>(level - 1)]);
    return t;
}

FoldScoreTable tkl_fold(const Corpus& corpus, const ExperimentConfig& c, int fold,
                        const std::vector<std::size_t>& test_rows, const std::vector<std::string>& nodes) {
    const std::string id = tkl_config_id(c.approach);
    FoldScoreTable t;
    if (c.approach == Approach::flat) {
        for (int level = 1; level <= 3; ++level) {
            Slice s;
            for (std::size_t i : test_rows) {
                s.truth10.push_back(corpus.records[i].code_day10.prefix(level));
                s.pred.push_back(corpus.records[i].code_day0.prefix(level));
            }
            const double f1 = macro_f1(s.truth10, s.pred);
            for (LabelDay d : c.targets) t.rows.push_back({id, "L" + std::to_string(level), day_number(d), fold, f1});
        }
        return t;
    }
    // the ceiling is the same for either label day: day-0 codes scored against day 10
    std::map<int, std::vector<double>> by_level;
    for (const auto& [prefix, sl] : hierarchical_slices(nodes, corpus, test_rows)) {
        if (sl.truth0.empty())
            throw InsufficientData("fold " + std::to_string(fold) + " has no test rows for node " + node_id(prefix));
        const double f1 = macro_f1(sl.truth10, sl.truth0, kOutsideNode);
        by_level[node_level(prefix)].push_back(f1);
        for (LabelDay d : c.targets) t.rows.push_back({id, node_id(prefix), day_number(d), fold, f1});
    }
    for (int level : {2, 3}) {
        if (by_level[level].empty()) continue;
        for (LabelDay d : c.targets)
            t.rows.push_back({id, "L" + std::to_string(level), day_number(d), fold, mean(by_level[level])});
    }
    return t;
}

}  // namespace

FoldScoreTable run_experiment(const Corpus& corpus, const ExperimentConfig& config, const ExperimentHooks& hooks) {
    config.validate();
    if (corpus.empty()) throw EmptyCorpus("cannot evaluate an empty corpus");

    std::vector<std::string> labels;
    labels.reserve(corpus.size());
    for (const auto& r : corpus.records) labels.push_back(r.code_day0.prefix(3));
    const std::vector<int> fold_of = stratified_folds(labels, config.n_folds, config.seed);
    const std::vector<std::string> nodes = evaluated_nodes(build_hierarchy(corpus));

    log::info("evaluating {} over {} rows, {} folds, seed {}", config_id(config.approach, config.algorithm),
              corpus.size(), config.n_folds, config.seed);

    std::vector<FoldScoreTable> per_fold(static_cast<std::size_t>(config.n_folds));
    std::mutex mu;
    auto run_fold = [&](int fold) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < corpus.size(); ++i) (fold_of[i] == fold ? test_rows : train_rows).push_back(i);
        if (test_rows.empty()) throw InsufficientData("fold " + std::to_string(fold) + " has no test rows");
        if (hooks.on_fold) {
            std::lock_guard lock(mu);
            hooks.on_fold(fold, test_rows);
        }
        FoldScoreTable t = config.approach == Approach::hierarchical
                               ? hierarchical_fold(corpus, config, fold, train_rows, test_rows, nodes, hooks, mu)
                               : flat_fold(corpus, config, fold, train_rows, test_rows, hooks, mu);
        if (config.include_tkl) {
            FoldScoreTable k = tkl_fold(corpus, config, fold, test_rows, nodes);
            t.rows.insert(t.rows.end(), k.rows.begin(), k.rows.end());
        }
        log::debug("fold {} done", fold);
        per_fold[static_cast<std::size_t>(fold)] = std::move(t);
    };

    const int jobs = std::min(config.jobs, config.n_folds);
    if (jobs <= 1) {
        for (int f = 0; f < config.n_folds; ++f) run_fold(f);
    } else {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(config.n_folds));
        std::atomic<int> next{0};
        std::vector<std::thread> workers;
        for (int w = 0; w < jobs; ++w) {
            workers.emplace_back([&] {
                for (int f = next++; f < config.n_folds; f = next++) {
                    try {
                        run_fold(f);
                    } catch (...) {
                        errors[static_cast<std::size_t>(f)] = std::current_exception();
                    }
                }
            });
        }
        for (auto& w : workers) w.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    FoldScoreTable out;
    for (auto& t : per_fold) out.rows.insert(out.rows.end(), t.rows.begin(), t.rows.end());
    out.sort();
    return out;
}

std::vector<double> tkl_score(const Corpus& corpus, int level, int n_folds, std::uint64_t seed) {
    if (level < 1 || level > 3) throw ConfigError("level must be 1, 2 or 3");
    std::vector<std::string> labels;
    for (const auto& r : corpus.records) labels.push_back(r.code_day0.prefix(3));
    const std::vector<int> fold_of = stratified_folds(labels, n_folds, seed);
    std::vector<double> out;
    for (int f = 0; f < n_folds; ++f) {
        std::vector<std::string> truth, pred;
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            if (fold_of[i] != f) continue;
            truth.push_back(corpus.records[i].code_day10.prefix(level));
            pred.push_back(corpus.records[i].code_day0.prefix(level));
        }
        out.push_back(truth.empty() ? 0.0 : macro_f1(truth, pred));
    }
    return out;
}

}  // namespace delaycode
