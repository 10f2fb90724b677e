#include "delaycode/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "delaycode/cd_diagram.hpp"
#include "delaycode/error.hpp"
#include "delaycode/evaluation.hpp"
#include "delaycode/log.hpp"
#include "delaycode/report.hpp"
#include "delaycode/service.hpp"
#include "delaycode/stats.hpp"
#include "delaycode/synth.hpp"

namespace delaycode {

namespace fs = std::filesystem;

namespace {

struct CorpusFlags {
    std::string path;
    std::size_t min_label_count = 100;
    bool exclude_numeric_only = false;
    std::string count_on = "day0";
};

void add_corpus_flags(CLI::App* app, CorpusFlags& f) {
    app->add_option("--corpus", f.path, "corpus CSV")->required();
    app->add_option("--min-label-count", f.min_label_count, "drop day-0 labels with fewer rows")->capture_default_str();
    app->add_flag("--exclude-numeric-only", f.exclude_numeric_only, "drop rows whose text is only train numbers");
    app->add_option("--count-labels-on", f.count_on, "label day for the count filter")
        ->check(CLI::IsMember({"day0", "day10"}))
        ->capture_default_str();
}

Corpus load(const CorpusFlags& f) {
    LoadOptions o;
    o.min_label_count = f.min_label_count;
    o.exclude_numeric_only = f.exclude_numeric_only;
    o.count_labels_on = f.count_on == "day10" ? LabelDay::day10 : LabelDay::day0;
    Corpus c = load_corpus(f.path, o);
    const auto& p = c.provenance;
    log::info("loaded {} rows from {} ({} read, {} duplicates, {} empty, {} numeric-only, {} rare-label dropped)",
              c.size(), p.source, p.rows_read, p.duplicates_dropped, p.empty_text_dropped, p.numeric_only_dropped,
              p.rare_label_dropped);
    return c;
}

struct ModelFlags {
    int rf_trees = 100;
    int rf_max_depth = 0;
    int rf_features = 0;
    double svm_c = 1.0;
    int svm_epochs = 300;
    std::string uniform_mode = "uniform";
    std::string tfidf_scope = "per_node";
    std::size_t max_features = 1000;
    std::string stopwords;
};

void add_model_flags(CLI::App* app, ModelFlags& f) {
    app->add_option("--rf-trees", f.rf_trees, "random forest size")->capture_default_str();
    app->add_option("--rf-max-depth", f.rf_max_depth, "0 = unlimited")->capture_default_str();
    app->add_option("--rf-features", f.rf_features, "features per split, 0 = sqrt(d)")->capture_default_str();
    app->add_option("--svm-c", f.svm_c, "SVM regularisation constant")->capture_default_str();
    app->add_option("--svm-epochs", f.svm_epochs, "SVM optimiser epochs")->capture_default_str();
    app->add_option("--uniform-mode", f.uniform_mode, "uniform or prior")
        ->check(CLI::IsMember({"uniform", "prior"}))
        ->capture_default_str();
    app->add_option("--tfidf-scope", f.tfidf_scope, "per_node or global")
        ->check(CLI::IsMember({"per_node", "global"}))
        ->capture_default_str();
    app->add_option("--max-features", f.max_features, "TF-IDF vocabulary size")->capture_default_str();
    app->add_option("--stopwords", f.stopwords, "stopword file (default: bundled Swedish list)");
}

HierarchyConfig hierarchy_config(const ModelFlags& f, std::uint64_t seed) {
    HierarchyConfig c;
    c.seed = seed;
    c.node.tfidf.max_features = f.max_features;
    c.node.tfidf.stopwords = f.stopwords.empty() ? default_stopwords() : load_stopwords(f.stopwords);
    c.node.models.forest.n_trees = f.rf_trees;
    c.node.models.forest.max_depth = f.rf_max_depth;
    c.node.models.forest.features_per_split = f.rf_features;
    c.node.models.svm.C = f.svm_c;
    c.node.models.svm.max_epochs = f.svm_epochs;
    c.node.models.uniform_mode = f.uniform_mode == "prior" ? UniformMode::prior : UniformMode::uniform;
    c.tfidf_scope = f.tfidf_scope == "global" ? TfidfScope::global : TfidfScope::per_node;
    if (c.node.tfidf.max_features == 0) throw ConfigError("--max-features must be positive");
    if (f.rf_trees < 1) throw ConfigError("--rf-trees must be positive");
    if (!(f.svm_c > 0.0)) throw ConfigError("--svm-c must be positive");
    return c;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void write_file(const fs::path& p, const std::string& content) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write '" + p.string() + "'");
    out << content;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string preset = "paper";
    std::string spec_path;
    std::string grid;
    std::size_t n = 0;
    std::uint64_t seed = 42;
    bool seed_set = false;
    std::string out = "corpus.csv";
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    GeneratorSpec spec;
    if (!a.spec_path.empty()) {
        std::ifstream in(a.spec_path);
        if (!in) throw DataError("cannot read spec '" + a.spec_path + "'");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw SpecError(std::string("malformed spec JSON: ") + e.what());
        }
        spec = generator_spec_from_json(j);
    } else if (!a.grid.empty()) {
        int x = 0, y = 0, z = 0;
        char c1 = 0, c2 = 0;
        std::istringstream ss(a.grid);
        if (!(ss >> x >> c1 >> y >> c2 >> z) || c1 != 'x' || c2 != 'x') throw ConfigError("--grid expects AxBxC");
        spec.name = "grid-" + a.grid;
        spec.leaves = grid_leaves(x, y, z);
        spec.frequency = ClassFrequency::balanced;
    } else if (a.preset == "paper") {
        spec = paper_preset();
    } else {
        throw ConfigError("unknown preset '" + a.preset + "'");
    }
    if (a.n) spec.n_records = a.n;
    if (a.seed_set) spec.seed = a.seed;
    log::info("generating {} rows with spec '{}' and seed {}", spec.n_records, spec.name, spec.seed);
    const GeneratedCorpus g = generate(spec);
    const fs::path path(a.out);
    write_file(path, corpus_csv_string(g.records));
    fs::path spec_path = path;
    spec_path.replace_extension(".spec.json");
    write_file(spec_path, to_json(spec).dump(2) + "\n");
    out << "wrote " << g.records.size() << " rows to " << path.string() << " (" << g.revisions.size()
        << " revisions, " << g.numeric_only_rows.size() << " numeric-only)\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    CorpusFlags corpus;
    ModelFlags model;
    std::string approach = "hierarchical";
    std::string algo = "svm";
    std::uint64_t seed = 42;
    std::string out = "bundle";
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
    const Approach approach = approach_from_string(a.approach);
    const Algorithm algorithm = algorithm_from_string(a.algo);
    const HierarchyConfig hc = hierarchy_config(a.model, a.seed);
    const Corpus corpus = load(a.corpus);
    log::info("training {} with seed {}", config_id(approach, algorithm), a.seed);
    if (approach == Approach::hierarchical) {
        save_bundle(train_hierarchical(corpus.records, algorithm, hc), a.out);
    } else {
        save_bundle(train_flat(corpus.records, algorithm, hc), a.out);
    }
    out << "wrote bundle " << load_bundle(a.out).model_version << " to " << a.out << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    CorpusFlags corpus;
    ModelFlags model;
    std::string approach = "both";
    std::string algos = "uniform,rf,svm";
    int folds = 10;
    std::uint64_t seed = 42;
    double epsilon = 0.05;
    bool abstain = false;
    std::string out;
    int jobs = 1;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
    std::vector<Approach> approaches;
    if (a.approach == "both") {
        approaches = {Approach::flat, Approach::hierarchical};
    } else {
        approaches = {approach_from_string(a.approach)};
    }
    std::vector<Algorithm> algorithms;
    for (const auto& s : split_list(a.algos)) algorithms.push_back(algorithm_from_string(s));
    if (algorithms.empty()) throw ConfigError("--algos is empty");
    const HierarchyConfig hc = hierarchy_config(a.model, a.seed);
    const std::string out_dir =
        !a.out.empty() ? a.out : (a.corpus.exclude_numeric_only ? "results_exclude_numeric_only" : "results");

    std::vector<ExperimentConfig> configs;
    for (Approach ap : approaches) {
        bool first = true;
        for (Algorithm al : algorithms) {
            ExperimentConfig c;
            c.approach = ap;
            c.algorithm = al;
            c.n_folds = a.folds;
            c.seed = a.seed;
            c.epsilon = a.epsilon;
            c.abstain = a.abstain;
            c.exclude_numeric_only = a.corpus.exclude_numeric_only;
            c.include_tkl = first;
            c.model = hc;
            c.jobs = a.jobs;
            c.validate();
            configs.push_back(c);
            first = false;
        }
    }
    const Corpus corpus = load(a.corpus);

    nlohmann::json run = {{"corpus", a.corpus.path},
                          {"rows", corpus.size()},
                          {"min_label_count", a.corpus.min_label_count},
                          {"exclude_numeric_only", a.corpus.exclude_numeric_only},
                          {"folds", a.folds},
                          {"seed", a.seed},
                          {"epsilon", a.epsilon},
                          {"abstain", a.abstain},
                          {"models", to_json(hc.node.models)},
                          {"tfidf_scope", a.model.tfidf_scope},
                          {"max_features", a.model.max_features}};
    log::info("resolved evaluation config: {}", run.dump());

    FoldScoreTable table;
    for (const auto& c : configs) table.append(run_experiment(corpus, c));
    render_report(table, out_dir, run);
    out << "wrote " << table.rows.size() << " scores to " << (fs::path(out_dir) / "scores.csv").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct StatsArgs {
    std::string scores;
    int level = 1;
    double alpha = 0.05;
    std::string approach = "hierarchical";
    std::string adjust = "none";
    std::string out = "stats";
};

int cmd_stats(const StatsArgs& a, std::ostream& out) {
    if (!(a.alpha == 0.05 || a.alpha == 0.10)) throw ConfigError("--alpha must be 0.05 or 0.10");
    const Adjustment adjust = adjustment_from_string(a.adjust);
    const FoldScoreTable table = read_scores_csv(a.scores);
    const std::string level = "L" + std::to_string(a.level);
    nlohmann::json result = {{"level", a.level}, {"alpha", a.alpha}, {"scores", a.scores}};

    if (a.level == 1) {
        // pooled per-fold scores of every config at level 1, both label days
        std::map<std::string, std::vector<double>> groups;
        for (const auto& r : table.rows)
            if (r.node == level) groups[r.config].push_back(r.f1);
        if (groups.size() < 2) throw ConfigError("level-1 tests need at least two configs in the scores file");
        std::vector<std::vector<double>> values;
        std::vector<std::string> names;
        for (auto& [name, v] : groups) {
            names.push_back(name);
            values.push_back(v);
        }
        result["kruskal_wallis"] = to_json(kruskal_wallis(values, names));
        result["conover"] = to_json(conover_posthoc(values, names, adjust));
    } else {
        // blocks are (code, day) cells; treatments are the approach's configs, scored by fold mean
        const std::string prefix = level + "/";
        const std::string ap = to_string(approach_from_string(a.approach)) + "/";
        std::map<std::pair<std::string, int>, std::map<std::string, double>> cells;
        std::set<std::string> configs;
        for (const auto& agg : table.aggregates()) {
            if (agg.node.rfind(prefix, 0) != 0 || agg.config.rfind(ap, 0) != 0) continue;
            cells[{agg.node.substr(prefix.size()), agg.day}][agg.config] = agg.mean;
            configs.insert(agg.config);
        }
        if (configs.size() < 2) throw ConfigError("Friedman needs at least two configs with per-code scores");
        if (cells.size() < 2) throw DataError("Friedman needs at least two (code, day) blocks");
        RankMatrix m;
        m.treatments.assign(configs.begin(), configs.end());
        m.scores.resize(static_cast<Eigen::Index>(cells.size()), static_cast<Eigen::Index>(configs.size()));
        Eigen::Index b = 0;
        for (const auto& [key, row] : cells) {
            m.blocks.push_back(key.first + "@day" + std::to_string(key.second));
            Eigen::Index t = 0;
            for (const auto& c : configs) {
                auto it = row.find(c);
                if (it == row.end()) throw IncompleteBlock("block " + m.blocks.back() + " has no score for " + c);
                m.scores(b, t++) = it->second;
            }
            ++b;
        }
        const TestResult nemenyi = nemenyi_posthoc(m);
        result["friedman"] = to_json(friedman(m));
        result["nemenyi"] = to_json(nemenyi);
        result["blocks"] = m.blocks;
        const CdDiagram cd = make_cd_diagram(nemenyi, a.alpha);
        result["cd_diagram"] = to_json(cd);
        write_file(fs::path(a.out) / "cd.svg", render_svg(cd));
    }
    write_file(fs::path(a.out) / "stats.json", result.dump(2) + "\n");
    out << "wrote " << (fs::path(a.out) / "stats.json").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct ReportArgs {
    std::string scores;
    std::string out = "report";
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
    const FoldScoreTable table = read_scores_csv(a.scores);
    render_report(table, a.out);
    out << report_text(table);
    return 0;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
    std::string bundle;
    int port = 8080;
    std::string host = "127.0.0.1";
    std::string feedback_log = "feedback.jsonl";
};

int cmd_serve(const ServeArgs& a) {
    if (a.port < 0 || a.port > 65535) throw ConfigError("--port out of range");
    ServiceConfig sc;
    sc.feedback_log = a.feedback_log;
    Service service(sc);
    service.load(a.bundle);
    service.listen(a.host, a.port);
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    log::init_from_env();
    CLI::App app{"Delay attribution code classification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "delaycode 1.0");

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "generate a synthetic corpus");
    s->add_option("--preset", synth.preset, "paper")->capture_default_str();
    s->add_option("--spec", synth.spec_path, "generator spec JSON");
    s->add_option("--grid", synth.grid, "balanced AxBxC tree instead of a preset");
    s->add_option("--n", synth.n, "number of rows");
    s->add_option("--seed", synth.seed, "generator seed")->each([&](const std::string&) { synth.seed_set = true; });
    s->add_option("--out", synth.out, "corpus CSV path")->capture_default_str();

    TrainArgs train;
    auto* t = app.add_subcommand("train", "train a model bundle");
    add_corpus_flags(t, train.corpus);
    add_model_flags(t, train.model);
    t->add_option("--approach", train.approach, "flat or hierarchical")->capture_default_str();
    t->add_option("--algo", train.algo, "uniform, rf or svm")->capture_default_str();
    t->add_option("--seed", train.seed)->capture_default_str();
    t->add_option("--out", train.out, "bundle directory")->capture_default_str();

    EvaluateArgs ev;
    auto* e = app.add_subcommand("evaluate", "cross-conformal evaluation");
    add_corpus_flags(e, ev.corpus);
    add_model_flags(e, ev.model);
    e->add_option("--approach", ev.approach, "flat, hierarchical or both")
        ->check(CLI::IsMember({"flat", "hierarchical", "both"}))
        ->capture_default_str();
    e->add_option("--algos", ev.algos, "comma-separated algorithms")->capture_default_str();
    e->add_option("--folds", ev.folds)->capture_default_str();
    e->add_option("--seed", ev.seed)->capture_default_str();
    e->add_option("--epsilon", ev.epsilon, "conformal significance level")->capture_default_str();
    e->add_flag("--abstain", ev.abstain, "score only instances with a singleton prediction set");
    e->add_option("--out", ev.out, "output directory");
    e->add_option("--jobs", ev.jobs, "parallel folds")->capture_default_str();

    StatsArgs st;
    auto* sa = app.add_subcommand("stats", "significance tests over a scores file");
    sa->add_option("--scores", st.scores, "scores.csv")->required();
    sa->add_option("--level", st.level)->check(CLI::Range(1, 3))->capture_default_str();
    sa->add_option("--alpha", st.alpha)->capture_default_str();
    sa->add_option("--approach", st.approach, "approach whose per-code scores form the blocks (levels 2-3)")
        ->capture_default_str();
    sa->add_option("--adjust", st.adjust, "none, bonferroni or holm")->capture_default_str();
    sa->add_option("--out", st.out, "output directory")->capture_default_str();

    ReportArgs rp;
    auto* r = app.add_subcommand("report", "re-render the report from scores.csv");
    r->add_option("--scores", rp.scores)->required();
    r->add_option("--out", rp.out)->capture_default_str();

    ServeArgs sv;
    auto* se = app.add_subcommand("serve", "serve a bundle over HTTP");
    se->add_option("--bundle", sv.bundle)->required();
    se->add_option("--port", sv.port)->capture_default_str();
    se->add_option("--host", sv.host)->capture_default_str();
    se->add_option("--feedback-log", sv.feedback_log)->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& pe) {
        const int code = app.exit(pe, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*s) return cmd_synth(synth, out);
        if (*t) return cmd_train(train, out);
        if (*e) return cmd_evaluate(ev, out);
        if (*sa) return cmd_stats(st, out);
        if (*r) return cmd_report(rp, out);
        if (*se) return cmd_serve(sv);
    } catch (const ConfigError& ex) {
        err << "error: " << ex.what() << "\n";
        return 1;
    } catch (const DataError& ex) {
        err << "error: " << ex.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& ex) {
        err << "error: " << ex.what() << "\n";
        return 2;
    }
    return 1;
}

}  // namespace delaycode
