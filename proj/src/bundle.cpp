#include <filesystem>
#include <fstream>
#include <sstream>

#include "delaycode/error.hpp"
#include "delaycode/hierarchy.hpp"

namespace delaycode {

namespace fs = std::filesystem;

std::string dump_json(const nlohmann::json& j) { return j.dump() + "\n"; }

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

struct NodeFiles {
    std::string tfidf, model, calibration;
};

NodeFiles node_files(const NodeModel& node) {
    return {dump_json(to_json(node.tfidf)), dump_json(node_model_json(node)),
            dump_json(calibration_to_json(node.calibrated))};
}

std::string version_of(const std::vector<std::pair<std::string, NodeFiles>>& nodes, Algorithm algorithm) {
    std::uint64_t h = hash_string(to_string(algorithm));
    for (const auto& [path, f] : nodes) {
        h = mix_seed(h, hash_string(path));
        h = mix_seed(h, hash_string(f.tfidf));
        h = mix_seed(h, hash_string(f.model));
        h = mix_seed(h, hash_string(f.calibration));
    }
    std::ostringstream out;
    out << to_string(algorithm) << "-" << std::hex << h;
    return out.str();
}

nlohmann::json config_json(const HierarchyConfig& c) {
    std::vector<std::string> stop(c.node.tfidf.stopwords.begin(), c.node.tfidf.stopwords.end());
    std::sort(stop.begin(), stop.end());
    return {{"tfidf",
             {{"ngram_min", c.node.tfidf.ngram_min},
              {"ngram_max", c.node.tfidf.ngram_max},
              {"max_features", c.node.tfidf.max_features},
              {"ranking", c.node.tfidf.ranking == TermRanking::total_count ? "total_count" : "doc_freq"},
              {"stopwords", stop}}},
            {"models", to_json(c.node.models)},
            {"tfidf_scope", c.tfidf_scope == TfidfScope::per_node ? "per_node" : "global"},
            {"seed", c.seed}};
}

HierarchyConfig config_from_json(const nlohmann::json& j) {
    HierarchyConfig c;
    const auto& t = j.at("tfidf");
    c.node.tfidf.ngram_min = t.at("ngram_min").get<std::size_t>();
    c.node.tfidf.ngram_max = t.at("ngram_max").get<std::size_t>();
    c.node.tfidf.max_features = t.at("max_features").get<std::size_t>();
    c.node.tfidf.ranking =
        t.at("ranking").get<std::string>() == "doc_freq" ? TermRanking::doc_freq : TermRanking::total_count;
    for (const auto& w : t.at("stopwords")) c.node.tfidf.stopwords.insert(w.get<std::string>());
    c.node.models = model_config_from_json(j.at("models"));
    c.tfidf_scope = j.at("tfidf_scope").get<std::string>() == "global" ? TfidfScope::global : TfidfScope::per_node;
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

void write_bundle(const std::string& dir, const std::string& kind, Algorithm algorithm, const HierarchyConfig& config,
                  const CodeHierarchy& hierarchy, const std::vector<std::pair<std::string, const NodeModel*>>& nodes) {
    const fs::path root(dir);
    fs::create_directories(root);
    std::vector<std::pair<std::string, NodeFiles>> files;
    for (const auto& [path, node] : nodes) files.emplace_back(path, node_files(*node));
    nlohmann::json paths = nlohmann::json::array();
    for (const auto& [path, f] : files) {
        const fs::path nd = root / fs::u8path(path);
        fs::create_directories(nd);
        write_file(nd / "tfidf.json", f.tfidf);
        write_file(nd / "model.json", f.model);
        write_file(nd / "calibration.json", f.calibration);
        paths.push_back(path);
    }
    const nlohmann::json manifest = {{"version", kBundleVersion},
                                     {"kind", kind},
                                     {"algorithm", to_string(algorithm)},
                                     {"seed", config.seed},
                                     {"config", config_json(config)},
                                     {"hierarchy", to_json(hierarchy)},
                                     {"nodes", paths},
                                     {"model_version", version_of(files, algorithm)}};
    write_file(root / "manifest.json", dump_json(manifest));
}

NodeModel read_node(const fs::path& dir) {
    NodeModel node;
    node.tfidf = tfidf_from_json(read_json(dir / "tfidf.json"));
    const auto model = read_json(dir / "model.json");
    node.algorithm = algorithm_from_string(model.at("algorithm").get<std::string>());
    node.labels = LabelSpace(model.at("labels").get<std::vector<std::string>>());
    node.constant = model.at("constant").get<bool>();
    node.train_rows = model.at("train_rows").get<std::size_t>();
    const auto cal = read_json(dir / "calibration.json");
    node.calibrated = CalibratedModel{classifier_from_json(model.at("classifier")), node.labels,
                                      cal.at("scores").get<std::vector<double>>()};
    return node;
}

}  // namespace

void save_bundle(const HierarchicalModel& model, const std::string& dir) {
    std::vector<std::pair<std::string, const NodeModel*>> nodes{{"root", &model.root}};
    for (const auto& [prefix, node] : model.level2) nodes.emplace_back(node_path(prefix), &node);
    for (const auto& [prefix, node] : model.level3) nodes.emplace_back(node_path(prefix), &node);
    write_bundle(dir, "hierarchical", model.algorithm, model.config, model.hierarchy, nodes);
}

void save_bundle(const FlatModel& model, const std::string& dir) {
    write_bundle(dir, "flat", model.algorithm, model.config, model.hierarchy, {{"flat", &model.node}});
}

const CodeHierarchy& Bundle::hierarchy() const { return hierarchical ? hierarchical->hierarchy : flat->hierarchy; }

namespace {

Bundle load_bundle_checked(const std::string& dir) {
    const fs::path root(dir);
    const auto manifest = read_json(root / "manifest.json");
    if (manifest.at("version").get<int>() != kBundleVersion)
        throw DataError("unsupported bundle version " + manifest.at("version").dump());
    Bundle bundle;
    bundle.kind = manifest.at("kind").get<std::string>();
    bundle.model_version = manifest.at("model_version").get<std::string>();
    const Algorithm algorithm = algorithm_from_string(manifest.at("algorithm").get<std::string>());
    const HierarchyConfig config = config_from_json(manifest.at("config"));
    const CodeHierarchy hierarchy = hierarchy_from_json(manifest.at("hierarchy"));
    if (bundle.kind == "flat") {
        FlatModel m{algorithm, hierarchy, config, read_node(root / "flat")};
        bundle.flat = std::move(m);
        return bundle;
    }
    if (bundle.kind != "hierarchical") throw DataError("unknown bundle kind '" + bundle.kind + "'");
    HierarchicalModel m;
    m.algorithm = algorithm;
    m.config = config;
    m.hierarchy = hierarchy;
    m.root = read_node(root / "root");
    for (const auto& l1 : hierarchy.root.children) {
        m.level2.emplace(l1.label, read_node(root / fs::u8path(node_path(l1.label))));
        for (const auto& l2 : l1.children) m.level3.emplace(l2.label, read_node(root / fs::u8path(node_path(l2.label))));
    }
    bundle.hierarchical = std::move(m);
    return bundle;
}

}  // namespace

Bundle load_bundle(const std::string& dir) {
    try {
        return load_bundle_checked(dir);
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed bundle '" + dir + "': " + e.what());
    }
}

}  // namespace delaycode
