#include "delaycode/hierarchy.hpp"

#include <algorithm>
#include <set>

#include "delaycode/error.hpp"

namespace delaycode {

const CodeNode* CodeNode::child(const std::string& l) const {
    auto it = std::lower_bound(children.begin(), children.end(), l,
                               [](const CodeNode& n, const std::string& s) { return n.label < s; });
    return it != children.end() && it->label == l ? &*it : nullptr;
}

namespace {

const CodeNode* find_node(const CodeNode& root, const std::string& prefix) {
    if (prefix.empty()) return &root;
    for (const auto& l1 : root.children) {
        if (l1.label == prefix) return &l1;
        for (const auto& l2 : l1.children) {
            if (l2.label == prefix) return &l2;
            for (const auto& l3 : l2.children)
                if (l3.label == prefix) return &l3;
        }
    }
    return nullptr;
}

nlohmann::json node_json(const CodeNode& n) {
    nlohmann::json children = nlohmann::json::array();
    for (const auto& c : n.children) children.push_back(node_json(c));
    return {{"label", n.label}, {"level", n.level}, {"children", children}};
}

CodeNode node_from_json(const nlohmann::json& j) {
    CodeNode n;
    n.label = j.at("label").get<std::string>();
    n.level = j.at("level").get<int>();
    for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c));
    return n;
}

}  // namespace

std::vector<std::string> CodeHierarchy::children_of(const std::string& prefix) const {
    std::vector<std::string> out;
    if (const CodeNode* n = find_node(root, prefix))
        for (const auto& c : n->children) out.push_back(c.label);
    return out;
}

bool CodeHierarchy::contains_path(const AttributionCode& code) const {
    const CodeNode* l1 = root.child(code.prefix(1));
    const CodeNode* l2 = l1 ? l1->child(code.prefix(2)) : nullptr;
    return l2 && l2->child(code.prefix(3));
}

std::vector<std::string> CodeHierarchy::leaves() const {
    std::vector<std::string> out;
    for (const auto& l1 : root.children)
        for (const auto& l2 : l1.children)
            for (const auto& l3 : l2.children) out.push_back(l3.label);
    return out;
}

std::string level_label(const AttributionCode& code, int level) { return code.prefix(level); }

CodeHierarchy build_hierarchy(const std::vector<EventRecord>& records) {
    std::map<std::string, std::map<std::string, std::set<std::string>>> tree;
    for (const auto& r : records) tree[r.code_day0.prefix(1)][r.code_day0.prefix(2)].insert(r.code_day0.prefix(3));
    CodeHierarchy h;
    h.root.level = 0;
    for (const auto& [l1, l2s] : tree) {
        CodeNode n1{l1, 1, {}};
        for (const auto& [l2, l3s] : l2s) {
            CodeNode n2{l2, 2, {}};
            for (const auto& l3 : l3s) n2.children.push_back(CodeNode{l3, 3, {}});
            n1.children.push_back(std::move(n2));
        }
        h.root.children.push_back(std::move(n1));
    }
    return h;
}

CodeHierarchy build_hierarchy(const Corpus& corpus) { return build_hierarchy(corpus.records); }

nlohmann::json to_json(const CodeHierarchy& h) { return node_json(h.root); }

CodeHierarchy hierarchy_from_json(const nlohmann::json& j) { return CodeHierarchy{node_from_json(j)}; }

std::string node_path(const std::string& prefix) {
    if (prefix.empty()) return "root";
    if (prefix.size() == 1) return prefix;
    return prefix.substr(0, 1) + "." + prefix.substr(1);
}

namespace {

struct NodeInput {
    std::vector<std::string> texts;
    std::vector<std::string> labels;
    std::vector<std::size_t> rows;
};

}  // namespace

HierarchicalModel train_hierarchical(const std::vector<EventRecord>& train, Algorithm algorithm,
                                     const HierarchyConfig& config, NodeTraceMap* traces) {
    if (train.empty()) throw InsufficientData("hierarchical training set is empty");
    HierarchicalModel model;
    model.algorithm = algorithm;
    model.config = config;
    model.hierarchy = build_hierarchy(train);

    std::optional<TfidfModel> shared;
    if (config.tfidf_scope == TfidfScope::global && algorithm != Algorithm::uniform) {
        std::vector<std::string> texts;
        for (const auto& r : train) texts.push_back(r.normalized_text);
        shared = fit_tfidf(texts, config.node.tfidf);
    }
    const TfidfModel* shared_ptr = shared ? &*shared : nullptr;

    NodeInput root;
    std::map<std::string, NodeInput> l2, l3;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& code = train[i].code_day0;
        const auto& text = train[i].normalized_text;
        root.texts.push_back(text);
        root.labels.push_back(code.prefix(1));
        root.rows.push_back(i);
        NodeInput& a = l2[code.prefix(1)];
        a.texts.push_back(text);
        a.labels.push_back(code.prefix(2));
        a.rows.push_back(i);
        NodeInput& b = l3[code.prefix(2)];
        b.texts.push_back(text);
        b.labels.push_back(code.prefix(3));
        b.rows.push_back(i);
    }
    auto seed_for = [&](const std::string& path) { return mix_seed(config.seed, hash_string(path)); };
    auto fit = [&](const std::string& path, const NodeInput& in) {
        NodeTrainingTrace local;
        NodeModel node = train_node(in.texts, in.labels, algorithm, config.node, seed_for(path),
                                    traces ? &local : nullptr, shared_ptr);
        if (traces) {
            NodeTrainingTrace& t = (*traces)[path];
            for (std::size_t i : local.proper) t.proper.push_back(in.rows[i]);
            for (std::size_t i : local.calibration) t.calibration.push_back(in.rows[i]);
        }
        return node;
    };
    model.root = fit("root", root);
    for (auto& [prefix, in] : l2) model.level2.emplace(prefix, fit(node_path(prefix), in));
    for (auto& [prefix, in] : l3) model.level3.emplace(prefix, fit(node_path(prefix), in));
    return model;
}

FlatModel train_flat(const std::vector<EventRecord>& train, Algorithm algorithm, const HierarchyConfig& config,
                     NodeTraceMap* traces) {
    if (train.empty()) throw InsufficientData("flat training set is empty");
    FlatModel model;
    model.algorithm = algorithm;
    model.config = config;
    model.hierarchy = build_hierarchy(train);
    std::vector<std::string> texts, labels;
    for (const auto& r : train) {
        texts.push_back(r.normalized_text);
        labels.push_back(r.code_day0.prefix(3));
    }
    NodeTrainingTrace* trace = traces ? &(*traces)["flat"] : nullptr;
    model.node = train_node(texts, labels, algorithm, config.node, mix_seed(config.seed, hash_string("flat")), trace);
    return model;
}

namespace {

LevelPrediction level_prediction(const NodeModel& node, int level, const std::string& text, double epsilon) {
    LevelPrediction out;
    out.level = level;
    const FeatureVector x = node.features(text);
    out.scores = predict(node.calibrated.base, node.labels, x);
    out.set = prediction_set_from_scores(node.calibrated, out.scores.scores, epsilon);
    out.point = out.set.point;
    return out;
}

}  // namespace

HierarchicalPrediction predict_hierarchical(const HierarchicalModel& model, const std::string& normalized_text,
                                            double epsilon) {
    HierarchicalPrediction out;
    out.levels.push_back(level_prediction(model.root, 1, normalized_text, epsilon));
    auto l2 = model.level2.find(out.levels.back().point);
    if (l2 == model.level2.end()) throw DataError("no level-2 node for '" + out.levels.back().point + "'");
    out.levels.push_back(level_prediction(l2->second, 2, normalized_text, epsilon));
    auto l3 = model.level3.find(out.levels.back().point);
    if (l3 == model.level3.end()) throw DataError("no level-3 node for '" + out.levels.back().point + "'");
    out.levels.push_back(level_prediction(l3->second, 3, normalized_text, epsilon));
    out.full_code = out.levels.back().point;
    return out;
}

HierarchicalPrediction predict_flat(const FlatModel& model, const std::string& normalized_text, double epsilon) {
    HierarchicalPrediction out;
    out.levels.push_back(level_prediction(model.node, 3, normalized_text, epsilon));
    out.full_code = out.levels.back().point;
    return out;
}

}  // namespace delaycode
