#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "delaycode/corpus.hpp"
#include "delaycode/node_model.hpp"

namespace delaycode {

/// Tree of observed day-0 codes. Node labels are code prefixes: "D", "DPR", "DPR 03".
struct CodeNode {
    std::string label;
    int level = 0;  // 0 root, 1..3
    std::vector<CodeNode> children;  // sorted by label

    const CodeNode* child(const std::string& label) const;
};

struct CodeHierarchy {
    CodeNode root;

    /// Children labels of the node at `prefix` ("" for the root).
    std::vector<std::string> children_of(const std::string& prefix) const;
    bool contains_path(const AttributionCode& code) const;
    std::vector<std::string> leaves() const;
};

CodeHierarchy build_hierarchy(const std::vector<EventRecord>& records);
CodeHierarchy build_hierarchy(const Corpus& corpus);

nlohmann::json to_json(const CodeHierarchy& h);
CodeHierarchy hierarchy_from_json(const nlohmann::json& j);

enum class TfidfScope { per_node, global };

struct HierarchyConfig {
    NodeTrainConfig node;
    TfidfScope tfidf_scope = TfidfScope::per_node;
    std::uint64_t seed = 42;
};

/// Node id for a model directory/table key: "root", "D", "D.PR"; "flat" for flat models.
std::string node_path(const std::string& prefix);

struct HierarchicalModel {
    Algorithm algorithm = Algorithm::svm;
    CodeHierarchy hierarchy;
    HierarchyConfig config;
    NodeModel root;
    std::map<std::string, NodeModel> level2;  // keyed by level-1 prefix, e.g. "D"
    std::map<std::string, NodeModel> level3;  // keyed by level-2 prefix, e.g. "DPR"
};

struct FlatModel {
    Algorithm algorithm = Algorithm::svm;
    CodeHierarchy hierarchy;
    HierarchyConfig config;
    NodeModel node;
};

struct LevelPrediction {
    int level = 1;
    ScoredPrediction scores;
    PredictionSet set;
    std::string point;
};

struct HierarchicalPrediction {
    std::vector<LevelPrediction> levels;
    std::string full_code;
};

/// Rows (indices into the training set) each node fitted and calibrated on, keyed by node path.
using NodeTraceMap = std::map<std::string, NodeTrainingTrace>;

HierarchicalModel train_hierarchical(const std::vector<EventRecord>& train, Algorithm algorithm,
                                     const HierarchyConfig& config, NodeTraceMap* traces = nullptr);
FlatModel train_flat(const std::vector<EventRecord>& train, Algorithm algorithm, const HierarchyConfig& config,
                     NodeTraceMap* traces = nullptr);

/// Predicted-parent routing from level 1 down to level 3.
HierarchicalPrediction predict_hierarchical(const HierarchicalModel& model, const std::string& normalized_text,
                                            double epsilon = 0.05);
HierarchicalPrediction predict_flat(const FlatModel& model, const std::string& normalized_text,
                                    double epsilon = 0.05);

/// Label used for a record at a hierarchy level (prefix of the day-0 or day-10 code).
std::string level_label(const AttributionCode& code, int level);

// ---------------------------------------------------------------------------
// bundle: manifest.json + per-node tfidf.json, model.json, calibration.json

inline constexpr int kBundleVersion = 1;

struct Bundle {
    std::string kind;  // "hierarchical" | "flat"
    std::optional<HierarchicalModel> hierarchical;
    std::optional<FlatModel> flat;
    std::string model_version;

    const CodeHierarchy& hierarchy() const;
};

void save_bundle(const HierarchicalModel& model, const std::string& dir);
void save_bundle(const FlatModel& model, const std::string& dir);
Bundle load_bundle(const std::string& dir);

/// Stable JSON text: sorted keys, compact, trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace delaycode
