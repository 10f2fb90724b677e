#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "delaycode/corpus.hpp"

namespace delaycode {

struct LeafSpec {
    std::string code;                   // condensed, e.g. "DPR 03"
    double weight = 1.0;                // relative class frequency (ignored for day-10-only leaves)
    bool day10_only = false;            // appears only as a revision target
    double numeric_affinity = 1.0;      // relative share of numeric-only texts
    std::vector<std::string> keywords;  // generated when empty
};

enum class ClassFrequency { balanced, zipf, weights };

struct GeneratorSpec {
    std::string name = "custom";
    std::vector<LeafSpec> leaves;
    ClassFrequency frequency = ClassFrequency::weights;
    double zipf_exponent = 1.0;

    std::size_t keywords_per_leaf = 12;
    std::size_t keywords_per_level2 = 10;
    std::size_t keywords_per_level1 = 10;
    std::size_t noise_vocabulary = 300;
    /// Keyword pools of leaves under different level-1 codes may share at most
    /// (1 - min_separation) of their words.
    double min_separation = 1.0;

    // share of content tokens drawn from each pool; remainder is noise
    double w_leaf = 0.35;
    double w_level2 = 0.2;
    double w_level1 = 0.15;
    double w_sibling = 0.05;  // keywords of a sibling leaf
    int tokens_min = 4;
    int tokens_max = 12;
    double p_stopword = 0.3;   // after each content token
    double p_train_mention = 0.2;
    double p_speed_mention = 0.05;

    /// Cumulative: probability that the day-10 code differs from day 0 in the
    /// first `level` levels, so 0 <= p1 <= p2 <= p3 <= 1.
    double p_revise_level1 = 0.0;
    double p_revise_level2 = 0.0;
    double p_revise_level3 = 0.0;
    /// Per level-2 prefix: probability a row is revised into one of that node's day-10-only leaves.
    std::map<std::string, double> p_novel_revision;
    /// Revised rows whose text is drawn from the day-10 leaf instead of the day-0 leaf.
    double p_text_follows_day10 = 0.0;

    double p_numeric_only = 0.0;
    /// Rows whose day-0 level 3 is recorded as "-" (text still from the original leaf).
    double p_dash_level3 = 0.0;

    std::size_t n_records = 1000;
    std::uint64_t seed = 42;

    /// Throws SpecError.
    void validate() const;
};

/// Leaves for an n1 x n2 x n3 balanced tree ("D", "I", "J", "O", "F" at level 1).
std::vector<LeafSpec> grid_leaves(int n_level1, int n_level2, int n_level3);

GeneratorSpec paper_preset();
inline constexpr const char* kPaperPresetVersion = "paper-preset-1";

struct Revision {
    std::size_t row = 0;
    std::string day0;
    std::string day10;
    int level = 0;  // first differing level
    bool novel = false;
};

struct GeneratedCorpus {
    std::vector<EventRecord> records;  // raw text and both label sets; normalized_text filled
    std::vector<Revision> revisions;
    std::vector<std::size_t> numeric_only_rows;
    std::map<std::string, std::vector<std::string>> keyword_pools;  // leaf code -> words
    GeneratorSpec spec;
};

GeneratedCorpus generate(const GeneratorSpec& spec);

nlohmann::json to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const nlohmann::json& j);

}  // namespace delaycode
