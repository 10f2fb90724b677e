#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "delaycode/error.hpp"
#include "delaycode/evaluation.hpp"
#include "delaycode/hierarchy.hpp"
#include "delaycode/synth.hpp"

using namespace delaycode;
namespace fs = std::filesystem;

namespace {

EventRecord rec(const std::string& code, const std::string& text) {
    EventRecord r;
    r.event_id = code + "|" + text;
    r.raw_text = text;
    r.normalized_text = normalize_text(text);
    r.code_day0 = parse_code(code);
    r.code_day10 = r.code_day0;
    return r;
}

// level 1 decided by "signal" / "personal", J leaves by "sjuk" / "sen"
std::vector<EventRecord> routing_corpus() {
    std::vector<EventRecord> out;
    for (int i = 0; i < 40; ++i) {
        const std::string n = " nummer" + std::to_string(i % 5);
        out.push_back(rec("ISA 01", "signal fel" + n));
        out.push_back(rec("ISA 02", "signal kabel" + n));
        out.push_back(rec("JPR 01", "personal sjuk" + n));
        out.push_back(rec("JPR 05", "personal sen" + n));
    }
    return out;
}

std::vector<EventRecord> small_synth(std::size_t n = 1200, std::uint64_t seed = 3) {
    GeneratorSpec spec;
    spec.leaves = grid_leaves(3, 2, 2);
    spec.frequency = ClassFrequency::balanced;
    spec.n_records = n;
    spec.seed = seed;
    return generate(spec).records;
}

HierarchyConfig small_config() {
    HierarchyConfig c;
    c.node.models.forest.n_trees = 10;
    return c;
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path temp_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("delaycode_test_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("build_hierarchy by hand") {
    CodeHierarchy h = build_hierarchy(std::vector<EventRecord>{rec("DPR 03", "a"), rec("DPR 04", "b"), rec("JPR 05", "c")});
    CHECK(h.children_of("") == std::vector<std::string>{"D", "J"});
    CHECK(h.children_of("D") == std::vector<std::string>{"DPR"});
    CHECK(h.children_of("DPR") == std::vector<std::string>{"DPR 03", "DPR 04"});
    CHECK(h.children_of("J") == std::vector<std::string>{"JPR"});
    CHECK(h.leaves() == std::vector<std::string>{"DPR 03", "DPR 04", "JPR 05"});
    CHECK(h.contains_path(parse_code("DPR 04")));
    CHECK_FALSE(h.contains_path(parse_code("DPR 05")));
    CHECK(evaluated_nodes(h) == std::vector<std::string>{"", "DPR"});
}

TEST_CASE("single label and F-rooted hierarchies") {
    CodeHierarchy one = build_hierarchy(std::vector<EventRecord>{rec("OMÄ 01", "a"), rec("OMÄ 01", "b")});
    CHECK(one.leaves() == std::vector<std::string>{"OMÄ 01"});
    CodeHierarchy f = build_hierarchy(std::vector<EventRecord>{rec("FSA 01", "a"), rec("DPR 03", "b")});
    CHECK(f.children_of("") == std::vector<std::string>{"D", "F"});
    CodeHierarchy back = hierarchy_from_json(to_json(f));
    CHECK(back.leaves() == f.leaves());
}

TEST_CASE("one level-2 model per level-1 class") {
    GeneratorSpec spec;
    spec.leaves = grid_leaves(4, 2, 2);
    spec.frequency = ClassFrequency::balanced;
    spec.n_records = 800;
    auto records = generate(spec).records;
    HierarchicalModel m = train_hierarchical(records, Algorithm::svm, small_config());
    CHECK(m.hierarchy.children_of("") == std::vector<std::string>{"D", "I", "J", "O"});
    CHECK(m.level2.size() == 4);
    CHECK(m.level3.size() == 8);
    CHECK(m.root.labels.size() == 4);
}

TEST_CASE("single-child nodes are constant") {
    std::vector<EventRecord> r = routing_corpus();
    HierarchicalModel m = train_hierarchical(r, Algorithm::svm, small_config());
    CHECK(m.level2.at("I").constant);  // only ISA under I
    CHECK(m.level2.at("J").constant);
    CHECK_FALSE(m.level3.at("JPR").constant);
    const PredictionSet s = m.level2.at("J").predict_set("personal sjuk", 0.05);
    CHECK(s.point == "JPR");
    CHECK(s.p_value("JPR") == 1.0);
    CHECK(m.level2.at("J").scores("personal sjuk").score("JPR") == 1.0);
}

TEST_CASE("routing composes the per-level points") {
    HierarchicalModel m = train_hierarchical(routing_corpus(), Algorithm::svm, small_config());
    HierarchicalPrediction p = predict_hierarchical(m, normalize_text("personal sen nummer1"));
    REQUIRE(p.levels.size() == 3);
    CHECK(p.levels[0].point == "J");
    CHECK(p.levels[1].point == "JPR");
    CHECK(p.levels[2].point == "JPR 05");
    CHECK(p.full_code == "JPR 05");
}

TEST_CASE("routing errors propagate") {
    HierarchicalModel m = train_hierarchical(routing_corpus(), Algorithm::svm, small_config());
    // a JPR 01 word, but the I cues dominate at level 1
    HierarchicalPrediction p = predict_hierarchical(m, normalize_text("signal fel kabel sjuk"));
    CHECK(p.levels[0].point == "I");
    CHECK(p.full_code.front() == 'I');
    CHECK(p.levels[1].point.front() == 'I');
}

TEST_CASE("training and calibration halves are disjoint") {
    NodeTraceMap traces;
    auto records = small_synth();
    train_hierarchical(records, Algorithm::svm, small_config(), &traces);
    CHECK(traces.count("root") == 1);
    for (const auto& [path, t] : traces) {
        std::set<std::size_t> p(t.proper.begin(), t.proper.end());
        for (std::size_t c : t.calibration) CHECK(p.count(c) == 0);
        if (path == "root") CHECK(p.size() + t.calibration.size() == records.size());
    }
}

TEST_CASE("flat model") {
    auto records = small_synth();
    FlatModel f = train_flat(records, Algorithm::svm, small_config());
    CHECK(f.node.labels.size() == 12);
    HierarchicalPrediction p = predict_flat(f, records[0].normalized_text);
    REQUIRE(p.levels.size() == 1);
    CHECK(p.levels[0].level == 3);
    CHECK(f.node.labels.contains(p.full_code));

    std::vector<EventRecord> one{rec("DPR 03", "a b"), rec("DPR 03", "c d")};
    FlatModel c = train_flat(one, Algorithm::random_forest, small_config());
    CHECK(c.node.constant);
    CHECK(predict_flat(c, "x").full_code == "DPR 03");
}

TEST_CASE("empty training sets are rejected") {
    CHECK_THROWS_AS(train_hierarchical({}, Algorithm::svm, small_config()), InsufficientData);
    CHECK_THROWS_AS(train_flat({}, Algorithm::svm, small_config()), InsufficientData);
}

TEST_CASE("bundles are deterministic and round trip") {
    auto records = small_synth();
    for (Algorithm a : {Algorithm::svm, Algorithm::random_forest, Algorithm::uniform}) {
        CAPTURE(to_string(a));
        HierarchicalModel m1 = train_hierarchical(records, a, small_config());
        HierarchicalModel m2 = train_hierarchical(records, a, small_config());
        const fs::path d1 = temp_dir("bundle1"), d2 = temp_dir("bundle2");
        save_bundle(m1, d1.string());
        save_bundle(m2, d2.string());
        std::size_t files = 0;
        for (const auto& e : fs::recursive_directory_iterator(d1)) {
            if (!e.is_regular_file()) continue;
            ++files;
            CHECK(read_all(e.path()) == read_all(d2 / fs::relative(e.path(), d1)));
        }
        CHECK(files == 1 + 3 * (1 + m1.level2.size() + m1.level3.size()));

        Bundle b = load_bundle(d1.string());
        CHECK(b.kind == "hierarchical");
        REQUIRE(b.hierarchical);
        CHECK(b.hierarchy().leaves() == m1.hierarchy.leaves());
        for (std::size_t i = 0; i < 50; ++i) {
            const auto& text = records[i * 7].normalized_text;
            HierarchicalPrediction p = predict_hierarchical(m1, text), q = predict_hierarchical(*b.hierarchical, text);
            CHECK(p.full_code == q.full_code);
            for (std::size_t l = 0; l < 3; ++l) {
                CHECK((p.levels[l].set.p_values - q.levels[l].set.p_values).norm() == 0.0);
                CHECK((p.levels[l].scores.scores - q.levels[l].scores.scores).norm() == 0.0);
            }
        }
        fs::remove_all(d1);
        fs::remove_all(d2);
    }
}

TEST_CASE("flat bundle round trip") {
    auto records = small_synth();
    FlatModel f = train_flat(records, Algorithm::svm, small_config());
    const fs::path d = temp_dir("flatbundle");
    save_bundle(f, d.string());
    Bundle b = load_bundle(d.string());
    CHECK(b.kind == "flat");
    REQUIRE(b.flat);
    CHECK(b.model_version.rfind("svm-", 0) == 0);
    for (std::size_t i = 0; i < 30; ++i)
        CHECK(predict_flat(f, records[i].normalized_text).full_code ==
              predict_flat(*b.flat, records[i].normalized_text).full_code);
    fs::remove_all(d);
}

TEST_CASE("loading a broken bundle fails cleanly") {
    const fs::path d = temp_dir("badbundle");
    CHECK_THROWS_AS(load_bundle(d.string()), DataError);
    fs::create_directories(d);
    std::ofstream(d / "manifest.json") << "{\"version\": 99}";
    CHECK_THROWS_AS(load_bundle(d.string()), DataError);
    std::ofstream(d / "manifest.json") << "{\"version\": 1}";
    CHECK_THROWS_AS(load_bundle(d.string()), DataError);
    fs::remove_all(d);
}

TEST_CASE("node paths") {
    CHECK(node_path("") == "root");
    CHECK(node_path("D") == "D");
    CHECK(node_path("DPR") == "D.PR");
    CHECK(node_path("IBÖ") == "I.BÖ");
}
