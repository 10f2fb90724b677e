#include "delaycode/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "delaycode/csv.hpp"
#include "delaycode/error.hpp"
#include "delaycode/hierarchy.hpp"

namespace delaycode {

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

void write_text(const std::filesystem::path& p, const std::string& s) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw DataError("cannot write '" + p.string() + "'");
    out << s;
}

}  // namespace

std::string scores_csv(const FoldScoreTable& table) {
    FoldScoreTable t = table;
    t.sort();
    std::ostringstream out;
    out << "config,node,day,fold,f1\n";
    for (const auto& r : t.rows)
        csv::write_row(out, {r.config, r.node, std::to_string(r.day), std::to_string(r.fold), fixed(r.f1, 10)});
    return out.str();
}

namespace {

FoldScoreTable scores_from_rows(const std::vector<csv::Row>& rows) {
    if (rows.empty()) throw SchemaError("scores file is empty");
    const csv::Row expected{"config", "node", "day", "fold", "f1"};
    if (rows.front() != expected) throw SchemaError("scores header must be config,node,day,fold,f1");
    FoldScoreTable t;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != 5) throw SchemaError("scores row " + std::to_string(i + 1) + " has " + std::to_string(r.size()) + " fields");
        FoldScore s;
        s.config = r[0];
        s.node = r[1];
        try {
            std::size_t used = 0;
            s.day = std::stoi(r[2], &used);
            if (used != r[2].size()) throw std::invalid_argument("day");
            s.fold = std::stoi(r[3], &used);
            if (used != r[3].size()) throw std::invalid_argument("fold");
            s.f1 = std::stod(r[4], &used);
            if (used != r[4].size()) throw std::invalid_argument("f1");
        } catch (const std::exception&) {
            throw SchemaError("scores row " + std::to_string(i + 1) + " has a malformed number");
        }
        if ((s.day != 0 && s.day != 10) || s.fold < 0 || !(s.f1 >= 0.0 && s.f1 <= 1.0))
            throw SchemaError("scores row " + std::to_string(i + 1) + " is out of range");
        t.rows.push_back(std::move(s));
    }
    t.sort();
    return t;
}

}  // namespace

FoldScoreTable parse_scores_csv(const std::string& text) { return scores_from_rows(csv::parse(text)); }

FoldScoreTable read_scores_csv(const std::string& path) { return scores_from_rows(csv::read_file(path)); }

nlohmann::json aggregates_json(const FoldScoreTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& a : table.aggregates())
        rows.push_back({{"config", a.config}, {"node", a.node}, {"day", a.day}, {"n_folds", a.n},
                        {"mean", a.mean}, {"std", a.std}});
    return {{"aggregates", rows}};
}

std::string report_text(const FoldScoreTable& table) {
    const auto aggs = table.aggregates();
    std::set<std::string> configs;
    std::map<std::string, std::map<std::pair<std::string, int>, const ScoreAggregate*>> by_node;
    for (const auto& a : aggs) {
        configs.insert(a.config);
        by_node[a.node][{a.config, a.day}] = &a;
    }
    std::ostringstream out;
    out << "Mean macro-F1 (sample standard deviation) over folds\n";
    const std::vector<std::pair<std::string, std::string>> sections{
        {"L1", "Level 1"}, {"L2", "Level 2"}, {"L3", "Level 3"}};
    for (const auto& [level, title] : sections) {
        out << "\n" << title << "\n";
        for (const auto& [node, cells] : by_node) {
            if (node.rfind(level, 0) != 0) continue;
            const std::string name = node == level ? "all (mean over nodes)" : node.substr(level.size() + 1);
            for (int day : {0, 10}) {
                bool any = false;
                std::ostringstream line;
                line << "  " << name << " day " << day << ":";
                for (const auto& c : configs) {
                    auto it = cells.find({c, day});
                    if (it == cells.end()) continue;
                    any = true;
                    line << "  " << c << " " << fixed(it->second->mean, 3) << " (" << fixed(it->second->std, 3) << ")";
                }
                if (any) out << line.str() << "\n";
            }
        }
    }
    out << "\nNodes are evaluated on test rows whose day-0 parent matches; day-10 codes from another parent count as misses.\n";
    return out.str();
}

void render_report(const FoldScoreTable& table, const std::string& dir, const nlohmann::json& run_info) {
    if (table.rows.empty()) throw InsufficientData("no scores to report");
    const std::filesystem::path root(dir);
    std::filesystem::create_directories(root);
    write_text(root / "scores.csv", scores_csv(table));
    nlohmann::json agg = aggregates_json(table);
    if (!run_info.is_null()) agg["run"] = run_info;
    write_text(root / "aggregates.json", agg.dump(2) + "\n");
    write_text(root / "report.txt", report_text(table));
}

}  // namespace delaycode
