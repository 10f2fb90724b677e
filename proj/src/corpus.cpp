#include "delaycode/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "delaycode/error.hpp"

namespace delaycode {

namespace {

std::string_view trim(std::string_view s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

bool is_upper_letter(char32_t cp) {
    return (cp >= U'A' && cp <= U'Z') || (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7);
}

void check_level2(std::string_view level2) {
    const auto cps = utf8::decode(level2);
    if (cps.size() != 2 || !std::all_of(cps.begin(), cps.end(), is_upper_letter))
        throw MalformedCode("level-2 segment '" + std::string(level2) + "' is not exactly two letters");
}

void check_level3(std::string_view level3) {
    if (level3 == "-") return;
    if (level3.empty() ||
        !std::all_of(level3.begin(), level3.end(), [](char c) { return c >= '0' && c <= '9'; }))
        throw MalformedCode("level-3 segment '" + std::string(level3) + "' is neither digits nor '-'");
}

}  // namespace

std::string AttributionCode::condensed() const { return format_code(*this); }

std::string AttributionCode::prefix(int level) const {
    std::string out(1, level1);
    if (level >= 2) out += level2;
    if (level >= 3 && !level3.empty()) out += " " + level3;
    return out;
}

bool is_level1_code(char c) noexcept { return kLevel1Codes.find(c) != std::string_view::npos; }

std::string_view level1_description(char c) {
    switch (c) {
        case 'D': return "Operational Management";
        case 'F': return "Consequential cause";
        case 'I': return "Infrastructure";
        case 'J': return "Railway company";
        case 'O': return "Accidents/incidents and external factors";
        default: return "";
    }
}

AttributionCode parse_code(std::string_view condensed) {
    const std::string_view s = trim(condensed);
    if (s.empty()) throw MalformedCode("empty code");
    if (!is_level1_code(s.front()))
        throw UnknownLevel1("unknown level-1 code '" + std::string(1, s.front()) + "'");

    const auto tokens = split_whitespace(s);
    if (tokens.size() > 2) throw MalformedCode("too many segments in '" + std::string(s) + "'");

    AttributionCode code;
    code.level1 = s.front();
    std::string_view head = tokens[0];
    head.remove_prefix(1);
    if (!head.empty()) {
        check_level2(head);
        code.level2 = std::string(head);
    }
    if (tokens.size() == 2) {
        if (code.level2.empty()) throw MalformedCode("level-3 present without level-2 in '" + std::string(s) + "'");
        check_level3(tokens[1]);
        code.level3 = tokens[1];
    }
    return code;
}

std::string format_code(const AttributionCode& code) {
    std::string out(1, code.level1);
    out += code.level2;
    if (!code.level3.empty()) out += " " + code.level3;
    return out;
}

AttributionCode code_from_parts(std::string_view n1, std::string_view n2, std::string_view n3) {
    n1 = trim(n1);
    n2 = trim(n2);
    n3 = trim(n3);
    if (n1.size() != 1) throw MalformedCode("level-1 field '" + std::string(n1) + "' is not one letter");
    if (!is_level1_code(n1.front())) throw UnknownLevel1("unknown level-1 code '" + std::string(n1) + "'");
    AttributionCode code;
    code.level1 = n1.front();
    if (!n2.empty()) {
        check_level2(n2);
        code.level2 = std::string(n2);
    }
    if (!n3.empty()) {
        if (code.level2.empty()) throw MalformedCode("level-3 present without level-2");
        check_level3(n3);
        code.level3 = std::string(n3);
    }
    return code;
}

const std::vector<std::string>& corpus_columns() {
    static const std::vector<std::string> columns = {"eventcode", "text",  "label", "n1_0", "n2_0",
                                                     "n3_0",      "n1_10", "n2_10", "n3_10"};
    return columns;
}

Corpus corpus_from_rows(const std::vector<csv::Row>& rows, const LoadOptions& options, std::string source) {
    if (rows.empty()) throw SchemaError("missing header row");
    const csv::Row& header = rows.front();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < header.size(); ++i) index[std::string(trim(header[i]))] = i;
    std::vector<std::size_t> col;
    for (const auto& name : corpus_columns()) {
        auto it = index.find(name);
        if (it == index.end()) throw SchemaError("missing column '" + name + "'");
        col.push_back(it->second);
    }
    enum { kId, kText, kLabel, kN10, kN20, kN30, kN110, kN210, kN310 };

    Corpus corpus;
    corpus.provenance.source = std::move(source);
    corpus.provenance.options = options;
    corpus.provenance.rows_read = rows.size() - 1;

    std::unordered_set<std::string> seen;
    std::vector<EventRecord> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const csv::Row& row = rows[r];
        auto field = [&](int which) -> std::string_view {
            const std::size_t c = col[static_cast<std::size_t>(which)];
            return c < row.size() ? std::string_view(row[c]) : std::string_view();
        };
        if (row.size() < header.size())
            throw SchemaError("row " + std::to_string(r) + " has " + std::to_string(row.size()) +
                              " fields, expected " + std::to_string(header.size()));

        EventRecord rec;
        rec.event_id = std::string(trim(field(kId)));
        rec.raw_text = std::string(field(kText));
        try {
            rec.code_day0 = code_from_parts(field(kN10), field(kN20), field(kN30));
        } catch (const DataError& e) {
            throw CodeParseError(r, std::string(field(kN10)) + "|" + std::string(field(kN20)) + "|" +
                                        std::string(field(kN30)), e.what());
        }
        try {
            rec.code_day10 = code_from_parts(field(kN110), field(kN210), field(kN310));
        } catch (const DataError& e) {
            throw CodeParseError(r, std::string(field(kN110)) + "|" + std::string(field(kN210)) + "|" +
                                        std::string(field(kN310)), e.what());
        }
        const std::string_view label = trim(field(kLabel));
        if (!label.empty()) {
            AttributionCode parsed;
            try {
                parsed = parse_code(label);
            } catch (const DataError& e) {
                throw CodeParseError(r, std::string(label), e.what());
            }
            if (parsed != rec.code_day0)
                throw CodeParseError(r, std::string(label), "label disagrees with n1_0/n2_0/n3_0 columns");
        }

        if (!seen.insert(rec.event_id).second) {
            ++corpus.provenance.duplicates_dropped;
            continue;
        }
        rec.normalized_text = normalize_text(rec.raw_text, options.normalize);
        if (rec.normalized_text.empty()) {
            ++corpus.provenance.empty_text_dropped;
            continue;
        }
        rec.numeric_only = is_numeric_only(rec.normalized_text);
        if (options.exclude_numeric_only && rec.numeric_only) {
            ++corpus.provenance.numeric_only_dropped;
            continue;
        }
        records.push_back(std::move(rec));
    }

    auto label_of = [&](const EventRecord& rec) {
        return options.count_labels_on == LabelDay::day0 ? rec.code_day0.condensed() : rec.code_day10.condensed();
    };
    std::unordered_map<std::string, std::size_t> counts;
    for (const auto& rec : records) ++counts[label_of(rec)];
    for (auto& rec : records) {
        if (counts[label_of(rec)] >= options.min_label_count) {
            corpus.records.push_back(std::move(rec));
        } else {
            ++corpus.provenance.rare_label_dropped;
        }
    }
    if (corpus.records.empty()) throw EmptyCorpus("no records survive filtering of " + corpus.provenance.source);
    return corpus;
}

Corpus load_corpus(const std::string& path, const LoadOptions& options) {
    return corpus_from_rows(csv::read_file(path), options, path);
}

std::string corpus_csv_string(const std::vector<EventRecord>& records) {
    std::ostringstream out;
    csv::write_row(out, corpus_columns());
    for (const auto& rec : records) {
        const auto& a = rec.code_day0;
        const auto& b = rec.code_day10;
        csv::write_row(out, {rec.event_id, rec.raw_text, a.condensed(), std::string(1, a.level1), a.level2, a.level3,
                             std::string(1, b.level1), b.level2, b.level3});
    }
    return out.str();
}

void write_corpus_csv(const std::vector<EventRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << corpus_csv_string(records);
}

}  // namespace delaycode
