#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "delaycode/csv.hpp"
#include "delaycode/text.hpp"

namespace delaycode {

/// Three-level delay attribution code, e.g. "DPR 03" = (D, PR, 03).
struct AttributionCode {
    char level1 = 'D';
    std::string level2;  // exactly two letters, or empty
    std::string level3;  // digits or "-", or empty

    /// Canonical condensed form "L1L2 L3".
    std::string condensed() const;

    /// Code truncated to `level` (1..3) in condensed form: "D", "DPR", "DPR 03".
    std::string prefix(int level) const;

    int depth() const noexcept { return level3.empty() ? (level2.empty() ? 1 : 2) : 3; }

    auto operator<=>(const AttributionCode&) const = default;
};

inline constexpr std::string_view kLevel1Codes = "DFIJO";

bool is_level1_code(char c) noexcept;
std::string_view level1_description(char c);

AttributionCode parse_code(std::string_view condensed);
std::string format_code(const AttributionCode& code);

/// Builds a code from the verbose (n1, n2, n3) columns.
AttributionCode code_from_parts(std::string_view n1, std::string_view n2, std::string_view n3);

struct EventRecord {
    std::string event_id;
    std::string raw_text;
    std::string normalized_text;
    AttributionCode code_day0;
    AttributionCode code_day10;
    bool numeric_only = false;
};

enum class LabelDay { day0, day10 };

struct LoadOptions {
    std::size_t min_label_count = 100;
    bool exclude_numeric_only = false;
    LabelDay count_labels_on = LabelDay::day0;
    NormalizeOptions normalize;
};

struct Provenance {
    std::string source;
    LoadOptions options;
    std::size_t rows_read = 0;
    std::size_t duplicates_dropped = 0;
    std::size_t empty_text_dropped = 0;
    std::size_t numeric_only_dropped = 0;
    std::size_t rare_label_dropped = 0;
};

struct Corpus {
    std::vector<EventRecord> records;
    Provenance provenance;

    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }
};

/// Column order of the corpus CSV.
const std::vector<std::string>& corpus_columns();

Corpus load_corpus(const std::string& path, const LoadOptions& options = {});

/// Same pipeline as load_corpus over already-split CSV rows (header first).
Corpus corpus_from_rows(const std::vector<csv::Row>& rows, const LoadOptions& options,
                        std::string source = "<memory>");

/// Writes records (raw text, both label sets) in the ingestion schema.
void write_corpus_csv(const std::vector<EventRecord>& records, const std::string& path);
std::string corpus_csv_string(const std::vector<EventRecord>& records);

}  // namespace delaycode
