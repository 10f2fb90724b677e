#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace delaycode {

/// Placeholder substituted for train identifiers.
inline constexpr std::string_view kTrainPlaceholder = "TRAINNR";

struct NormalizeOptions {
    /// Standalone digit runs at least this long are treated as train identifiers.
    std::size_t min_train_digits = 3;
};

/// Lowercases, strips punctuation and line breaks, joins `sth <speed>[km]`
/// variants into `sth<speed>` and replaces train identifiers by TRAINNR.
/// Idempotent.
std::string normalize_text(std::string_view raw, const NormalizeOptions& options = {});

/// True iff `normalized` is non-empty and every token is TRAINNR or a digit run.
bool is_numeric_only(std::string_view normalized);

std::vector<std::string> split_whitespace(std::string_view text);

namespace utf8 {

std::vector<char32_t> decode(std::string_view bytes);
void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);
std::size_t length(std::string_view bytes);

}  // namespace utf8

}  // namespace delaycode
