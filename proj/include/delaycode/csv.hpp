#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace delaycode::csv {

using Row = std::vector<std::string>;

/// RFC 4180 reader: comma-delimited, double-quoted fields may contain commas,
/// line breaks and doubled quotes. CRLF and LF line endings are accepted.
std::vector<Row> parse(std::string_view content);

std::vector<Row> read_file(const std::string& path);

std::string quote(std::string_view field);
void write_row(std::ostream& out, const Row& row);

}  // namespace delaycode::csv
