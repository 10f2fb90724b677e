#include "delaycode/error.hpp"

#include <utility>

namespace delaycode {

CodeParseError::CodeParseError(std::size_t row, std::string value, const std::string& reason)
    : DataError("row " + std::to_string(row) + ": cannot parse code '" + value + "': " + reason),
      row_(row),
      value_(std::move(value)) {}

}  // namespace delaycode
