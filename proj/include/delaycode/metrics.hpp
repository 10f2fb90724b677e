#pragma once

#include <map>
#include <string>
#include <vector>

namespace delaycode {

struct ClassCounts {
    std::size_t tp = 0, fp = 0, fn = 0;
};

/// Per-class confusion counts over the union of true and predicted labels.
std::map<std::string, ClassCounts> class_counts(const std::vector<std::string>& y_true,
                                                const std::vector<std::string>& y_pred);

/// Unweighted mean of per-class F1 over the union of true and predicted labels;
/// 0/0 precision or recall counts as 0. Throws LengthMismatch, or InsufficientData when empty.
double macro_f1(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred);

/// As macro_f1, but rows whose true label equals `outside` are scored as misses
/// without `outside` becoming a class of its own.
double macro_f1(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred,
                const std::string& outside);

/// Marker used for true labels that lie outside the evaluated node.
inline constexpr const char* kOutsideNode = "\x01outside";

double mean(const std::vector<double>& v);
/// Sample standard deviation (n-1); 0 for fewer than two values.
double sample_std(const std::vector<double>& v);

}  // namespace delaycode
