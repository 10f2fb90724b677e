#include "delaycode/metrics.hpp"

#include <cmath>
#include <numeric>

#include "delaycode/error.hpp"

namespace delaycode {

std::map<std::string, ClassCounts> class_counts(const std::vector<std::string>& y_true,
                                                const std::vector<std::string>& y_pred) {
    if (y_true.size() != y_pred.size())
        throw LengthMismatch("y_true has " + std::to_string(y_true.size()) + " labels, y_pred has " +
                             std::to_string(y_pred.size()));
    std::map<std::string, ClassCounts> counts;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] == y_pred[i]) {
            ++counts[y_true[i]].tp;
        } else {
            ++counts[y_true[i]].fn;
            ++counts[y_pred[i]].fp;
        }
    }
    return counts;
}

namespace {

double f1_of(const ClassCounts& c) {
    if (c.tp == 0) return 0.0;
    const double precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    return 2.0 * precision * recall / (precision + recall);
}

double macro(const std::map<std::string, ClassCounts>& counts, const std::string* outside) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [label, c] : counts) {
        if (outside && label == *outside) continue;
        sum += f1_of(c);
        ++n;
    }
    return n ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace

double macro_f1(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred) {
    if (y_true.empty() && y_pred.empty()) throw InsufficientData("macro_f1 needs at least one instance");
    return macro(class_counts(y_true, y_pred), nullptr);
}

double macro_f1(const std::vector<std::string>& y_true, const std::vector<std::string>& y_pred,
                const std::string& outside) {
    if (y_true.empty() && y_pred.empty()) throw InsufficientData("macro_f1 needs at least one instance");
    return macro(class_counts(y_true, y_pred), &outside);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace delaycode
