#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "delaycode/stats.hpp"

namespace delaycode {

struct CdDiagram {
    std::vector<std::string> treatments;  // ordered by average rank, best first
    std::vector<double> ranks;
    double cd = 0.0;
    double alpha = 0.05;
    std::size_t n_blocks = 0;
    /// Maximal runs of rank-adjacent treatments whose rank spread is below CD; at least two members each.
    std::vector<std::vector<std::string>> groups;
};

/// Groups as index ranges over ranks sorted ascending.
std::vector<std::vector<std::size_t>> cd_groups(const std::vector<double>& sorted_ranks, double cd);

CdDiagram make_cd_diagram(const TestResult& nemenyi, double alpha = 0.05);
CdDiagram make_cd_diagram(std::vector<std::string> names, std::vector<double> ranks, double cd, double alpha = 0.05,
                          std::size_t n_blocks = 0);

nlohmann::json to_json(const CdDiagram& d);
std::string render_svg(const CdDiagram& d);

}  // namespace delaycode
