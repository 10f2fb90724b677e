#include "delaycode/cd_diagram.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "delaycode/error.hpp"

namespace delaycode {

std::vector<std::vector<std::size_t>> cd_groups(const std::vector<double>& r, double cd) {
    std::vector<std::vector<std::size_t>> out;
    std::size_t last_end = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        std::size_t j = i;
        while (j + 1 < r.size() && r[j + 1] - r[i] < cd) ++j;
        // a run ending where the previous one ended is contained in it
        if (j > i && (out.empty() || j > last_end)) {
            std::vector<std::size_t> g(j - i + 1);
            std::iota(g.begin(), g.end(), i);
            out.push_back(std::move(g));
            last_end = j;
        }
    }
    return out;
}

CdDiagram make_cd_diagram(std::vector<std::string> names, std::vector<double> ranks, double cd, double alpha,
                          std::size_t n_blocks) {
    if (names.size() != ranks.size()) throw LengthMismatch("names and ranks differ in length");
    std::vector<std::size_t> order(names.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return ranks[a] != ranks[b] ? ranks[a] < ranks[b] : names[a] < names[b];
    });
    CdDiagram d;
    d.cd = cd;
    d.alpha = alpha;
    d.n_blocks = n_blocks;
    for (std::size_t i : order) {
        d.treatments.push_back(names[i]);
        d.ranks.push_back(ranks[i]);
    }
    for (const auto& g : cd_groups(d.ranks, cd)) {
        std::vector<std::string> members;
        for (std::size_t i : g) members.push_back(d.treatments[i]);
        d.groups.push_back(std::move(members));
    }
    return d;
}

CdDiagram make_cd_diagram(const TestResult& nemenyi, double alpha) {
    auto it = nemenyi.critical_difference.find(alpha);
    if (it == nemenyi.critical_difference.end())
        throw ConfigError("no critical difference computed for this alpha");
    std::vector<double> ranks(nemenyi.mean_ranks.data(), nemenyi.mean_ranks.data() + nemenyi.mean_ranks.size());
    return make_cd_diagram(nemenyi.treatments, ranks, it->second, alpha, nemenyi.n_blocks);
}

nlohmann::json to_json(const CdDiagram& d) {
    nlohmann::json t = nlohmann::json::array();
    for (std::size_t i = 0; i < d.treatments.size(); ++i) t.push_back({{"name", d.treatments[i]}, {"rank", d.ranks[i]}});
    return {{"treatments", t}, {"cd", d.cd}, {"alpha", d.alpha}, {"n_blocks", d.n_blocks}, {"groups", d.groups}};
}

namespace {

std::string esc(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string num(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.2f", v);
    return b;
}

}  // namespace

std::string render_svg(const CdDiagram& d) {
    const std::size_t k = d.treatments.size();
    const double width = 600, left = 60, right = 540, axis_y = 60;
    const double lo = 1.0, hi = std::max(2.0, static_cast<double>(k));
    auto x = [&](double r) { return left + (r - lo) / (hi - lo) * (right - left); };
    const double height = 120 + 22.0 * static_cast<double>(k) + 12.0 * static_cast<double>(d.groups.size());

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<line x1=\"" << left << "\" y1=\"" << axis_y << "\" x2=\"" << right << "\" y2=\"" << axis_y
      << "\" stroke=\"black\"/>\n";
    for (int r = 1; r <= static_cast<int>(hi); ++r) {
        s << "<line x1=\"" << num(x(r)) << "\" y1=\"" << axis_y - 5 << "\" x2=\"" << num(x(r)) << "\" y2=\"" << axis_y
          << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << num(x(r)) << "\" y=\"" << axis_y - 10 << "\" text-anchor=\"middle\">" << r << "</text>\n";
    }
    // CD bar above the axis
    s << "<line x1=\"" << num(x(lo)) << "\" y1=\"20\" x2=\"" << num(x(std::min(hi, lo + d.cd))) << "\" y2=\"20\" stroke=\"black\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << num(x(lo)) << "\" y=\"14\">CD = " << num(d.cd) << "</text>\n";

    double y = axis_y + 30;
    for (std::size_t i = 0; i < k; ++i, y += 22) {
        const bool left_side = i < (k + 1) / 2;
        const double tx = left_side ? left - 10 : right + 10;
        s << "<polyline fill=\"none\" stroke=\"black\" points=\"" << num(x(d.ranks[i])) << "," << axis_y << " "
          << num(x(d.ranks[i])) << "," << num(y) << " " << num(tx) << "," << num(y) << "\"/>\n";
        s << "<text x=\"" << num(tx + (left_side ? -4 : 4)) << "\" y=\"" << num(y + 4) << "\" text-anchor=\""
          << (left_side ? "end" : "start") << "\">" << esc(d.treatments[i]) << " (" << num(d.ranks[i]) << ")</text>\n";
    }
    double gy = axis_y + 12;
    for (const auto& g : d.groups) {
        auto first = std::find(d.treatments.begin(), d.treatments.end(), g.front()) - d.treatments.begin();
        auto last = std::find(d.treatments.begin(), d.treatments.end(), g.back()) - d.treatments.begin();
        s << "<line x1=\"" << num(x(d.ranks[static_cast<std::size_t>(first)]) - 3) << "\" y1=\"" << num(gy) << "\" x2=\""
          << num(x(d.ranks[static_cast<std::size_t>(last)]) + 3) << "\" y2=\"" << num(gy)
          << "\" stroke=\"black\" stroke-width=\"3\"/>\n";
        gy += 8;
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace delaycode
