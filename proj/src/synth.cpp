#include "delaycode/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "delaycode/error.hpp"
#include "delaycode/features.hpp"
#include "delaycode/models.hpp"

namespace delaycode {

namespace {

bool probability(double p) { return p >= 0.0 && p <= 1.0; }

std::string l1_of(const std::string& code) { return parse_code(code).prefix(1); }
std::string l2_of(const std::string& code) { return parse_code(code).prefix(2); }

}  // namespace

void GeneratorSpec::validate() const {
    if (leaves.empty()) throw SpecError("generator spec has no leaves");
    std::set<std::string> codes;
    std::size_t day0 = 0;
    for (const auto& leaf : leaves) {
        AttributionCode c;
        try {
            c = parse_code(leaf.code);
        } catch (const DataError& e) {
            throw SpecError("leaf code '" + leaf.code + "': " + e.what());
        }
        if (c.depth() != 3) throw SpecError("leaf code '" + leaf.code + "' is not a full three-level code");
        if (!codes.insert(c.condensed()).second) throw SpecError("duplicate leaf '" + leaf.code + "'");
        if (!leaf.day10_only) {
            ++day0;
            if (frequency == ClassFrequency::weights && !(leaf.weight > 0.0))
                throw SpecError("leaf '" + leaf.code + "' needs a positive weight");
        }
        if (!(leaf.numeric_affinity >= 0.0)) throw SpecError("numeric affinity must be non-negative");
    }
    if (day0 == 0) throw SpecError("generator spec has no day-0 leaves");
    if (keywords_per_leaf == 0 || keywords_per_level2 == 0 || keywords_per_level1 == 0 || noise_vocabulary == 0)
        throw SpecError("keyword pools must not be empty");
    for (const auto& leaf : leaves)
        if (!leaf.keywords.empty() && std::any_of(leaf.keywords.begin(), leaf.keywords.end(),
                                                  [](const std::string& w) { return w.empty(); }))
            throw SpecError("leaf '" + leaf.code + "' has an empty keyword");
    for (double p : {w_leaf, w_level2, w_level1, w_sibling, p_stopword, p_train_mention, p_speed_mention,
                     p_revise_level1, p_revise_level2, p_revise_level3, p_text_follows_day10, p_numeric_only,
                     p_dash_level3, min_separation})
        if (!probability(p)) throw SpecError("probabilities must lie in [0, 1]");
    if (w_leaf + w_level2 + w_level1 + w_sibling > 1.0 + 1e-12) throw SpecError("token pool weights exceed one");
    if (!(p_revise_level1 <= p_revise_level2 && p_revise_level2 <= p_revise_level3))
        throw SpecError("revision rates are cumulative: need p1 <= p2 <= p3");
    if (tokens_min < 1 || tokens_max < tokens_min) throw SpecError("need 1 <= tokens_min <= tokens_max");
    if (n_records == 0) throw SpecError("n_records must be positive");
    if (frequency == ClassFrequency::zipf && !(zipf_exponent > 0.0)) throw SpecError("zipf exponent must be positive");
    for (const auto& [prefix, p] : p_novel_revision) {
        if (!probability(p)) throw SpecError("novel revision probability must lie in [0, 1]");
        const bool has = std::any_of(leaves.begin(), leaves.end(),
                                     [&](const LeafSpec& l) { return l.day10_only && l2_of(l.code) == prefix; });
        if (p > 0.0 && !has) throw SpecError("node '" + prefix + "' has no day-10-only leaves");
    }
    // explicit pools under different level-1 codes must stay apart
    for (std::size_t a = 0; a < leaves.size(); ++a) {
        for (std::size_t b = a + 1; b < leaves.size(); ++b) {
            const auto& A = leaves[a].keywords;
            const auto& B = leaves[b].keywords;
            if (A.empty() || B.empty() || l1_of(leaves[a].code) == l1_of(leaves[b].code)) continue;
            const std::set<std::string> sa(A.begin(), A.end());
            std::size_t shared = 0;
            for (const auto& w : std::set<std::string>(B.begin(), B.end())) shared += sa.count(w);
            const double overlap = static_cast<double>(shared) / static_cast<double>(std::min(A.size(), B.size()));
            if (overlap > 1.0 - min_separation + 1e-12)
                throw SpecError("keyword pools of '" + leaves[a].code + "' and '" + leaves[b].code + "' overlap too much");
        }
    }
}

std::vector<LeafSpec> grid_leaves(int n_level1, int n_level2, int n_level3) {
    if (n_level1 < 1 || n_level1 > 5 || n_level2 < 1 || n_level2 > 26 * 26 || n_level3 < 1 || n_level3 > 99)
        throw SpecError("grid shape out of range");
    static constexpr std::string_view order = "DIJOF";
    std::vector<LeafSpec> out;
    for (int a = 0; a < n_level1; ++a) {
        for (int b = 0; b < n_level2; ++b) {
            std::string l2{static_cast<char>('A' + b / 26), static_cast<char>('A' + b % 26)};
            for (int c = 1; c <= n_level3; ++c) {
                char l3[4];
                std::snprintf(l3, sizeof l3, "%02d", c);
                LeafSpec leaf;
                leaf.code = std::string(1, order[static_cast<std::size_t>(a)]) + l2 + " " + l3;
                out.push_back(std::move(leaf));
            }
        }
    }
    return out;
}

GeneratorSpec paper_preset() {
    GeneratorSpec s;
    s.name = kPaperPresetVersion;
    s.n_records = 20000;
    s.seed = 42;
    s.frequency = ClassFrequency::weights;
    auto add = [&](const std::string& l2, std::vector<std::string> l3s, double affinity, double weight = 1.0) {
        for (const auto& l3 : l3s) {
            LeafSpec leaf;
            leaf.code = l2 + " " + l3;
            leaf.weight = weight;
            leaf.numeric_affinity = affinity;
            s.leaves.push_back(std::move(leaf));
        }
    };
    add("DPR", {"03", "04", "05", "-"}, 0.2);
    add("DPS", {"01", "02", "03"}, 0.2);
    add("DPO", {"01", "02"}, 0.2);
    // the under-sampled node: about 1% of rows, most day-10 labels it gains are unseen at day 0
    add("IBT", {"-", "40"}, 0.2, 0.35);
    for (const std::string l3 : {"21", "22", "30"}) {
        LeafSpec leaf;
        leaf.code = "IBT " + l3;
        leaf.day10_only = true;
        s.leaves.push_back(std::move(leaf));
    }
    add("IBÖ", {"01", "02", "03"}, 0.2);
    add("ISA", {"01", "02", "03", "04"}, 0.2);
    add("INF", {"10", "20"}, 0.2);
    // J dominates the counts and nearly all numeric-only texts land there
    add("JPR", {"01", "02", "03", "05", "-"}, 3.0, 2.0);
    add("JPS", {"01", "02"}, 3.0, 2.0);
    add("JIA", {"01", "02", "03"}, 3.0, 2.0);
    add("JDM", {"01", "02"}, 3.0, 2.0);
    add("JUF", {"01", "02", "03"}, 3.0, 2.0);
    add("OMÄ", {"01", "02", "-"}, 0.2);
    add("OOL", {"01", "02"}, 0.2);

    s.p_numeric_only = 8032.0 / 21484.0;
    s.p_revise_level1 = 0.01;
    s.p_revise_level2 = 0.03;
    s.p_revise_level3 = 0.05;
    s.p_novel_revision = {{"IBT", 0.35}};
    s.p_text_follows_day10 = 0.5;
    return s;
}

namespace {

class WordFactory {
public:
    explicit WordFactory(std::mt19937_64& rng) : rng_(rng) {
        for (const auto& w : default_stopwords()) used_.insert(w);
        for (const char* w : {"sth", "km", "trainnr", "tåg"}) used_.insert(w);
    }

    void reserve(const std::vector<std::string>& words) {
        for (const auto& w : words) used_.insert(w);
    }

    std::string next() {
        static const std::vector<std::string> onset = {"b", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r",
                                                       "s", "t", "v", "sk", "st", "tr", "br", "kl", "fl", "gr", "sp", "sv"};
        static const std::vector<std::string> vowel = {"a", "e", "i", "o", "u", "y", "å", "ä", "ö"};
        static const std::vector<std::string> coda = {"", "n", "r", "l", "s", "t", "k", "ng", "ck", "rd", "ls"};
        for (;;) {
            std::string w;
            const int syllables = std::uniform_int_distribution<int>(2, 3)(rng_);
            for (int i = 0; i < syllables; ++i) {
                w += onset[pick(onset.size())];
                w += vowel[pick(vowel.size())];
                if (i + 1 == syllables || pick(3) == 0) w += coda[pick(coda.size())];
            }
            if (used_.insert(w).second) return w;
        }
    }

    std::vector<std::string> pool(std::size_t n) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < n; ++i) out.push_back(next());
        return out;
    }

private:
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    std::mt19937_64& rng_;
    std::set<std::string> used_;
};

/// Largest-remainder allocation of `total` proportional to `weights`, each capped at `caps` when given.
std::vector<std::size_t> allocate(const std::vector<double>& weights, std::size_t total,
                                  const std::vector<std::size_t>* caps = nullptr) {
    const std::size_t n = weights.size();
    std::vector<std::size_t> out(n, 0);
    std::vector<bool> full(n, false);
    std::size_t remaining = total;
    while (remaining > 0) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (!full[i]) sum += weights[i];
        if (!(sum > 0.0)) break;
        std::vector<std::pair<double, std::size_t>> rema;
        std::size_t given = 0;
        std::vector<std::size_t> add(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (full[i]) continue;
            const double share = static_cast<double>(remaining) * weights[i] / sum;
            add[i] = static_cast<std::size_t>(std::floor(share));
            given += add[i];
            rema.emplace_back(-(share - std::floor(share)), i);
        }
        std::sort(rema.begin(), rema.end());
        for (std::size_t t = 0; t < rema.size() && given < remaining; ++t, ++given) ++add[rema[t].second];
        bool capped = false;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t v = out[i] + add[i];
            if (caps && v >= (*caps)[i]) {
                if (v > (*caps)[i]) capped = true;
                v = (*caps)[i];
                full[i] = true;
            }
            remaining -= v - out[i];
            out[i] = v;
        }
        if (!capped) break;
    }
    return out;
}

std::string train_number(std::mt19937_64& rng) {
    return std::to_string(std::uniform_int_distribution<int>(100, 99999)(rng));
}

std::string numeric_text(std::mt19937_64& rng) {
    static const std::vector<std::string> sep = {" ", " / ", ", ", " - "};
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    std::string out;
    for (int i = 0; i < n; ++i) {
        if (i) out += sep[std::uniform_int_distribution<std::size_t>(0, sep.size() - 1)(rng)];
        out += train_number(rng);
    }
    return out;
}

std::string speed_phrase(std::mt19937_64& rng) {
    static const std::vector<int> speeds = {10, 20, 30, 40, 50, 70, 80, 100};
    const int v = speeds[std::uniform_int_distribution<std::size_t>(0, speeds.size() - 1)(rng)];
    switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0: return "sth " + std::to_string(v) + " km";
        case 1: return "STH" + std::to_string(v) + "km";
        case 2: return "sth " + std::to_string(v);
        default: return "Sth " + std::to_string(v) + "km/h";
    }
}

std::string capitalise(const std::string& w) {
    if (w.empty() || w[0] < 'a' || w[0] > 'z') return w;
    std::string out = w;
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
    return out;
}

struct Pools {
    std::map<std::string, std::vector<std::string>> leaf, level2, level1;
    std::vector<std::string> noise;
    std::vector<std::string> stopwords;
};

const std::vector<std::string>& pick_pool(const Pools& pools, const GeneratorSpec& spec, const AttributionCode& code,
                                          const std::vector<std::string>& siblings, std::mt19937_64& rng) {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double edge = spec.w_leaf;
    if (u < edge) return pools.leaf.at(code.condensed());
    edge += spec.w_level2;
    if (u < edge) return pools.level2.at(code.prefix(2));
    edge += spec.w_level1;
    if (u < edge) return pools.level1.at(code.prefix(1));
    edge += spec.w_sibling;
    if (u < edge && !siblings.empty())
        return pools.leaf.at(siblings[std::uniform_int_distribution<std::size_t>(0, siblings.size() - 1)(rng)]);
    return pools.noise;
}

std::string content_text(const Pools& pools, const GeneratorSpec& spec, const AttributionCode& code,
                         const std::vector<std::string>& siblings, std::mt19937_64& rng) {
    const int n = std::uniform_int_distribution<int>(spec.tokens_min, spec.tokens_max)(rng);
    std::vector<std::string> words;
    std::bernoulli_distribution stop(spec.p_stopword);
    for (int i = 0; i < n; ++i) {
        const auto& pool = pick_pool(pools, spec, code, siblings, rng);
        words.push_back(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
        if (stop(rng))
            words.push_back(
                pools.stopwords[std::uniform_int_distribution<std::size_t>(0, pools.stopwords.size() - 1)(rng)]);
    }
    auto insert_at_random = [&](std::string phrase) {
        const auto at = std::uniform_int_distribution<std::size_t>(0, words.size())(rng);
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), std::move(phrase));
    };
    if (std::bernoulli_distribution(spec.p_train_mention)(rng)) insert_at_random("tåg " + train_number(rng));
    if (std::bernoulli_distribution(spec.p_speed_mention)(rng)) insert_at_random(speed_phrase(rng));
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out += std::bernoulli_distribution(0.08)(rng) ? ", " : " ";
        out += i == 0 ? capitalise(words[i]) : words[i];
    }
    out += ".";
    return out;
}

}  // namespace

GeneratedCorpus generate(const GeneratorSpec& spec) {
    spec.validate();
    GeneratedCorpus out;
    out.spec = spec;
    std::mt19937_64 rng(mix_seed(spec.seed, hash_string("synth")));

    std::vector<const LeafSpec*> day0, day10_only;
    for (const auto& leaf : spec.leaves) (leaf.day10_only ? day10_only : day0).push_back(&leaf);

    // vocabulary
    Pools pools;
    for (const auto& w : default_stopwords()) pools.stopwords.push_back(w);
    std::sort(pools.stopwords.begin(), pools.stopwords.end());
    WordFactory words(rng);
    for (const auto& leaf : spec.leaves) words.reserve(leaf.keywords);
    pools.noise = words.pool(spec.noise_vocabulary);
    std::set<std::string> l1s, l2s;
    for (const auto& leaf : spec.leaves) {
        const AttributionCode c = parse_code(leaf.code);
        l1s.insert(c.prefix(1));
        l2s.insert(c.prefix(2));
    }
    for (const auto& p : l1s) pools.level1[p] = words.pool(spec.keywords_per_level1);
    for (const auto& p : l2s) pools.level2[p] = words.pool(spec.keywords_per_level2);
    for (const auto& leaf : spec.leaves) {
        const std::string code = parse_code(leaf.code).condensed();
        pools.leaf[code] = leaf.keywords.empty() ? words.pool(spec.keywords_per_leaf) : leaf.keywords;
    }
    out.keyword_pools = pools.leaf;

    // class sizes
    std::vector<double> weights;
    std::vector<std::size_t> permutation(day0.size());
    std::iota(permutation.begin(), permutation.end(), 0);
    std::shuffle(permutation.begin(), permutation.end(), rng);
    for (std::size_t i = 0; i < day0.size(); ++i) {
        switch (spec.frequency) {
            case ClassFrequency::balanced: weights.push_back(1.0); break;
            case ClassFrequency::zipf:
                weights.push_back(1.0 / std::pow(static_cast<double>(permutation[i] + 1), spec.zipf_exponent));
                break;
            default: weights.push_back(day0[i]->weight);
        }
    }
    const std::vector<std::size_t> counts = allocate(weights, spec.n_records);

    std::vector<AttributionCode> leaf_codes;
    for (const LeafSpec* l : day0) leaf_codes.push_back(parse_code(l->code));

    // numeric-only quota per leaf, proportional to size times affinity
    std::vector<double> numeric_weight;
    for (std::size_t i = 0; i < day0.size(); ++i)
        numeric_weight.push_back(static_cast<double>(counts[i]) * day0[i]->numeric_affinity);
    const auto numeric_target = static_cast<std::size_t>(std::llround(spec.p_numeric_only * static_cast<double>(spec.n_records)));
    const std::vector<std::size_t> numeric_counts = allocate(numeric_weight, numeric_target, &counts);

    struct Row {
        std::size_t leaf;
        bool numeric = false;
        AttributionCode day0, day10;
        AttributionCode text_source;
    };
    std::vector<Row> rows;
    for (std::size_t i = 0; i < day0.size(); ++i) {
        std::vector<bool> numeric(counts[i], false);
        std::fill(numeric.begin(), numeric.begin() + static_cast<std::ptrdiff_t>(numeric_counts[i]), true);
        std::shuffle(numeric.begin(), numeric.end(), rng);
        for (std::size_t r = 0; r < counts[i]; ++r)
            rows.push_back(Row{i, numeric[r], leaf_codes[i], leaf_codes[i], leaf_codes[i]});
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (rows[r].numeric) out.numeric_only_rows.push_back(r);

    // tree of day-0 leaves for sibling draws
    std::map<std::string, std::map<std::string, std::vector<std::string>>> tree;
    for (const auto& c : leaf_codes) tree[c.prefix(1)][c.prefix(2)].push_back(c.condensed());
    std::map<std::string, std::vector<std::string>> novel_leaves;
    for (const LeafSpec* l : day10_only) novel_leaves[l2_of(l->code)].push_back(parse_code(l->code).condensed());

    auto uniform_index = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    auto any_leaf_under_l1 = [&](const std::string& l1) {
        const auto& l2map = tree.at(l1);
        auto it = l2map.begin();
        std::advance(it, static_cast<std::ptrdiff_t>(uniform_index(l2map.size())));
        return it->second[uniform_index(it->second.size())];
    };

    std::vector<bool> revised(rows.size(), false);
    std::size_t novel_total = 0;
    for (const auto& [prefix, p] : spec.p_novel_revision) {
        if (p <= 0.0) continue;
        std::vector<std::size_t> members;
        for (std::size_t r = 0; r < rows.size(); ++r)
            if (rows[r].day0.prefix(2) == prefix) members.push_back(r);
        std::shuffle(members.begin(), members.end(), rng);
        const auto k = static_cast<std::size_t>(std::llround(p * static_cast<double>(members.size())));
        const auto& targets = novel_leaves.at(prefix);
        for (std::size_t t = 0; t < k; ++t) {
            Row& row = rows[members[t]];
            row.day10 = parse_code(targets[uniform_index(targets.size())]);
            revised[members[t]] = true;
            out.revisions.push_back({members[t], row.day0.condensed(), row.day10.condensed(), 3, true});
        }
        novel_total += k;
    }

    const double n = static_cast<double>(rows.size());
    const auto quota1 = static_cast<std::size_t>(std::llround(spec.p_revise_level1 * n));
    const auto quota2 = static_cast<std::size_t>(std::llround((spec.p_revise_level2 - spec.p_revise_level1) * n));
    const auto q3 = static_cast<std::ptrdiff_t>(std::llround((spec.p_revise_level3 - spec.p_revise_level2) * n)) -
                    static_cast<std::ptrdiff_t>(novel_total);
    const auto quota3 = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, q3));

    std::vector<std::size_t> order(rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t taken1 = 0, taken2 = 0, taken3 = 0;
    for (std::size_t r : order) {
        if (revised[r]) continue;
        Row& row = rows[r];
        const std::string l1 = row.day0.prefix(1), l2 = row.day0.prefix(2), full = row.day0.condensed();
        std::string target;
        int level = 0;
        if (taken1 < quota1 && tree.size() >= 2) {
            std::vector<std::string> others;
            for (const auto& [k, v] : tree)
                if (k != l1) others.push_back(k);
            target = any_leaf_under_l1(others[uniform_index(others.size())]);
            level = 1;
            ++taken1;
        } else if (taken2 < quota2 && tree.at(l1).size() >= 2) {
            std::vector<std::string> others;
            for (const auto& [k, v] : tree.at(l1))
                if (k != l2) others.push_back(k);
            const auto& leaves = tree.at(l1).at(others[uniform_index(others.size())]);
            target = leaves[uniform_index(leaves.size())];
            level = 2;
            ++taken2;
        } else if (taken3 < quota3 && tree.at(l1).at(l2).size() >= 2) {
            std::vector<std::string> others;
            for (const auto& c : tree.at(l1).at(l2))
                if (c != full) others.push_back(c);
            target = others[uniform_index(others.size())];
            level = 3;
            ++taken3;
        } else {
            if (taken1 >= quota1 && taken2 >= quota2 && taken3 >= quota3) break;
            continue;
        }
        row.day10 = parse_code(target);
        revised[r] = true;
        if (std::bernoulli_distribution(spec.p_text_follows_day10)(rng)) row.text_source = row.day10;
        out.revisions.push_back({r, full, target, level, false});
    }

    // operators who could not pin level 3 record "-" at day 0; the review fills it in
    if (spec.p_dash_level3 > 0.0) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            Row& row = rows[r];
            if (row.day0.level3 == "-" || revised[r] || !std::bernoulli_distribution(spec.p_dash_level3)(rng)) continue;
            row.day0.level3 = "-";
            out.revisions.push_back({r, row.day0.condensed(), row.day10.condensed(), 3, false});
        }
    }
    std::sort(out.revisions.begin(), out.revisions.end(),
              [](const Revision& a, const Revision& b) { return a.row < b.row; });

    std::map<std::string, std::vector<std::string>> siblings;
    for (const auto& [l1, l2map] : tree)
        for (const auto& [l2, leaves] : l2map)
            for (const auto& leaf : leaves)
                for (const auto& other : leaves)
                    if (other != leaf) siblings[leaf].push_back(other);

    out.records.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Row& row = rows[r];
        EventRecord rec;
        char id[16];
        std::snprintf(id, sizeof id, "E%06zu", r + 1);
        rec.event_id = id;
        const std::string source = row.text_source.condensed();
        rec.raw_text = row.numeric ? numeric_text(rng) : content_text(pools, spec, row.text_source, siblings[source], rng);
        rec.normalized_text = normalize_text(rec.raw_text);
        rec.numeric_only = is_numeric_only(rec.normalized_text);
        rec.code_day0 = row.day0;
        rec.code_day10 = row.day10;
        out.records.push_back(std::move(rec));
    }
    return out;
}

nlohmann::json to_json(const GeneratorSpec& s) {
    nlohmann::json leaves = nlohmann::json::array();
    for (const auto& l : s.leaves)
        leaves.push_back({{"code", l.code},
                          {"weight", l.weight},
                          {"day10_only", l.day10_only},
                          {"numeric_affinity", l.numeric_affinity},
                          {"keywords", l.keywords}});
    const char* freq = s.frequency == ClassFrequency::balanced ? "balanced"
                       : s.frequency == ClassFrequency::zipf   ? "zipf"
                                                               : "weights";
    return {{"name", s.name},
            {"leaves", leaves},
            {"frequency", freq},
            {"zipf_exponent", s.zipf_exponent},
            {"keywords_per_leaf", s.keywords_per_leaf},
            {"keywords_per_level2", s.keywords_per_level2},
            {"keywords_per_level1", s.keywords_per_level1},
            {"noise_vocabulary", s.noise_vocabulary},
            {"min_separation", s.min_separation},
            {"w_leaf", s.w_leaf},
            {"w_level2", s.w_level2},
            {"w_level1", s.w_level1},
            {"w_sibling", s.w_sibling},
            {"tokens_min", s.tokens_min},
            {"tokens_max", s.tokens_max},
            {"p_stopword", s.p_stopword},
            {"p_train_mention", s.p_train_mention},
            {"p_speed_mention", s.p_speed_mention},
            {"p_revise_level1", s.p_revise_level1},
            {"p_revise_level2", s.p_revise_level2},
            {"p_revise_level3", s.p_revise_level3},
            {"p_novel_revision", s.p_novel_revision},
            {"p_text_follows_day10", s.p_text_follows_day10},
            {"p_numeric_only", s.p_numeric_only},
            {"p_dash_level3", s.p_dash_level3},
            {"n_records", s.n_records},
            {"seed", s.seed}};
}

GeneratorSpec generator_spec_from_json(const nlohmann::json& j) {
    GeneratorSpec s;
    try {
        s.name = j.value("name", s.name);
        for (const auto& l : j.at("leaves")) {
            LeafSpec leaf;
            leaf.code = l.at("code").get<std::string>();
            leaf.weight = l.value("weight", 1.0);
            leaf.day10_only = l.value("day10_only", false);
            leaf.numeric_affinity = l.value("numeric_affinity", 1.0);
            leaf.keywords = l.value("keywords", std::vector<std::string>{});
            s.leaves.push_back(std::move(leaf));
        }
        const std::string freq = j.value("frequency", std::string("weights"));
        if (freq == "balanced") s.frequency = ClassFrequency::balanced;
        else if (freq == "zipf") s.frequency = ClassFrequency::zipf;
        else if (freq == "weights") s.frequency = ClassFrequency::weights;
        else throw SpecError("unknown class frequency '" + freq + "'");
        s.zipf_exponent = j.value("zipf_exponent", s.zipf_exponent);
        s.keywords_per_leaf = j.value("keywords_per_leaf", s.keywords_per_leaf);
        s.keywords_per_level2 = j.value("keywords_per_level2", s.keywords_per_level2);
        s.keywords_per_level1 = j.value("keywords_per_level1", s.keywords_per_level1);
        s.noise_vocabulary = j.value("noise_vocabulary", s.noise_vocabulary);
        s.min_separation = j.value("min_separation", s.min_separation);
        s.w_leaf = j.value("w_leaf", s.w_leaf);
        s.w_level2 = j.value("w_level2", s.w_level2);
        s.w_level1 = j.value("w_level1", s.w_level1);
        s.w_sibling = j.value("w_sibling", s.w_sibling);
        s.tokens_min = j.value("tokens_min", s.tokens_min);
        s.tokens_max = j.value("tokens_max", s.tokens_max);
        s.p_stopword = j.value("p_stopword", s.p_stopword);
        s.p_train_mention = j.value("p_train_mention", s.p_train_mention);
        s.p_speed_mention = j.value("p_speed_mention", s.p_speed_mention);
        s.p_revise_level1 = j.value("p_revise_level1", s.p_revise_level1);
        s.p_revise_level2 = j.value("p_revise_level2", s.p_revise_level2);
        s.p_revise_level3 = j.value("p_revise_level3", s.p_revise_level3);
        s.p_novel_revision = j.value("p_novel_revision", s.p_novel_revision);
        s.p_text_follows_day10 = j.value("p_text_follows_day10", s.p_text_follows_day10);
        s.p_numeric_only = j.value("p_numeric_only", s.p_numeric_only);
        s.p_dash_level3 = j.value("p_dash_level3", s.p_dash_level3);
        s.n_records = j.value("n_records", s.n_records);
        s.seed = j.value("seed", s.seed);
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed generator spec: ") + e.what());
    }
    s.validate();
    return s;
}

}  // namespace delaycode
