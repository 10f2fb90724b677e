#include "delaycode/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "delaycode/error.hpp"
#include "delaycode/text.hpp"

namespace delaycode {

std::unordered_set<std::string> load_stopwords(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open stopword list '" + path + "'");
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        for (auto& tok : split_whitespace(line)) {
            if (tok.front() == '#') break;
            words.insert(normalize_text(tok));
        }
    }
    return words;
}

const std::unordered_set<std::string>& default_stopwords() {
    static const std::unordered_set<std::string> words = load_stopwords(DELAYCODE_DEFAULT_STOPWORDS);
    return words;
}

std::vector<std::string> extract_ngrams(std::string_view normalized, const TfidfConfig& config) {
    std::vector<std::string> tokens;
    for (auto& tok : split_whitespace(normalized)) {
        if (!config.stopwords.contains(tok)) tokens.push_back(std::move(tok));
    }
    std::vector<std::string> grams;
    const std::size_t lo = std::max<std::size_t>(1, config.ngram_min);
    for (std::size_t n = lo; n <= config.ngram_max; ++n) {
        if (tokens.size() < n) break;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string gram = tokens[i];
            for (std::size_t k = 1; k < n; ++k) {
                gram.push_back(' ');
                gram += tokens[i + k];
            }
            grams.push_back(std::move(gram));
        }
    }
    return grams;
}

TfidfModel fit_tfidf(const std::vector<std::string>& texts, const TfidfConfig& config) {
    struct Stat {
        std::size_t count = 0;
        std::size_t df = 0;
        std::size_t last_doc = static_cast<std::size_t>(-1);
    };
    std::unordered_map<std::string, Stat> stats;
    for (std::size_t d = 0; d < texts.size(); ++d) {
        for (auto& gram : extract_ngrams(texts[d], config)) {
            Stat& s = stats[std::move(gram)];
            ++s.count;
            if (s.last_doc != d) {
                ++s.df;
                s.last_doc = d;
            }
        }
    }
    if (stats.empty()) throw EmptyVocabulary("no n-gram survives stopword removal");

    std::vector<std::pair<std::string, Stat>> ranked(stats.begin(), stats.end());
    const auto key = [&](const Stat& s) { return config.ranking == TermRanking::total_count ? s.count : s.df; };
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (key(a.second) != key(b.second)) return key(a.second) > key(b.second);
        return a.first < b.first;
    });
    if (ranked.size() > config.max_features) ranked.resize(config.max_features);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    TfidfModel model;
    model.config = config;
    model.n_documents = texts.size();
    model.idf.resize(static_cast<Eigen::Index>(ranked.size()));
    const double n = static_cast<double>(texts.size());
    for (std::size_t j = 0; j < ranked.size(); ++j) {
        model.index.emplace(ranked[j].first, static_cast<int>(j));
        model.idf[static_cast<Eigen::Index>(j)] =
            std::log((1.0 + n) / (1.0 + static_cast<double>(ranked[j].second.df))) + 1.0;
        model.vocabulary.push_back(std::move(ranked[j].first));
    }
    return model;
}

FeatureVector transform(const TfidfModel& model, std::string_view text) {
    std::map<int, double> tf;
    for (const auto& gram : extract_ngrams(text, model.config)) {
        auto it = model.index.find(gram);
        if (it != model.index.end()) tf[it->second] += 1.0;
    }
    FeatureVector v(static_cast<Eigen::Index>(model.dimension()));
    double norm2 = 0.0;
    for (auto& [j, w] : tf) {
        w *= model.idf[j];
        norm2 += w * w;
    }
    if (norm2 == 0.0) return v;
    const double inv = 1.0 / std::sqrt(norm2);
    v.reserve(static_cast<Eigen::Index>(tf.size()));
    for (const auto& [j, w] : tf) v.insertBack(j) = w * inv;
    return v;
}

FeatureMatrix transform_all(const TfidfModel& model, const std::vector<std::string>& texts) {
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        const FeatureVector v = transform(model, texts[i]);
        for (FeatureVector::InnerIterator it(v); it; ++it)
            triplets.emplace_back(static_cast<int>(i), static_cast<int>(it.index()), it.value());
    }
    FeatureMatrix X(static_cast<Eigen::Index>(texts.size()), static_cast<Eigen::Index>(model.dimension()));
    X.setFromTriplets(triplets.begin(), triplets.end());
    return X;
}

nlohmann::json to_json(const TfidfModel& model) {
    std::vector<std::string> stop(model.config.stopwords.begin(), model.config.stopwords.end());
    std::sort(stop.begin(), stop.end());
    return {
        {"vocabulary", model.vocabulary},
        {"idf", std::vector<double>(model.idf.data(), model.idf.data() + model.idf.size())},
        {"n_documents", model.n_documents},
        {"config",
         {{"ngram_min", model.config.ngram_min},
          {"ngram_max", model.config.ngram_max},
          {"max_features", model.config.max_features},
          {"ranking", model.config.ranking == TermRanking::total_count ? "total_count" : "doc_freq"},
          {"idf_formula", "ln((1+N)/(1+df))+1"},
          {"tf", "raw_count"},
          {"norm", "l2"},
          {"stopwords", stop}}},
    };
}

TfidfModel tfidf_from_json(const nlohmann::json& j) {
    TfidfModel model;
    const auto& c = j.at("config");
    model.config.ngram_min = c.at("ngram_min").get<std::size_t>();
    model.config.ngram_max = c.at("ngram_max").get<std::size_t>();
    model.config.max_features = c.at("max_features").get<std::size_t>();
    model.config.ranking = c.at("ranking").get<std::string>() == "doc_freq" ? TermRanking::doc_freq
                                                                            : TermRanking::total_count;
    for (const auto& w : c.at("stopwords")) model.config.stopwords.insert(w.get<std::string>());
    model.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    const auto idf = j.at("idf").get<std::vector<double>>();
    if (idf.size() != model.vocabulary.size()) throw DataError("tfidf: idf and vocabulary sizes differ");
    model.idf = Eigen::Map<const Eigen::VectorXd>(idf.data(), static_cast<Eigen::Index>(idf.size()));
    model.n_documents = j.at("n_documents").get<std::size_t>();
    for (std::size_t i = 0; i < model.vocabulary.size(); ++i)
        model.index.emplace(model.vocabulary[i], static_cast<int>(i));
    return model;
}

}  // namespace delaycode
