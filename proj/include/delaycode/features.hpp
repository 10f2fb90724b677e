#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <json.hpp>

namespace delaycode {

using FeatureVector = Eigen::SparseVector<double>;
using FeatureMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class TermRanking { total_count, doc_freq };

struct TfidfConfig {
    std::size_t ngram_min = 1;
    std::size_t ngram_max = 3;
    std::size_t max_features = 1000;
    TermRanking ranking = TermRanking::total_count;
    std::unordered_set<std::string> stopwords;
};

/// Fitted vocabulary with smoothed idf weights, idf = ln((1+N)/(1+df)) + 1.
struct TfidfModel {
    std::vector<std::string> vocabulary;  // column index order
    std::unordered_map<std::string, int> index;
    Eigen::VectorXd idf;
    TfidfConfig config;
    std::size_t n_documents = 0;

    std::size_t dimension() const noexcept { return vocabulary.size(); }
};

std::unordered_set<std::string> load_stopwords(const std::string& path);

/// The bundled Swedish list.
const std::unordered_set<std::string>& default_stopwords();

/// Contiguous n-grams of sizes [ngram_min, ngram_max] over the non-stopword tokens.
std::vector<std::string> extract_ngrams(std::string_view normalized, const TfidfConfig& config);

TfidfModel fit_tfidf(const std::vector<std::string>& texts, const TfidfConfig& config);

/// L2-normalised tf*idf vector; zero vector when no n-gram is in the vocabulary.
FeatureVector transform(const TfidfModel& model, std::string_view text);

FeatureMatrix transform_all(const TfidfModel& model, const std::vector<std::string>& texts);

nlohmann::json to_json(const TfidfModel& model);
TfidfModel tfidf_from_json(const nlohmann::json& j);

}  // namespace delaycode
