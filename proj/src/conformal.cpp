#include "delaycode/conformal.hpp"

#include <algorithm>

#include "delaycode/error.hpp"

namespace delaycode {

double PredictionSet::p_value(const std::string& label) const {
    const int i = labels.index_of(label);
    if (i < 0) throw UnknownLabel("label '" + label + "' is not in the label space");
    return p_values[i];
}

bool PredictionSet::contains(const std::string& label) const {
    return std::find(set.begin(), set.end(), label) != set.end();
}

CalibratedModel calibrate(Classifier base, LabelSpace labels, const std::vector<FeatureVector>& X_cal,
                          const std::vector<std::string>& y_cal) {
    if (X_cal.empty()) throw InsufficientData("calibration set is empty");
    if (X_cal.size() != y_cal.size()) throw LengthMismatch("calibration features and labels differ in length");
    const std::vector<int> y = labels.encode(y_cal);
    CalibratedModel cal{std::move(base), std::move(labels), {}};
    cal.calibration_scores.reserve(X_cal.size());
    for (std::size_t i = 0; i < X_cal.size(); ++i) {
        const Eigen::VectorXd s = predict_scores(cal.base, X_cal[i]);
        cal.calibration_scores.push_back(1.0 - s[y[i]]);
    }
    std::sort(cal.calibration_scores.begin(), cal.calibration_scores.end());
    return cal;
}

CalibratedModel uncalibrated_constant(LabelSpace labels) {
    const int n = static_cast<int>(labels.size());
    return CalibratedModel{ConstantModel{n, 0}, std::move(labels), {}};
}

double conformal_p_value(const std::vector<double>& sorted_scores, double alpha_star) {
    const auto first = std::lower_bound(sorted_scores.begin(), sorted_scores.end(), alpha_star);
    const auto at_least = static_cast<double>(sorted_scores.end() - first);
    return (at_least + 1.0) / (static_cast<double>(sorted_scores.size()) + 1.0);
}

Eigen::VectorXd p_values(const CalibratedModel& cal, const Eigen::VectorXd& scores) {
    Eigen::VectorXd p(scores.size());
    for (Eigen::Index i = 0; i < scores.size(); ++i) p[i] = conformal_p_value(cal.calibration_scores, 1.0 - scores[i]);
    return p;
}

double p_value(const CalibratedModel& cal, const FeatureVector& x, const std::string& candidate) {
    const int i = cal.labels.index_of(candidate);
    if (i < 0) throw UnknownLabel("label '" + candidate + "' is not in the label space");
    const Eigen::VectorXd s = predict_scores(cal.base, x);
    return conformal_p_value(cal.calibration_scores, 1.0 - s[i]);
}

PredictionSet prediction_set_from_scores(const CalibratedModel& cal, const Eigen::VectorXd& scores, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
    PredictionSet out;
    out.labels = cal.labels;
    out.scores = scores;
    out.p_values = p_values(cal, scores);
    out.epsilon = epsilon;
    Eigen::Index best = 0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (out.p_values[i] > epsilon) out.set.push_back(cal.labels[static_cast<std::size_t>(i)]);
        // ties: higher raw score, then earlier (lexicographically smaller) label
        if (out.p_values[i] > out.p_values[best] ||
            (out.p_values[i] == out.p_values[best] && scores[i] > scores[best]))
            best = i;
    }
    out.point = cal.labels[static_cast<std::size_t>(best)];
    return out;
}

PredictionSet predict_set(const CalibratedModel& cal, const FeatureVector& x, double epsilon) {
    return prediction_set_from_scores(cal, predict_scores(cal.base, x), epsilon);
}

nlohmann::json calibration_to_json(const CalibratedModel& cal) {
    return {{"nonconformity", "1 - score(label)"},
            {"p_value", "(count(alpha_i >= alpha) + 1) / (n + 1)"},
            {"scores", cal.calibration_scores}};
}

}  // namespace delaycode
