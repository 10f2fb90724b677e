#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "delaycode/models.hpp"

namespace delaycode {

/// Base classifier plus the sorted nonconformity scores of its calibration set.
/// Nonconformity of (x, y) is 1 - score(y | x).
struct CalibratedModel {
    Classifier base;
    LabelSpace labels;
    std::vector<double> calibration_scores;  // ascending
};

struct PredictionSet {
    LabelSpace labels;
    Eigen::VectorXd p_values;
    Eigen::VectorXd scores;
    double epsilon = 0.05;
    std::vector<std::string> set;  // labels with p > epsilon, label order
    std::string point;

    double p_value(const std::string& label) const;
    bool contains(const std::string& label) const;
};

/// Throws InsufficientData for an empty calibration set and UnknownLabel for
/// labels outside `labels`.
CalibratedModel calibrate(Classifier base, LabelSpace labels, const std::vector<FeatureVector>& X_cal,
                          const std::vector<std::string>& y_cal);

/// Constant predictors need no calibration; every p-value is one.
CalibratedModel uncalibrated_constant(LabelSpace labels);

/// (#{alpha_i >= alpha_star} + 1) / (n + 1) over an ascending score list.
double conformal_p_value(const std::vector<double>& sorted_scores, double alpha_star);

double p_value(const CalibratedModel& cal, const FeatureVector& x, const std::string& candidate);

/// p-values for every label from one scoring pass.
Eigen::VectorXd p_values(const CalibratedModel& cal, const Eigen::VectorXd& scores);

/// Throws ConfigError unless 0 < epsilon < 1.
PredictionSet predict_set(const CalibratedModel& cal, const FeatureVector& x, double epsilon);
PredictionSet prediction_set_from_scores(const CalibratedModel& cal, const Eigen::VectorXd& scores, double epsilon);

nlohmann::json calibration_to_json(const CalibratedModel& cal);

}  // namespace delaycode
