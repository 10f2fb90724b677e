#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "delaycode/conformal.hpp"
#include "delaycode/error.hpp"
#include "delaycode/node_model.hpp"
#include "delaycode/synth.hpp"

using namespace delaycode;

namespace {

// Two classes; the score of class B is sigmoid(x).
Classifier sigmoid_model() {
    LinearSvmModel m;
    m.weights = Eigen::MatrixXd::Zero(2, 1);
    m.weights(1, 0) = 1.0;
    m.bias = Eigen::VectorXd::Zero(2);
    return m;
}

FeatureVector scalar(double v) {
    FeatureVector x(1);
    if (v != 0.0) x.insert(0) = v;
    return x;
}

// x giving class B the score s
double logit(double s) { return std::log(s / (1.0 - s)); }

}  // namespace

TEST_CASE("perfect scorer has zero nonconformity") {
    LabelSpace labels({"D", "I"});
    CalibratedModel cal = calibrate(ConstantModel{2, 0}, labels, {scalar(0), scalar(1)}, {"D", "D"});
    CHECK(cal.calibration_scores == std::vector<double>{0.0, 0.0});
}

TEST_CASE("nonconformity is one minus the true-label score") {
    CalibratedModel cal = calibrate(sigmoid_model(), LabelSpace({"A", "B"}),
                                    {scalar(logit(0.9)), scalar(logit(0.8)), scalar(logit(0.7))}, {"B", "B", "B"});
    REQUIRE(cal.calibration_scores.size() == 3);
    CHECK(cal.calibration_scores[0] == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(cal.calibration_scores[1] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(cal.calibration_scores[2] == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("calibration errors") {
    CHECK_THROWS_AS(calibrate(sigmoid_model(), LabelSpace({"A", "B"}), {}, {}), InsufficientData);
    CHECK_THROWS_AS(calibrate(sigmoid_model(), LabelSpace({"A", "B"}), {scalar(0)}, {"C"}), UnknownLabel);
}

TEST_CASE("p-value counting") {
    const std::vector<double> alphas = {0.1, 0.2, 0.3};
    CHECK(conformal_p_value(alphas, 0.25) == doctest::Approx(0.5));
    CHECK(conformal_p_value(alphas, 0.0) == doctest::Approx(1.0));
    CHECK(conformal_p_value(alphas, 0.9) == doctest::Approx(0.25));
    CHECK(conformal_p_value(alphas, 0.2) == doctest::Approx(0.75));  // ties count as at least as strange

    CalibratedModel cal{sigmoid_model(), LabelSpace({"A", "B"}), alphas};
    CHECK(p_value(cal, scalar(logit(0.75)), "B") == doctest::Approx(0.5));
    CHECK_THROWS_AS(p_value(cal, scalar(0), "C"), UnknownLabel);
}

TEST_CASE("prediction set thresholds p-values") {
    // p(A) = 0.6, p(B) = 0.04 with 24 calibration scores
    std::vector<double> alphas;
    for (int i = 0; i < 24; ++i) alphas.push_back(0.01 * (i + 1));
    CalibratedModel cal{sigmoid_model(), LabelSpace({"A", "B"}), alphas};
    Eigen::VectorXd scores(2);
    scores << 1.0 - 0.105, 0.5;  // alpha 0.105 -> 14 >= it; alpha 0.5 -> 0
    PredictionSet s = prediction_set_from_scores(cal, scores, 0.05);
    CHECK(s.p_value("A") == doctest::Approx(15.0 / 25.0));
    CHECK(s.p_value("B") == doctest::Approx(1.0 / 25.0));
    CHECK(s.set == std::vector<std::string>{"A"});
    CHECK(s.point == "A");
    CHECK(s.contains("A"));
    CHECK_FALSE(s.contains("B"));
}

TEST_CASE("empty set still has a point prediction") {
    CalibratedModel cal{sigmoid_model(), LabelSpace({"A", "B"}), {0.0, 0.0, 0.0}};
    PredictionSet s = predict_set(cal, scalar(logit(0.7)), 0.3);
    CHECK(s.set.empty());
    CHECK(s.point == "B");
}

TEST_CASE("tiny epsilon keeps every label") {
    CalibratedModel cal{sigmoid_model(), LabelSpace({"A", "B"}), {0.1, 0.5, 0.9}};
    PredictionSet s = predict_set(cal, scalar(3.0), 1e-9);
    CHECK(s.set.size() == 2);
    CHECK_THROWS_AS(predict_set(cal, scalar(0), 0.0), ConfigError);
    CHECK_THROWS_AS(predict_set(cal, scalar(0), 1.0), ConfigError);
}

TEST_CASE("constant predictors give p = 1") {
    CalibratedModel cal = uncalibrated_constant(LabelSpace({"DPR 03"}));
    PredictionSet s = predict_set(cal, scalar(0), 0.05);
    CHECK(s.p_value("DPR 03") == 1.0);
    CHECK(s.set == std::vector<std::string>{"DPR 03"});
}

TEST_CASE("coverage on exchangeable synthetic data") {
    GeneratorSpec spec;
    spec.leaves = grid_leaves(2, 2, 2);
    spec.frequency = ClassFrequency::balanced;
    spec.n_records = 9000;
    spec.w_leaf = 0.12;  // weak signal so sets are not trivially singletons
    spec.w_level2 = 0.05;
    spec.w_level1 = 0.05;
    spec.seed = 17;
    GeneratedCorpus g = generate(spec);
    std::mt19937_64 rng(23);
    std::shuffle(g.records.begin(), g.records.end(), rng);

    std::vector<std::string> texts, labels;
    for (std::size_t i = 0; i < 4000; ++i) {
        texts.push_back(g.records[i].normalized_text);
        labels.push_back(g.records[i].code_day0.condensed());
    }
    NodeTrainConfig cfg;
    NodeModel node = train_node(texts, labels, Algorithm::svm, cfg, 5);
    for (double eps : {0.05, 0.1, 0.2}) {
        std::size_t covered = 0, n = 0, total_size = 0;
        for (std::size_t i = 4000; i < g.records.size(); ++i, ++n) {
            PredictionSet s = node.predict_set(g.records[i].normalized_text, eps);
            covered += s.contains(g.records[i].code_day0.condensed());
            total_size += s.set.size();
        }
        REQUIRE(n == 5000);
        const double coverage = static_cast<double>(covered) / static_cast<double>(n);
        MESSAGE("eps " << eps << " coverage " << coverage << " mean set size " << total_size / 5000.0);
        CHECK(coverage >= 1.0 - eps - 0.02);
    }
}
