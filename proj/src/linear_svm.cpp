#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "delaycode/error.hpp"
#include "delaycode/models.hpp"

namespace delaycode {

namespace {

double hinge_sum(const Eigen::VectorXd& sign, const Eigen::VectorXd& margins) {
    return (1.0 - sign.array() * margins.array()).max(0.0).sum();
}

}  // namespace

double svm_objective(const FeatureMatrix& X, const std::vector<int>& y, int positive_class,
                     const Eigen::Ref<const Eigen::VectorXd>& w, double b, double C) {
    Eigen::VectorXd sign(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) sign[i] = y[static_cast<std::size_t>(i)] == positive_class ? 1.0 : -1.0;
    const Eigen::VectorXd margins = (X * w).array() + b;
    return 0.5 * w.squaredNorm() + C * hinge_sum(sign, margins);
}

LinearSvmModel train_linear_svm(const FeatureMatrix& X_in, const std::vector<int>& y_in, int n_classes,
                                const LinearSvmConfig& config) {
    if (static_cast<std::size_t>(X_in.rows()) != y_in.size())
        throw DimensionMismatch("X has " + std::to_string(X_in.rows()) + " rows but y has " +
                                std::to_string(y_in.size()));
    if (y_in.empty()) throw InsufficientData("svm needs at least one training row");

    // The visiting order is drawn over a canonical row order, so the result
    // depends on the row multiset only.
    const std::vector<int> order = canonical_row_order(X_in, y_in);
    FeatureMatrix X(X_in.rows(), X_in.cols());
    {
        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(static_cast<std::size_t>(X_in.nonZeros()));
        for (std::size_t r = 0; r < order.size(); ++r)
            for (FeatureMatrix::InnerIterator it(X_in, order[r]); it; ++it)
                trip.emplace_back(static_cast<int>(r), static_cast<int>(it.index()), it.value());
        X.setFromTriplets(trip.begin(), trip.end());
    }
    std::vector<int> y(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) y[r] = y_in[static_cast<std::size_t>(order[r])];

    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const double C = config.C;

    LinearSvmModel model;
    model.config = config;
    model.weights = Eigen::MatrixXd::Zero(n_classes, d);
    model.bias = Eigen::VectorXd::Zero(n_classes);
    model.objective_trace.resize(static_cast<std::size_t>(n_classes));

    // Dual coordinate descent on the hinge loss with the bias folded in as a
    // constant feature. The primal objective of the dual iterates is not
    // monotone, so the best primal iterate is kept and traced.
    Eigen::VectorXd qd(n);
    for (Eigen::Index i = 0; i < n; ++i) qd[i] = X.row(i).squaredNorm() + 1.0;
    Eigen::VectorXd sign(n), alpha(n);
    std::vector<Eigen::Index> visit(static_cast<std::size_t>(n));
    for (int k = 0; k < n_classes; ++k) {
        for (Eigen::Index i = 0; i < n; ++i) sign[i] = y[static_cast<std::size_t>(i)] == k ? 1.0 : -1.0;
        Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
        double b = 0.0;
        alpha.setZero();
        std::iota(visit.begin(), visit.end(), Eigen::Index{0});
        std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(k)));

        Eigen::VectorXd best_w = w;
        double best_b = 0.0;
        double best = C * static_cast<double>(n);
        double dual = 0.0;
        auto& trace = model.objective_trace[static_cast<std::size_t>(k)];
        trace.push_back(best);

        for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
            std::shuffle(visit.begin(), visit.end(), rng);
            double pg_max = -std::numeric_limits<double>::infinity();
            double pg_min = std::numeric_limits<double>::infinity();
            for (Eigen::Index i : visit) {
                double margin = b;
                for (FeatureMatrix::InnerIterator it(X, i); it; ++it) margin += w[it.index()] * it.value();
                const double g = sign[i] * margin - 1.0;
                double pg = g;
                if (alpha[i] <= 0.0) pg = std::min(g, 0.0);
                else if (alpha[i] >= C) pg = std::max(g, 0.0);
                pg_max = std::max(pg_max, pg);
                pg_min = std::min(pg_min, pg);
                if (std::fabs(pg) < 1e-12) continue;
                const double next = std::clamp(alpha[i] - g / qd[i], 0.0, C);
                const double step = (next - alpha[i]) * sign[i];
                alpha[i] = next;
                for (FeatureMatrix::InnerIterator it(X, i); it; ++it) w[it.index()] += step * it.value();
                b += step;
            }
            const Eigen::VectorXd margins = (X * w).array() + b;
            const double primal = 0.5 * w.squaredNorm() + C * hinge_sum(sign, margins);
            if (!std::isfinite(primal)) throw NonFinite("svm objective diverged for class " + std::to_string(k));
            if (primal < best) {
                best = primal;
                best_w = w;
                best_b = b;
            }
            trace.push_back(best);
            const double next_dual = alpha.sum() - 0.5 * (w.squaredNorm() + b * b);
            const double gain = next_dual - dual;
            dual = next_dual;
            if (pg_max - pg_min < 1e-3) break;
            if (epoch > 0 && gain < config.tolerance * std::max(1.0, std::fabs(dual))) break;
        }
        model.weights.row(k) = best_w.transpose();
        model.bias[k] = best_b;
    }
    return model;
}

}  // namespace delaycode
