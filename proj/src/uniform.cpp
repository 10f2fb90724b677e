#include "delaycode/error.hpp"
#include "delaycode/models.hpp"

namespace delaycode {

UniformModel train_uniform(const std::vector<int>& y, int n_classes, UniformMode mode, std::uint64_t seed) {
    if (n_classes < 1) throw InsufficientData("uniform model needs at least one class");
    UniformModel m;
    m.n_classes = n_classes;
    m.mode = mode;
    m.seed = seed;
    m.priors = Eigen::VectorXd::Zero(n_classes);
    for (int label : y) m.priors[label] += 1.0;
    if (y.empty()) {
        m.priors.setConstant(1.0 / n_classes);
    } else {
        m.priors /= static_cast<double>(y.size());
    }
    return m;
}

int sample_label(const UniformModel& model, std::mt19937_64& rng) {
    if (model.n_classes == 1) return 0;
    if (model.mode == UniformMode::prior) {
        std::discrete_distribution<int> pick(model.priors.data(), model.priors.data() + model.priors.size());
        return pick(rng);
    }
    std::uniform_int_distribution<int> pick(0, model.n_classes - 1);
    return pick(rng);
}

}  // namespace delaycode
