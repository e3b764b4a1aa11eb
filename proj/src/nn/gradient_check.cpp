#include "mobelcov/nn/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "mobelcov/errors.hpp"
#include "mobelcov/rng.hpp"

namespace mobelcov::nn {

GradientCheckResult gradient_check(const GradientProbe& probe, double epsilon, std::uint64_t seed,
                                   std::size_t samples) {
    if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) throw ValidationError("epsilon must lie in [1e-7, 1e-3]");
    probe.compute_gradient();

    std::vector<std::pair<Parameter*, Eigen::Index>> slots;
    for (Parameter* p : probe.params) {
        for (Eigen::Index i = 0; i < p->value.size(); ++i) slots.emplace_back(p, i);
    }
    if (slots.empty()) return {};

    Rng rng(seed);
    const bool exhaustive = slots.size() <= samples;
    const std::size_t target = exhaustive ? slots.size() : samples;
    const std::size_t max_attempts = exhaustive ? slots.size() : 10 * samples;
    std::uniform_int_distribution<std::size_t> dist(0, slots.size() - 1);
    const std::vector<std::uint8_t> base = probe.pattern ? probe.pattern() : std::vector<std::uint8_t>{};

    GradientCheckResult result;
    for (std::size_t attempt = 0; attempt < max_attempts && result.checked < target; ++attempt) {
        auto [param, index] = slots[exhaustive ? attempt : dist(rng)];
        const double analytic = param->grad.data()[index];
        double& w = param->value.data()[index];
        const double original = w;
        bool kink = false;
        w = original + epsilon;
        const double up = probe.loss();
        if (probe.pattern) kink = probe.pattern() != base;
        w = original - epsilon;
        const double down = probe.loss();
        if (probe.pattern && !kink) kink = probe.pattern() != base;
        w = original;
        if (kink) {
            ++result.skipped_kinks;
            continue;
        }
        const double numeric = (up - down) / (2.0 * epsilon);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), kGradientFloor});
        result.max_relative_error = std::max(result.max_relative_error, std::abs(analytic - numeric) / denom);
        ++result.checked;
    }
    return result;
}

GradientCheckResult gradient_check(PolicyNetwork& net, const TrainingBatch& batch, double epsilon,
                                   std::uint64_t seed, std::size_t samples,
                                   const std::function<void(PolicyNetwork&)>& tamper) {
    GradientProbe probe;
    probe.params = net.parameters();
    probe.loss = [&] { return net.loss(batch); };
    probe.pattern = [&] { return net.relu_pattern(batch); };
    probe.compute_gradient = [&] {
        net.loss_and_gradient(batch);
        if (tamper) tamper(net);
    };
    return gradient_check(probe, epsilon, seed, samples);
}

}  // namespace mobelcov::nn
