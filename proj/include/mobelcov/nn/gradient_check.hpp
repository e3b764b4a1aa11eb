#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mobelcov/nn/layers.hpp"
#include "mobelcov/nn/policy_network.hpp"

namespace mobelcov::nn {

/// A scalar loss over a set of parameters, with a routine that fills their grads.
struct GradientProbe {
    std::vector<Parameter*> params;
    std::function<double()> loss;
    std::function<void()> compute_gradient;
    /// Optional activation pattern. A weight whose perturbation changes it sits
    /// at a kink where central differences are meaningless; it is skipped.
    std::function<std::vector<std::uint8_t>()> pattern;
};

/// Gradients below this magnitude are compared in absolute terms; central
/// differences carry roundoff near 1e-12 at epsilon = 1e-5.
inline constexpr double kGradientFloor = 1e-7;

struct GradientCheckResult {
    double max_relative_error = 0.0;
    std::size_t checked = 0;
    std::size_t skipped_kinks = 0;
};

/// Compares analytic gradients against central differences on `samples` weights
/// drawn uniformly (with a fixed seed) across all parameters. The relative error
/// of one weight is |a - n| / max(|a|, |n|, kGradientFloor). Kink crossings are
/// replaced by fresh draws, up to ten times `samples` attempts in total.
GradientCheckResult gradient_check(const GradientProbe& probe, double epsilon, std::uint64_t seed,
                                   std::size_t samples = 256);

/// Gradient check of the MSE training loss of a policy network. `tamper`, when
/// set, runs after backpropagation and may alter gradients (negative tests).
GradientCheckResult gradient_check(PolicyNetwork& net, const TrainingBatch& batch, double epsilon,
                                   std::uint64_t seed, std::size_t samples = 256,
                                   const std::function<void(PolicyNetwork&)>& tamper = {});

}  // namespace mobelcov::nn
