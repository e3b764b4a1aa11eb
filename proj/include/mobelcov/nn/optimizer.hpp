#pragma once

#include <vector>

#include "mobelcov/nn/layers.hpp"

namespace mobelcov::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Adam with bias-corrected moments. Moment buffers follow the order of the
/// parameter list passed to step(); the list must not change between calls.
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    void step(const std::vector<Parameter*>& params);
    long steps() const { return t_; }
    const AdamConfig& config() const { return cfg_; }
    void set_learning_rate(double lr) { cfg_.learning_rate = lr; }

private:
    AdamConfig cfg_;
    long t_ = 0;
    std::vector<Matrix> m_, v_;
};

}  // namespace mobelcov::nn
