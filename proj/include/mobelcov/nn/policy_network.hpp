#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "mobelcov/nn/layers.hpp"

namespace mobelcov::nn {

enum class Architecture { dense_big, conv1d_big };

Architecture parse_architecture(std::string_view name);
std::string_view to_string(Architecture arch);

/// Input geometry of the policy: a compartment block of `channels` x `groups`
/// values (grouped by age), the previous action and the holiday flag.
struct InputLayout {
    int groups = 10;
    int channels = 13;

    int compartment_size() const { return groups * channels; }
    int observation_size() const { return compartment_size() + 4; }
};

/// Rows of (observation, desired return, desired horizon) -> target action.
/// Stored column-wise: one column per row of the batch.
struct TrainingBatch {
    Matrix observations;  // observation_size x B
    Matrix conditioning;  // 3 x B: desired_return_0, desired_return_1, desired_horizon
    Matrix targets;       // 3 x B, actions in [0,1]

    int size() const { return static_cast<int>(observations.cols()); }
};

/// Return-conditioned policy. The compartment, previous-action and holiday
/// embeddings are multiplied into one state embedding; the result is multiplied
/// with the conditioning embedding and mapped to [0,1]^3 by (tanh + 1) / 2.
///
/// conv1d-big reads the compartment block as `groups` input channels of length
/// `channels`: two kernel-5 convolutions (13 -> 9 -> 5 positions, 20 channels)
/// flatten to 100 features before linear(100, 64).
class PolicyNetwork {
public:
    PolicyNetwork() = default;
    static PolicyNetwork create(Architecture arch, std::uint64_t seed, InputLayout layout = {});

    Architecture architecture() const { return arch_; }
    std::uint64_t seed() const { return seed_; }
    const InputLayout& layout() const { return layout_; }

    /// Actions (3 x B) for observations (obs x B) and conditioning (3 x B).
    Matrix forward(const Matrix& observations, const Matrix& conditioning) const;

    std::array<double, 3> act(const Eigen::VectorXd& observation, const std::array<double, 2>& desired_return,
                              double desired_horizon) const;

    /// Zeroes gradients, runs forward and backward for the MSE loss and returns
    /// the loss (1/3 sum over components, averaged over rows).
    double loss_and_gradient(const TrainingBatch& batch);
    double loss(const TrainingBatch& batch) const;
    /// Sign pattern of every ReLU input over the batch; the loss is smooth in
    /// the weights while this pattern stays fixed.
    std::vector<std::uint8_t> relu_pattern(const TrainingBatch& batch) const;

    std::vector<Parameter*> parameters();
    std::vector<const Parameter*> parameters() const;
    void zero_grad();
    std::size_t parameter_count() const;

    /// Sub-network access for shape inspection.
    const Sequential& compartment_embedding() const { return sc_emb_; }
    const Sequential& action_embedding() const { return sm_emb_; }
    const Sequential& holiday_embedding() const { return sh_emb_; }
    const Sequential& state_embedding() const { return s_emb_; }
    const Sequential& command_embedding() const { return c_emb_; }
    const Sequential& head() const { return fc_; }

private:
    struct Split {
        Matrix compartments, prev_action, holiday;
    };
    Split split(const Matrix& observations) const;
    void check_inputs(const Matrix& observations, const Matrix& conditioning) const;

    Architecture arch_ = Architecture::dense_big;
    std::uint64_t seed_ = 0;
    InputLayout layout_;
    Sequential sc_emb_, sm_emb_, sh_emb_, s_emb_, c_emb_, fc_;
};

double mse_loss(const Matrix& predicted, const Matrix& target);

/// -log softmax(logits)[target]; computed with the log-sum-exp shift.
double cross_entropy_loss(const Eigen::VectorXd& logits, int target_index);

}  // namespace mobelcov::nn
