#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "mobelcov/rng.hpp"

namespace mobelcov::nn {

using Matrix = Eigen::MatrixXd;

/// A trainable tensor and its accumulated gradient.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
};

// All layers take a (features x batch) matrix: one column per sample.

struct Linear {
    Parameter weight;  // out x in
    Parameter bias;    // out x 1
};

/// Valid (unpadded) stride-1 1-D convolution. Input features are laid out
/// channel-major: entry c * length + l is position l of channel c.
struct Conv1d {
    int in_channels = 0;
    int out_channels = 0;
    int length = 0;
    int kernel = 0;
    Parameter weight;  // out_channels x (in_channels * kernel)
    Parameter bias;    // out_channels x 1

    int out_length() const { return length - kernel + 1; }
};

enum class ActivationKind { relu, sigmoid, tanh };

struct Activation {
    ActivationKind kind;
};

using Layer = std::variant<Linear, Conv1d, Activation>;

Linear make_linear(std::string name, int in, int out, Rng& rng);
Conv1d make_conv1d(std::string name, int in_channels, int out_channels, int length, int kernel, Rng& rng);

/// Intermediate values kept by a forward pass so that the backward pass can run.
struct SequentialTrace {
    std::vector<Matrix> inputs;  // input of each layer
    Matrix output;
};

class Sequential {
public:
    Sequential() = default;
    explicit Sequential(std::vector<Layer> layers) : layers_(std::move(layers)) {}

    Sequential& add(Layer layer) {
        layers_.push_back(std::move(layer));
        return *this;
    }

    Matrix forward(const Matrix& x, SequentialTrace* trace = nullptr) const;
    /// Accumulates parameter gradients and returns dL/dx.
    Matrix backward(const Matrix& grad_output, const SequentialTrace& trace);

    /// Appends one flag per ReLU input entry of `trace`: whether it is positive.
    void append_relu_pattern(const SequentialTrace& trace, std::vector<std::uint8_t>& out) const;
    void collect_parameters(std::vector<Parameter*>& out);
    void collect_parameters(std::vector<const Parameter*>& out) const;
    const std::vector<Layer>& layers() const { return layers_; }

private:
    std::vector<Layer> layers_;
};

}  // namespace mobelcov::nn
