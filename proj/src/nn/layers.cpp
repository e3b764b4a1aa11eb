#include "mobelcov/nn/layers.hpp"

#include <cmath>

namespace mobelcov::nn {

namespace {

// Symmetric uniform initialization in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Matrix uniform_init(int rows, int cols, int fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) m(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
    }
    return m;
}

Matrix forward_layer(const Linear& l, const Matrix& x) {
    Matrix y = l.weight.value * x;
    y.colwise() += l.bias.value.col(0);
    return y;
}

Matrix im2col(const Conv1d& c, const Matrix& x) {
    const int batch = static_cast<int>(x.cols());
    const int lout = c.out_length();
    Matrix cols(c.in_channels * c.kernel, lout * batch);
    for (int b = 0; b < batch; ++b) {
        for (int l = 0; l < lout; ++l) {
            for (int ci = 0; ci < c.in_channels; ++ci) {
                for (int k = 0; k < c.kernel; ++k) {
                    cols(ci * c.kernel + k, b * lout + l) = x(ci * c.length + l + k, b);
                }
            }
        }
    }
    return cols;
}

Matrix forward_layer(const Conv1d& c, const Matrix& x) {
    const int batch = static_cast<int>(x.cols());
    const int lout = c.out_length();
    Matrix y = c.weight.value * im2col(c, x);  // out_channels x (lout * batch)
    y.colwise() += c.bias.value.col(0);
    Matrix out(c.out_channels * lout, batch);
    for (int b = 0; b < batch; ++b) {
        for (int co = 0; co < c.out_channels; ++co) {
            for (int l = 0; l < lout; ++l) out(co * lout + l, b) = y(co, b * lout + l);
        }
    }
    return out;
}

Matrix forward_layer(const Activation& a, const Matrix& x) {
    switch (a.kind) {
        case ActivationKind::relu: return x.cwiseMax(0.0);
        case ActivationKind::sigmoid: return (1.0 + (-x.array()).exp()).inverse().matrix();
        case ActivationKind::tanh: return x.array().tanh().matrix();
    }
    return x;
}

Matrix backward_layer(Linear& l, const Matrix& x, const Matrix& dy) {
    l.weight.grad += dy * x.transpose();
    l.bias.grad += dy.rowwise().sum();
    return l.weight.value.transpose() * dy;
}

Matrix backward_layer(Conv1d& c, const Matrix& x, const Matrix& dy) {
    const int batch = static_cast<int>(x.cols());
    const int lout = c.out_length();
    Matrix dy_cols(c.out_channels, lout * batch);
    for (int b = 0; b < batch; ++b) {
        for (int co = 0; co < c.out_channels; ++co) {
            for (int l = 0; l < lout; ++l) dy_cols(co, b * lout + l) = dy(co * lout + l, b);
        }
    }
    c.weight.grad += dy_cols * im2col(c, x).transpose();
    c.bias.grad += dy_cols.rowwise().sum();
    const Matrix dcols = c.weight.value.transpose() * dy_cols;
    Matrix dx = Matrix::Zero(x.rows(), batch);
    for (int b = 0; b < batch; ++b) {
        for (int l = 0; l < lout; ++l) {
            for (int ci = 0; ci < c.in_channels; ++ci) {
                for (int k = 0; k < c.kernel; ++k) {
                    dx(ci * c.length + l + k, b) += dcols(ci * c.kernel + k, b * lout + l);
                }
            }
        }
    }
    return dx;
}

Matrix backward_layer(Activation& a, const Matrix& x, const Matrix& dy) {
    switch (a.kind) {
        case ActivationKind::relu: return (x.array() > 0.0).select(dy, 0.0);
        case ActivationKind::sigmoid: {
            const Eigen::ArrayXXd s = (1.0 + (-x.array()).exp()).inverse();
            return (dy.array() * s * (1.0 - s)).matrix();
        }
        case ActivationKind::tanh: {
            const Eigen::ArrayXXd t = x.array().tanh();
            return (dy.array() * (1.0 - t.square())).matrix();
        }
    }
    return dy;
}

}  // namespace

Linear make_linear(std::string name, int in, int out, Rng& rng) {
    Linear l;
    l.weight = Parameter{name + ".weight", uniform_init(out, in, in, rng), Matrix::Zero(out, in)};
    l.bias = Parameter{name + ".bias", Matrix::Zero(out, 1), Matrix::Zero(out, 1)};
    return l;
}

Conv1d make_conv1d(std::string name, int in_channels, int out_channels, int length, int kernel, Rng& rng) {
    Conv1d c;
    c.in_channels = in_channels;
    c.out_channels = out_channels;
    c.length = length;
    c.kernel = kernel;
    const int fan_in = in_channels * kernel;
    c.weight = Parameter{name + ".weight", uniform_init(out_channels, fan_in, fan_in, rng),
                         Matrix::Zero(out_channels, fan_in)};
    c.bias = Parameter{name + ".bias", Matrix::Zero(out_channels, 1), Matrix::Zero(out_channels, 1)};
    return c;
}

Matrix Sequential::forward(const Matrix& x, SequentialTrace* trace) const {
    if (trace != nullptr) trace->inputs.clear();
    Matrix current = x;
    for (const Layer& layer : layers_) {
        if (trace != nullptr) trace->inputs.push_back(current);
        current = std::visit([&](const auto& l) { return forward_layer(l, current); }, layer);
    }
    if (trace != nullptr) trace->output = current;
    return current;
}

Matrix Sequential::backward(const Matrix& grad_output, const SequentialTrace& trace) {
    Matrix grad = grad_output;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        grad = std::visit([&](auto& l) { return backward_layer(l, trace.inputs[i], grad); }, layers_[i]);
    }
    return grad;
}

void Sequential::collect_parameters(std::vector<Parameter*>& out) {
    for (Layer& layer : layers_) {
        if (auto* l = std::get_if<Linear>(&layer)) {
            out.push_back(&l->weight);
            out.push_back(&l->bias);
        } else if (auto* c = std::get_if<Conv1d>(&layer)) {
            out.push_back(&c->weight);
            out.push_back(&c->bias);
        }
    }
}

void Sequential::collect_parameters(std::vector<const Parameter*>& out) const {
    std::vector<Parameter*> mutable_params;
    const_cast<Sequential*>(this)->collect_parameters(mutable_params);
    out.insert(out.end(), mutable_params.begin(), mutable_params.end());
}

void Sequential::append_relu_pattern(const SequentialTrace& trace, std::vector<std::uint8_t>& out) const {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto* act = std::get_if<Activation>(&layers_[i]);
        if (act == nullptr || act->kind != ActivationKind::relu) continue;
        const Matrix& x = trace.inputs[i];
        for (Eigen::Index j = 0; j < x.size(); ++j) out.push_back(x.data()[j] > 0.0 ? 1 : 0);
    }
}

}  // namespace mobelcov::nn
