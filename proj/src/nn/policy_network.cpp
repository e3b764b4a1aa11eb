#include "mobelcov/nn/policy_network.hpp"

#include <cmath>
#include <string>

#include "mobelcov/errors.hpp"

namespace mobelcov::nn {

namespace {

constexpr int kEmbedding = 64;
constexpr int kConvChannels = 20;
constexpr int kConvKernel = 5;

Activation activation(ActivationKind k) { return Activation{k}; }

}  // namespace

Architecture parse_architecture(std::string_view name) {
    if (name == "dense-big" || name == "dense_big") return Architecture::dense_big;
    if (name == "conv1d-big" || name == "conv1d_big") return Architecture::conv1d_big;
    throw ConfigError("unknown network architecture '" + std::string(name) + "'");
}

std::string_view to_string(Architecture arch) {
    return arch == Architecture::dense_big ? "dense-big" : "conv1d-big";
}

PolicyNetwork PolicyNetwork::create(Architecture arch, std::uint64_t seed, InputLayout layout) {
    PolicyNetwork net;
    net.arch_ = arch;
    net.seed_ = seed;
    net.layout_ = layout;
    Rng rng(seed);
    using AK = ActivationKind;

    if (arch == Architecture::dense_big) {
        net.sc_emb_.add(make_linear("sc_emb.0", layout.compartment_size(), kEmbedding, rng))
            .add(activation(AK::relu))
            .add(make_linear("sc_emb.2", kEmbedding, kEmbedding, rng))
            .add(activation(AK::sigmoid));
    } else {
        const int after_first = layout.channels - kConvKernel + 1;
        const int after_second = after_first - kConvKernel + 1;
        if (after_second < 1) throw ConfigError("conv1d-big needs at least 9 channels per age group");
        net.sc_emb_.add(make_conv1d("sc_emb.0", layout.groups, kConvChannels, layout.channels, kConvKernel, rng))
            .add(activation(AK::relu))
            .add(make_conv1d("sc_emb.2", kConvChannels, kConvChannels, after_first, kConvKernel, rng))
            .add(activation(AK::relu))
            .add(make_linear("sc_emb.4", kConvChannels * after_second, kEmbedding, rng))
            .add(activation(AK::sigmoid));
    }
    net.sm_emb_.add(make_linear("sm_emb.0", 3, kEmbedding, rng))
        .add(activation(AK::relu))
        .add(make_linear("sm_emb.2", kEmbedding, kEmbedding, rng))
        .add(activation(AK::sigmoid));
    net.sh_emb_.add(make_linear("sh_emb.0", 1, kEmbedding, rng))
        .add(activation(AK::relu))
        .add(make_linear("sh_emb.2", kEmbedding, kEmbedding, rng))
        .add(activation(AK::sigmoid));
    net.s_emb_.add(make_linear("s_emb.0", kEmbedding, kEmbedding, rng)).add(activation(AK::relu));
    net.c_emb_.add(make_linear("c_emb.0", 3, kEmbedding, rng)).add(activation(AK::sigmoid));
    net.fc_.add(make_linear("fc.0", kEmbedding, kEmbedding, rng))
        .add(activation(AK::relu))
        .add(make_linear("fc.2", kEmbedding, 3, rng));
    return net;
}

void PolicyNetwork::check_inputs(const Matrix& observations, const Matrix& conditioning) const {
    if (observations.rows() != layout_.observation_size()) {
        throw ValidationError("observation has " + std::to_string(observations.rows()) + " features, expected " +
                              std::to_string(layout_.observation_size()));
    }
    if (conditioning.rows() != 3 || conditioning.cols() != observations.cols()) {
        throw ValidationError("conditioning must be 3 x batch");
    }
    if (!observations.allFinite() || !conditioning.allFinite()) {
        throw ValidationError("policy inputs must be finite");
    }
}

PolicyNetwork::Split PolicyNetwork::split(const Matrix& observations) const {
    const int c = layout_.compartment_size();
    return Split{observations.topRows(c), observations.middleRows(c, 3), observations.middleRows(c + 3, 1)};
}

Matrix PolicyNetwork::forward(const Matrix& observations, const Matrix& conditioning) const {
    check_inputs(observations, conditioning);
    const Split in = split(observations);
    const Matrix state_in = sc_emb_.forward(in.compartments).cwiseProduct(sm_emb_.forward(in.prev_action))
                                .cwiseProduct(sh_emb_.forward(in.holiday));
    const Matrix joint = s_emb_.forward(state_in).cwiseProduct(c_emb_.forward(conditioning));
    return ((fc_.forward(joint).array().tanh() + 1.0) * 0.5).matrix();
}

std::array<double, 3> PolicyNetwork::act(const Eigen::VectorXd& observation, const std::array<double, 2>& desired_return,
                                         double desired_horizon) const {
    Matrix cond(3, 1);
    cond << desired_return[0], desired_return[1], desired_horizon;
    const Matrix out = forward(observation, cond);
    return {out(0, 0), out(1, 0), out(2, 0)};
}

double PolicyNetwork::loss(const TrainingBatch& batch) const {
    return mse_loss(forward(batch.observations, batch.conditioning), batch.targets);
}

double PolicyNetwork::loss_and_gradient(const TrainingBatch& batch) {
    if (batch.size() < 1) throw ValidationError("training batch is empty");
    check_inputs(batch.observations, batch.conditioning);
    zero_grad();
    const Split in = split(batch.observations);

    SequentialTrace t_sc, t_sm, t_sh, t_s, t_c, t_fc;
    const Matrix a = sc_emb_.forward(in.compartments, &t_sc);
    const Matrix b = sm_emb_.forward(in.prev_action, &t_sm);
    const Matrix c = sh_emb_.forward(in.holiday, &t_sh);
    const Matrix state_in = a.cwiseProduct(b).cwiseProduct(c);
    const Matrix s = s_emb_.forward(state_in, &t_s);
    const Matrix e = c_emb_.forward(batch.conditioning, &t_c);
    const Matrix joint = s.cwiseProduct(e);
    const Matrix logits = fc_.forward(joint, &t_fc);
    const Eigen::ArrayXXd th = logits.array().tanh();
    const Matrix y = ((th + 1.0) * 0.5).matrix();

    const double n = static_cast<double>(y.size());
    const Matrix diff = y - batch.targets;
    const double value = diff.squaredNorm() / n;

    const Matrix dy = (2.0 / n) * diff;
    const Matrix dlogits = (dy.array() * 0.5 * (1.0 - th.square())).matrix();
    const Matrix djoint = fc_.backward(dlogits, t_fc);
    c_emb_.backward(djoint.cwiseProduct(s), t_c);
    const Matrix dstate_in = s_emb_.backward(djoint.cwiseProduct(e), t_s);
    sc_emb_.backward(dstate_in.cwiseProduct(b).cwiseProduct(c), t_sc);
    sm_emb_.backward(dstate_in.cwiseProduct(a).cwiseProduct(c), t_sm);
    sh_emb_.backward(dstate_in.cwiseProduct(a).cwiseProduct(b), t_sh);
    return value;
}

std::vector<std::uint8_t> PolicyNetwork::relu_pattern(const TrainingBatch& batch) const {
    check_inputs(batch.observations, batch.conditioning);
    const Split in = split(batch.observations);
    SequentialTrace t_sc, t_sm, t_sh, t_s, t_c, t_fc;
    const Matrix state_in = sc_emb_.forward(in.compartments, &t_sc)
                                .cwiseProduct(sm_emb_.forward(in.prev_action, &t_sm))
                                .cwiseProduct(sh_emb_.forward(in.holiday, &t_sh));
    const Matrix joint = s_emb_.forward(state_in, &t_s).cwiseProduct(c_emb_.forward(batch.conditioning, &t_c));
    fc_.forward(joint, &t_fc);
    std::vector<std::uint8_t> out;
    sc_emb_.append_relu_pattern(t_sc, out);
    sm_emb_.append_relu_pattern(t_sm, out);
    sh_emb_.append_relu_pattern(t_sh, out);
    s_emb_.append_relu_pattern(t_s, out);
    c_emb_.append_relu_pattern(t_c, out);
    fc_.append_relu_pattern(t_fc, out);
    return out;
}

std::vector<Parameter*> PolicyNetwork::parameters() {
    std::vector<Parameter*> out;
    for (Sequential* s : {&sc_emb_, &sm_emb_, &sh_emb_, &s_emb_, &c_emb_, &fc_}) s->collect_parameters(out);
    return out;
}

std::vector<const Parameter*> PolicyNetwork::parameters() const {
    std::vector<const Parameter*> out;
    for (const Sequential* s : {&sc_emb_, &sm_emb_, &sh_emb_, &s_emb_, &c_emb_, &fc_}) s->collect_parameters(out);
    return out;
}

void PolicyNetwork::zero_grad() {
    for (Parameter* p : parameters()) p->grad.setZero();
}

std::size_t PolicyNetwork::parameter_count() const {
    std::size_t total = 0;
    for (const Parameter* p : parameters()) total += static_cast<std::size_t>(p->value.size());
    return total;
}

double mse_loss(const Matrix& predicted, const Matrix& target) {
    if (predicted.rows() != target.rows() || predicted.cols() != target.cols()) {
        throw ValidationError("prediction and target shapes differ");
    }
    return (predicted - target).squaredNorm() / static_cast<double>(predicted.size());
}

double cross_entropy_loss(const Eigen::VectorXd& logits, int target_index) {
    if (target_index < 0 || target_index >= logits.size()) {
        throw ValidationError("cross-entropy target index out of range");
    }
    if (!logits.allFinite()) throw ValidationError("logits must be finite");
    const double shift = logits.maxCoeff();
    const double log_sum = shift + std::log((logits.array() - shift).exp().sum());
    return log_sum - logits[target_index];
}

}  // namespace mobelcov::nn
