#include <doctest.h>

#include <cmath>

#include "mobelcov/errors.hpp"
#include "mobelcov/nn/gradient_check.hpp"
#include "mobelcov/nn/optimizer.hpp"
#include "mobelcov/nn/policy_network.hpp"
#include "mobelcov/rng.hpp"

using namespace mobelcov;
using namespace mobelcov::nn;

namespace {

TrainingBatch random_batch(int size, std::uint64_t seed, InputLayout layout = {}) {
    Rng rng(seed);
    TrainingBatch b;
    b.observations.resize(layout.observation_size(), size);
    b.conditioning.resize(3, size);
    b.targets.resize(3, size);
    for (int j = 0; j < size; ++j) {
        for (int i = 0; i < layout.observation_size(); ++i) b.observations(i, j) = uniform01(rng);
        b.conditioning(0, j) = -3.0 * uniform01(rng);
        b.conditioning(1, j) = -3.0 * uniform01(rng);
        b.conditioning(2, j) = 1.0 + std::floor(17.0 * uniform01(rng));
        for (int i = 0; i < 3; ++i) b.targets(i, j) = uniform01(rng);
    }
    return b;
}

const Linear& first_linear(const Sequential& s) {
    for (const Layer& l : s.layers()) {
        if (const auto* lin = std::get_if<Linear>(&l)) return *lin;
    }
    throw std::logic_error("no linear layer");
}

}  // namespace

TEST_CASE("architecture shapes") {
    const PolicyNetwork dense = PolicyNetwork::create(Architecture::dense_big, 1);
    const Linear& sc = first_linear(dense.compartment_embedding());
    CHECK(sc.weight.value.cols() == 130);
    CHECK(sc.weight.value.rows() == 64);
    CHECK(first_linear(dense.action_embedding()).weight.value.cols() == 3);
    CHECK(first_linear(dense.holiday_embedding()).weight.value.cols() == 1);
    CHECK(first_linear(dense.command_embedding()).weight.value.cols() == 3);
    CHECK(first_linear(dense.command_embedding()).weight.value.rows() == 64);
    for (const Parameter* p : dense.parameters()) {
        if (p->name.find(".bias") != std::string::npos) CHECK(p->value.isZero());
    }

    const PolicyNetwork conv = PolicyNetwork::create(Architecture::conv1d_big, 1);
    const auto& conv_layers = conv.compartment_embedding().layers();
    REQUIRE(conv_layers.size() == 6);
    const Conv1d& c1 = std::get<Conv1d>(conv_layers[0]);
    const Conv1d& c2 = std::get<Conv1d>(conv_layers[2]);
    CHECK(c1.in_channels == 10);
    CHECK(c1.out_channels == 20);
    CHECK(c1.out_length() == 9);
    CHECK(c2.out_length() == 5);
    CHECK(std::get<Linear>(conv_layers[4]).weight.value.cols() == 100);

    CHECK(parse_architecture("dense-big") == Architecture::dense_big);
    CHECK_THROWS_AS(parse_architecture("lstm"), ConfigError);
}

TEST_CASE("seeded initialization") {
    const PolicyNetwork a = PolicyNetwork::create(Architecture::dense_big, 5);
    const PolicyNetwork b = PolicyNetwork::create(Architecture::dense_big, 5);
    const PolicyNetwork c = PolicyNetwork::create(Architecture::dense_big, 6);
    const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
    bool differs = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i]->value == pb[i]->value);
        if (pa[i]->value != pc[i]->value) differs = true;
    }
    CHECK(differs);
    // Initial weights lie within 1 / sqrt(fan_in).
    const Linear& sc = first_linear(a.compartment_embedding());
    CHECK(sc.weight.value.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(130.0));
}

TEST_CASE("forward pass range, purity and input checks") {
    const PolicyNetwork net = PolicyNetwork::create(Architecture::dense_big, 2);
    const TrainingBatch b = random_batch(16, 3);
    const Matrix y1 = net.forward(b.observations, b.conditioning);
    const Matrix y2 = net.forward(b.observations, b.conditioning);
    CHECK(y1 == y2);
    CHECK((y1.array() >= 0.0).all());
    CHECK((y1.array() <= 1.0).all());

    const Eigen::VectorXd obs = b.observations.col(0);
    const auto extreme = net.act(obs, {-1e9, -1e9}, 17);
    for (double v : extreme) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK_THROWS_AS((net.act(Eigen::VectorXd::Zero(10), {0, 0}, 1)), ValidationError);
    CHECK_THROWS_AS((net.act(obs, {std::nan(""), 0}, 1)), ValidationError);
}

TEST_CASE("MSE loss of a one-row batch by hand") {
    PolicyNetwork net = PolicyNetwork::create(Architecture::dense_big, 4);
    TrainingBatch b = random_batch(1, 9);
    const Matrix y = net.forward(b.observations, b.conditioning);
    b.targets = y;
    b.targets(0, 0) += 0.1;
    b.targets(1, 0) -= 0.2;
    b.targets(2, 0) += 0.3;
    // (0.01 + 0.04 + 0.09) / 3
    CHECK(net.loss(b) == doctest::Approx(0.14 / 3.0).epsilon(1e-10));
    CHECK(net.loss_and_gradient(b) == doctest::Approx(0.14 / 3.0).epsilon(1e-10));

    b.targets = y;
    CHECK(net.loss_and_gradient(b) == 0.0);
    for (const Parameter* p : net.parameters()) CHECK(p->grad.isZero());
}

TEST_CASE("gradient check on both architectures") {
    for (Architecture arch : {Architecture::dense_big, Architecture::conv1d_big}) {
        PolicyNetwork net = PolicyNetwork::create(arch, 11);
        const TrainingBatch b = random_batch(8, 12);
        const GradientCheckResult r = gradient_check(net, b, 1e-5, 13);
        CHECK(r.checked >= 200);
        CHECK(r.max_relative_error < 1e-4);
    }
}

TEST_CASE("gradient check detects a corrupted gradient path") {
    PolicyNetwork net = PolicyNetwork::create(Architecture::dense_big, 11);
    const TrainingBatch b = random_batch(8, 12);
    const auto tamper = [](PolicyNetwork& n) {
        for (Parameter* p : n.parameters()) {
            if (p->name == "c_emb.0.weight") p->grad *= 1.5;
        }
    };
    // Check every weight so the corrupted layer is certainly sampled.
    const GradientCheckResult r = gradient_check(net, b, 1e-5, 13, net.parameter_count(), tamper);
    CHECK(r.max_relative_error > 1e-2);
    CHECK_THROWS(gradient_check(net, b, 1e-2, 13));
}

TEST_CASE("gradient check of a single linear layer is exact") {
    Rng rng(1);
    Linear lin = make_linear("lin", 5, 4, rng);
    Matrix x(5, 3), c(4, 3);
    for (int j = 0; j < 3; ++j) {
        for (int i = 0; i < 5; ++i) x(i, j) = uniform01(rng);
        for (int i = 0; i < 4; ++i) c(i, j) = uniform01(rng) - 0.5;
    }
    GradientProbe probe;
    probe.params = {&lin.weight, &lin.bias};
    const auto output = [&] {
        Matrix y = lin.weight.value * x;
        y.colwise() += lin.bias.value.col(0);
        return y;
    };
    probe.loss = [&] { return output().cwiseProduct(c).sum(); };
    probe.compute_gradient = [&] {
        lin.weight.grad = c * x.transpose();
        lin.bias.grad = c.rowwise().sum();
    };
    const GradientCheckResult r = gradient_check(probe, 1e-5, 2, 24);
    CHECK(r.max_relative_error < 1e-8);
}

TEST_CASE("gradient check skips weights sitting on a ReLU kink") {
    Parameter w{"w", Matrix::Zero(1, 1), Matrix::Zero(1, 1)};
    GradientProbe probe;
    probe.params = {&w};
    probe.loss = [&] { return std::max(w.value(0, 0), 0.0); };
    probe.compute_gradient = [&] { w.grad(0, 0) = w.value(0, 0) > 0.0 ? 1.0 : 0.0; };
    // Central difference at 0 gives 1/2 against an analytic 0.
    CHECK(gradient_check(probe, 1e-5, 1).max_relative_error == doctest::Approx(1.0));
    probe.pattern = [&] { return std::vector<std::uint8_t>{w.value(0, 0) > 0.0 ? std::uint8_t{1} : std::uint8_t{0}}; };
    const GradientCheckResult r = gradient_check(probe, 1e-5, 1);
    CHECK(r.checked == 0);
    CHECK(r.skipped_kinks == 1);
    w.value(0, 0) = 0.3;
    const GradientCheckResult smooth = gradient_check(probe, 1e-5, 1);
    CHECK(smooth.checked == 1);
    CHECK(smooth.max_relative_error < 1e-8);
}

TEST_CASE("Adam leaves parameters unchanged under zero gradient") {
    PolicyNetwork net = PolicyNetwork::create(Architecture::dense_big, 3);
    std::vector<Matrix> before;
    for (const Parameter* p : net.parameters()) before.push_back(p->value);
    net.zero_grad();
    Adam adam;
    for (int i = 0; i < 5; ++i) adam.step(net.parameters());
    const auto after = net.parameters();
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i]->value == before[i]);
}

TEST_CASE("Adam first step moves each weight by the learning rate") {
    Rng rng(0);
    Parameter p{"p", Matrix::Constant(2, 2, 1.0), Matrix::Zero(2, 2)};
    p.grad << 0.5, -2.0, 1e-3, -1e-3;
    Adam adam(AdamConfig{0.01});
    adam.step({&p});
    // Bias-corrected first step: m_hat / sqrt(v_hat) = sign(g) up to eps.
    CHECK(p.value(0, 0) == doctest::Approx(0.99).epsilon(1e-6));
    CHECK(p.value(0, 1) == doctest::Approx(1.01).epsilon(1e-6));
    CHECK(p.value(1, 0) == doctest::Approx(0.99).epsilon(1e-4));
    CHECK(p.value(1, 1) == doctest::Approx(1.01).epsilon(1e-4));
}

TEST_CASE("overfitting one example") {
    PolicyNetwork net = PolicyNetwork::create(Architecture::dense_big, 21);
    TrainingBatch b = random_batch(1, 22);
    b.targets << 0.3, 0.6, 0.8;
    Adam adam(AdamConfig{1e-3});
    double loss = 1.0;
    for (int i = 0; i < 2000; ++i) {
        net.loss_and_gradient(b);
        adam.step(net.parameters());
    }
    loss = net.loss(b);
    CHECK(loss < 1e-4);
}

TEST_CASE("cross-entropy loss") {
    CHECK(cross_entropy_loss(Eigen::VectorXd::Zero(4), 2) == doctest::Approx(std::log(4.0)));
    CHECK(cross_entropy_loss(Eigen::VectorXd::Zero(4), 2) == doctest::Approx(1.3863).epsilon(1e-4));
    Eigen::VectorXd two(2);
    two << 1.0, 0.0;
    CHECK(cross_entropy_loss(two, 0) == doctest::Approx(-std::log(std::exp(1.0) / (std::exp(1.0) + 1.0))));
    CHECK(cross_entropy_loss(two, 0) == doctest::Approx(0.3133).epsilon(1e-4));
    Eigen::VectorXd peaked(3);
    peaked << 800.0, 0.0, -5.0;
    CHECK(cross_entropy_loss(peaked, 0) == doctest::Approx(0.0));
    CHECK(std::isfinite(cross_entropy_loss(peaked, 2)));
    CHECK_THROWS_AS(cross_entropy_loss(two, 2), ValidationError);
}
