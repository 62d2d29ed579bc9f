#include "specgan/nncore.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace specgan;
using namespace specgan::nn;

namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = gauss(rng);
        }
    }
    return m;
}

// Plain re-evaluation of the layer chain, one sample at a time.
RowVector chain_oracle(const DenseNet& net, RowVector x) {
    for (const auto& layer : net.layers) {
        RowVector z(layer.weight.rows());
        for (Eigen::Index o = 0; o < layer.weight.rows(); ++o) {
            double acc = layer.bias(o);
            for (Eigen::Index i = 0; i < layer.weight.cols(); ++i) {
                acc += layer.weight(o, i) * x(i);
            }
            switch (layer.activation) {
            case Activation::Identity:
                z(o) = acc;
                break;
            case Activation::Sigmoid:
                z(o) = 1.0 / (1.0 + std::exp(-acc));
                break;
            case Activation::LeakyRelu:
                z(o) = acc > 0.0 ? acc : layer.alpha * acc;
                break;
            }
        }
        x = z;
    }
    return x;
}

DenseNet small_net(std::size_t in, std::vector<std::size_t> hidden, Activation out_act, std::uint64_t seed) {
    Rng rng = make_rng(seed);
    return make_mlp(in, hidden, 1, out_act, rng);
}

}  // namespace

TEST_CASE("activations") {
    CHECK(leaky_relu(2.0) == 2.0);
    CHECK(leaky_relu(-1.0) == doctest::Approx(-0.2));
    CHECK(leaky_relu(0.0) == 0.0);
    CHECK(sigmoid(0.0) == 0.5);
    CHECK(sigmoid(1e3) == 1.0);
    CHECK(sigmoid(-1e3) >= 0.0);
    CHECK(std::isfinite(sigmoid(-1e3)));
    for (const double x : {0.1, 2.5, 17.0, 300.0}) {
        CHECK(std::abs(sigmoid(-x) - (1.0 - sigmoid(x))) < 1e-12);
    }
}

TEST_CASE("glorot init bounds and zero biases") {
    Rng rng = make_rng(4);
    const std::vector<std::size_t> hidden = {100, 100, 100};
    const DenseNet net = make_mlp(34, hidden, 80, Activation::Identity, rng);
    REQUIRE(net.layers.size() == 4);
    CHECK(net.input_dim == 34);
    CHECK(net.output_dim() == 80);
    CHECK(net.parameter_count() == 34 * 100 + 100 + 2 * (100 * 100 + 100) + 100 * 80 + 80);
    for (const auto& layer : net.layers) {
        const double limit = std::sqrt(6.0 / static_cast<double>(layer.in_dim() + layer.out_dim()));
        CHECK(layer.weight.cwiseAbs().maxCoeff() <= limit);
        CHECK(layer.weight.cwiseAbs().maxCoeff() > 0.5 * limit);
        CHECK(layer.bias.isZero());
    }
    CHECK(net.layers[0].activation == Activation::LeakyRelu);
    CHECK(net.layers[0].alpha == 0.2);
    CHECK(net.layers[3].activation == Activation::Identity);
}

TEST_CASE("forward pass") {
    Rng rng = make_rng(9);
    SUBCASE("zero net with sigmoid head outputs one half") {
        DenseNet net = small_net(5, {7}, Activation::Sigmoid, 1);
        for (auto& l : net.layers) {
            l.weight.setZero();
        }
        const Matrix out = infer(net, random_matrix(4, 5, rng));
        CHECK((out.array() == 0.5).all());
    }
    SUBCASE("identity layer passes input through") {
        DenseNet net;
        net.input_dim = 3;
        net.layers.push_back({Matrix::Identity(3, 3), Vector::Zero(3), Activation::Identity});
        const Matrix x = random_matrix(5, 3, rng);
        CHECK(infer(net, x) == x);
    }
    SUBCASE("matches the chain oracle and row-wise evaluation") {
        const DenseNet net = small_net(3, {100, 100, 100}, Activation::Sigmoid, 2);
        const Matrix x = random_matrix(7, 3, rng);
        const auto trace = forward(net, x);
        CHECK(trace.inputs.size() == 4);
        CHECK(trace.inputs[0] == x);
        CHECK((infer(net, x) - trace.output()).cwiseAbs().maxCoeff() == 0.0);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const RowVector expected = chain_oracle(net, x.row(r));
            CHECK((trace.output().row(r) - expected).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((infer(net, Matrix(x.row(r))) - trace.output().row(r)).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    SUBCASE("width mismatch") {
        const DenseNet net = small_net(3, {4}, Activation::Sigmoid, 3);
        CHECK_THROWS_AS(forward(net, random_matrix(2, 4, rng)), ShapeMismatch);
    }
}

TEST_CASE("loss values and gradients") {
    const Vector half = Vector::Constant(1, 0.5);
    CHECK(bce_d_loss(half, half).loss == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(bce_g_loss(half).loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(bce_d_loss(Vector::Constant(1, 1.0 - 1e-7), Vector::Constant(1, 1e-7)).loss < 1e-6);
    CHECK(bce_g_loss(Vector::Constant(1, 1.0)).loss < 1e-6);
    CHECK(minimax_g_loss(half).loss == doctest::Approx(-std::log(2.0)).epsilon(1e-12));

    // Clamping keeps everything finite at the boundaries.
    const Vector edge = (Vector(3) << 0.0, 1.0, 0.5).finished();
    for (const auto& r : {bce_d_loss(edge, edge), bce_g_loss(edge), minimax_g_loss(edge)}) {
        CHECK(std::isfinite(r.loss));
        CHECK(r.grad_fake.allFinite());
    }
    CHECK(bce_d_loss(edge, edge).loss >= 0.0);

    // Symbolic gradients versus central differences on the probabilities.
    Rng rng = make_rng(21);
    Vector real(5);
    Vector fake(4);
    for (auto& p : real) {
        p = 0.05 + 0.9 * uniform01(rng);
    }
    for (auto& p : fake) {
        p = 0.05 + 0.9 * uniform01(rng);
    }
    const double h = 1e-6;
    const auto d = bce_d_loss(real, fake);
    for (Eigen::Index i = 0; i < real.size(); ++i) {
        Vector up = real;
        Vector dn = real;
        up(i) += h;
        dn(i) -= h;
        CHECK(std::abs((bce_d_loss(up, fake).loss - bce_d_loss(dn, fake).loss) / (2 * h) - d.grad_real(i)) < 1e-6);
    }
    for (Eigen::Index i = 0; i < fake.size(); ++i) {
        Vector up = fake;
        Vector dn = fake;
        up(i) += h;
        dn(i) -= h;
        CHECK(std::abs((bce_d_loss(real, up).loss - bce_d_loss(real, dn).loss) / (2 * h) - d.grad_fake(i)) < 1e-6);
        CHECK(std::abs((bce_g_loss(up).loss - bce_g_loss(dn).loss) / (2 * h) - bce_g_loss(fake).grad_fake(i)) < 1e-6);
        CHECK(std::abs((minimax_g_loss(up).loss - minimax_g_loss(dn).loss) / (2 * h) -
                       minimax_g_loss(fake).grad_fake(i)) < 1e-6);
    }
}

TEST_CASE("backpropagation") {
    Rng rng = make_rng(33);
    SUBCASE("zero output gradient gives zero parameter gradients") {
        const DenseNet net = small_net(4, {6, 5}, Activation::Sigmoid, 5);
        const auto trace = forward(net, random_matrix(3, 4, rng));
        const auto res = backward(net, trace, Matrix::Zero(3, 1));
        CHECK(res.grads.max_abs() == 0.0);
        CHECK(res.input_grad.isZero());
    }
    SUBCASE("finite differences on the three losses") {
        for (std::uint64_t s = 0; s < 5; ++s) {
            const DenseNet net = small_net(6, {16, 8}, Activation::Sigmoid, 100 + s);
            const Matrix x = random_matrix(6, 6, rng);
            CHECK(gradcheck(net, as_d_loss(3), x) < 1e-4);
            CHECK(gradcheck(net, as_real_side_d_loss(), x) < 1e-4);
            CHECK(gradcheck(net, as_fake_side_d_loss(), x) < 1e-4);
            CHECK(gradcheck(net, as_g_loss(), x) < 1e-4);
            CHECK(gradcheck(net, as_minimax_g_loss(), x) < 1e-4);
        }
    }
    SUBCASE("input gradient matches finite differences") {
        const DenseNet net = small_net(3, {5}, Activation::Sigmoid, 8);
        Matrix x = random_matrix(2, 3, rng);
        const auto loss = as_g_loss();
        const auto res = backward(net, forward(net, x), loss(infer(net, x)).second);
        const double h = 1e-6;
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            for (Eigen::Index c = 0; c < x.cols(); ++c) {
                Matrix up = x;
                Matrix dn = x;
                up(r, c) += h;
                dn(r, c) -= h;
                const double numeric = (loss(infer(net, up)).first - loss(infer(net, dn)).first) / (2 * h);
                CHECK(std::abs(numeric - res.input_grad(r, c)) < 1e-7);
            }
        }
    }
    SUBCASE("batch gradient equals the mean of per-sample gradients") {
        const DenseNet net = small_net(4, {8, 8}, Activation::Sigmoid, 12);
        const Matrix x = random_matrix(5, 4, rng);
        const auto loss = as_g_loss();
        const NetGrads batch = backward(net, forward(net, x), loss(infer(net, x)).second).grads;
        NetGrads mean = NetGrads::zeros_like(net);
        for (Eigen::Index r = 0; r < x.rows(); ++r) {
            const Matrix xr = x.row(r);
            const NetGrads g = backward(net, forward(net, xr), loss(infer(net, xr)).second).grads;
            for (std::size_t l = 0; l < net.layers.size(); ++l) {
                mean.weight[l] += g.weight[l] / 5.0;
                mean.bias[l] += g.bias[l] / 5.0;
            }
        }
        for (std::size_t l = 0; l < net.layers.size(); ++l) {
            CHECK((batch.weight[l] - mean.weight[l]).cwiseAbs().maxCoeff() < 1e-10);
            CHECK((batch.bias[l] - mean.bias[l]).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    SUBCASE("shape errors") {
        const DenseNet net = small_net(4, {8}, Activation::Sigmoid, 13);
        const auto trace = forward(net, random_matrix(3, 4, rng));
        CHECK_THROWS_AS(backward(net, trace, Matrix::Zero(2, 1)), ShapeMismatch);
    }
}

TEST_CASE("gradcheck suite") {
    const auto rep = gradcheck_suite(1, 20);
    CHECK(rep.nets == 20);
    CHECK(rep.max_error() < 1e-4);
}

TEST_CASE("adam") {
    TrainHyper hyper;
    hyper.learning_rate = 0.1;
    DenseNet net;
    net.input_dim = 1;
    net.layers.push_back({Matrix::Constant(1, 1, 0.0), Vector::Zero(1), Activation::Identity});
    AdamState state = AdamState::for_net(net);

    NetGrads zero = NetGrads::zeros_like(net);
    adam_step(net, zero, state, hyper);
    CHECK(net.layers[0].weight(0, 0) == 0.0);

    state = AdamState::for_net(net);
    NetGrads g = NetGrads::zeros_like(net);
    g.weight[0](0, 0) = 1.0;
    adam_step(net, g, state, hyper);
    // m_hat = 1, v_hat = 1, so the first step is lr / (1 + eps).
    CHECK(net.layers[0].weight(0, 0) == doctest::Approx(-0.1 / (1.0 + 1e-8)).epsilon(1e-12));
    adam_step(net, g, state, hyper);
    CHECK(net.layers[0].weight(0, 0) == doctest::Approx(-0.2).epsilon(1e-6));

    NetGrads wrong;
    CHECK_THROWS_AS(adam_step(net, wrong, state, hyper), ShapeMismatch);

    TrainHyper bad;
    bad.learning_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
    bad = TrainHyper{};
    bad.batch_size = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("snet round trip") {
    Rng rng = make_rng(55);
    const std::vector<std::size_t> hidden = {7, 5};
    const DenseNet net = make_mlp(4, hidden, 2, Activation::Sigmoid, rng);
    std::stringstream ss;
    write_snet(ss, net);
    const std::string bytes = ss.str();
    CHECK(bytes.substr(0, 4) == "SNET");

    std::stringstream in(bytes);
    const DenseNet back = read_snet(in);
    REQUIRE(back.layers.size() == 3);
    CHECK(back.input_dim == 4);
    for (std::size_t l = 0; l < 3; ++l) {
        CHECK(back.layers[l].weight == net.layers[l].weight);
        CHECK(back.layers[l].bias == net.layers[l].bias);
        CHECK(back.layers[l].activation == net.layers[l].activation);
        CHECK(back.layers[l].alpha == net.layers[l].alpha);
    }
    std::stringstream again;
    write_snet(again, back);
    CHECK(again.str() == bytes);

    std::string broken = bytes;
    broken[1] = 'X';
    std::stringstream b1(broken);
    CHECK_THROWS_AS(read_snet(b1), DatasetIoError);
    std::stringstream b2(bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_snet(b2), DatasetIoError);
}
