#include "specgan/nncore.hpp"

#include "specgan/binio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace specgan::nn {

namespace {

constexpr char kSnetMagic[] = "SNET";
constexpr std::uint16_t kSnetVersion = 1;

double clamp_prob(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

void apply_activation(Matrix& z, const DenseLayer& layer) {
    switch (layer.activation) {
    case Activation::Identity:
        break;
    case Activation::Sigmoid:
        z = z.unaryExpr([](double x) { return sigmoid(x); });
        break;
    case Activation::LeakyRelu: {
        const double a = layer.alpha;
        z = z.unaryExpr([a](double x) { return leaky_relu(x, a); });
        break;
    }
    }
}

// Activation derivative expressed through the post-activation value; leaky ReLU
// with alpha > 0 preserves sign so the output determines the branch.
Matrix activation_grad(const Matrix& out, const DenseLayer& layer) {
    switch (layer.activation) {
    case Activation::Identity:
        return Matrix::Ones(out.rows(), out.cols());
    case Activation::Sigmoid:
        return out.array() * (1.0 - out.array());
    case Activation::LeakyRelu: {
        const double a = layer.alpha;
        return out.unaryExpr([a](double y) { return y > 0.0 ? 1.0 : a; });
    }
    }
    return Matrix::Ones(out.rows(), out.cols());
}

double sum_log(const Vector& p, bool complement) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double q = clamp_prob(p(i));
        s += std::log(complement ? 1.0 - q : q);
    }
    return s;
}

Vector column(const Matrix& m) {
    if (m.cols() != 1) {
        throw ShapeMismatch("loss expects a single-output network");
    }
    return m.col(0);
}

}  // namespace

double leaky_relu(double x, double alpha) { return std::max(alpha * x, x); }

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::size_t DenseNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) {
        n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    }
    return n;
}

void DenseNet::validate() const {
    std::size_t width = input_dim;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        if (l.in_dim() != width) {
            throw ShapeMismatch("layer " + std::to_string(i) + " expects input width " +
                                std::to_string(l.in_dim()) + ", previous width is " + std::to_string(width));
        }
        if (static_cast<std::size_t>(l.bias.size()) != l.out_dim()) {
            throw ShapeMismatch("layer " + std::to_string(i) + " bias length mismatch");
        }
        if (!l.weight.allFinite() || !l.bias.allFinite()) {
            throw InvalidInput("layer " + std::to_string(i) + " holds non-finite parameters");
        }
        width = l.out_dim();
    }
}

DenseNet make_net(std::size_t input_dim, std::span<const LayerSpec> specs, Rng& rng) {
    DenseNet net;
    net.input_dim = input_dim;
    std::size_t fan_in = input_dim;
    for (const auto& s : specs) {
        DenseLayer layer;
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + s.units));
        layer.weight.resize(static_cast<Eigen::Index>(s.units), static_cast<Eigen::Index>(fan_in));
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                layer.weight(r, c) = (2.0 * uniform01(rng) - 1.0) * limit;
            }
        }
        layer.bias = Vector::Zero(static_cast<Eigen::Index>(s.units));
        layer.activation = s.activation;
        layer.alpha = s.alpha;
        net.layers.push_back(std::move(layer));
        fan_in = s.units;
    }
    return net;
}

DenseNet make_mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t output_dim,
                  Activation output_activation, Rng& rng) {
    std::vector<LayerSpec> specs;
    for (const auto h : hidden) {
        specs.push_back({h, Activation::LeakyRelu});
    }
    specs.push_back({output_dim, output_activation});
    return make_net(input_dim, specs, rng);
}

ForwardTrace forward(const DenseNet& net, const Matrix& batch) {
    if (static_cast<std::size_t>(batch.cols()) != net.input_dim) {
        throw ShapeMismatch("batch width " + std::to_string(batch.cols()) + " != input_dim " +
                            std::to_string(net.input_dim));
    }
    ForwardTrace trace;
    trace.inputs.reserve(net.layers.size());
    trace.outputs.reserve(net.layers.size());
    const Matrix* current = &batch;
    for (const auto& layer : net.layers) {
        trace.inputs.push_back(*current);
        Matrix z = (*current) * layer.weight.transpose();
        z.rowwise() += layer.bias.transpose();
        apply_activation(z, layer);
        trace.outputs.push_back(std::move(z));
        current = &trace.outputs.back();
    }
    if (net.layers.empty()) {
        trace.outputs.push_back(batch);
    }
    return trace;
}

Matrix infer(const DenseNet& net, const Matrix& batch) {
    if (static_cast<std::size_t>(batch.cols()) != net.input_dim) {
        throw ShapeMismatch("batch width " + std::to_string(batch.cols()) + " != input_dim " +
                            std::to_string(net.input_dim));
    }
    Matrix current = batch;
    for (const auto& layer : net.layers) {
        Matrix z = current * layer.weight.transpose();
        z.rowwise() += layer.bias.transpose();
        apply_activation(z, layer);
        current = std::move(z);
    }
    return current;
}

NetGrads NetGrads::zeros_like(const DenseNet& net) {
    NetGrads g;
    for (const auto& l : net.layers) {
        g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
        g.bias.push_back(Vector::Zero(l.bias.size()));
    }
    return g;
}

double NetGrads::max_abs() const {
    double m = 0.0;
    for (const auto& w : weight) {
        if (w.size() > 0) {
            m = std::max(m, w.cwiseAbs().maxCoeff());
        }
    }
    for (const auto& b : bias) {
        if (b.size() > 0) {
            m = std::max(m, b.cwiseAbs().maxCoeff());
        }
    }
    return m;
}

BackwardResult backward(const DenseNet& net, const ForwardTrace& trace, const Matrix& output_grad) {
    if (net.layers.empty()) {
        return {NetGrads{}, output_grad};
    }
    if (trace.outputs.size() != net.layers.size() || trace.inputs.size() != net.layers.size()) {
        throw ShapeMismatch("trace does not match network depth");
    }
    const Matrix& out = trace.output();
    if (output_grad.rows() != out.rows() || output_grad.cols() != out.cols()) {
        throw ShapeMismatch("output gradient shape does not match network output");
    }
    BackwardResult result;
    result.grads = NetGrads::zeros_like(net);
    Matrix grad = output_grad;
    for (std::size_t li = net.layers.size(); li-- > 0;) {
        const auto& layer = net.layers[li];
        const Matrix delta = grad.cwiseProduct(activation_grad(trace.outputs[li], layer));
        result.grads.weight[li].noalias() = delta.transpose() * trace.inputs[li];
        result.grads.bias[li] = delta.colwise().sum().transpose();
        grad = delta * layer.weight;
    }
    result.input_grad = std::move(grad);
    return result;
}

LossGrad bce_d_loss(const Vector& d_real, const Vector& d_fake) {
    LossGrad r;
    const double nr = static_cast<double>(d_real.size());
    const double nf = static_cast<double>(d_fake.size());
    r.loss = 0.0;
    if (nr > 0) {
        r.loss -= sum_log(d_real, false) / nr;
    }
    if (nf > 0) {
        r.loss -= sum_log(d_fake, true) / nf;
    }
    r.grad_real = d_real.unaryExpr([nr](double p) { return -1.0 / (clamp_prob(p) * nr); });
    r.grad_fake = d_fake.unaryExpr([nf](double p) { return 1.0 / ((1.0 - clamp_prob(p)) * nf); });
    return r;
}

LossGrad bce_g_loss(const Vector& d_fake) {
    LossGrad r;
    const double nf = static_cast<double>(d_fake.size());
    r.loss = nf > 0 ? -sum_log(d_fake, false) / nf : 0.0;
    r.grad_fake = d_fake.unaryExpr([nf](double p) { return -1.0 / (clamp_prob(p) * nf); });
    return r;
}

LossGrad minimax_g_loss(const Vector& d_fake) {
    LossGrad r;
    const double nf = static_cast<double>(d_fake.size());
    r.loss = nf > 0 ? sum_log(d_fake, true) / nf : 0.0;
    r.grad_fake = d_fake.unaryExpr([nf](double p) { return -1.0 / ((1.0 - clamp_prob(p)) * nf); });
    return r;
}

void TrainHyper::validate() const {
    if (!(learning_rate > 0.0)) {
        throw InvalidInput("learning_rate must be positive");
    }
    if (adam_beta1 < 0.0 || adam_beta1 >= 1.0 || adam_beta2 < 0.0 || adam_beta2 >= 1.0) {
        throw InvalidInput("Adam betas must lie in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) {
        throw InvalidInput("adam_epsilon must be positive");
    }
    if (batch_size < 1) {
        throw InvalidInput("batch_size must be at least 1");
    }
    if (noise_dim < 1) {
        throw InvalidInput("noise_dim must be at least 1");
    }
}

AdamState AdamState::for_net(const DenseNet& net) {
    return {NetGrads::zeros_like(net), NetGrads::zeros_like(net), 0};
}

void adam_step(DenseNet& net, const NetGrads& grads, AdamState& state, const TrainHyper& hyper) {
    const std::size_t n = net.layers.size();
    if (grads.weight.size() != n || grads.bias.size() != n || state.m.weight.size() != n ||
        state.v.weight.size() != n) {
        throw ShapeMismatch("gradient/state layer count does not match network");
    }
    state.step += 1;
    const double b1 = hyper.adam_beta1;
    const double b2 = hyper.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
    const double lr = hyper.learning_rate;
    const double eps = hyper.adam_epsilon;

    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        if (param.rows() != g.rows() || param.cols() != g.cols() || m.rows() != g.rows() ||
            m.cols() != g.cols()) {
            throw ShapeMismatch("gradient shape does not match parameter");
        }
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t i = 0; i < n; ++i) {
        update(net.layers[i].weight, grads.weight[i], state.m.weight[i], state.v.weight[i]);
        update(net.layers[i].bias, grads.bias[i], state.m.bias[i], state.v.bias[i]);
    }
}

double gradcheck(const DenseNet& net, const OutputLoss& loss, const Matrix& batch, double step,
                 double floor) {
    const ForwardTrace trace = forward(net, batch);
    const auto [value, out_grad] = loss(trace.output());
    (void)value;
    const NetGrads analytic = backward(net, trace, out_grad).grads;

    DenseNet probe = net;
    auto eval = [&]() { return loss(infer(probe, batch)).first; };
    double worst = 0.0;
    auto check = [&](double& param, double a) {
        const double saved = param;
        param = saved + step;
        const double up = eval();
        param = saved - step;
        const double down = eval();
        param = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double rel = std::abs(a - numeric) / std::max(std::abs(a) + std::abs(numeric), floor);
        worst = std::max(worst, rel);
    };
    for (std::size_t li = 0; li < probe.layers.size(); ++li) {
        auto& layer = probe.layers[li];
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                check(layer.weight(r, c), analytic.weight[li](r, c));
            }
        }
        for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
            check(layer.bias(r), analytic.bias[li](r));
        }
    }
    return worst;
}

OutputLoss as_real_side_d_loss() {
    return [](const Matrix& out) {
        const auto r = bce_d_loss(column(out), Vector{});
        return std::pair<double, Matrix>{r.loss, Matrix(r.grad_real)};
    };
}

OutputLoss as_fake_side_d_loss() {
    return [](const Matrix& out) {
        const auto r = bce_d_loss(Vector{}, column(out));
        return std::pair<double, Matrix>{r.loss, Matrix(r.grad_fake)};
    };
}

OutputLoss as_g_loss() {
    return [](const Matrix& out) {
        const auto r = bce_g_loss(column(out));
        return std::pair<double, Matrix>{r.loss, Matrix(r.grad_fake)};
    };
}

OutputLoss as_minimax_g_loss() {
    return [](const Matrix& out) {
        const auto r = minimax_g_loss(column(out));
        return std::pair<double, Matrix>{r.loss, Matrix(r.grad_fake)};
    };
}

OutputLoss as_d_loss(std::size_t n_real) {
    return [n_real](const Matrix& out) {
        const auto nr = static_cast<Eigen::Index>(n_real);
        const Vector all = column(out);
        const auto r = bce_d_loss(all.head(nr), all.tail(all.size() - nr));
        Matrix grad(out.rows(), 1);
        grad << r.grad_real, r.grad_fake;
        return std::pair<double, Matrix>{r.loss, grad};
    };
}

double GradcheckReport::max_error() const { return std::max({d_loss_error, g_loss_error, minimax_error}); }

GradcheckReport gradcheck_suite(std::uint64_t seed, std::size_t nets) {
    GradcheckReport rep;
    rep.nets = nets;
    for (std::size_t i = 0; i < nets; ++i) {
        Rng rng = make_rng(derive_seed(seed, i));
        const std::size_t in = 4 + uniform_index(rng, 13);
        const std::size_t depth = 1 + uniform_index(rng, 3);
        std::vector<std::size_t> hidden;
        for (std::size_t h = 1; h < depth; ++h) {
            hidden.push_back(4 + uniform_index(rng, 13));
        }
        const DenseNet net = make_mlp(in, hidden, 1, Activation::Sigmoid, rng);
        Matrix batch(6, static_cast<Eigen::Index>(in));
        for (Eigen::Index r = 0; r < batch.rows(); ++r) {
            for (Eigen::Index c = 0; c < batch.cols(); ++c) {
                batch(r, c) = gauss(rng);
            }
        }
        rep.d_loss_error = std::max(rep.d_loss_error, gradcheck(net, as_d_loss(3), batch));
        rep.g_loss_error = std::max(rep.g_loss_error, gradcheck(net, as_g_loss(), batch));
        rep.minimax_error = std::max(rep.minimax_error, gradcheck(net, as_minimax_g_loss(), batch));
    }
    return rep;
}

void write_snet(std::ostream& os, const DenseNet& net) {
    using binio::put;
    net.validate();
    binio::put_magic(os, kSnetMagic);
    put<std::uint16_t>(os, kSnetVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(net.layers.size()));
    for (const auto& l : net.layers) {
        put<std::uint32_t>(os, static_cast<std::uint32_t>(l.weight.rows()));
        put<std::uint32_t>(os, static_cast<std::uint32_t>(l.weight.cols()));
        put<std::uint8_t>(os, static_cast<std::uint8_t>(l.activation));
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
                put<double>(os, l.weight(r, c));
            }
        }
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) {
            put<double>(os, l.bias(r));
        }
        if (l.activation == Activation::LeakyRelu) {
            put<double>(os, l.alpha);
        }
    }
}

DenseNet read_snet(std::istream& is) {
    using binio::get;
    binio::expect_magic<DatasetIoError>(is, kSnetMagic);
    const auto version = get<std::uint16_t, DatasetIoError>(is);
    if (version != kSnetVersion) {
        throw DatasetIoError("unsupported SNET version " + std::to_string(version));
    }
    const auto count = get<std::uint32_t, DatasetIoError>(is);
    DenseNet net;
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto rows = get<std::uint32_t, DatasetIoError>(is);
        const auto cols = get<std::uint32_t, DatasetIoError>(is);
        const auto tag = get<std::uint8_t, DatasetIoError>(is);
        if (tag > static_cast<std::uint8_t>(Activation::LeakyRelu)) {
            throw DatasetIoError("unknown activation tag");
        }
        DenseLayer l;
        l.activation = static_cast<Activation>(tag);
        l.weight.resize(rows, cols);
        for (std::uint32_t r = 0; r < rows; ++r) {
            for (std::uint32_t c = 0; c < cols; ++c) {
                l.weight(r, c) = get<double, DatasetIoError>(is);
            }
        }
        l.bias.resize(rows);
        for (std::uint32_t r = 0; r < rows; ++r) {
            l.bias(r) = get<double, DatasetIoError>(is);
        }
        if (l.activation == Activation::LeakyRelu) {
            l.alpha = get<double, DatasetIoError>(is);
        }
        if (i == 0) {
            net.input_dim = cols;
        }
        net.layers.push_back(std::move(l));
    }
    try {
        net.validate();
    } catch (const std::exception& e) {
        throw DatasetIoError(std::string("corrupt checkpoint: ") + e.what());
    }
    return net;
}

void save_snet(const std::filesystem::path& path, const DenseNet& net) {
    std::ostringstream os(std::ios::binary);
    write_snet(os, net);
    binio::write_file_atomic(path, os.str());
}

DenseNet load_snet(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw DatasetIoError("cannot open checkpoint: " + path.string());
    }
    return read_snet(is);
}

}  // namespace specgan::nn
