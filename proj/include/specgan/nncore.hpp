#pragma once

// Dense feed-forward networks with exact backpropagation, the GAN cross-entropy
// objectives and an Adam optimizer.

#include "specgan/common.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace specgan::nn {

inline constexpr double kDefaultLeakyAlpha = 0.2;
/// Probabilities are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

enum class Activation : std::uint8_t { Identity = 0, Sigmoid = 1, LeakyRelu = 2 };

double leaky_relu(double x, double alpha = kDefaultLeakyAlpha);
/// Overflow-free logistic function.
double sigmoid(double x);

struct DenseLayer {
    Matrix weight;  ///< out x in
    Vector bias;    ///< out
    Activation activation = Activation::Identity;
    double alpha = kDefaultLeakyAlpha;  ///< used by LeakyRelu only

    std::size_t in_dim() const { return static_cast<std::size_t>(weight.cols()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(weight.rows()); }
};

struct LayerSpec {
    std::size_t units;
    Activation activation;
    double alpha = kDefaultLeakyAlpha;
};

struct DenseNet {
    std::size_t input_dim = 0;
    std::vector<DenseLayer> layers;

    std::size_t output_dim() const { return layers.empty() ? input_dim : layers.back().out_dim(); }
    std::size_t parameter_count() const;
    /// Throws ShapeMismatch / InvalidInput when layers do not chain or hold non-finite values.
    void validate() const;
};

/// Glorot-uniform weights, zero biases.
DenseNet make_net(std::size_t input_dim, std::span<const LayerSpec> layers, Rng& rng);

/// `hidden.size()` leaky-ReLU layers followed by one output layer.
DenseNet make_mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t output_dim,
                  Activation output_activation, Rng& rng);

/// Every layer's input and post-activation output; `inputs[0]` is the batch itself.
struct ForwardTrace {
    std::vector<Matrix> inputs;
    std::vector<Matrix> outputs;

    const Matrix& output() const { return outputs.back(); }
};

ForwardTrace forward(const DenseNet& net, const Matrix& batch);
/// Output only, no trace.
Matrix infer(const DenseNet& net, const Matrix& batch);

struct NetGrads {
    std::vector<Matrix> weight;
    std::vector<Vector> bias;

    static NetGrads zeros_like(const DenseNet& net);
    double max_abs() const;
};

struct BackwardResult {
    NetGrads grads;
    Matrix input_grad;  ///< dLoss/dBatch, for chaining into an upstream network
};

/// `output_grad` is dLoss/dOutput for the whole batch (already carrying any 1/B factor).
BackwardResult backward(const DenseNet& net, const ForwardTrace& trace, const Matrix& output_grad);

/// Scalar loss plus its gradient with respect to each probability.
struct LossGrad {
    double loss = 0.0;
    Vector grad_real;  ///< empty for generator losses
    Vector grad_fake;
};

/// -mean log D(real) - mean log(1 - D(fake)).
LossGrad bce_d_loss(const Vector& d_real, const Vector& d_fake);
/// Non-saturating generator objective: -mean log D(fake).
LossGrad bce_g_loss(const Vector& d_fake);
/// Saturating minimax generator objective: mean log(1 - D(fake)). Negative-valued;
/// kept for ablations only.
LossGrad minimax_g_loss(const Vector& d_fake);

enum class GeneratorObjective : std::uint8_t { NonSaturating, Minimax };

struct TrainHyper {
    double learning_rate = 2e-4;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::size_t batch_size = 32;
    std::size_t epochs = 2000;
    std::size_t noise_dim = 32;
    std::uint64_t seed = 0;
    GeneratorObjective objective = GeneratorObjective::NonSaturating;

    void validate() const;
};

struct AdamState {
    NetGrads m;
    NetGrads v;
    std::uint64_t step = 0;

    static AdamState for_net(const DenseNet& net);
};

/// One bias-corrected Adam update, in place.
void adam_step(DenseNet& net, const NetGrads& grads, AdamState& state, const TrainHyper& hyper);

/// Maps a network output batch to (loss, dLoss/dOutput).
using OutputLoss = std::function<std::pair<double, Matrix>(const Matrix&)>;

/// Largest relative discrepancy between analytic and central-difference gradients
/// over every parameter. Relative error is |a - n| / max(|a| + |n|, floor).
double gradcheck(const DenseNet& net, const OutputLoss& loss, const Matrix& batch,
                 double step = 1e-5, double floor = 1e-6);

/// Adapters turning the probability losses into OutputLoss for a sigmoid-headed net.
OutputLoss as_real_side_d_loss();
OutputLoss as_fake_side_d_loss();
OutputLoss as_g_loss();
OutputLoss as_minimax_g_loss();
/// Full discriminator loss: the first `n_real` output rows are real, the rest fake.
OutputLoss as_d_loss(std::size_t n_real);

struct GradcheckReport {
    std::size_t nets = 0;
    double d_loss_error = 0.0;
    double g_loss_error = 0.0;
    double minimax_error = 0.0;

    double max_error() const;
};

/// Self-test over `nets` random small sigmoid-headed nets (depth 1-3, widths 4-16),
/// each checked against the discriminator, generator and minimax losses.
GradcheckReport gradcheck_suite(std::uint64_t seed, std::size_t nets = 20);

// SNET checkpoints.
void write_snet(std::ostream& os, const DenseNet& net);
DenseNet read_snet(std::istream& is);
void save_snet(const std::filesystem::path& path, const DenseNet& net);
DenseNet load_snet(const std::filesystem::path& path);

}  // namespace specgan::nn
