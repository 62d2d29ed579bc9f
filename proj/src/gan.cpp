#include "specgan/gan.hpp"

#include "specgan/binio.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace specgan::gan {

namespace {

using nn::DenseNet;
using nn::NetGrads;
using nn::TrainHyper;

double rms_scale(const Matrix& x) {
    if (x.size() == 0) {
        return 1.0;
    }
    const double s = std::sqrt(x.squaredNorm() / static_cast<double>(x.size()));
    return s > 0.0 && std::isfinite(s) ? s : 1.0;
}

Matrix gaussian(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            m(r, c) = gauss(rng);
        }
    }
    return m;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
    Matrix m(a.rows(), a.cols() + b.cols());
    m << a, b;
    return m;
}

Matrix take_rows(const Matrix& m, std::span<const std::size_t> idx) {
    Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
    }
    return out;
}

void accumulate(NetGrads& into, const NetGrads& g) {
    for (std::size_t i = 0; i < into.weight.size(); ++i) {
        into.weight[i] += g.weight[i];
        into.bias[i] += g.bias[i];
    }
}

std::vector<std::size_t> iota_vec(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

// Minibatches of one epoch: a fresh permutation cut into ceil(n / b) batches.
std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch, Rng& rng) {
    auto perm = iota_vec(n);
    shuffle_in_place(perm, rng);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t s = 0; s < n; s += batch) {
        out.emplace_back(perm.begin() + static_cast<std::ptrdiff_t>(s),
                         perm.begin() + static_cast<std::ptrdiff_t>(std::min(n, s + batch)));
    }
    return out;
}

Matrix left_cols(const Matrix& m, Eigen::Index n) { return m.leftCols(n); }
Matrix right_cols(const Matrix& m, Eigen::Index n) { return m.rightCols(n); }

void check_finite(const LossRecord& r) {
    if (!std::isfinite(r.d_loss) || !std::isfinite(r.g_loss)) {
        throw std::runtime_error("GAN training produced a non-finite loss");
    }
}

nn::LossGrad generator_loss(const Vector& d_fake, const TrainHyper& hyper) {
    return hyper.objective == nn::GeneratorObjective::Minimax ? nn::minimax_g_loss(d_fake)
                                                              : nn::bce_g_loss(d_fake);
}

Matrix disc_input(const CganBundle& b, const Matrix& x, const Matrix& y) {
    return b.conditioned_discriminator ? hcat(x, y) : x;
}

void check_labels(const Labels& labels) {
    for (const auto l : labels) {
        if (l >= kLabelDim) {
            throw InvalidInput("label out of range");
        }
    }
}

}  // namespace

Matrix one_hot(const Labels& labels, std::size_t width) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] >= width) {
            throw InvalidInput("label out of range for one-hot width");
        }
        m(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return m;
}

CganBundle init_cgan(std::size_t feature_dim, const TrainHyper& hyper, const GanArchitecture& arch) {
    hyper.validate();
    Rng rng = make_rng(derive_seed(hyper.seed, 1));
    CganBundle b;
    b.hyper = hyper;
    b.feature_dim = feature_dim;
    b.noise_dim = hyper.noise_dim;
    b.generator = nn::make_mlp(hyper.noise_dim + kLabelDim, arch.hidden, feature_dim,
                               nn::Activation::Identity, rng);
    b.discriminator = nn::make_mlp(feature_dim + kLabelDim, arch.hidden, 1, nn::Activation::Sigmoid, rng);
    return b;
}

BiganBundle init_bigan(std::size_t feature_dim, const TrainHyper& hyper, const GanArchitecture& arch) {
    hyper.validate();
    Rng rng = make_rng(derive_seed(hyper.seed, 2));
    BiganBundle b;
    b.hyper = hyper;
    b.feature_dim = feature_dim;
    b.noise_dim = hyper.noise_dim;
    b.generator = nn::make_mlp(hyper.noise_dim, arch.hidden, feature_dim, nn::Activation::Identity, rng);
    b.encoder = nn::make_mlp(feature_dim, arch.hidden, hyper.noise_dim, nn::Activation::Identity, rng);
    b.discriminator = nn::make_mlp(feature_dim + hyper.noise_dim, arch.hidden, 1, nn::Activation::Sigmoid, rng);
    return b;
}

double discriminator_loss(const CganBundle& bundle, const Matrix& real, const Matrix& fake,
                          const Labels& labels) {
    const Matrix y = one_hot(labels);
    const double s = bundle.feature_scale;
    const Vector dr = nn::infer(bundle.discriminator, disc_input(bundle, real / s, y)).col(0);
    const Vector df = nn::infer(bundle.discriminator, disc_input(bundle, fake / s, y)).col(0);
    return nn::bce_d_loss(dr, df).loss;
}

void discriminator_step(CganBundle& bundle, nn::AdamState& state, const Matrix& real, const Matrix& fake,
                        const Labels& labels) {
    const Matrix y = one_hot(labels);
    const double s = bundle.feature_scale;
    const auto tr = nn::forward(bundle.discriminator, disc_input(bundle, real / s, y));
    const auto tf = nn::forward(bundle.discriminator, disc_input(bundle, fake / s, y));
    const auto loss = nn::bce_d_loss(tr.output().col(0), tf.output().col(0));
    NetGrads g = nn::backward(bundle.discriminator, tr, Matrix(loss.grad_real)).grads;
    accumulate(g, nn::backward(bundle.discriminator, tf, Matrix(loss.grad_fake)).grads);
    nn::adam_step(bundle.discriminator, g, state, bundle.hyper);
}

CganBundle train_cgan(const Matrix& features, const Labels& labels, const TrainHyper& hyper,
                      const GanArchitecture& arch) {
    hyper.validate();
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw ShapeMismatch("feature rows and labels differ in length");
    }
    check_labels(labels);
    for (Label c = 0; c < kLabelDim; ++c) {
        if (std::count(labels.begin(), labels.end(), c) < 2) {
            throw InvalidInput("conditional GAN needs at least two samples of label " + std::to_string(c));
        }
    }

    const std::size_t n = labels.size();
    const auto feat = static_cast<std::size_t>(features.cols());
    CganBundle b = init_cgan(feat, hyper, arch);
    b.feature_scale = rms_scale(features);
    const Matrix x = features / b.feature_scale;
    const Matrix y_all = one_hot(labels);

    nn::AdamState d_state = nn::AdamState::for_net(b.discriminator);
    nn::AdamState g_state = nn::AdamState::for_net(b.generator);
    Rng rng = make_rng(derive_seed(hyper.seed, 3));
    const std::size_t batch = std::min(hyper.batch_size, n);
    const auto fd = static_cast<Eigen::Index>(feat);

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (const auto& idx : epoch_batches(n, batch, rng)) {
            const Matrix xb = take_rows(x, idx);
            const Matrix yb = take_rows(y_all, idx);
            const std::size_t m = idx.size();
            LossRecord rec;

            // Discriminator: real pairs toward 1, generated pairs toward 0.
            {
                const Matrix fake = nn::infer(b.generator, hcat(gaussian(m, b.noise_dim, rng), yb));
                const auto tr = nn::forward(b.discriminator, hcat(xb, yb));
                const auto tf = nn::forward(b.discriminator, hcat(fake, yb));
                const auto loss = nn::bce_d_loss(tr.output().col(0), tf.output().col(0));
                NetGrads g = nn::backward(b.discriminator, tr, Matrix(loss.grad_real)).grads;
                accumulate(g, nn::backward(b.discriminator, tf, Matrix(loss.grad_fake)).grads);
                nn::adam_step(b.discriminator, g, d_state, hyper);
                rec.d_loss = loss.loss;
            }
            // Generator: push D(G(z, y), y) toward 1 through the updated discriminator.
            {
                const auto tg = nn::forward(b.generator, hcat(gaussian(m, b.noise_dim, rng), yb));
                const auto td = nn::forward(b.discriminator, hcat(tg.output(), yb));
                const auto loss = generator_loss(td.output().col(0), hyper);
                const Matrix d_in = nn::backward(b.discriminator, td, Matrix(loss.grad_fake)).input_grad;
                const auto gg = nn::backward(b.generator, tg, left_cols(d_in, fd)).grads;
                nn::adam_step(b.generator, gg, g_state, hyper);
                rec.g_loss = loss.loss;
            }
            check_finite(rec);
            b.history.push_back(rec);
        }
    }
    return b;
}

Matrix sample_cgan(const CganBundle& bundle, Label label, std::size_t n, std::uint64_t seed) {
    if (label >= bundle.label_dim) {
        throw InvalidInput("unknown label " + std::to_string(label));
    }
    if (n == 0) {
        return Matrix(0, static_cast<Eigen::Index>(bundle.feature_dim));
    }
    Rng rng = make_rng(seed);
    const Matrix z = gaussian(n, bundle.noise_dim, rng);
    const Matrix y = one_hot(Labels(n, label), bundle.label_dim);
    return nn::infer(bundle.generator, hcat(z, y)) * bundle.feature_scale;
}

SyntheticSet sample_balanced(const CganBundle& bundle, std::size_t n, std::uint64_t seed) {
    SyntheticSet s;
    s.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.labels[i] = static_cast<Label>(i % 2);
    }
    if (n == 0) {
        s.features = Matrix(0, static_cast<Eigen::Index>(bundle.feature_dim));
        return s;
    }
    Rng rng = make_rng(seed);
    const Matrix z = gaussian(n, bundle.noise_dim, rng);
    s.features = nn::infer(bundle.generator, hcat(z, one_hot(s.labels, bundle.label_dim))) * bundle.feature_scale;
    return s;
}

double discriminator_accuracy(const CganBundle& bundle, const Matrix& real, const Labels& labels,
                              std::uint64_t seed) {
    if (static_cast<std::size_t>(real.rows()) != labels.size() || labels.empty()) {
        throw ShapeMismatch("need one label per real row");
    }
    Rng rng = make_rng(seed);
    const Matrix y = one_hot(labels, bundle.label_dim);
    const Matrix fake = nn::infer(bundle.generator, hcat(gaussian(labels.size(), bundle.noise_dim, rng), y));
    const double s = bundle.feature_scale;
    const Vector dr = nn::infer(bundle.discriminator, disc_input(bundle, real / s, y)).col(0);
    const Vector df = nn::infer(bundle.discriminator, disc_input(bundle, fake, y)).col(0);
    const auto correct = (dr.array() > 0.5).count() + (df.array() <= 0.5).count();
    return static_cast<double>(correct) / static_cast<double>(dr.size() + df.size());
}

BiganBundle train_bigan(const Matrix& features, const TrainHyper& hyper, const GanArchitecture& arch) {
    hyper.validate();
    const auto n = static_cast<std::size_t>(features.rows());
    if (n < hyper.batch_size || n == 0) {
        throw InvalidInput("bidirectional GAN needs at least batch_size samples");
    }
    const auto feat = static_cast<std::size_t>(features.cols());
    BiganBundle b = init_bigan(feat, hyper, arch);
    b.feature_scale = rms_scale(features);
    const Matrix x = features / b.feature_scale;

    nn::AdamState d_state = nn::AdamState::for_net(b.discriminator);
    nn::AdamState g_state = nn::AdamState::for_net(b.generator);
    nn::AdamState e_state = nn::AdamState::for_net(b.encoder);
    Rng rng = make_rng(derive_seed(hyper.seed, 3));
    const auto fd = static_cast<Eigen::Index>(feat);
    const auto zd = static_cast<Eigen::Index>(b.noise_dim);

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (const auto& idx : epoch_batches(n, hyper.batch_size, rng)) {
            const Matrix xb = take_rows(x, idx);
            const std::size_t m = idx.size();
            LossRecord rec;

            // Discriminator: encoder pairs [x, Enc(x)] are "real", generator pairs [G(z), z] are "fake".
            {
                const Matrix z = gaussian(m, b.noise_dim, rng);
                const Matrix ex = nn::infer(b.encoder, xb);
                const Matrix gz = nn::infer(b.generator, z);
                const auto tr = nn::forward(b.discriminator, hcat(xb, ex));
                const auto tf = nn::forward(b.discriminator, hcat(gz, z));
                const auto loss = nn::bce_d_loss(tr.output().col(0), tf.output().col(0));
                NetGrads g = nn::backward(b.discriminator, tr, Matrix(loss.grad_real)).grads;
                accumulate(g, nn::backward(b.discriminator, tf, Matrix(loss.grad_fake)).grads);
                nn::adam_step(b.discriminator, g, d_state, hyper);
                rec.d_loss = loss.loss;
            }
            // Generator and encoder share the flipped objective: each tries to make
            // its own pairs look like the other branch.
            {
                const Matrix z = gaussian(m, b.noise_dim, rng);
                const auto te = nn::forward(b.encoder, xb);
                const auto tg = nn::forward(b.generator, z);
                const auto tr = nn::forward(b.discriminator, hcat(xb, te.output()));
                const auto tf = nn::forward(b.discriminator, hcat(tg.output(), z));
                // Labels swapped: generator pairs should score 1, encoder pairs 0.
                const auto loss = nn::bce_d_loss(tf.output().col(0), tr.output().col(0));
                const Matrix din_enc = nn::backward(b.discriminator, tr, Matrix(loss.grad_fake)).input_grad;
                const Matrix din_gen = nn::backward(b.discriminator, tf, Matrix(loss.grad_real)).input_grad;
                const auto ge = nn::backward(b.encoder, te, right_cols(din_enc, zd)).grads;
                const auto gg = nn::backward(b.generator, tg, left_cols(din_gen, fd)).grads;
                nn::adam_step(b.encoder, ge, e_state, hyper);
                nn::adam_step(b.generator, gg, g_state, hyper);
                rec.g_loss = loss.loss;
            }
            check_finite(rec);
            b.history.push_back(rec);
        }
    }
    return b;
}

Matrix encode(const BiganBundle& bundle, const Matrix& features) {
    if (static_cast<std::size_t>(features.cols()) != bundle.feature_dim) {
        throw ShapeMismatch("encoder expects " + std::to_string(bundle.feature_dim) + " features");
    }
    return nn::infer(bundle.encoder, features / bundle.feature_scale);
}

Matrix reconstruct_from_latent(const BiganBundle& bundle, const Matrix& latents) {
    if (static_cast<std::size_t>(latents.cols()) != bundle.noise_dim) {
        throw ShapeMismatch("generator expects " + std::to_string(bundle.noise_dim) + " latent dims");
    }
    return nn::infer(bundle.generator, latents) * bundle.feature_scale;
}

CganBundle train_adaptation_cgan(const Matrix& target_features, const Matrix& source_latents,
                                 const Labels& source_labels, const TrainHyper& hyper,
                                 const GanArchitecture& arch) {
    hyper.validate();
    if (static_cast<std::size_t>(source_latents.rows()) != source_labels.size()) {
        throw ShapeMismatch("latent rows and labels differ in length");
    }
    if (source_labels.empty() || target_features.rows() == 0) {
        throw InvalidInput("adaptation needs source latents and target samples");
    }
    check_labels(source_labels);

    const auto feat = static_cast<std::size_t>(target_features.cols());
    const auto latent = static_cast<std::size_t>(source_latents.cols());
    CganBundle b;
    b.hyper = hyper;
    b.hyper.noise_dim = latent;
    b.feature_dim = feat;
    b.noise_dim = latent;
    b.conditioned_discriminator = false;
    {
        Rng init = make_rng(derive_seed(hyper.seed, 1));
        b.generator = nn::make_mlp(latent + kLabelDim, arch.hidden, feat, nn::Activation::Identity, init);
        b.discriminator = nn::make_mlp(feat, arch.hidden, 1, nn::Activation::Sigmoid, init);
    }
    b.feature_scale = rms_scale(target_features);
    const Matrix real_all = target_features / b.feature_scale;
    const Matrix gen_in_all = hcat(source_latents, one_hot(source_labels));

    nn::AdamState d_state = nn::AdamState::for_net(b.discriminator);
    nn::AdamState g_state = nn::AdamState::for_net(b.generator);
    Rng rng = make_rng(derive_seed(hyper.seed, 3));
    const std::size_t n_src = source_labels.size();
    const auto n_tgt = static_cast<std::size_t>(target_features.rows());
    const std::size_t batch = std::min(hyper.batch_size, n_src);

    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        for (const auto& idx : epoch_batches(n_src, batch, rng)) {
            const Matrix gin = take_rows(gen_in_all, idx);
            std::vector<std::size_t> ridx(idx.size());
            for (auto& r : ridx) {
                r = uniform_index(rng, n_tgt);
            }
            const Matrix real = take_rows(real_all, ridx);
            LossRecord rec;
            {
                const Matrix fake = nn::infer(b.generator, gin);
                const auto tr = nn::forward(b.discriminator, real);
                const auto tf = nn::forward(b.discriminator, fake);
                const auto loss = nn::bce_d_loss(tr.output().col(0), tf.output().col(0));
                NetGrads g = nn::backward(b.discriminator, tr, Matrix(loss.grad_real)).grads;
                accumulate(g, nn::backward(b.discriminator, tf, Matrix(loss.grad_fake)).grads);
                nn::adam_step(b.discriminator, g, d_state, hyper);
                rec.d_loss = loss.loss;
            }
            {
                const auto tg = nn::forward(b.generator, gin);
                const auto td = nn::forward(b.discriminator, tg.output());
                const auto loss = generator_loss(td.output().col(0), hyper);
                const Matrix d_in = nn::backward(b.discriminator, td, Matrix(loss.grad_fake)).input_grad;
                const auto gg = nn::backward(b.generator, tg, d_in).grads;
                nn::adam_step(b.generator, gg, g_state, hyper);
                rec.g_loss = loss.loss;
            }
            check_finite(rec);
            b.history.push_back(rec);
        }
    }
    return b;
}

Matrix generate_adapted(const CganBundle& bundle, const Matrix& latents, const Labels& labels) {
    if (static_cast<std::size_t>(latents.rows()) != labels.size()) {
        throw ShapeMismatch("latent rows and labels differ in length");
    }
    if (static_cast<std::size_t>(latents.cols()) != bundle.noise_dim) {
        throw ShapeMismatch("generator expects " + std::to_string(bundle.noise_dim) + " latent dims");
    }
    if (labels.empty()) {
        return Matrix(0, static_cast<Eigen::Index>(bundle.feature_dim));
    }
    return nn::infer(bundle.generator, hcat(latents, one_hot(labels, bundle.label_dim))) * bundle.feature_scale;
}

namespace {

nlohmann::json hyper_json(const TrainHyper& h) {
    return {{"learning_rate", h.learning_rate},
            {"adam_beta1", h.adam_beta1},
            {"adam_beta2", h.adam_beta2},
            {"adam_epsilon", h.adam_epsilon},
            {"batch_size", h.batch_size},
            {"epochs", h.epochs},
            {"noise_dim", h.noise_dim},
            {"seed", h.seed},
            {"objective", h.objective == nn::GeneratorObjective::Minimax ? "minimax" : "non_saturating"}};
}

TrainHyper hyper_from_json(const nlohmann::json& j) {
    TrainHyper h;
    h.learning_rate = j.at("learning_rate").get<double>();
    h.adam_beta1 = j.at("adam_beta1").get<double>();
    h.adam_beta2 = j.at("adam_beta2").get<double>();
    h.adam_epsilon = j.at("adam_epsilon").get<double>();
    h.batch_size = j.at("batch_size").get<std::size_t>();
    h.epochs = j.at("epochs").get<std::size_t>();
    h.noise_dim = j.at("noise_dim").get<std::size_t>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.objective = j.at("objective").get<std::string>() == "minimax" ? nn::GeneratorObjective::Minimax
                                                                      : nn::GeneratorObjective::NonSaturating;
    return h;
}

}  // namespace

void save_bundle(const std::filesystem::path& dir, const std::string& stem, const CganBundle& b) {
    nn::save_snet(dir / (stem + ".generator.snet"), b.generator);
    nn::save_snet(dir / (stem + ".discriminator.snet"), b.discriminator);
    const nlohmann::json desc = {{"format", "specgan-bundle"},
                                 {"version", 1},
                                 {"kind", b.conditioned_discriminator ? "cgan" : "adaptation_cgan"},
                                 {"feature_dim", b.feature_dim},
                                 {"noise_dim", b.noise_dim},
                                 {"label_dim", b.label_dim},
                                 {"feature_scale", b.feature_scale},
                                 {"hyper", hyper_json(b.hyper)}};
    binio::write_file_atomic(dir / (stem + ".json"), desc.dump(2) + "\n");
}

void save_bundle(const std::filesystem::path& dir, const std::string& stem, const BiganBundle& b) {
    nn::save_snet(dir / (stem + ".generator.snet"), b.generator);
    nn::save_snet(dir / (stem + ".encoder.snet"), b.encoder);
    nn::save_snet(dir / (stem + ".discriminator.snet"), b.discriminator);
    const nlohmann::json desc = {{"format", "specgan-bundle"},
                                 {"version", 1},
                                 {"kind", "bigan"},
                                 {"feature_dim", b.feature_dim},
                                 {"noise_dim", b.noise_dim},
                                 {"feature_scale", b.feature_scale},
                                 {"hyper", hyper_json(b.hyper)}};
    binio::write_file_atomic(dir / (stem + ".json"), desc.dump(2) + "\n");
}

CganBundle load_cgan_bundle(const std::filesystem::path& dir, const std::string& stem) {
    std::ifstream is(dir / (stem + ".json"));
    if (!is) {
        throw DatasetIoError("cannot open bundle descriptor for " + stem);
    }
    nlohmann::json desc;
    try {
        desc = nlohmann::json::parse(is);
    } catch (const std::exception& e) {
        throw DatasetIoError(std::string("bad bundle descriptor: ") + e.what());
    }
    CganBundle b;
    b.conditioned_discriminator = desc.at("kind").get<std::string>() == "cgan";
    b.feature_dim = desc.at("feature_dim").get<std::size_t>();
    b.noise_dim = desc.at("noise_dim").get<std::size_t>();
    b.label_dim = desc.at("label_dim").get<std::size_t>();
    b.feature_scale = desc.at("feature_scale").get<double>();
    b.hyper = hyper_from_json(desc.at("hyper"));
    b.generator = nn::load_snet(dir / (stem + ".generator.snet"));
    b.discriminator = nn::load_snet(dir / (stem + ".discriminator.snet"));
    return b;
}

}  // namespace specgan::gan
