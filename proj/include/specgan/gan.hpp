#pragma once

// Adversarial trainers: the label-conditioned GAN used for augmentation, the
// bidirectional GAN that learns an encoder (inverse generator), and the
// adaptation GAN whose generator consumes encoded latents instead of noise.

#include "specgan/nncore.hpp"

#include <filesystem>
#include <vector>

namespace specgan::gan {

/// Labels are injected as one-hot vectors of this width.
inline constexpr std::size_t kLabelDim = 2;

struct GanArchitecture {
    std::vector<std::size_t> hidden = {100, 100, 100};
};

struct LossRecord {
    double d_loss = 0.0;
    double g_loss = 0.0;
};

struct CganBundle {
    nn::DenseNet generator;      ///< [noise | one-hot] -> features
    nn::DenseNet discriminator;  ///< [features | one-hot] -> P(real), or features -> P(real) when unconditioned
    nn::TrainHyper hyper;
    std::size_t feature_dim = 0;
    std::size_t noise_dim = 0;  ///< width of the noise (or latent) generator input
    std::size_t label_dim = kLabelDim;
    bool conditioned_discriminator = true;
    /// Training data are divided by this RMS scale; generator outputs are multiplied back.
    double feature_scale = 1.0;
    std::vector<LossRecord> history;
};

struct BiganBundle {
    nn::DenseNet generator;      ///< noise -> features
    nn::DenseNet encoder;        ///< features -> noise
    nn::DenseNet discriminator;  ///< [features | noise] -> P(pair came from the encoder branch)
    nn::TrainHyper hyper;
    std::size_t feature_dim = 0;
    std::size_t noise_dim = 0;
    double feature_scale = 1.0;
    std::vector<LossRecord> history;
};

Matrix one_hot(const Labels& labels, std::size_t width = kLabelDim);

/// Untrained bundles (what the trainers start from).
CganBundle init_cgan(std::size_t feature_dim, const nn::TrainHyper& hyper, const GanArchitecture& arch = {});
BiganBundle init_bigan(std::size_t feature_dim, const nn::TrainHyper& hyper, const GanArchitecture& arch = {});

/// Conditional GAN with 1:1 discriminator/generator alternation per minibatch.
/// Requires at least two samples of each label. hyper.seed drives every draw.
CganBundle train_cgan(const Matrix& features, const Labels& labels, const nn::TrainHyper& hyper,
                      const GanArchitecture& arch = {});

/// n synthetic feature rows conditioned on `label`.
Matrix sample_cgan(const CganBundle& bundle, Label label, std::size_t n, std::uint64_t seed);

/// Balanced synthetic set: labels alternate 0,1,0,... so counts differ by at most one.
struct SyntheticSet {
    Matrix features;
    Labels labels;
};
SyntheticSet sample_balanced(const CganBundle& bundle, std::size_t n, std::uint64_t seed);

/// Fraction of a balanced real/fake batch the discriminator classifies correctly.
double discriminator_accuracy(const CganBundle& bundle, const Matrix& real, const Labels& labels,
                              std::uint64_t seed);

/// Discriminator loss on given real and fake batches (fake rows are in feature units).
double discriminator_loss(const CganBundle& bundle, const Matrix& real, const Matrix& fake,
                          const Labels& labels);
/// One Adam step of the discriminator only.
void discriminator_step(CganBundle& bundle, nn::AdamState& state, const Matrix& real, const Matrix& fake,
                        const Labels& labels);

/// Joint training of generator and encoder against a discriminator on
/// [sample, latent] pairs. Needs at least hyper.batch_size rows.
BiganBundle train_bigan(const Matrix& features, const nn::TrainHyper& hyper, const GanArchitecture& arch = {});

Matrix encode(const BiganBundle& bundle, const Matrix& features);
/// Generator applied to latents, in feature units.
Matrix reconstruct_from_latent(const BiganBundle& bundle, const Matrix& latents);

/// Adaptation GAN: the generator maps (source latent, source label) to the target
/// environment; the discriminator sees unlabeled target samples versus generated ones.
CganBundle train_adaptation_cgan(const Matrix& target_features, const Matrix& source_latents,
                                 const Labels& source_labels, const nn::TrainHyper& hyper,
                                 const GanArchitecture& arch = {});

/// G(latent, label) for every row; output row count equals latents.rows().
Matrix generate_adapted(const CganBundle& bundle, const Matrix& latents, const Labels& labels);

/// Bundle persistence: one SNET file per network plus a JSON descriptor.
void save_bundle(const std::filesystem::path& dir, const std::string& stem, const CganBundle& bundle);
void save_bundle(const std::filesystem::path& dir, const std::string& stem, const BiganBundle& bundle);
CganBundle load_cgan_bundle(const std::filesystem::path& dir, const std::string& stem);

}  // namespace specgan::gan
