#pragma once

// End-to-end workflows: training-data augmentation with a conditional GAN,
// domain adaptation through a bidirectional GAN plus adaptation GAN, and the
// grid sweep that aggregates both over seeds.

#include "specgan/classify.hpp"
#include "specgan/gan.hpp"
#include "specgan/signalgen.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace specgan::pipelines {

using classify::ClassifierKind;
using classify::ClassifierModel;
using classify::ClassifierParams;

struct SplitSpec {
    double train_ratio = 0.5;
    std::uint64_t seed = 0;
};

/// Stratified split: each label contributes round(ratio * count) rows to train.
/// Throws InvalidInput when either side would be empty.
std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds, const SplitSpec& spec);

/// Same split as split_dataset but as row indices into `ds`.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(const Labels& labels,
                                                                             const SplitSpec& spec);

LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> rows);

enum class Method : std::uint8_t { Baseline, Augmented, Ideal, OldClassifier, Adapted };
std::string to_string(Method m);

struct EvalRecord {
    double snr_db = 0.0;
    ClassifierKind classifier = ClassifierKind::RandomForest;
    Method method = Method::Baseline;
    double train_ratio = 0.0;
    std::size_t n_real = 0;
    std::size_t n_synth = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
};

struct EvalReport {
    std::vector<EvalRecord> records;

    void append(const EvalReport& other);
    /// Canonical order: by every CSV column left to right.
    void sort();
    /// Header plus one row per record, in canonical order.
    std::string to_csv() const;
};

/// Mean/min/max of accuracy per (snr, classifier, method, n_real, n_synth) cell.
struct AggregateRow {
    double snr_db = 0.0;
    ClassifierKind classifier = ClassifierKind::RandomForest;
    Method method = Method::Baseline;
    std::size_t n_real = 0;
    std::size_t n_synth = 0;
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

std::vector<AggregateRow> aggregate(const EvalReport& report);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

/// Records row fingerprints handed to training and to scoring so tests can
/// verify that no scored row was ever trained on.
struct TrainingAudit {
    std::vector<std::uint64_t> trained;
    std::vector<std::uint64_t> scored;

    void note_trained(const Matrix& rows);
    void note_scored(const Matrix& rows);
    /// Number of scored fingerprints that also appear among trained ones.
    std::size_t overlap() const;
};

std::uint64_t row_fingerprint(const Matrix& m, Eigen::Index row);

struct AugmentSpec {
    std::size_t n_real = 100;       ///< N_r: size of the real corpus
    double synth_multiplier = 4.0;  ///< N_s = round(multiplier * N_r)
    double train_ratio = 0.5;       ///< reported only; the caller performs the split
    nn::TrainHyper gan_hyper;
    gan::GanArchitecture gan_arch;
    ClassifierKind classifier = ClassifierKind::SvmRbf;
    ClassifierParams classifier_params;

    std::size_t n_synth() const;
    void validate() const;
};

struct AugmentationOutcome {
    EvalReport report;
    std::optional<gan::CganBundle> gan;  ///< absent when no synthetic rows were requested
    ClassifierModel baseline;
    ClassifierModel augmented;  ///< classifier for the largest synthetic count
};

/// Baseline classifier on real rows only versus augmented classifier on real plus
/// balanced synthetic rows, both scored on `test`.
AugmentationOutcome run_augmentation(const LabeledDataset& train, const LabeledDataset& test,
                                     const AugmentSpec& spec, std::uint64_t seed,
                                     TrainingAudit* audit = nullptr);

/// Variant that trains one GAN and evaluates several synthetic counts; emits a
/// baseline and an augmented record per count.
AugmentationOutcome run_augmentation_counts(const LabeledDataset& train, const LabeledDataset& test,
                                            const AugmentSpec& spec, std::span<const std::size_t> synth_counts,
                                            std::uint64_t seed, TrainingAudit* audit = nullptr);

/// Default ratio grid for the worst-ratio protocol: 0.1, 0.2, ..., 0.9.
std::vector<double> default_ratio_grid();

struct WorstRatio {
    double ratio = 0.0;
    double baseline_accuracy = 0.0;
    SplitSpec split;
};

/// Ratio whose split gives the lowest baseline test accuracy (ties: smallest ratio).
/// Ratios whose split would leave a side empty are skipped.
WorstRatio select_worst_ratio(const LabeledDataset& ds, std::span<const double> grid, ClassifierKind kind,
                              const ClassifierParams& params, std::uint64_t seed);

/// Split seed used for ratio `ratio` under a run seed.
SplitSpec ratio_split(double ratio, std::uint64_t seed);

struct AdaptSpec {
    nn::TrainHyper bigan_hyper;
    nn::TrainHyper cgan_hyper;
    gan::GanArchitecture gan_arch;
    ClassifierKind classifier = ClassifierKind::SvmRbf;
    ClassifierParams classifier_params;
    double ideal_train_ratio = 0.5;
};

struct AdaptationOutcome {
    EvalReport report;  ///< old-classifier, adapted, ideal
    ClassifierModel old_classifier;
    ClassifierModel adapted_classifier;
    ClassifierModel ideal_classifier;
    gan::BiganBundle bigan;
    gan::CganBundle adaptation_gan;
    Matrix adapted_features;
    Labels adapted_labels;
};

/// `target_unlabeled` feeds only the adaptation GAN; `target_eval` is split into an
/// ideal-classifier training part and the test part every classifier is scored on.
AdaptationOutcome run_adaptation(const LabeledDataset& source, const Matrix& target_unlabeled,
                                 const LabeledDataset& target_eval, const AdaptSpec& spec, std::uint64_t seed,
                                 TrainingAudit* audit = nullptr);

struct SweepConfig {
    OfdmConfig ofdm;
    ChannelEnv env;  ///< snr_db is overridden per grid cell
    std::size_t n_samples = 100;
    std::vector<double> snr_db = {0.0, 5.0, 10.0};
    std::vector<ClassifierKind> classifiers = {ClassifierKind::RandomForest, ClassifierKind::SvmRbf};
    /// nullopt selects the worst ratio from ratio_grid per (snr, classifier, replicate).
    std::vector<std::optional<double>> train_ratios = {std::nullopt};
    std::vector<double> ratio_grid = default_ratio_grid();
    /// Synthetic counts per cell; empty means {round(synth_multiplier * n_samples)}.
    std::vector<std::size_t> synth_counts;
    double synth_multiplier = 4.0;
    std::size_t replicates = 5;
    nn::TrainHyper gan_hyper;
    gan::GanArchitecture gan_arch;
    ClassifierParams classifier_params;
    std::uint64_t master_seed = 0;
    std::size_t jobs = 1;

    std::vector<std::size_t> effective_synth_counts() const;
    void validate() const;
};

/// Dataset for (snr index, replicate); shared by every classifier/ratio cell.
LabeledDataset sweep_dataset(const SweepConfig& cfg, std::size_t snr_index, std::size_t replicate);

/// Cartesian product over (snr, classifier, ratio, replicate) cells, each with an
/// RNG derived from (master seed, cell coordinates). Serial and parallel runs give
/// identical reports.
EvalReport sweep(const SweepConfig& cfg);

}  // namespace specgan::pipelines
