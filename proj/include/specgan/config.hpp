#pragma once

// Experiment configuration: a versioned JSON document. Every key except
// "master_seed" has an embedded default, so {"version": 1, "master_seed": 7}
// is a complete config.

#include "specgan/classify.hpp"
#include "specgan/gan.hpp"
#include "specgan/pipelines.hpp"
#include "specgan/signalgen.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace specgan::config {

inline constexpr int kConfigVersion = 1;

struct ExperimentConfig {
    OfdmConfig ofdm;
    ChannelEnv env;                ///< environment for `generate` and `augment`
    ChannelEnv source_env;         ///< E1 for adaptation experiments
    ChannelEnv target_env;         ///< E2 for adaptation experiments
    std::size_t n_samples = 100;
    std::optional<double> train_ratio;  ///< nullopt selects the worst ratio from ratio_grid
    std::vector<double> ratio_grid = pipelines::default_ratio_grid();
    double synth_multiplier = 4.0;
    nn::TrainHyper gan_hyper;
    nn::TrainHyper bigan_hyper;
    nn::TrainHyper adapt_hyper;
    gan::GanArchitecture gan_arch;
    classify::ClassifierKind classifier = classify::ClassifierKind::SvmRbf;
    classify::ClassifierParams classifier_params;
    double ideal_train_ratio = 0.5;
    pipelines::SweepConfig sweep;  ///< shares ofdm/env/hyper fields above after parsing
    std::uint64_t master_seed = 0;
    std::filesystem::path output_dir = "out";

    void validate() const;
};

/// Throws ConfigError on malformed JSON, unknown keys, wrong types, a missing
/// master seed or any sub-config invariant violation.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON rendering with every default filled in.
std::string dump_config(const ExperimentConfig& cfg);

pipelines::AugmentSpec augment_spec(const ExperimentConfig& cfg);
pipelines::AdaptSpec adapt_spec(const ExperimentConfig& cfg);

}  // namespace specgan::config
