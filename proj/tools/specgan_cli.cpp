// specgan: dataset generation, GAN augmentation, domain adaptation and sweeps.

#include "specgan/binio.hpp"
#include "specgan/config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

using namespace specgan;

namespace {

enum ExitCode : int { kOk = 0, kOther = 1, kConfig = 2, kDatasetIo = 3, kShape = 4 };

constexpr double kGradcheckLimit = 1e-4;

struct CommonFlags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::size_t jobs = 1;
};

config::ExperimentConfig resolve_config(const CommonFlags& f) {
    config::ExperimentConfig cfg;
    if (!f.config_path.empty()) {
        cfg = config::load_config(f.config_path);
    } else if (f.seed) {
        cfg = config::parse_config("{\"version\": 1, \"master_seed\": 0}");
    } else {
        throw ConfigError("either --config or --seed is required (no default seed)");
    }
    if (f.seed) {
        cfg.master_seed = *f.seed;
        cfg.sweep.master_seed = *f.seed;
    }
    cfg.sweep.jobs = f.jobs;
    return cfg;
}

std::filesystem::path out_dir(const CommonFlags& f, const config::ExperimentConfig& cfg) {
    return f.out.empty() ? cfg.output_dir : std::filesystem::path(f.out);
}

void print_records(const pipelines::EvalReport& report) {
    for (const auto& r : report.records) {
        std::printf("  %-6s %-15s snr %5.1f dB  n_synth %4zu  accuracy %.4f\n",
                    classify::to_string(r.classifier).c_str(), pipelines::to_string(r.method).c_str(), r.snr_db,
                    r.n_synth, r.accuracy);
    }
}

int cmd_generate(const CommonFlags& f, const std::string& which) {
    const auto cfg = resolve_config(f);
    ChannelEnv env = cfg.env;
    if (which == "source") {
        env = cfg.source_env;
    } else if (which == "target") {
        env = cfg.target_env;
    } else if (which != "default") {
        throw ConfigError("--env must be default, source or target");
    }
    const std::filesystem::path out = f.out.empty() ? cfg.output_dir / "dataset.siqd" : std::filesystem::path(f.out);
    const auto ds = generate_dataset(cfg.n_samples, cfg.ofdm, env, cfg.master_seed);
    save_siqd(out, ds);
    std::printf("wrote %zu frames (N=%zu) to %s\n", ds.size(), cfg.ofdm.frame_length(), out.string().c_str());
    std::printf("snr %.2f dB (%s reference), %zu taps, variance %.3f, seed %llu\n", env.snr_db,
                env.snr_reference == SnrReference::Receive ? "receive" : "transmit", env.n_taps, env.variance,
                static_cast<unsigned long long>(cfg.master_seed));
    return kOk;
}

int cmd_augment(const CommonFlags& f, const std::string& dataset_path) {
    const auto cfg = resolve_config(f);
    const auto ds = load_siqd(dataset_path);
    const auto dir = out_dir(f, cfg);
    const std::uint64_t seed = cfg.master_seed;

    pipelines::SplitSpec split;
    if (cfg.train_ratio) {
        split = pipelines::ratio_split(*cfg.train_ratio, seed);
    } else {
        split = pipelines::select_worst_ratio(ds, cfg.ratio_grid, cfg.classifier, cfg.classifier_params, seed).split;
    }
    const auto [train, test] = pipelines::split_dataset(ds, split);
    auto spec = config::augment_spec(cfg);
    spec.n_real = ds.size();
    spec.train_ratio = split.train_ratio;
    const auto outcome = pipelines::run_augmentation(train, test, spec, seed);

    binio::write_file_atomic(dir / "augment.csv", outcome.report.to_csv());
    classify::save_sclf(dir / "baseline.sclf", outcome.baseline);
    classify::save_sclf(dir / "augmented.sclf", outcome.augmented);
    if (outcome.gan) {
        gan::save_bundle(dir, "cgan", *outcome.gan);
    }
    std::printf("augmentation: %zu real (%zu train / %zu test, ratio %.2f), %zu synthetic\n", ds.size(), train.size(),
                test.size(), split.train_ratio, spec.n_synth());
    print_records(outcome.report);
    std::printf("wrote %s\n", (dir / "augment.csv").string().c_str());
    return kOk;
}

int cmd_adapt(const CommonFlags& f, const std::string& t1_path, const std::string& t2_path) {
    const auto cfg = resolve_config(f);
    const auto t1 = load_siqd(t1_path);
    const auto t2 = load_siqd(t2_path);
    if (t1.ofdm.feature_length() != t2.ofdm.feature_length()) {
        throw ShapeMismatch("feature dimension " + std::to_string(t1.ofdm.feature_length()) + " of " + t1_path +
                            " differs from " + std::to_string(t2.ofdm.feature_length()) + " of " + t2_path);
    }
    const auto dir = out_dir(f, cfg);
    const std::uint64_t seed = cfg.master_seed;

    // Half of T2 stands in for the unlabeled E2 stream; the other half is held out for scoring.
    const auto [unlabeled, eval] = pipelines::split_dataset(t2, {0.5, derive_seed(seed, 41)});
    const auto outcome = pipelines::run_adaptation(t1, unlabeled.features(), eval, config::adapt_spec(cfg), seed);

    binio::write_file_atomic(dir / "adapt.csv", outcome.report.to_csv());
    classify::save_sclf(dir / "old.sclf", outcome.old_classifier);
    classify::save_sclf(dir / "adapted.sclf", outcome.adapted_classifier);
    classify::save_sclf(dir / "ideal.sclf", outcome.ideal_classifier);
    gan::save_bundle(dir, "bigan", outcome.bigan);
    gan::save_bundle(dir, "adapt_cgan", outcome.adaptation_gan);
    std::printf("adaptation: %zu source frames, %zu unlabeled target, %zu labeled target\n", t1.size(),
                unlabeled.size(), eval.size());
    print_records(outcome.report);
    std::printf("wrote %s\n", (dir / "adapt.csv").string().c_str());
    return kOk;
}

int cmd_sweep(const CommonFlags& f) {
    const auto cfg = resolve_config(f);
    const auto dir = out_dir(f, cfg);
    const auto report = pipelines::sweep(cfg.sweep);
    const auto rows = pipelines::aggregate(report);
    binio::write_file_atomic(dir / "raw.csv", report.to_csv());
    binio::write_file_atomic(dir / "aggregate.csv", pipelines::aggregate_csv(rows));
    std::printf("sweep: %zu records, %zu aggregate cells\n", report.records.size(), rows.size());
    for (const auto& r : rows) {
        std::printf("  %-4s %-10s snr %5.1f dB  n_synth %4zu  mean %.4f  [%.4f, %.4f]\n",
                    classify::to_string(r.classifier).c_str(), pipelines::to_string(r.method).c_str(), r.snr_db,
                    r.n_synth, r.mean, r.min, r.max);
    }
    std::printf("wrote %s and %s\n", (dir / "raw.csv").string().c_str(), (dir / "aggregate.csv").string().c_str());
    return kOk;
}

int cmd_gradcheck(const CommonFlags& f) {
    const auto rep = nn::gradcheck_suite(f.seed.value_or(0), 20);
    std::printf("gradcheck over %zu random nets\n", rep.nets);
    std::printf("  discriminator loss  max rel error %.3e\n", rep.d_loss_error);
    std::printf("  generator loss      max rel error %.3e\n", rep.g_loss_error);
    std::printf("  minimax loss        max rel error %.3e\n", rep.minimax_error);
    const bool ok = rep.max_error() < kGradcheckLimit;
    std::printf("%s (limit %.0e)\n", ok ? "PASS" : "FAIL", kGradcheckLimit);
    return ok ? kOk : kOther;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GAN-based augmentation and domain adaptation for OFDM spectrum sensing"};
    app.require_subcommand(1);
    CommonFlags flags;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config_path, "experiment config (JSON)");
        sub->add_option("--seed", flags.seed, "master seed; overrides the config");
        sub->add_option("--out", flags.out, "output file (generate) or directory");
    };

    std::string which_env = "default";
    auto* gen = app.add_subcommand("generate", "write a labeled SIQD dataset");
    add_common(gen);
    gen->add_option("--env", which_env, "environment: default, source or target");

    std::string dataset;
    auto* aug = app.add_subcommand("augment", "baseline vs CGAN-augmented classifier on one dataset");
    add_common(aug);
    aug->add_option("dataset", dataset, "SIQD dataset")->required();

    std::string t1;
    std::string t2;
    auto* adapt = app.add_subcommand("adapt", "adapt labeled E1 data to the E2 environment");
    add_common(adapt);
    adapt->add_option("t1", t1, "labeled E1 dataset")->required();
    adapt->add_option("t2", t2, "E2 dataset (half unlabeled input, half held out)")->required();

    auto* sw = app.add_subcommand("sweep", "grid over SNR, classifier, split ratio and seeds");
    add_common(sw);
    sw->add_option("--jobs", flags.jobs, "parallel cells")->check(CLI::PositiveNumber);

    auto* gc = app.add_subcommand("gradcheck", "finite-difference self-test of the network gradients");
    gc->add_option("--seed", flags.seed, "seed for the random nets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        if (gen->parsed()) {
            return cmd_generate(flags, which_env);
        }
        if (aug->parsed()) {
            return cmd_augment(flags, dataset);
        }
        if (adapt->parsed()) {
            return cmd_adapt(flags, t1, t2);
        }
        if (sw->parsed()) {
            return cmd_sweep(flags);
        }
        return cmd_gradcheck(flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DatasetIoError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kDatasetIo;
    } catch (const ShapeMismatch& e) {
        std::cerr << "shape mismatch: " << e.what() << "\n";
        return kShape;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
}
