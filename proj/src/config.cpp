#include "specgan/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace specgan::config {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
        throw ConfigError(where + " must be an object");
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.contains(key)) {
            throw ConfigError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

void read_ofdm(const json& j, OfdmConfig& o) {
    check_keys(j, "ofdm", {"n_data", "n_cp", "k_symbols", "constellation"});
    read(j, "n_data", o.n_data);
    read(j, "n_cp", o.n_cp);
    read(j, "k_symbols", o.k_symbols);
    if (j.contains("constellation") && j.at("constellation").get<std::string>() != "16qam") {
        throw ConfigError("only the 16qam constellation is supported");
    }
}

void read_env(const json& j, const std::string& where, ChannelEnv& e) {
    check_keys(j, where, {"n_taps", "variance", "snr_db", "snr_reference"});
    read(j, "n_taps", e.n_taps);
    read(j, "variance", e.variance);
    read(j, "snr_db", e.snr_db);
    if (j.contains("snr_reference")) {
        const auto ref = j.at("snr_reference").get<std::string>();
        if (ref == "receive") {
            e.snr_reference = SnrReference::Receive;
        } else if (ref == "transmit") {
            e.snr_reference = SnrReference::Transmit;
        } else {
            throw ConfigError("snr_reference must be 'receive' or 'transmit'");
        }
    }
}

json env_json(const ChannelEnv& e) {
    return {{"n_taps", e.n_taps},
            {"variance", e.variance},
            {"snr_db", e.snr_db},
            {"snr_reference", e.snr_reference == SnrReference::Receive ? "receive" : "transmit"}};
}

void read_hyper(const json& j, const std::string& where, nn::TrainHyper& h) {
    check_keys(j, where,
               {"learning_rate", "adam_beta1", "adam_beta2", "adam_epsilon", "batch_size", "epochs", "noise_dim",
                "objective"});
    read(j, "learning_rate", h.learning_rate);
    read(j, "adam_beta1", h.adam_beta1);
    read(j, "adam_beta2", h.adam_beta2);
    read(j, "adam_epsilon", h.adam_epsilon);
    read(j, "batch_size", h.batch_size);
    read(j, "epochs", h.epochs);
    read(j, "noise_dim", h.noise_dim);
    if (j.contains("objective")) {
        const auto obj = j.at("objective").get<std::string>();
        if (obj == "non_saturating") {
            h.objective = nn::GeneratorObjective::NonSaturating;
        } else if (obj == "minimax") {
            h.objective = nn::GeneratorObjective::Minimax;
        } else {
            throw ConfigError("objective must be 'non_saturating' or 'minimax'");
        }
    }
}

json hyper_json(const nn::TrainHyper& h) {
    return {{"learning_rate", h.learning_rate},
            {"adam_beta1", h.adam_beta1},
            {"adam_beta2", h.adam_beta2},
            {"adam_epsilon", h.adam_epsilon},
            {"batch_size", h.batch_size},
            {"epochs", h.epochs},
            {"noise_dim", h.noise_dim},
            {"objective", h.objective == nn::GeneratorObjective::Minimax ? "minimax" : "non_saturating"}};
}

classify::ClassifierKind read_kind(const json& j) {
    try {
        return classify::classifier_from_string(j.get<std::string>());
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
}

json ratio_json(const std::optional<double>& r) { return r ? json(*r) : json(nullptr); }

std::optional<double> read_ratio(const json& j) {
    if (j.is_null() || (j.is_string() && j.get<std::string>() == "worst")) {
        return std::nullopt;
    }
    return j.get<double>();
}

ExperimentConfig from_json(const json& root) {
    check_keys(root, "config",
               {"version", "master_seed", "ofdm", "env", "source_env", "target_env", "n_samples", "train_ratio",
                "ratio_grid", "synth_multiplier", "gan", "bigan", "adapt_gan", "hidden", "classifier", "rf", "svm",
                "ideal_train_ratio", "sweep", "output_dir"});
    if (!root.contains("version")) {
        throw ConfigError("config needs a 'version' key");
    }
    if (root.at("version").get<int>() != kConfigVersion) {
        throw ConfigError("unsupported config version " + root.at("version").dump());
    }
    if (!root.contains("master_seed")) {
        throw ConfigError("config needs a 'master_seed' key");
    }

    ExperimentConfig c;
    c.source_env.variance = 0.2;
    c.source_env.snr_db = 5.0;
    c.target_env.variance = 2.0;
    c.target_env.snr_db = 5.0;
    c.master_seed = root.at("master_seed").get<std::uint64_t>();
    if (root.contains("ofdm")) {
        read_ofdm(root.at("ofdm"), c.ofdm);
    }
    if (root.contains("env")) {
        read_env(root.at("env"), "env", c.env);
    }
    if (root.contains("source_env")) {
        read_env(root.at("source_env"), "source_env", c.source_env);
    }
    if (root.contains("target_env")) {
        read_env(root.at("target_env"), "target_env", c.target_env);
    }
    read(root, "n_samples", c.n_samples);
    if (root.contains("train_ratio")) {
        c.train_ratio = read_ratio(root.at("train_ratio"));
    }
    read(root, "ratio_grid", c.ratio_grid);
    read(root, "synth_multiplier", c.synth_multiplier);
    if (root.contains("gan")) {
        read_hyper(root.at("gan"), "gan", c.gan_hyper);
    }
    if (root.contains("bigan")) {
        read_hyper(root.at("bigan"), "bigan", c.bigan_hyper);
    }
    if (root.contains("adapt_gan")) {
        read_hyper(root.at("adapt_gan"), "adapt_gan", c.adapt_hyper);
    }
    read(root, "hidden", c.gan_arch.hidden);
    if (root.contains("classifier")) {
        c.classifier = read_kind(root.at("classifier"));
    }
    if (root.contains("rf")) {
        const auto& j = root.at("rf");
        auto& p = c.classifier_params.rf;
        check_keys(j, "rf", {"n_trees", "max_depth", "features_per_split", "min_samples_split", "bootstrap"});
        read(j, "n_trees", p.n_trees);
        read(j, "max_depth", p.max_depth);
        read(j, "features_per_split", p.features_per_split);
        read(j, "min_samples_split", p.min_samples_split);
        read(j, "bootstrap", p.bootstrap);
    }
    if (root.contains("svm")) {
        const auto& j = root.at("svm");
        auto& p = c.classifier_params.svm;
        check_keys(j, "svm", {"c", "gamma", "tol", "max_passes", "standardize"});
        read(j, "c", p.c);
        if (j.contains("gamma") && !j.at("gamma").is_null()) {
            p.gamma = j.at("gamma").get<double>();
        }
        read(j, "tol", p.tol);
        read(j, "max_passes", p.max_passes);
        read(j, "standardize", p.standardize);
    }
    read(root, "ideal_train_ratio", c.ideal_train_ratio);
    if (root.contains("output_dir")) {
        c.output_dir = root.at("output_dir").get<std::string>();
    }

    auto& s = c.sweep;
    if (root.contains("sweep")) {
        const auto& j = root.at("sweep");
        check_keys(j, "sweep", {"snr_db", "classifiers", "train_ratios", "synth_counts", "replicates"});
        read(j, "snr_db", s.snr_db);
        if (j.contains("classifiers")) {
            s.classifiers.clear();
            for (const auto& k : j.at("classifiers")) {
                s.classifiers.push_back(read_kind(k));
            }
        }
        if (j.contains("train_ratios")) {
            s.train_ratios.clear();
            for (const auto& r : j.at("train_ratios")) {
                s.train_ratios.push_back(read_ratio(r));
            }
        }
        read(j, "synth_counts", s.synth_counts);
        read(j, "replicates", s.replicates);
    }
    s.ofdm = c.ofdm;
    s.env = c.env;
    s.n_samples = c.n_samples;
    s.ratio_grid = c.ratio_grid;
    s.synth_multiplier = c.synth_multiplier;
    s.gan_hyper = c.gan_hyper;
    s.gan_arch = c.gan_arch;
    s.classifier_params = c.classifier_params;
    s.master_seed = c.master_seed;
    return c;
}

}  // namespace

void ExperimentConfig::validate() const {
    try {
        ofdm.validate();
        env.validate();
        source_env.validate();
        target_env.validate();
        gan_hyper.validate();
        bigan_hyper.validate();
        adapt_hyper.validate();
        sweep.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    if (n_samples < 4) {
        throw ConfigError("n_samples must be at least 4");
    }
    if (train_ratio && !(*train_ratio > 0.0 && *train_ratio < 1.0)) {
        throw ConfigError("train_ratio must lie in (0, 1)");
    }
    if (!train_ratio && ratio_grid.empty()) {
        throw ConfigError("ratio_grid is empty");
    }
    for (const double r : ratio_grid) {
        if (!(r > 0.0 && r < 1.0)) {
            throw ConfigError("ratio_grid entries must lie in (0, 1)");
        }
    }
    if (!(synth_multiplier >= 0.0)) {
        throw ConfigError("synth_multiplier must be non-negative");
    }
    if (!(ideal_train_ratio > 0.0 && ideal_train_ratio < 1.0)) {
        throw ConfigError("ideal_train_ratio must lie in (0, 1)");
    }
    if (gan_arch.hidden.empty()) {
        throw ConfigError("hidden must list at least one layer width");
    }
    for (const auto w : gan_arch.hidden) {
        if (w == 0) {
            throw ConfigError("hidden layer widths must be positive");
        }
    }
    if (classifier_params.rf.n_trees == 0) {
        throw ConfigError("rf.n_trees must be positive");
    }
    if (!(classifier_params.svm.c > 0.0)) {
        throw ConfigError("svm.c must be positive");
    }
    if (classifier_params.svm.gamma && !(*classifier_params.svm.gamma > 0.0)) {
        throw ConfigError("svm.gamma must be positive");
    }
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    try {
        cfg = from_json(json::parse(text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot read config " + path.string());
    }
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

std::string dump_config(const ExperimentConfig& c) {
    json sweep_ratios = json::array();
    for (const auto& r : c.sweep.train_ratios) {
        sweep_ratios.push_back(ratio_json(r));
    }
    json kinds = json::array();
    for (const auto k : c.sweep.classifiers) {
        kinds.push_back(classify::to_string(k));
    }
    const auto& rf = c.classifier_params.rf;
    const auto& svm = c.classifier_params.svm;
    const json j = {
        {"version", kConfigVersion},
        {"master_seed", c.master_seed},
        {"ofdm", {{"n_data", c.ofdm.n_data}, {"n_cp", c.ofdm.n_cp}, {"k_symbols", c.ofdm.k_symbols},
                  {"constellation", "16qam"}}},
        {"env", env_json(c.env)},
        {"source_env", env_json(c.source_env)},
        {"target_env", env_json(c.target_env)},
        {"n_samples", c.n_samples},
        {"train_ratio", ratio_json(c.train_ratio)},
        {"ratio_grid", c.ratio_grid},
        {"synth_multiplier", c.synth_multiplier},
        {"gan", hyper_json(c.gan_hyper)},
        {"bigan", hyper_json(c.bigan_hyper)},
        {"adapt_gan", hyper_json(c.adapt_hyper)},
        {"hidden", c.gan_arch.hidden},
        {"classifier", classify::to_string(c.classifier)},
        {"rf", {{"n_trees", rf.n_trees}, {"max_depth", rf.max_depth}, {"features_per_split", rf.features_per_split},
                {"min_samples_split", rf.min_samples_split}, {"bootstrap", rf.bootstrap}}},
        {"svm", {{"c", svm.c}, {"gamma", svm.gamma ? json(*svm.gamma) : json(nullptr)}, {"tol", svm.tol},
                 {"max_passes", svm.max_passes}, {"standardize", svm.standardize}}},
        {"ideal_train_ratio", c.ideal_train_ratio},
        {"sweep", {{"snr_db", c.sweep.snr_db}, {"classifiers", kinds}, {"train_ratios", sweep_ratios},
                   {"synth_counts", c.sweep.synth_counts}, {"replicates", c.sweep.replicates}}},
        {"output_dir", c.output_dir.string()},
    };
    return j.dump(2) + "\n";
}

pipelines::AugmentSpec augment_spec(const ExperimentConfig& c) {
    pipelines::AugmentSpec s;
    s.n_real = c.n_samples;
    s.synth_multiplier = c.synth_multiplier;
    s.gan_hyper = c.gan_hyper;
    s.gan_arch = c.gan_arch;
    s.classifier = c.classifier;
    s.classifier_params = c.classifier_params;
    return s;
}

pipelines::AdaptSpec adapt_spec(const ExperimentConfig& c) {
    pipelines::AdaptSpec s;
    s.bigan_hyper = c.bigan_hyper;
    s.cgan_hyper = c.adapt_hyper;
    s.gan_arch = c.gan_arch;
    s.classifier = c.classifier;
    s.classifier_params = c.classifier_params;
    s.ideal_train_ratio = c.ideal_train_ratio;
    return s;
}

}  // namespace specgan::config
