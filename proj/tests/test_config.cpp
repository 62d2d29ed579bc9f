#include "specgan/config.hpp"

#include <doctest.h>

using namespace specgan;
using namespace specgan::config;

TEST_CASE("minimal config fills every default") {
    const auto c = parse_config(R"({"version": 1, "master_seed": 42})");
    CHECK(c.master_seed == 42);
    CHECK(c.sweep.master_seed == 42);
    CHECK(c.ofdm.n_data == 32);
    CHECK(c.n_samples == 100);
    CHECK_FALSE(c.train_ratio.has_value());
    CHECK(c.synth_multiplier == 4.0);
    CHECK(c.gan_hyper.learning_rate == 2e-4);
    CHECK(c.gan_arch.hidden == std::vector<std::size_t>{100, 100, 100});
    CHECK(c.source_env.variance == 0.2);
    CHECK(c.target_env.variance == 2.0);
    CHECK(c.sweep.snr_db == std::vector<double>{0.0, 5.0, 10.0});
    CHECK(c.sweep.classifiers.size() == 2);
}

TEST_CASE("overrides and canonical round trip") {
    const auto c = parse_config(R"({
        "version": 1, "master_seed": 3, "train_ratio": 0.3, "classifier": "rf",
        "env": {"snr_db": 10, "snr_reference": "transmit"},
        "gan": {"epochs": 12, "objective": "minimax"},
        "svm": {"c": 2.5, "gamma": 0.1},
        "sweep": {"snr_db": [5], "classifiers": ["svm"], "train_ratios": ["worst", 0.4], "replicates": 2}
    })");
    CHECK(*c.train_ratio == 0.3);
    CHECK(c.classifier == classify::ClassifierKind::RandomForest);
    CHECK(c.env.snr_reference == SnrReference::Transmit);
    CHECK(c.gan_hyper.epochs == 12);
    CHECK(c.gan_hyper.objective == nn::GeneratorObjective::Minimax);
    CHECK(*c.classifier_params.svm.gamma == 0.1);
    REQUIRE(c.sweep.train_ratios.size() == 2);
    CHECK_FALSE(c.sweep.train_ratios[0].has_value());
    CHECK(c.sweep.env.snr_reference == SnrReference::Transmit);

    const std::string text = dump_config(c);
    CHECK(dump_config(parse_config(text)) == text);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"master_seed": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 2, "master_seed": 1})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 1, "master_seed": 1, "bogus": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 1, "master_seed": 1, "gan": {"lr": 1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 1, "master_seed": 1, "ofdm": {"n_data": 30}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 1, "master_seed": 1, "env": {"variance": -1}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 1, "master_seed": 1, "train_ratio": 1.5})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 1, "master_seed": 1, "sweep": {"snr_db": []}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 1, "master_seed": 1, "classifier": "knn"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"version": 1, "master_seed": "x"})"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("specs derived from a config") {
    const auto c = parse_config(R"({"version": 1, "master_seed": 1, "synth_multiplier": 2, "classifier": "rf"})");
    const auto a = augment_spec(c);
    CHECK(a.synth_multiplier == 2.0);
    CHECK(a.n_synth() == 200);
    CHECK(a.classifier == classify::ClassifierKind::RandomForest);
    const auto d = adapt_spec(c);
    CHECK(d.ideal_train_ratio == 0.5);
    CHECK(d.bigan_hyper.epochs == c.bigan_hyper.epochs);
}
