#include "specgan/pipelines.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>
#include <tuple>
#include <unordered_set>

namespace specgan::pipelines {

namespace {

// Stream tags for derive_seed; fixed so records stay reproducible across versions.
enum Stream : std::uint64_t {
    kClassifierStream = 11,
    kGanStream = 12,
    kSynthStream = 13,
    kSplitStream = 14,
    kBiganStream = 21,
    kAdaptGanStream = 22,
    kIdealSplitStream = 23,
    kDatasetStream = 31,
    kCellStream = 32,
};

Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.rows() == 0) {
        return b;
    }
    if (b.rows() == 0) {
        return a;
    }
    if (a.cols() != b.cols()) {
        throw ShapeMismatch("cannot stack matrices of different widths");
    }
    Matrix m(a.rows() + b.rows(), a.cols());
    m << a, b;
    return m;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

auto record_key(const EvalRecord& r) {
    return std::make_tuple(r.snr_db, static_cast<int>(r.classifier), to_string(r.method), r.train_ratio,
                           r.n_real, r.n_synth, r.seed, r.accuracy);
}

EvalRecord make_record(const LabeledDataset& test, ClassifierKind kind, Method method, double ratio,
                       std::size_t n_real, std::size_t n_synth, std::uint64_t seed, double acc) {
    return {test.env.snr_db, kind, method, ratio, n_real, n_synth, seed, acc};
}

}  // namespace

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(const Labels& labels,
                                                                             const SplitSpec& spec) {
    if (!(spec.train_ratio > 0.0 && spec.train_ratio < 1.0)) {
        throw InvalidInput("train_ratio must lie in (0, 1)");
    }
    Rng rng = make_rng(spec.seed);
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (Label c = 0; c <= 1; ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) {
                rows.push_back(i);
            }
        }
        shuffle_in_place(rows, rng);
        const auto k = static_cast<std::size_t>(std::lround(spec.train_ratio * static_cast<double>(rows.size())));
        train.insert(train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
        test.insert(test.end(), rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end());
    }
    if (train.empty() || test.empty()) {
        throw InvalidInput("split ratio " + format_double(spec.train_ratio) + " leaves an empty partition");
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

LabeledDataset subset(const LabeledDataset& ds, std::span<const std::size_t> rows) {
    LabeledDataset out;
    out.env = ds.env;
    out.ofdm = ds.ofdm;
    out.seed = ds.seed;
    out.frames.reserve(rows.size());
    out.labels.reserve(rows.size());
    for (const auto r : rows) {
        out.frames.push_back(ds.frames.at(r));
        out.labels.push_back(ds.labels.at(r));
    }
    return out;
}

std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds, const SplitSpec& spec) {
    const auto [train, test] = split_indices(ds.labels, spec);
    return {subset(ds, train), subset(ds, test)};
}

std::string to_string(Method m) {
    switch (m) {
    case Method::Baseline:
        return "baseline";
    case Method::Augmented:
        return "augmented";
    case Method::Ideal:
        return "ideal";
    case Method::OldClassifier:
        return "old-classifier";
    case Method::Adapted:
        return "adapted";
    }
    return "unknown";
}

void EvalReport::append(const EvalReport& other) {
    records.insert(records.end(), other.records.begin(), other.records.end());
}

void EvalReport::sort() {
    std::sort(records.begin(), records.end(),
              [](const EvalRecord& a, const EvalRecord& b) { return record_key(a) < record_key(b); });
}

std::string EvalReport::to_csv() const {
    EvalReport sorted = *this;
    sorted.sort();
    std::string out = "snr_db,classifier,method,train_ratio,n_real,n_synth,seed,accuracy\n";
    for (const auto& r : sorted.records) {
        char acc[32];
        std::snprintf(acc, sizeof acc, "%.6f", r.accuracy);
        out += format_double(r.snr_db) + "," + classify::to_string(r.classifier) + "," + to_string(r.method) + "," +
               format_double(r.train_ratio) + "," + std::to_string(r.n_real) + "," + std::to_string(r.n_synth) +
               "," + std::to_string(r.seed) + "," + acc + "\n";
    }
    return out;
}

std::vector<AggregateRow> aggregate(const EvalReport& report) {
    using Key = std::tuple<double, int, std::string, std::size_t, std::size_t>;
    std::map<Key, AggregateRow> cells;
    for (const auto& r : report.records) {
        const Key key{r.snr_db, static_cast<int>(r.classifier), to_string(r.method), r.n_real, r.n_synth};
        auto [it, fresh] = cells.try_emplace(key);
        auto& row = it->second;
        if (fresh) {
            row = {r.snr_db, r.classifier, r.method, r.n_real, r.n_synth, 0, 0.0, r.accuracy, r.accuracy};
        }
        row.count += 1;
        row.mean += r.accuracy;
        row.min = std::min(row.min, r.accuracy);
        row.max = std::max(row.max, r.accuracy);
    }
    std::vector<AggregateRow> out;
    for (auto& [key, row] : cells) {
        row.mean /= static_cast<double>(row.count);
        out.push_back(row);
    }
    return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
    std::string out = "snr_db,classifier,method,n_real,n_synth,count,mean,min,max\n";
    for (const auto& r : rows) {
        char stats[96];
        std::snprintf(stats, sizeof stats, "%.6f,%.6f,%.6f", r.mean, r.min, r.max);
        out += format_double(r.snr_db) + "," + classify::to_string(r.classifier) + "," + to_string(r.method) + "," +
               std::to_string(r.n_real) + "," + std::to_string(r.n_synth) + "," + std::to_string(r.count) + "," +
               stats + "\n";
    }
    return out;
}

std::uint64_t row_fingerprint(const Matrix& m, Eigen::Index row) {
    // FNV-1a over the row's bytes.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double v = m(row, c);
        unsigned char bytes[sizeof(double)];
        std::memcpy(bytes, &v, sizeof v);
        for (const auto b : bytes) {
            h ^= b;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

void TrainingAudit::note_trained(const Matrix& rows) {
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        trained.push_back(row_fingerprint(rows, r));
    }
}

void TrainingAudit::note_scored(const Matrix& rows) {
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        scored.push_back(row_fingerprint(rows, r));
    }
}

std::size_t TrainingAudit::overlap() const {
    const std::unordered_set<std::uint64_t> seen(trained.begin(), trained.end());
    return static_cast<std::size_t>(
        std::count_if(scored.begin(), scored.end(), [&](std::uint64_t f) { return seen.contains(f); }));
}

std::size_t AugmentSpec::n_synth() const {
    return static_cast<std::size_t>(std::lround(synth_multiplier * static_cast<double>(n_real)));
}

void AugmentSpec::validate() const {
    if (!(synth_multiplier >= 0.0) || !std::isfinite(synth_multiplier)) {
        throw InvalidInput("synth_multiplier must be non-negative");
    }
    gan_hyper.validate();
}

AugmentationOutcome run_augmentation(const LabeledDataset& train, const LabeledDataset& test,
                                     const AugmentSpec& spec, std::uint64_t seed, TrainingAudit* audit) {
    spec.validate();
    const std::size_t counts[] = {spec.n_synth()};
    return run_augmentation_counts(train, test, spec, counts, seed, audit);
}

AugmentationOutcome run_augmentation_counts(const LabeledDataset& train, const LabeledDataset& test,
                                            const AugmentSpec& spec, std::span<const std::size_t> synth_counts,
                                            std::uint64_t seed, TrainingAudit* audit) {
    spec.validate();
    if (synth_counts.empty()) {
        throw InvalidInput("no synthetic counts requested");
    }
    const Matrix x_train = train.features();
    const Matrix x_test = test.features();
    if (x_train.cols() != x_test.cols()) {
        throw ShapeMismatch("train and test feature widths differ");
    }
    if (std::count(train.labels.begin(), train.labels.end(), Label{0}) == 0 ||
        std::count(train.labels.begin(), train.labels.end(), Label{1}) == 0) {
        throw InvalidInput("training set must contain both labels");
    }
    if (audit != nullptr) {
        audit->note_trained(x_train);
        audit->note_scored(x_test);
    }

    const std::uint64_t clf_seed = derive_seed(seed, kClassifierStream);
    const auto& params = spec.classifier_params;
    AugmentationOutcome out;
    out.baseline = classify::train_classifier(spec.classifier, x_train, train.labels, params, clf_seed, &x_train);
    const double base_acc = classify::accuracy(out.baseline, x_test, test.labels);

    const std::size_t max_count = *std::max_element(synth_counts.begin(), synth_counts.end());
    if (max_count > 0) {
        nn::TrainHyper hyper = spec.gan_hyper;
        hyper.seed = derive_seed(seed, kGanStream);
        out.gan = gan::train_cgan(x_train, train.labels, hyper, spec.gan_arch);
    }

    out.augmented = out.baseline;
    for (const auto count : synth_counts) {
        double aug_acc = base_acc;
        ClassifierModel model = out.baseline;
        if (count > 0) {
            const auto synth = gan::sample_balanced(*out.gan, count, derive_seed(seed, kSynthStream, count));
            const Matrix x_aug = vstack(x_train, synth.features);
            Labels y_aug = train.labels;
            y_aug.insert(y_aug.end(), synth.labels.begin(), synth.labels.end());
            if (audit != nullptr) {
                audit->note_trained(synth.features);
            }
            // Same seed and reference rows as the baseline: zero synthetic rows reproduce it exactly.
            model = classify::train_classifier(spec.classifier, x_aug, y_aug, params, clf_seed, &x_train);
            aug_acc = classify::accuracy(model, x_test, test.labels);
        }
        out.report.records.push_back(make_record(test, spec.classifier, Method::Baseline, spec.train_ratio,
                                                 spec.n_real, count, seed, base_acc));
        out.report.records.push_back(make_record(test, spec.classifier, Method::Augmented, spec.train_ratio,
                                                 spec.n_real, count, seed, aug_acc));
        if (count == max_count) {
            out.augmented = std::move(model);
        }
    }
    return out;
}

std::vector<double> default_ratio_grid() { return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}; }

SplitSpec ratio_split(double ratio, std::uint64_t seed) {
    return {ratio, derive_seed(seed, kSplitStream, static_cast<std::uint64_t>(std::llround(ratio * 1e6)))};
}

WorstRatio select_worst_ratio(const LabeledDataset& ds, std::span<const double> grid, ClassifierKind kind,
                              const ClassifierParams& params, std::uint64_t seed) {
    std::optional<WorstRatio> worst;
    const Matrix x = ds.features();
    for (const double ratio : grid) {
        const SplitSpec split = ratio_split(ratio, seed);
        std::vector<std::size_t> tr;
        std::vector<std::size_t> te;
        try {
            std::tie(tr, te) = split_indices(ds.labels, split);
        } catch (const InvalidInput&) {
            continue;
        }
        Labels ytr;
        Labels yte;
        Matrix xtr(static_cast<Eigen::Index>(tr.size()), x.cols());
        Matrix xte(static_cast<Eigen::Index>(te.size()), x.cols());
        for (std::size_t i = 0; i < tr.size(); ++i) {
            xtr.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(tr[i]));
            ytr.push_back(ds.labels[tr[i]]);
        }
        for (std::size_t i = 0; i < te.size(); ++i) {
            xte.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(te[i]));
            yte.push_back(ds.labels[te[i]]);
        }
        if (std::count(ytr.begin(), ytr.end(), Label{0}) == 0 || std::count(ytr.begin(), ytr.end(), Label{1}) == 0) {
            continue;
        }
        const auto model = classify::train_classifier(kind, xtr, ytr, params, derive_seed(seed, kClassifierStream), &xtr);
        const double acc = classify::accuracy(model, xte, yte);
        if (!worst || acc < worst->baseline_accuracy) {
            worst = WorstRatio{ratio, acc, split};
        }
    }
    if (!worst) {
        throw InvalidInput("no ratio in the grid yields a usable split");
    }
    return *worst;
}

AdaptationOutcome run_adaptation(const LabeledDataset& source, const Matrix& target_unlabeled,
                                 const LabeledDataset& target_eval, const AdaptSpec& spec, std::uint64_t seed,
                                 TrainingAudit* audit) {
    const Matrix x_src = source.features();
    const Matrix x_eval = target_eval.features();
    if (x_src.cols() != target_unlabeled.cols() || x_src.cols() != x_eval.cols()) {
        throw ShapeMismatch("source and target feature widths differ");
    }

    // Ideal classifier data and the shared test split both come from target_eval.
    const auto [ideal_rows, test_rows] =
        split_indices(target_eval.labels, {spec.ideal_train_ratio, derive_seed(seed, kIdealSplitStream)});
    const LabeledDataset ideal_train = subset(target_eval, ideal_rows);
    const LabeledDataset test = subset(target_eval, test_rows);
    const Matrix x_ideal = ideal_train.features();
    const Matrix x_test = test.features();
    if (audit != nullptr) {
        audit->note_trained(x_src);
        audit->note_trained(target_unlabeled);
        audit->note_trained(x_ideal);
        audit->note_scored(x_test);
    }

    AdaptationOutcome out;
    nn::TrainHyper bh = spec.bigan_hyper;
    bh.seed = derive_seed(seed, kBiganStream);
    out.bigan = gan::train_bigan(x_src, bh, spec.gan_arch);
    const Matrix latents = gan::encode(out.bigan, x_src);

    nn::TrainHyper ch = spec.cgan_hyper;
    ch.seed = derive_seed(seed, kAdaptGanStream);
    out.adaptation_gan = gan::train_adaptation_cgan(target_unlabeled, latents, source.labels, ch, spec.gan_arch);
    out.adapted_features = gan::generate_adapted(out.adaptation_gan, latents, source.labels);
    out.adapted_labels = source.labels;
    if (audit != nullptr) {
        audit->note_trained(out.adapted_features);
    }

    const std::uint64_t clf_seed = derive_seed(seed, kClassifierStream);
    const auto& p = spec.classifier_params;
    out.old_classifier = classify::train_classifier(spec.classifier, x_src, source.labels, p, clf_seed, &x_src);
    out.adapted_classifier = classify::train_classifier(spec.classifier, out.adapted_features, out.adapted_labels, p,
                                                        clf_seed, &out.adapted_features);
    out.ideal_classifier =
        classify::train_classifier(spec.classifier, x_ideal, ideal_train.labels, p, clf_seed, &x_ideal);

    const std::size_t n_src = source.size();
    out.report.records.push_back(make_record(test, spec.classifier, Method::OldClassifier, spec.ideal_train_ratio,
                                             n_src, 0, seed,
                                             classify::accuracy(out.old_classifier, x_test, test.labels)));
    out.report.records.push_back(make_record(test, spec.classifier, Method::Adapted, spec.ideal_train_ratio, n_src,
                                             out.adapted_labels.size(), seed,
                                             classify::accuracy(out.adapted_classifier, x_test, test.labels)));
    out.report.records.push_back(make_record(test, spec.classifier, Method::Ideal, spec.ideal_train_ratio, n_src, 0,
                                             seed, classify::accuracy(out.ideal_classifier, x_test, test.labels)));
    return out;
}

std::vector<std::size_t> SweepConfig::effective_synth_counts() const {
    if (!synth_counts.empty()) {
        return synth_counts;
    }
    return {static_cast<std::size_t>(std::lround(synth_multiplier * static_cast<double>(n_samples)))};
}

void SweepConfig::validate() const {
    if (snr_db.empty() || classifiers.empty() || train_ratios.empty() || replicates == 0) {
        throw InvalidInput("sweep grid is empty");
    }
    ofdm.validate();
    env.validate();
    gan_hyper.validate();
    if (n_samples < 2) {
        throw InvalidInput("n_samples must be at least 2");
    }
    if (!(synth_multiplier >= 0.0)) {
        throw InvalidInput("synth_multiplier must be non-negative");
    }
    for (const auto& r : train_ratios) {
        if (r && !(*r > 0.0 && *r < 1.0)) {
            throw InvalidInput("train ratios must lie in (0, 1)");
        }
    }
    if (std::any_of(train_ratios.begin(), train_ratios.end(), [](const auto& r) { return !r; }) &&
        ratio_grid.empty()) {
        throw InvalidInput("worst-ratio cells need a non-empty ratio grid");
    }
}

LabeledDataset sweep_dataset(const SweepConfig& cfg, std::size_t snr_index, std::size_t replicate) {
    ChannelEnv env = cfg.env;
    env.snr_db = cfg.snr_db.at(snr_index);
    return generate_dataset(cfg.n_samples, cfg.ofdm, env, derive_seed(cfg.master_seed, kDatasetStream + 1000 * snr_index, replicate));
}

EvalReport sweep(const SweepConfig& cfg) {
    cfg.validate();
    struct Cell {
        std::size_t snr;
        std::size_t clf;
        std::size_t ratio;
        std::size_t rep;
    };
    std::vector<Cell> cells;
    for (std::size_t s = 0; s < cfg.snr_db.size(); ++s) {
        for (std::size_t c = 0; c < cfg.classifiers.size(); ++c) {
            for (std::size_t r = 0; r < cfg.train_ratios.size(); ++r) {
                for (std::size_t k = 0; k < cfg.replicates; ++k) {
                    cells.push_back({s, c, r, k});
                }
            }
        }
    }
    const auto counts = cfg.effective_synth_counts();

    auto run_cell = [&](const Cell& cell) {
        const std::uint64_t cell_seed =
            derive_seed(derive_seed(cfg.master_seed, kCellStream, cell.snr), derive_seed(cell.clf, cell.ratio, cell.rep));
        const LabeledDataset ds = sweep_dataset(cfg, cell.snr, cell.rep);
        const ClassifierKind kind = cfg.classifiers[cell.clf];
        SplitSpec split;
        if (const auto& fixed = cfg.train_ratios[cell.ratio]) {
            split = ratio_split(*fixed, cell_seed);
        } else {
            split = select_worst_ratio(ds, cfg.ratio_grid, kind, cfg.classifier_params, cell_seed).split;
        }
        const auto [train, test] = split_dataset(ds, split);
        AugmentSpec spec;
        spec.n_real = cfg.n_samples;
        spec.train_ratio = split.train_ratio;
        spec.gan_hyper = cfg.gan_hyper;
        spec.gan_arch = cfg.gan_arch;
        spec.classifier = kind;
        spec.classifier_params = cfg.classifier_params;
        // Report the replicate index as the seed column so cells line up across SNRs.
        EvalReport rep = run_augmentation_counts(train, test, spec, counts, cell_seed).report;
        for (auto& r : rep.records) {
            r.seed = cell.rep;
        }
        return rep;
    };

    std::vector<EvalReport> results(cells.size());
    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, cells.size()));
    if (jobs == 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            results[i] = run_cell(cells[i]);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < cells.size(); i = next++) {
                    try {
                        results[i] = run_cell(cells[i]);
                    } catch (...) {
                        const std::lock_guard lock(failure_mutex);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }
    EvalReport report;
    for (const auto& r : results) {
        report.append(r);
    }
    report.sort();
    return report;
}

}  // namespace specgan::pipelines
