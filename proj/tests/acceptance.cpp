// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when all pass.
// Usage: acceptance [criterion numbers...]   (default: all)

#include "specgan/classify.hpp"
#include "specgan/config.hpp"
#include "specgan/nncore.hpp"
#include "specgan/pipelines.hpp"
#include "specgan/signalgen.hpp"

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace specgan;
using namespace specgan::pipelines;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMasterSeed = 2024;
constexpr std::size_t kSeeds = 10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

config::ExperimentConfig defaults() {
    return config::parse_config(R"({"version": 1, "master_seed": 2024})");
}

// ---------------------------------------------------------------------------
// Sweeps shared by criteria 1-4. Each SNR is run as its own sweep so that the
// 0 dB run can be timed on its own; replicate r uses the same bit, tap and noise
// draws at every SNR.

struct SweepResult {
    EvalReport report;
    double seconds = 0.0;
};

std::map<double, SweepResult>& sweep_cache() {
    static std::map<double, SweepResult> cache;
    return cache;
}

const SweepResult& sweep_at(double snr) {
    auto& cache = sweep_cache();
    if (const auto it = cache.find(snr); it != cache.end()) {
        return it->second;
    }
    SweepConfig cfg = defaults().sweep;
    cfg.snr_db = {snr};
    cfg.train_ratios = {std::nullopt};
    cfg.synth_counts = {100, 200, 400};
    cfg.replicates = kSeeds;
    cfg.master_seed = kMasterSeed;
    cfg.jobs = 1;
    std::fprintf(stderr, "running %zu-seed sweep at %g dB...\n", kSeeds, snr);
    const auto t0 = Clock::now();
    SweepResult r{sweep(cfg), 0.0};
    r.seconds = seconds_since(t0);
    std::fprintf(stderr, "  done in %.1f s\n", r.seconds);
    return cache.emplace(snr, std::move(r)).first->second;
}

// Accuracy per replicate for one (classifier, method, n_synth) slice.
std::vector<double> per_seed(const EvalReport& rep, ClassifierKind clf, Method method, std::size_t n_synth) {
    std::vector<double> acc(kSeeds, -1.0);
    for (const auto& r : rep.records) {
        if (r.classifier == clf && r.method == method && r.n_synth == n_synth) {
            acc.at(r.seed) = r.accuracy;
        }
    }
    return acc;
}

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (const double x : v) {
        s += x;
    }
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

const std::vector<ClassifierKind> kClassifiers = {ClassifierKind::RandomForest, ClassifierKind::SvmRbf};

Verdict augmentation_gain() {
    const auto& r = sweep_at(0.0);
    bool ok = r.seconds < 600.0;
    std::string detail;
    for (const auto clf : kClassifiers) {
        const double base = mean(per_seed(r.report, clf, Method::Baseline, 400));
        const double aug = mean(per_seed(r.report, clf, Method::Augmented, 400));
        ok = ok && aug - base >= 0.10 && aug >= 0.80;
        detail += fmt("%s %.3f->%.3f (gain %+.3f); ", classify::to_string(clf).c_str(), base, aug, aug - base);
    }
    return {ok, detail + fmt("need gain>=0.10 and aug>=0.80 each; runtime %.0f s (<600)", r.seconds)};
}

Verdict high_snr_ceiling() {
    const double aug = mean(per_seed(sweep_at(10.0).report, ClassifierKind::SvmRbf, Method::Augmented, 400));
    return {aug >= 0.92, fmt("augmented svm at 10 dB %.3f (need >=0.92)", aug)};
}

Verdict monotone_trend() {
    bool ok = true;
    std::string detail;
    for (const auto clf : kClassifiers) {
        for (const auto method : {Method::Baseline, Method::Augmented}) {
            const double lo = mean(per_seed(sweep_at(0.0).report, clf, method, 400));
            const double hi = mean(per_seed(sweep_at(10.0).report, clf, method, 400));
            ok = ok && hi >= lo - 0.02;
            detail += fmt("%s/%s %.3f->%.3f; ", classify::to_string(clf).c_str(), to_string(method).c_str(), lo, hi);
        }
    }
    return {ok, detail + "need 10 dB >= 0 dB - 0.02"};
}

// Per (snr, count) cell and seed, the classifier-averaged augmented accuracy is
// compared with the classifier-averaged worst-ratio baseline.
Verdict always_outperforms() {
    bool ok = true;
    std::string detail;
    for (const double snr : {0.0, 5.0, 10.0}) {
        const auto& rep = sweep_at(snr).report;
        detail += fmt("%g dB:", snr);
        for (const std::size_t count : {100u, 200u, 400u}) {
            std::size_t wins = 0;
            for (std::size_t s = 0; s < kSeeds; ++s) {
                double base = 0.0;
                double aug = 0.0;
                for (const auto clf : kClassifiers) {
                    base += per_seed(rep, clf, Method::Baseline, count)[s];
                    aug += per_seed(rep, clf, Method::Augmented, count)[s];
                }
                wins += aug >= base ? 1 : 0;
            }
            ok = ok && wins >= 8;
            detail += fmt(" %zu:%zu/10", count, wins);
        }
        detail += "; ";
    }
    return {ok, detail + "need >=8/10 per cell"};
}

Verdict adaptation_ordering() {
    const auto cfg = defaults();
    const auto spec = config::adapt_spec(cfg);
    double c1 = 0.0;
    double c1_e1 = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
    for (std::size_t s = 0; s < kSeeds; ++s) {
        const std::uint64_t seed = derive_seed(kMasterSeed, 50, s);
        std::fprintf(stderr, "adaptation seed %zu/%zu...\n", s + 1, kSeeds);
        const auto e1 = generate_dataset(cfg.n_samples, cfg.ofdm, cfg.source_env, derive_seed(seed, 1));
        const auto e2 = generate_dataset(cfg.n_samples, cfg.ofdm, cfg.target_env, derive_seed(seed, 2));
        const auto e1_test = generate_dataset(cfg.n_samples, cfg.ofdm, cfg.source_env, derive_seed(seed, 3));
        const auto [unlabeled, eval] = split_dataset(e2, {0.5, derive_seed(seed, 41)});
        const auto out = run_adaptation(e1, unlabeled.features(), eval, spec, seed);
        for (const auto& r : out.report.records) {
            (r.method == Method::OldClassifier ? c1 : r.method == Method::Adapted ? c3 : c2) += r.accuracy / kSeeds;
        }
        c1_e1 += classify::accuracy(out.old_classifier, e1_test.features(), e1_test.labels) / kSeeds;
    }
    const bool ok = c3 >= c1 + 0.05 && c3 >= c2 - 0.15 && c1 <= c1_e1 - 0.05;
    return {ok, fmt("old %.3f, adapted %.3f, ideal %.3f, old on E1 %.3f; need adapted>=old+0.05, "
                    "adapted>=ideal-0.15, old<=oldE1-0.05",
                    c1, c3, c2, c1_e1)};
}

Verdict gradient_correctness() {
    const auto t0 = Clock::now();
    const auto rep = nn::gradcheck_suite(kMasterSeed, 20);
    const double secs = seconds_since(t0);
    const bool ok = rep.nets == 20 && rep.max_error() < 1e-4 && secs < 10.0;
    return {ok, fmt("max rel error %.2e over %zu nets (d %.1e, g %.1e, minimax %.1e) in %.2f s", rep.max_error(),
                    rep.nets, rep.d_loss_error, rep.g_loss_error, rep.minimax_error, secs)};
}

double energy(const ComplexVec& v) {
    double e = 0.0;
    for (const auto& s : v) {
        e += std::norm(s);
    }
    return e;
}

Verdict signal_chain() {
    Rng rng = make_rng(kMasterSeed);
    double roundtrip = 0.0;
    double parseval = 0.0;
    for (int t = 0; t < 1000; ++t) {
        ComplexVec x(32);
        for (auto& s : x) {
            s = complex_gauss(rng, 1.0);
        }
        const ComplexVec f = unitary_idft(x);
        const ComplexVec back = unitary_dft(f);
        for (std::size_t i = 0; i < x.size(); ++i) {
            roundtrip = std::max(roundtrip, std::abs(back[i] - x[i]));
        }
        parseval = std::max(parseval, std::abs(energy(f) - energy(x)));
    }

    const OfdmConfig ofdm;
    std::size_t cp_mismatch = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto frame = build_ofdm_frame({}, ofdm, rng);
        for (std::size_t i = 0; i < ofdm.n_cp; ++i) {
            cp_mismatch += frame.samples[i] == frame.samples[ofdm.n_data + i] ? 0 : 1;
        }
    }

    double worst_snr = 0.0;
    for (const double snr : {0.0, 5.0, 10.0}) {
        ChannelEnv env;
        env.snr_db = snr;
        const auto ds = generate_dataset(10000, ofdm, env, derive_seed(kMasterSeed, 7));
        double p[2] = {0.0, 0.0};
        for (std::size_t i = 0; i < ds.size(); ++i) {
            p[ds.labels[i]] += energy(ds.frames[i].samples);
        }
        const double measured = (p[1] - p[0]) / p[0];
        worst_snr = std::max(worst_snr, std::abs(measured / std::pow(10.0, snr / 10.0) - 1.0));
    }
    const bool ok = roundtrip < 1e-10 && parseval < 1e-10 && cp_mismatch == 0 && worst_snr <= 0.03;
    return {ok, fmt("round trip %.1e, parseval %.1e, cp mismatches %zu, snr rel error %.2f%% (1e4 frames)",
                    roundtrip, parseval, cp_mismatch, 100.0 * worst_snr)};
}

Verdict classifier_oracles() {
    Matrix xor4(4, 2);
    xor4 << -1, -1, 1, 1, -1, 1, 1, -1;
    const Labels yx = {0, 0, 1, 1};
    classify::SvmParams xp;
    xp.c = 10.0;
    xp.gamma = 1.0;
    xp.standardize = false;
    const double xor_acc = classify::accuracy(classify::ClassifierModel(classify::train_svm_rbf(xor4, yx, xp, 1)),
                                              xor4, yx);

    std::size_t kkt_ok = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng = make_rng(derive_seed(kMasterSeed, 60, s));
        const std::size_t n = 20 + uniform_index(rng, 40);
        const std::size_t d = 2 + uniform_index(rng, 6);
        Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
        Labels y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = static_cast<Label>(i % 2);
            for (std::size_t c = 0; c < d; ++c) {
                x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = gauss(rng) + y[i];
            }
        }
        classify::SvmParams p;
        p.c = 0.5 + 4.0 * uniform01(rng);
        classify::SvmSolverState st;
        const auto m = classify::train_svm_rbf(x, y, p, s, nullptr, &st);
        const Vector f = m.decision(x);
        bool ok = std::abs(st.alpha.dot(st.y)) < 1e-6 && st.alpha.minCoeff() >= 0.0 && st.alpha.maxCoeff() <= p.c;
        for (Eigen::Index i = 0; i < f.size(); ++i) {
            const double margin = st.y(i) * f(i);
            const double a = st.alpha(i);
            const double tol = 1e-2;
            ok = ok && (a <= 0.0 ? margin >= 1.0 - tol : a >= p.c ? margin <= 1.0 + tol : std::abs(margin - 1.0) <= tol);
        }
        kkt_ok += ok ? 1 : 0;
    }

    Rng rng = make_rng(derive_seed(kMasterSeed, 61));
    Matrix xm(200, 10);
    Labels ym(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
        ym[static_cast<std::size_t>(i)] = static_cast<Label>(i % 2);
        for (Eigen::Index c = 0; c < 10; ++c) {
            xm(i, c) = gauss(rng);
        }
    }
    classify::RandomForestParams rp;
    rp.n_trees = 1;
    rp.max_depth = 0;
    rp.bootstrap = false;
    const double memo = classify::accuracy(classify::ClassifierModel(classify::train_random_forest(xm, ym, rp, 1)),
                                           xm, ym);
    return {xor_acc == 1.0 && kkt_ok == 20 && memo == 1.0,
            fmt("xor accuracy %.2f, kkt %zu/20, single-tree memorization %.3f", xor_acc, kkt_ok, memo)};
}

// ---------------------------------------------------------------------------
// Determinism through the command-line tool.

int run_cli(const std::string& args) {
    const std::string cmd = std::string(SPECGAN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
    std::map<std::string, std::string> out;
    if (fs::is_regular_file(root)) {
        out[root.filename().string()] = slurp(root);
        return out;
    }
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out[fs::relative(e.path(), root).string()] = slurp(e.path());
        }
    }
    return out;
}

Verdict determinism() {
    const fs::path work = fs::temp_directory_path() / "specgan_acceptance";
    fs::remove_all(work);
    fs::create_directories(work);
    const fs::path cfg = work / "cfg.json";
    std::ofstream(cfg) << R"({"version": 1, "master_seed": 31, "n_samples": 60,
        "gan": {"epochs": 100}, "bigan": {"epochs": 50}, "adapt_gan": {"epochs": 50},
        "sweep": {"snr_db": [0, 10], "train_ratios": ["worst", 0.5], "synth_counts": [60, 240], "replicates": 2}})";
    const std::string c = " --config \"" + cfg.string() + "\"";
    auto q = [&](const std::string& name) { return " \"" + (work / name).string() + "\""; };

    std::size_t files = 0;
    std::size_t differing = 0;
    std::size_t failed_runs = 0;
    for (int pass = 0; pass < 2; ++pass) {
        const std::string p = std::to_string(pass);
        failed_runs += run_cli("generate" + c + " --out" + q("g" + p + ".siqd")) != 0;
        failed_runs += run_cli("generate" + c + " --env source --out" + q("e1_" + p + ".siqd")) != 0;
        failed_runs += run_cli("generate" + c + " --env target --seed 32 --out" + q("e2_" + p + ".siqd")) != 0;
        failed_runs += run_cli("augment" + q("g0.siqd") + c + " --out" + q("aug" + p)) != 0;
        failed_runs += run_cli("adapt" + q("e1_0.siqd") + q("e2_0.siqd") + c + " --out" + q("adapt" + p)) != 0;
        failed_runs += run_cli("sweep" + c + " --jobs " + std::to_string(1 + 2 * pass) + " --out" + q("sweep" + p)) != 0;
    }
    for (const std::string stem : {"g", "e1_", "e2_"}) {
        files += 1;
        differing += slurp(work / (stem + "0.siqd")) != slurp(work / (stem + "1.siqd"));
    }
    for (const std::string dir : {"aug", "adapt", "sweep"}) {
        const auto a = tree_contents(work / (dir + "0"));
        const auto b = tree_contents(work / (dir + "1"));
        files += a.size();
        differing += a != b ? std::max<std::size_t>(1, a.size()) : 0;
    }
    fs::remove_all(work);
    return {failed_runs == 0 && differing == 0 && files > 10,
            fmt("%zu command runs failed; %zu of %zu output files differ between repeated runs", failed_runs,
                differing, files)};
}

Verdict degenerate_identity() {
    std::size_t checked = 0;
    std::size_t mismatched = 0;
    for (const double snr : {0.0, 5.0, 10.0}) {
        ChannelEnv env;
        env.snr_db = snr;
        const auto ds = generate_dataset(100, OfdmConfig{}, env, derive_seed(kMasterSeed, 70));
        for (const auto clf : kClassifiers) {
            const auto worst = select_worst_ratio(ds, default_ratio_grid(), clf, {}, kMasterSeed);
            const auto [train, test] = split_dataset(ds, worst.split);
            AugmentSpec spec;
            spec.synth_multiplier = 0.0;
            spec.classifier = clf;
            const auto out = run_augmentation(train, test, spec, kMasterSeed);
            checked += 1;
            mismatched += out.report.records.at(0).accuracy != out.report.records.at(1).accuracy ? 1 : 0;
            mismatched += out.report.records.at(0).accuracy != worst.baseline_accuracy ? 1 : 0;
        }
    }
    SweepConfig cfg;
    cfg.n_samples = 60;
    cfg.synth_counts = {0};
    cfg.replicates = 3;
    cfg.master_seed = kMasterSeed;
    const auto rep = sweep(cfg);
    std::map<std::tuple<double, ClassifierKind, std::uint64_t>, std::vector<double>> pairs;
    for (const auto& r : rep.records) {
        pairs[{r.snr_db, r.classifier, r.seed}].push_back(r.accuracy);
    }
    for (const auto& [key, acc] : pairs) {
        checked += 1;
        mismatched += acc.size() != 2 || acc[0] != acc[1] ? 1 : 0;
    }
    return {mismatched == 0, fmt("%zu multiplier-0 comparisons, %zu mismatches", checked, mismatched)};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> all = {
        {1, "augmentation gain at 0 dB", augmentation_gain},
        {2, "high-snr ceiling", high_snr_ceiling},
        {3, "monotone snr trend", monotone_trend},
        {4, "augmented beats baseline from 100 synthetic samples", always_outperforms},
        {5, "domain adaptation ordering", adaptation_ordering},
        {6, "gradient correctness", gradient_correctness},
        {7, "signal-chain exactness", signal_chain},
        {8, "svm and rf oracles", classifier_oracles},
        {9, "determinism", determinism},
        {10, "degenerate augmentation identity", degenerate_identity},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        selected.insert(std::atoi(argv[i]));
    }
    int failures = 0;
    for (const auto& c : all) {
        if (!selected.empty() && !selected.contains(c.id)) {
            continue;
        }
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failures += v.pass ? 0 : 1;
        std::printf("%s [%d] %s: %s\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
