#include "specgan/classify.hpp"

#include "specgan/binio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

namespace specgan::classify {

namespace {

constexpr char kSclfMagic[] = "SCLF";
constexpr std::uint16_t kSclfVersion = 1;

void check_xy(const Matrix& x, const Labels& y) {
    if (static_cast<std::size_t>(x.rows()) != y.size()) {
        throw ShapeMismatch("feature rows and labels differ in length");
    }
    for (const auto l : y) {
        if (l > 1) {
            throw InvalidInput("labels must be 0 or 1");
        }
    }
}

double gini(std::uint32_t a, std::uint32_t b) {
    const double n = static_cast<double>(a) + static_cast<double>(b);
    if (n == 0.0) {
        return 0.0;
    }
    const double pa = a / n;
    const double pb = b / n;
    return 1.0 - pa * pa - pb * pb;
}

Label majority(const std::array<std::uint32_t, 2>& c) { return c[1] > c[0] ? 1 : 0; }

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const Labels& y, const RandomForestParams& p, std::size_t mtry, Rng& rng)
        : x_(x), y_(y), params_(p), mtry_(mtry), rng_(rng) {}

    DecisionTree build(std::vector<std::size_t> rows) {
        tree_.nodes.clear();
        grow(rows, 0);
        return std::move(tree_);
    }

private:
    struct Split {
        std::int32_t feature = -1;
        double threshold = 0.0;
        double impurity = 0.0;
    };

    std::int32_t grow(std::vector<std::size_t>& rows, int depth) {
        const auto id = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        std::array<std::uint32_t, 2> counts{};
        for (const auto r : rows) {
            ++counts[y_[r]];
        }
        tree_.nodes[id].counts = counts;

        const bool pure = counts[0] == 0 || counts[1] == 0;
        const bool depth_limited = params_.max_depth > 0 && depth >= params_.max_depth;
        if (pure || depth_limited || rows.size() < params_.min_samples_split) {
            return id;
        }
        const Split s = best_split(rows, counts);
        if (s.feature < 0) {
            return id;
        }
        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (const auto r : rows) {
            (x_(static_cast<Eigen::Index>(r), s.feature) <= s.threshold ? left : right).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();
        tree_.nodes[id].feature = s.feature;
        tree_.nodes[id].threshold = s.threshold;
        const auto l = grow(left, depth + 1);
        const auto r = grow(right, depth + 1);
        tree_.nodes[id].left = l;
        tree_.nodes[id].right = r;
        return id;
    }

    // Examines features in random order. After mtry features it stops as soon as
    // some valid split exists, so a node is only left impure when every feature
    // is constant over its rows.
    Split best_split(const std::vector<std::size_t>& rows, const std::array<std::uint32_t, 2>& counts) {
        const auto d = static_cast<std::size_t>(x_.cols());
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle_in_place(order, rng_);

        Split best;
        double best_score = std::numeric_limits<double>::infinity();
        std::vector<std::pair<double, Label>> vals(rows.size());
        const double n = static_cast<double>(rows.size());
        for (std::size_t k = 0; k < d; ++k) {
            if (k >= mtry_ && best.feature >= 0) {
                break;
            }
            const auto f = static_cast<Eigen::Index>(order[k]);
            for (std::size_t i = 0; i < rows.size(); ++i) {
                vals[i] = {x_(static_cast<Eigen::Index>(rows[i]), f), y_[rows[i]]};
            }
            std::sort(vals.begin(), vals.end());
            std::array<std::uint32_t, 2> left{};
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                ++left[vals[i].second];
                if (vals[i].first == vals[i + 1].first) {
                    continue;
                }
                const std::array<std::uint32_t, 2> right{counts[0] - left[0], counts[1] - left[1]};
                const double nl = static_cast<double>(i + 1);
                const double score = (nl * gini(left[0], left[1]) + (n - nl) * gini(right[0], right[1])) / n;
                if (score < best_score) {
                    best_score = score;
                    best.feature = static_cast<std::int32_t>(f);
                    best.threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                    // Midpoint may round onto the upper value for adjacent doubles.
                    if (!(best.threshold < vals[i + 1].first)) {
                        best.threshold = vals[i].first;
                    }
                    best.impurity = score;
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    const Labels& y_;
    const RandomForestParams& params_;
    std::size_t mtry_;
    Rng& rng_;
    DecisionTree tree_;
};

double rbf(const RowVector& a, const RowVector& b, double gamma) {
    return std::exp(-gamma * (a - b).squaredNorm());
}

}  // namespace

Label DecisionTree::predict(const double* row) const {
    std::int32_t id = 0;
    while (nodes[id].feature >= 0) {
        id = row[nodes[id].feature] <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    }
    return majority(nodes[id].counts);
}

std::size_t DecisionTree::depth() const {
    std::size_t best = 0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [id, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (nodes[id].feature >= 0) {
            stack.push_back({nodes[id].left, d + 1});
            stack.push_back({nodes[id].right, d + 1});
        }
    }
    return best;
}

RandomForestModel train_random_forest(const Matrix& features, const Labels& labels,
                                      const RandomForestParams& params, std::uint64_t seed) {
    check_xy(features, labels);
    if (labels.empty()) {
        throw InvalidInput("random forest needs at least one sample");
    }
    if (params.n_trees < 1) {
        throw InvalidInput("n_trees must be at least 1");
    }
    RandomForestModel model;
    model.params = params;
    model.feature_dim = static_cast<std::size_t>(features.cols());
    model.seed = seed;

    const auto ones = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label{1}));
    if (ones == 0 || ones == labels.size()) {
        std::cerr << "warning: random forest trained on a single class; model is constant\n";
        model.single_class = true;
        DecisionTree leaf;
        leaf.nodes.emplace_back();
        leaf.nodes[0].counts = {static_cast<std::uint32_t>(labels.size() - ones), static_cast<std::uint32_t>(ones)};
        model.trees.assign(params.n_trees, leaf);
        return model;
    }

    const std::size_t d = model.feature_dim;
    const std::size_t mtry = params.features_per_split > 0
                                 ? std::min(params.features_per_split, d)
                                 : std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(std::sqrt(d))));
    const std::size_t n = labels.size();
    for (std::size_t t = 0; t < params.n_trees; ++t) {
        Rng rng = make_rng(derive_seed(seed, t));
        std::vector<std::size_t> rows(n);
        if (params.bootstrap) {
            for (auto& r : rows) {
                r = uniform_index(rng, n);
            }
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        TreeBuilder builder(features, labels, params, mtry, rng);
        model.trees.push_back(builder.build(std::move(rows)));
    }
    return model;
}

Standardizer Standardizer::fit(const Matrix& rows) {
    if (rows.rows() == 0) {
        throw InvalidInput("cannot standardize an empty matrix");
    }
    Standardizer s;
    s.mean = rows.colwise().mean().transpose();
    const Matrix centered = rows.rowwise() - s.mean.transpose();
    s.scale = (centered.colwise().squaredNorm() / static_cast<double>(rows.rows())).cwiseSqrt().transpose();
    for (Eigen::Index i = 0; i < s.scale.size(); ++i) {
        if (!(s.scale(i) > 1e-12)) {
            s.scale(i) = 1.0;
        }
    }
    return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
    return {Vector::Zero(static_cast<Eigen::Index>(dim)), Vector::Ones(static_cast<Eigen::Index>(dim))};
}

Matrix Standardizer::apply(const Matrix& rows) const {
    if (rows.cols() != mean.size()) {
        throw ShapeMismatch("standardizer width mismatch");
    }
    Matrix out = rows.rowwise() - mean.transpose();
    return out.array().rowwise() / scale.transpose().array();
}

double SvmRbfModel::decision(const RowVector& raw_row) const {
    const Matrix z = standardizer.apply(Matrix(raw_row));
    double f = bias;
    for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
        f += dual_coef(i) * rbf(support_vectors.row(i), z.row(0), gamma);
    }
    return f;
}

Vector SvmRbfModel::decision(const Matrix& raw_rows) const {
    const Matrix z = standardizer.apply(raw_rows);
    Vector f = Vector::Constant(z.rows(), bias);
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
        for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
            f(r) += dual_coef(i) * rbf(support_vectors.row(i), z.row(r), gamma);
        }
    }
    return f;
}

SvmRbfModel train_svm_rbf(const Matrix& features, const Labels& labels, const SvmParams& params,
                          std::uint64_t seed, const Matrix* reference_rows, SvmSolverState* solver_state) {
    check_xy(features, labels);
    const auto ones = std::count(labels.begin(), labels.end(), Label{1});
    if (ones == 0 || ones == static_cast<std::ptrdiff_t>(labels.size())) {
        throw InvalidInput("SVM needs both classes present");
    }
    if (!(params.c > 0.0)) {
        throw InvalidInput("SVM C must be positive");
    }

    SvmRbfModel model;
    model.c = params.c;
    const Matrix& ref = reference_rows != nullptr ? *reference_rows : features;
    if (ref.cols() != features.cols()) {
        throw ShapeMismatch("reference rows width mismatch");
    }
    model.standardizer = params.standardize ? Standardizer::fit(ref)
                                            : Standardizer::identity(static_cast<std::size_t>(features.cols()));
    if (params.gamma) {
        model.gamma = *params.gamma;
    } else {
        const Matrix zr = model.standardizer.apply(ref);
        const double mean = zr.mean();
        const double var = (zr.array() - mean).square().mean();
        model.gamma = 1.0 / (static_cast<double>(features.cols()) * (var > 0.0 ? var : 1.0));
    }
    if (!(model.gamma > 0.0)) {
        throw InvalidInput("SVM gamma must be positive");
    }

    const Matrix x = model.standardizer.apply(features);
    const auto n = static_cast<Eigen::Index>(labels.size());
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        y(i) = labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
    }
    Matrix k(n, n);
    const Vector sq = x.rowwise().squaredNorm();
    k.noalias() = x * x.transpose();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            k(i, j) = std::exp(-model.gamma * std::max(0.0, sq(i) + sq(j) - 2.0 * k(i, j)));
        }
    }

    const double c = params.c;
    const double tol = params.tol;
    Vector alpha = Vector::Zero(n);
    Vector g = Vector::Zero(n);  // sum_j alpha_j y_j K_ij
    double b = 0.0;
    Rng rng = make_rng(seed);

    // Joint update of (i, j); returns false when the pair cannot make progress.
    auto take_step = [&](Eigen::Index i, Eigen::Index j) {
        if (i == j) {
            return false;
        }
        const double ei = g(i) + b - y(i);
        const double ej = g(j) + b - y(j);
        const double ai = alpha(i);
        const double aj = alpha(j);
        double lo;
        double hi;
        if (y(i) != y(j)) {
            lo = std::max(0.0, aj - ai);
            hi = std::min(c, c + aj - ai);
        } else {
            lo = std::max(0.0, ai + aj - c);
            hi = std::min(c, ai + aj);
        }
        if (hi - lo < 1e-12) {
            return false;
        }
        const double eta = 2.0 * k(i, j) - k(i, i) - k(j, j);
        if (eta >= -1e-12) {
            return false;
        }
        double aj_new = std::clamp(aj - y(j) * (ei - ej) / eta, lo, hi);
        if (std::abs(aj_new - aj) < 1e-7 * (aj_new + aj + 1e-7)) {
            return false;
        }
        double ai_new = ai + y(i) * y(j) * (aj - aj_new);
        // Snap to the box so bound checks below are exact.
        if (ai_new < 1e-12) {
            ai_new = 0.0;
        } else if (ai_new > c - 1e-12) {
            ai_new = c;
        }
        const double dai = ai_new - ai;
        const double daj = aj_new - aj;
        const double b1 = b - ei - y(i) * dai * k(i, i) - y(j) * daj * k(i, j);
        const double b2 = b - ej - y(i) * dai * k(i, j) - y(j) * daj * k(j, j);
        if (ai_new > 0.0 && ai_new < c) {
            b = b1;
        } else if (aj_new > 0.0 && aj_new < c) {
            b = b2;
        } else {
            b = 0.5 * (b1 + b2);
        }
        alpha(i) = ai_new;
        alpha(j) = aj_new;
        g.noalias() += (y(i) * dai) * k.col(i) + (y(j) * daj) * k.col(j);
        return true;
    };

    std::size_t passes = 0;
    for (; passes < params.max_passes; ++passes) {
        std::size_t violations = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ei = g(i) + b - y(i);
            const double r = y(i) * ei;
            if (!((r < -tol && alpha(i) < c) || (r > tol && alpha(i) > 0.0))) {
                continue;
            }
            ++violations;
            auto j = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n - 1)));
            if (j >= i) {
                ++j;
            }
            if (take_step(i, j)) {
                continue;
            }
            // Random partner stalled: fall back to the partner with the largest |E_i - E_j|.
            Eigen::Index best = -1;
            double gap = -1.0;
            for (Eigen::Index m = 0; m < n; ++m) {
                const double d = std::abs(ei - (g(m) + b - y(m)));
                if (m != i && d > gap) {
                    gap = d;
                    best = m;
                }
            }
            if (best >= 0) {
                take_step(i, best);
            }
        }
        if (violations == 0) {
            break;
        }
    }

    // Bias from free support vectors when any exist; otherwise keep the solver's b.
    {
        double sum = 0.0;
        std::size_t cnt = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (alpha(i) > 0.0 && alpha(i) < c) {
                sum += y(i) - g(i);
                ++cnt;
            }
        }
        if (cnt > 0) {
            b = sum / static_cast<double>(cnt);
        }
    }

    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (alpha(i) > 0.0) {
            sv.push_back(i);
        }
    }
    model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), x.cols());
    model.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t s = 0; s < sv.size(); ++s) {
        model.support_vectors.row(static_cast<Eigen::Index>(s)) = x.row(sv[s]);
        model.dual_coef(static_cast<Eigen::Index>(s)) = alpha(sv[s]) * y(sv[s]);
    }
    model.bias = b;

    if (solver_state != nullptr) {
        solver_state->alpha = alpha;
        solver_state->y = y;
        solver_state->cached_decision = g.array() + b;
        solver_state->passes = passes;
    }
    return model;
}

std::string to_string(ClassifierKind kind) { return kind == ClassifierKind::RandomForest ? "rf" : "svm"; }

ClassifierKind classifier_from_string(const std::string& name) {
    if (name == "rf" || name == "random_forest") {
        return ClassifierKind::RandomForest;
    }
    if (name == "svm" || name == "svm_rbf") {
        return ClassifierKind::SvmRbf;
    }
    throw InvalidInput("unknown classifier '" + name + "'");
}

ClassifierModel train_classifier(ClassifierKind kind, const Matrix& features, const Labels& labels,
                                 const ClassifierParams& params, std::uint64_t seed,
                                 const Matrix* reference_rows) {
    if (kind == ClassifierKind::RandomForest) {
        return train_random_forest(features, labels, params.rf, seed);
    }
    return train_svm_rbf(features, labels, params.svm, seed, reference_rows);
}

Labels predict(const RandomForestModel& model, const Matrix& features) {
    if (features.rows() > 0 && static_cast<std::size_t>(features.cols()) != model.feature_dim) {
        throw ShapeMismatch("random forest expects " + std::to_string(model.feature_dim) + " features");
    }
    if (features.rows() == 0) {
        return {};
    }
    Labels out(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
        std::size_t votes = 0;
        for (const auto& t : model.trees) {
            votes += t.predict(features.row(r).data());
        }
        out[static_cast<std::size_t>(r)] = 2 * votes > model.trees.size() ? 1 : 0;
    }
    return out;
}

Labels predict(const SvmRbfModel& model, const Matrix& features) {
    if (features.rows() == 0) {
        return {};
    }
    const Vector f = model.decision(features);
    Labels out(static_cast<std::size_t>(f.size()));
    for (Eigen::Index i = 0; i < f.size(); ++i) {
        out[static_cast<std::size_t>(i)] = f(i) > 0.0 ? 1 : 0;
    }
    return out;
}

Labels predict(const ClassifierModel& model, const Matrix& features) {
    return std::visit([&](const auto& m) { return predict(m, features); }, model);
}

double accuracy(const Labels& predicted, const Labels& truth) {
    if (predicted.size() != truth.size()) {
        throw ShapeMismatch("prediction and label counts differ");
    }
    if (truth.empty()) {
        throw InvalidInput("accuracy of an empty set is undefined");
    }
    std::size_t hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        hit += predicted[i] == truth[i] ? 1 : 0;
    }
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

double accuracy(const ClassifierModel& model, const Matrix& features, const Labels& labels) {
    if (static_cast<std::size_t>(features.rows()) != labels.size()) {
        throw ShapeMismatch("feature rows and labels differ in length");
    }
    return accuracy(predict(model, features), labels);
}

void write_sclf(std::ostream& os, const ClassifierModel& model) {
    using binio::put;
    binio::put_magic(os, kSclfMagic);
    put<std::uint16_t>(os, kSclfVersion);
    if (const auto* rf = std::get_if<RandomForestModel>(&model)) {
        put<std::uint8_t>(os, static_cast<std::uint8_t>(ClassifierKind::RandomForest));
        put<std::uint32_t>(os, static_cast<std::uint32_t>(rf->params.n_trees));
        put<std::int32_t>(os, rf->params.max_depth);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(rf->params.features_per_split));
        put<std::uint32_t>(os, static_cast<std::uint32_t>(rf->params.min_samples_split));
        put<std::uint8_t>(os, rf->params.bootstrap ? 1 : 0);
        put<std::uint64_t>(os, rf->seed);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(rf->feature_dim));
        put<std::uint8_t>(os, rf->single_class ? 1 : 0);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(rf->trees.size()));
        for (const auto& t : rf->trees) {
            put<std::uint32_t>(os, static_cast<std::uint32_t>(t.nodes.size()));
            for (const auto& nd : t.nodes) {
                put<std::int32_t>(os, nd.feature);
                put<double>(os, nd.threshold);
                put<std::int32_t>(os, nd.left);
                put<std::int32_t>(os, nd.right);
                put<std::uint32_t>(os, nd.counts[0]);
                put<std::uint32_t>(os, nd.counts[1]);
            }
        }
        return;
    }
    const auto& svm = std::get<SvmRbfModel>(model);
    put<std::uint8_t>(os, static_cast<std::uint8_t>(ClassifierKind::SvmRbf));
    put<double>(os, svm.c);
    put<double>(os, svm.gamma);
    put<double>(os, svm.bias);
    const auto d = static_cast<std::uint32_t>(svm.standardizer.mean.size());
    put<std::uint32_t>(os, d);
    for (Eigen::Index i = 0; i < svm.standardizer.mean.size(); ++i) {
        put<double>(os, svm.standardizer.mean(i));
    }
    for (Eigen::Index i = 0; i < svm.standardizer.scale.size(); ++i) {
        put<double>(os, svm.standardizer.scale(i));
    }
    put<std::uint32_t>(os, static_cast<std::uint32_t>(svm.support_vectors.rows()));
    for (Eigen::Index s = 0; s < svm.support_vectors.rows(); ++s) {
        put<double>(os, svm.dual_coef(s));
        for (Eigen::Index j = 0; j < svm.support_vectors.cols(); ++j) {
            put<double>(os, svm.support_vectors(s, j));
        }
    }
}

ClassifierModel read_sclf(std::istream& is) {
    using binio::get;
    binio::expect_magic<DatasetIoError>(is, kSclfMagic);
    const auto version = get<std::uint16_t, DatasetIoError>(is);
    if (version != kSclfVersion) {
        throw DatasetIoError("unsupported SCLF version " + std::to_string(version));
    }
    const auto kind = get<std::uint8_t, DatasetIoError>(is);
    if (kind == static_cast<std::uint8_t>(ClassifierKind::RandomForest)) {
        RandomForestModel rf;
        rf.params.n_trees = get<std::uint32_t, DatasetIoError>(is);
        rf.params.max_depth = get<std::int32_t, DatasetIoError>(is);
        rf.params.features_per_split = get<std::uint32_t, DatasetIoError>(is);
        rf.params.min_samples_split = get<std::uint32_t, DatasetIoError>(is);
        rf.params.bootstrap = get<std::uint8_t, DatasetIoError>(is) != 0;
        rf.seed = get<std::uint64_t, DatasetIoError>(is);
        rf.feature_dim = get<std::uint32_t, DatasetIoError>(is);
        rf.single_class = get<std::uint8_t, DatasetIoError>(is) != 0;
        const auto nt = get<std::uint32_t, DatasetIoError>(is);
        rf.trees.resize(nt);
        for (auto& t : rf.trees) {
            const auto nn = get<std::uint32_t, DatasetIoError>(is);
            t.nodes.resize(nn);
            for (auto& nd : t.nodes) {
                nd.feature = get<std::int32_t, DatasetIoError>(is);
                nd.threshold = get<double, DatasetIoError>(is);
                nd.left = get<std::int32_t, DatasetIoError>(is);
                nd.right = get<std::int32_t, DatasetIoError>(is);
                nd.counts[0] = get<std::uint32_t, DatasetIoError>(is);
                nd.counts[1] = get<std::uint32_t, DatasetIoError>(is);
                const auto limit = static_cast<std::int32_t>(nn);
                if (nd.feature >= static_cast<std::int32_t>(rf.feature_dim) ||
                    (nd.feature >= 0 && (nd.left <= 0 || nd.left >= limit || nd.right <= 0 || nd.right >= limit))) {
                    throw DatasetIoError("corrupt tree node");
                }
            }
            if (t.nodes.empty()) {
                throw DatasetIoError("empty tree");
            }
        }
        return rf;
    }
    if (kind != static_cast<std::uint8_t>(ClassifierKind::SvmRbf)) {
        throw DatasetIoError("unknown classifier kind");
    }
    SvmRbfModel svm;
    svm.c = get<double, DatasetIoError>(is);
    svm.gamma = get<double, DatasetIoError>(is);
    svm.bias = get<double, DatasetIoError>(is);
    const auto d = get<std::uint32_t, DatasetIoError>(is);
    svm.standardizer.mean.resize(d);
    svm.standardizer.scale.resize(d);
    for (std::uint32_t i = 0; i < d; ++i) {
        svm.standardizer.mean(i) = get<double, DatasetIoError>(is);
    }
    for (std::uint32_t i = 0; i < d; ++i) {
        svm.standardizer.scale(i) = get<double, DatasetIoError>(is);
    }
    const auto nsv = get<std::uint32_t, DatasetIoError>(is);
    svm.support_vectors.resize(nsv, d);
    svm.dual_coef.resize(nsv);
    for (std::uint32_t s = 0; s < nsv; ++s) {
        svm.dual_coef(s) = get<double, DatasetIoError>(is);
        for (std::uint32_t j = 0; j < d; ++j) {
            svm.support_vectors(s, j) = get<double, DatasetIoError>(is);
        }
    }
    return svm;
}

void save_sclf(const std::filesystem::path& path, const ClassifierModel& model) {
    std::ostringstream os(std::ios::binary);
    write_sclf(os, model);
    binio::write_file_atomic(path, os.str());
}

ClassifierModel load_sclf(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw DatasetIoError("cannot open model: " + path.string());
    }
    return read_sclf(is);
}

}  // namespace specgan::classify
