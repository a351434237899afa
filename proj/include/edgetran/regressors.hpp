#pragma once

// From-scratch regressors with a shared fit/predict/uncertainty interface:
// linear least squares, a depth-limited CART regression tree, and
// least-squares gradient boosting over such trees. GBDT is the only kind
// that reports model-based uncertainty (spread across the per-stage
// cumulative predictions, rescaled to validation-RMSE units).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"
#include "rng.hpp"

namespace edgetran {

enum class RegressorKind { Linear, DecisionTree, GBDT };

inline const char* regressor_name(RegressorKind k) {
    switch (k) {
        case RegressorKind::Linear: return "linear";
        case RegressorKind::DecisionTree: return "decision_tree";
        default: return "gbdt";
    }
}

inline RegressorKind parse_regressor(const std::string& s) {
    if (s == "linear") return RegressorKind::Linear;
    if (s == "decision_tree" || s == "dt") return RegressorKind::DecisionTree;
    if (s == "gbdt") return RegressorKind::GBDT;
    throw InvalidConfig("unknown regressor '" + s + "'");
}

struct FitReport {
    double train_mse = 0.0;
    double val_mse = 0.0;   // on the held-out 20% split
    int n_samples = 0;
};

using Matrix = std::vector<std::vector<double>>;

// Hyperparameters arrive as a name->value map; unknown names are rejected so
// typos cannot silently fall back to defaults.
using HyperParams = std::map<std::string, double>;

struct ResolvedHyper {
    int trees = 200;
    int max_depth = 4;
    double shrinkage = 0.1;
    int min_leaf = 2;
    double val_fraction = 0.2;
    std::uint64_t split_seed = 1234;
    double subsample = 1.0;  // GBDT row fraction per stage; < 1 enables SGB
};

inline ResolvedHyper resolve_hyper(const HyperParams& hyper) {
    ResolvedHyper h;
    for (const auto& [key, value] : hyper) {
        if (key == "trees") h.trees = static_cast<int>(value);
        else if (key == "max_depth") h.max_depth = static_cast<int>(value);
        else if (key == "shrinkage") h.shrinkage = value;
        else if (key == "min_leaf") h.min_leaf = static_cast<int>(value);
        else if (key == "val_fraction") h.val_fraction = value;
        else if (key == "split_seed") h.split_seed = static_cast<std::uint64_t>(value);
        else if (key == "subsample") h.subsample = value;
        else throw InvalidConfig("unknown hyperparameter '" + key + "'");
    }
    if (h.trees < 1 || h.max_depth < 1 || h.min_leaf < 1)
        throw InvalidConfig("trees, max_depth and min_leaf must be >= 1");
    if (h.shrinkage <= 0.0 || h.shrinkage > 1.0)
        throw InvalidConfig("shrinkage must be in (0, 1]");
    if (h.val_fraction < 0.0 || h.val_fraction >= 1.0)
        throw InvalidConfig("val_fraction must be in [0, 1)");
    if (h.subsample <= 0.0 || h.subsample > 1.0)
        throw InvalidConfig("subsample must be in (0, 1]");
    return h;
}

// ---------------------------------------------------------------------------
// Target normalization (divide by the maximum encountered).

inline std::pair<std::vector<double>, double> normalize_targets(
    const std::vector<double>& y_raw) {
    if (y_raw.empty()) throw NormalizeError("cannot normalize an empty target list");
    double max_value = 0.0;
    for (double v : y_raw) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw NormalizeError("targets must be positive and finite");
        max_value = std::max(max_value, v);
    }
    std::vector<double> y_norm(y_raw.size());
    for (std::size_t i = 0; i < y_raw.size(); ++i) y_norm[i] = y_raw[i] / max_value;
    return {std::move(y_norm), max_value};
}

inline std::vector<double> denormalize_targets(const std::vector<double>& y_norm,
                                               double max_value) {
    std::vector<double> y(y_norm.size());
    for (std::size_t i = 0; i < y_norm.size(); ++i) y[i] = y_norm[i] * max_value;
    return y;
}

// ---------------------------------------------------------------------------
// Regression tree in struct-of-arrays form (also the serialization layout:
// feature index, threshold, children, value). feature == -1 marks a leaf.

struct Tree {
    std::vector<int> feature;
    std::vector<double> threshold;
    std::vector<int> left;
    std::vector<int> right;
    std::vector<double> value;

    double predict(const double* x) const {
        int node = 0;
        while (feature[node] >= 0)
            node = x[feature[node]] <= threshold[node] ? left[node] : right[node];
        return value[node];
    }

    bool operator==(const Tree&) const = default;
};

namespace detail {

// Exact-greedy CART builder over presorted feature columns. The per-feature
// sorted row lists live in one flat workspace; every tree node owns a
// contiguous segment [lo, hi) of each list and splits partition the segment
// stably in place, so growing a tree allocates nothing.
class TreeBuilder {
public:
    TreeBuilder(const std::vector<double>& cols, int n, int d)
        : cols_(cols), n_(n), d_(d), sorted_(static_cast<std::size_t>(n) * d),
          root_(static_cast<std::size_t>(n) * d), tmp_(n), go_left_(n) {
        std::vector<int> order(n);
        for (int j = 0; j < d; ++j) {
            for (int i = 0; i < n; ++i) order[i] = i;
            const double* col = cols_.data() + static_cast<std::size_t>(j) * n_;
            std::stable_sort(order.begin(), order.end(),
                             [col](int a, int b) { return col[a] < col[b]; });
            std::copy(order.begin(), order.end(),
                      root_.begin() + static_cast<std::size_t>(j) * n_);
        }
    }

    // Fits a tree to `target` (length n) and returns it.
    Tree build(const std::vector<double>& target, int max_depth, int min_leaf) {
        std::copy(root_.begin(), root_.end(), sorted_.begin());
        Tree tree;
        grow(tree, target, 0, n_, 0, max_depth, min_leaf);
        return tree;
    }

private:
    int* list(int j) { return sorted_.data() + static_cast<std::size_t>(j) * n_; }
    const double* col(int j) const { return cols_.data() + static_cast<std::size_t>(j) * n_; }

    int grow(Tree& tree, const std::vector<double>& y, int lo, int hi, int depth,
             int max_depth, int min_leaf) {
        const int node = static_cast<int>(tree.feature.size());
        tree.feature.push_back(-1);
        tree.threshold.push_back(0.0);
        tree.left.push_back(-1);
        tree.right.push_back(-1);

        const int n = hi - lo;
        const int* rows = list(0) + lo;
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = y[rows[i]];
            sum += v;
            sumsq += v * v;
        }
        tree.value.push_back(sum / n);
        const double impurity = sumsq - sum * sum / n;
        if (depth >= max_depth || n < 2 * min_leaf || impurity <= 1e-14) return node;

        int best_feature = -1, best_count = 0;
        double best_gain = 1e-12, best_threshold = 0.0;
        for (int j = 0; j < d_; ++j) {
            const int* idx = list(j) + lo;
            const double* xs = col(j);
            double left_sum = 0.0;
            for (int i = 0; i < n - 1; ++i) {
                left_sum += y[idx[i]];
                const double a = xs[idx[i]], b = xs[idx[i + 1]];
                if (a == b) continue;
                const int nl = i + 1, nr = n - nl;
                if (nl < min_leaf || nr < min_leaf) continue;
                const double rs = sum - left_sum;
                const double gain =
                    left_sum * left_sum / nl + rs * rs / nr - sum * sum / n;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = j;
                    best_threshold = 0.5 * (a + b);
                    best_count = nl;
                }
            }
        }
        if (best_feature < 0) return node;

        // Mark rows going left, then stably partition every feature's segment.
        {
            const int* idx = list(best_feature) + lo;
            for (int i = 0; i < n; ++i) go_left_[idx[i]] = i < best_count ? 1 : 0;
        }
        for (int j = 0; j < d_; ++j) {
            int* idx = list(j);
            int write = lo, spill = 0;
            for (int i = lo; i < hi; ++i) {
                const int row = idx[i];
                if (go_left_[row]) idx[write++] = row;
                else tmp_[spill++] = row;
            }
            std::copy(tmp_.begin(), tmp_.begin() + spill, idx + write);
        }

        tree.feature[node] = best_feature;
        tree.threshold[node] = best_threshold;
        const int mid = lo + best_count;
        const int l = grow(tree, y, lo, mid, depth + 1, max_depth, min_leaf);
        tree.left[node] = l;
        const int r = grow(tree, y, mid, hi, depth + 1, max_depth, min_leaf);
        tree.right[node] = r;
        return node;
    }

    const std::vector<double>& cols_;
    int n_, d_;
    std::vector<int> sorted_;  // per-node working lists, one block per feature
    std::vector<int> root_;    // pristine presorted lists, copied per tree
    std::vector<int> tmp_;
    std::vector<char> go_left_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// The shared regressor. Fields are open for serialization; use fit() to
// construct.

class Regressor {
public:
    RegressorKind kind = RegressorKind::GBDT;
    int dim = 0;
    bool is_fitted = false;
    std::vector<double> weights;      // Linear: bias followed by coefficients
    std::vector<Tree> trees;          // DecisionTree: one; GBDT: one per stage
    double base = 0.0;                // GBDT stage-0 prediction
    double shrinkage = 0.1;
    double sigma_scale = 0.0;         // rescales stage spread to RMSE units
    std::vector<double> stage_train_mse;  // GBDT loss trace, one per stage
    FitReport fit_report;

    static Regressor fit(RegressorKind kind, const Matrix& X, const std::vector<double>& y,
                         const HyperParams& hyper = {});

    // Fit with a caller-chosen row split (e.g. a stratified validation set).
    // `val_fraction` and `split_seed` hypers are ignored.
    static Regressor fit_split(RegressorKind kind, const Matrix& X,
                               const std::vector<double>& y,
                               const std::vector<int>& train_rows,
                               const std::vector<int>& val_rows,
                               const HyperParams& hyper = {});

    double predict(const std::vector<double>& x) const {
        return predict_with_uncertainty(x).first;
    }

    // (mean, sigma). Linear and DecisionTree always report sigma = 0.
    std::pair<double, double> predict_with_uncertainty(const std::vector<double>& x) const {
        require_fitted();
        if (static_cast<int>(x.size()) != dim)
            throw InvalidConfig("feature vector has dimension " + std::to_string(x.size()) +
                                ", model expects " + std::to_string(dim));
        switch (kind) {
            case RegressorKind::Linear: {
                double v = weights[0];
                for (int j = 0; j < dim; ++j) v += weights[j + 1] * x[j];
                return {v, 0.0};
            }
            case RegressorKind::DecisionTree:
                return {trees[0].predict(x.data()), 0.0};
            default: {
                // Spread of the cumulative predictions over the second half
                // of the stages. Early stages carry the boosting transient
                // (every far-from-mean point looks "uncertain"); once that
                // has died out, late-stage disagreement is left to flag
                // regions the ensemble is still correcting.
                const std::size_t m = trees.size();
                const std::size_t tail_start = m / 2;
                double f = base, sum = 0.0, sumsq = 0.0;
                for (std::size_t t = 0; t < m; ++t) {
                    f += shrinkage * trees[t].predict(x.data());
                    if (t >= tail_start) {
                        sum += f;
                        sumsq += f * f;
                    }
                }
                const double k = static_cast<double>(m - tail_start);
                const double var = std::max(0.0, sumsq / k - (sum / k) * (sum / k));
                return {f, sigma_scale * std::sqrt(var)};
            }
        }
    }

    const FitReport& report() const {
        require_fitted();
        return fit_report;
    }

private:
    void require_fitted() const {
        if (!is_fitted) throw StateError("regressor is not fitted");
    }
};

namespace detail {

inline void check_training_data(const Matrix& X, const std::vector<double>& y) {
    if (X.empty() || y.empty()) throw FitError("training data is empty");
    if (X.size() != y.size())
        throw FitError("feature/target counts differ: " + std::to_string(X.size()) +
                       " vs " + std::to_string(y.size()));
    if (X.size() < 2) throw FitError("need at least 2 samples");
    const std::size_t d = X[0].size();
    if (d == 0) throw FitError("feature vectors are empty");
    for (const auto& row : X) {
        if (row.size() != d) throw FitError("ragged feature matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw FitError("non-finite feature value");
    }
    for (double v : y)
        if (!std::isfinite(v)) throw FitError("non-finite target value");
}

// Column-major copy of the selected rows.
inline std::vector<double> to_columns(const Matrix& X, const std::vector<int>& rows, int d) {
    std::vector<double> cols(static_cast<std::size_t>(rows.size()) * d);
    for (int j = 0; j < d; ++j) {
        double* out = cols.data() + static_cast<std::size_t>(j) * rows.size();
        for (std::size_t i = 0; i < rows.size(); ++i) out[i] = X[rows[i]][j];
    }
    return cols;
}

inline double mse_of(const Regressor& model, const Matrix& X,
                     const std::vector<double>& y, const std::vector<int>& rows) {
    if (rows.empty()) return 0.0;
    double acc = 0.0;
    for (int r : rows) {
        const double e = model.predict(X[r]) - y[r];
        acc += e * e;
    }
    return acc / static_cast<double>(rows.size());
}

// Ridge-stabilized normal equations solved by Gaussian elimination.
inline std::vector<double> solve_linear(const Matrix& X, const std::vector<double>& y,
                                        const std::vector<int>& rows, int d) {
    const int m = d + 1;
    std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0), b(m, 0.0);
    std::vector<double> phi(m);
    for (int r : rows) {
        phi[0] = 1.0;
        for (int j = 0; j < d; ++j) phi[j + 1] = X[r][j];
        for (int i = 0; i < m; ++i) {
            b[i] += phi[i] * y[r];
            for (int j = 0; j < m; ++j) a[static_cast<std::size_t>(i) * m + j] += phi[i] * phi[j];
        }
    }
    double trace = 0.0;
    for (int i = 0; i < m; ++i) trace += a[static_cast<std::size_t>(i) * m + i];
    const double ridge = 1e-10 * (trace / m + 1.0);
    for (int i = 0; i < m; ++i) a[static_cast<std::size_t>(i) * m + i] += ridge;

    for (int k = 0; k < m; ++k) {  // partial pivoting
        int pivot = k;
        for (int i = k + 1; i < m; ++i)
            if (std::fabs(a[static_cast<std::size_t>(i) * m + k]) >
                std::fabs(a[static_cast<std::size_t>(pivot) * m + k]))
                pivot = i;
        if (pivot != k) {
            for (int j = 0; j < m; ++j)
                std::swap(a[static_cast<std::size_t>(k) * m + j],
                          a[static_cast<std::size_t>(pivot) * m + j]);
            std::swap(b[k], b[pivot]);
        }
        const double akk = a[static_cast<std::size_t>(k) * m + k];
        if (std::fabs(akk) < 1e-300) throw FitError("singular normal equations");
        for (int i = k + 1; i < m; ++i) {
            const double f = a[static_cast<std::size_t>(i) * m + k] / akk;
            if (f == 0.0) continue;
            for (int j = k; j < m; ++j)
                a[static_cast<std::size_t>(i) * m + j] -= f * a[static_cast<std::size_t>(k) * m + j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> w(m);
    for (int i = m - 1; i >= 0; --i) {
        double acc = b[i];
        for (int j = i + 1; j < m; ++j) acc -= a[static_cast<std::size_t>(i) * m + j] * w[j];
        w[i] = acc / a[static_cast<std::size_t>(i) * m + i];
    }
    return w;
}

}  // namespace detail

namespace detail {

inline Regressor fit_rows(RegressorKind kind, const Matrix& X, const std::vector<double>& y,
                          const std::vector<int>& train_rows,
                          const std::vector<int>& val_rows, const ResolvedHyper& h);

}  // namespace detail

inline Regressor Regressor::fit(RegressorKind kind, const Matrix& X,
                                const std::vector<double>& y, const HyperParams& hyper) {
    detail::check_training_data(X, y);
    const auto h = resolve_hyper(hyper);
    const int n = static_cast<int>(X.size());

    // Held-out split, refreshed deterministically from the fixed split seed.
    Rng rng(derive_seed(h.split_seed, 0x5e17));
    const auto perm = rng.permutation(static_cast<std::size_t>(n));
    int n_val = static_cast<int>(h.val_fraction * n);
    if (h.val_fraction > 0.0 && n_val < 1) n_val = 1;
    if (n_val > n - 1) n_val = n - 1;
    std::vector<int> train_rows, val_rows;
    for (int i = 0; i < n; ++i) {
        if (i < n_val) val_rows.push_back(static_cast<int>(perm[i]));
        else train_rows.push_back(static_cast<int>(perm[i]));
    }
    return detail::fit_rows(kind, X, y, train_rows, val_rows, h);
}

inline Regressor Regressor::fit_split(RegressorKind kind, const Matrix& X,
                                      const std::vector<double>& y,
                                      const std::vector<int>& train_rows,
                                      const std::vector<int>& val_rows,
                                      const HyperParams& hyper) {
    detail::check_training_data(X, y);
    const int n = static_cast<int>(X.size());
    for (const auto* rows : {&train_rows, &val_rows})
        for (int r : *rows)
            if (r < 0 || r >= n) throw FitError("split row index out of range");
    if (train_rows.size() < 2) throw FitError("need at least 2 training rows");
    if (val_rows.empty()) throw FitError("explicit split needs validation rows");
    return detail::fit_rows(kind, X, y, train_rows, val_rows, resolve_hyper(hyper));
}

inline Regressor detail::fit_rows(RegressorKind kind, const Matrix& X,
                                  const std::vector<double>& y,
                                  const std::vector<int>& train_rows,
                                  const std::vector<int>& val_rows,
                                  const ResolvedHyper& h) {
    const int d = static_cast<int>(X[0].size());

    Regressor model;
    model.kind = kind;
    model.dim = d;
    model.shrinkage = h.shrinkage;
    model.is_fitted = true;

    std::vector<double> y_train(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) y_train[i] = y[train_rows[i]];

    switch (kind) {
        case RegressorKind::Linear: {
            model.weights = detail::solve_linear(X, y, train_rows, d);
            break;
        }
        case RegressorKind::DecisionTree: {
            const auto cols = detail::to_columns(X, train_rows, d);
            detail::TreeBuilder builder(cols, static_cast<int>(train_rows.size()), d);
            model.trees.push_back(builder.build(y_train, h.max_depth, h.min_leaf));
            break;
        }
        case RegressorKind::GBDT: {
            const int nt = static_cast<int>(train_rows.size());
            const auto cols = detail::to_columns(X, train_rows, d);
            detail::TreeBuilder builder(cols, nt, d);
            double base = 0.0;
            for (double v : y_train) base += v;
            base /= nt;
            model.base = base;

            std::vector<double> residual(y_train), pred(nt, base);
            std::vector<const double*> row_ptr(nt);
            std::vector<double> row_buf(static_cast<std::size_t>(nt) * d);
            for (int i = 0; i < nt; ++i) {
                for (int j = 0; j < d; ++j)
                    row_buf[static_cast<std::size_t>(i) * d + j] =
                        cols[static_cast<std::size_t>(j) * nt + i];
                row_ptr[i] = row_buf.data() + static_cast<std::size_t>(i) * d;
            }
            model.trees.reserve(h.trees);
            model.stage_train_mse.reserve(h.trees);
            Rng bag_rng(derive_seed(h.split_seed, 0xba6));
            const int n_bag = std::max(2, static_cast<int>(h.subsample * nt));
            for (int m = 0; m < h.trees; ++m) {
                for (int i = 0; i < nt; ++i) residual[i] = y_train[i] - pred[i];
                Tree tree;
                if (n_bag >= nt) {
                    tree = builder.build(residual, h.max_depth, h.min_leaf);
                } else {
                    // Stochastic stage: fit this tree on a row subsample so
                    // the ensemble carries data-support information.
                    const auto perm = bag_rng.permutation(static_cast<std::size_t>(nt));
                    std::vector<int> bag_abs(n_bag);
                    std::vector<double> bag_res(n_bag);
                    for (int i = 0; i < n_bag; ++i) {
                        bag_abs[i] = train_rows[perm[i]];
                        bag_res[i] = residual[perm[i]];
                    }
                    const auto bag_cols = detail::to_columns(X, bag_abs, d);
                    detail::TreeBuilder bag_builder(bag_cols, n_bag, d);
                    tree = bag_builder.build(bag_res, h.max_depth, h.min_leaf);
                }
                double loss = 0.0;
                for (int i = 0; i < nt; ++i) {
                    pred[i] += h.shrinkage * tree.predict(row_ptr[i]);
                    const double e = y_train[i] - pred[i];
                    loss += e * e;
                }
                model.stage_train_mse.push_back(loss / nt);
                model.trees.push_back(std::move(tree));
            }
            break;
        }
    }

    model.fit_report.n_samples = static_cast<int>(X.size());
    model.fit_report.train_mse = detail::mse_of(model, X, y, train_rows);
    model.fit_report.val_mse = detail::mse_of(model, X, y, val_rows);

    if (kind == RegressorKind::GBDT) {
        // Rescale the stage spread so that its mean over the validation rows
        // lands on the validation RMSE; sigma then reads in target units.
        model.sigma_scale = 1.0;
        double spread = 0.0;
        for (int r : val_rows) spread += model.predict_with_uncertainty(X[r]).second;
        if (!val_rows.empty()) spread /= static_cast<double>(val_rows.size());
        model.sigma_scale = spread > 1e-300
                                ? std::sqrt(model.fit_report.val_mse) / spread
                                : 0.0;
    }
    return model;
}

}  // namespace edgetran
