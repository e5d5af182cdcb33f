// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef TOALOC_RF_HPP
#define TOALOC_RF_HPP

#include "toaloc/core.hpp"
#include "toaloc/radio_sim.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace toaloc
{

/// Row-major feature table with 2D position targets.
struct TrainingTable
{
    std::size_t num_features = 0;
    std::vector<double> features; // rows() * num_features
    std::vector<Point2> targets;

    std::size_t rows() const { return targets.size(); }

    std::span<const double> row(std::size_t i) const
    {
        return {features.data() + i * num_features, num_features};
    }

    double at(std::size_t i, std::size_t f) const { return features[i * num_features + f]; }

    void add_row(std::span<const double> x, const Point2& target)
    {
        if (targets.empty() && num_features == 0)
            num_features = x.size();
        if (x.size() != num_features)
            throw Error(ErrorCode::invalid_input, "feature row length mismatch");
        features.insert(features.end(), x.begin(), x.end());
        targets.push_back(target);
    }
};

inline TrainingTable make_table(const MeasurementSet& set)
{
    TrainingTable t;
    t.num_features = set.deployment.num_bs();
    for (const auto& r : set.records)
        t.add_row(r.toa, r.true_position);
    return t;
}

/// Internal nodes split on `feature <= threshold` (left) vs. `>` (right).
/// Leaves have feature == -1 and carry the mean target.
struct TreeNode
{
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    Point2 value;

    bool is_leaf() const { return feature < 0; }

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Nodes stored in pre-order; nodes[0] is the root.
struct Tree
{
    std::vector<TreeNode> nodes;

    Point2 predict(std::span<const double> x) const
    {
        std::size_t i = 0;
        while (!nodes[i].is_leaf())
            i = static_cast<std::size_t>(x[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                             ? nodes[i].left
                                             : nodes[i].right);
        return nodes[i].value;
    }

    friend bool operator==(const Tree&, const Tree&) = default;
};

struct RfParams
{
    std::size_t n_trees = 100;
    int max_depth = 12;
    std::size_t min_leaf_size = 2;
    std::size_t features_per_split = 0; // 0: ceil(num_features / 3)
    bool bootstrap = true;
    std::uint64_t seed = 0;

    friend bool operator==(const RfParams&, const RfParams&) = default;
};

inline std::size_t effective_features_per_split(const RfParams& p, std::size_t num_features)
{
    if (p.features_per_split == 0)
        return std::max<std::size_t>(1, (num_features + 2) / 3);
    return std::min(p.features_per_split, num_features);
}

struct RandomForestModel
{
    std::vector<Tree> trees;
    RfParams params;
    std::size_t num_features = 0;

    friend bool operator==(const RandomForestModel&, const RandomForestModel&) = default;
};

namespace detail
{

struct SplitChoice
{
    int feature = -1;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

class TreeBuilder
{
public:
    TreeBuilder(const TrainingTable& table, const RfParams& params, Rng& rng)
        : table_(table), params_(params), rng_(rng),
          fps_(effective_features_per_split(params, table.num_features))
    {
    }

    int build(std::vector<std::size_t> rows, int depth)
    {
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        tree_.nodes[static_cast<std::size_t>(id)].value = leaf_value(rows);

        if (depth >= params_.max_depth || rows.size() < 2 * std::max<std::size_t>(params_.min_leaf_size, 1) ||
            all_targets_equal(rows))
            return id;
        const SplitChoice split = best_split(rows);
        if (split.feature < 0)
            return id;

        std::vector<std::size_t> left, right;
        for (auto r : rows)
            (table_.at(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const int l = build(std::move(left), depth + 1);
        const int r = build(std::move(right), depth + 1);
        auto& node = tree_.nodes[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    Tree take() { return std::move(tree_); }

private:
    Point2 leaf_value(const std::vector<std::size_t>& rows) const
    {
        double sx = 0.0, sy = 0.0;
        double lox = std::numeric_limits<double>::infinity(), hix = -lox, loy = lox, hiy = -lox;
        for (auto r : rows) {
            const auto& t = table_.targets[r];
            sx += t.x;
            sy += t.y;
            lox = std::min(lox, t.x);
            hix = std::max(hix, t.x);
            loy = std::min(loy, t.y);
            hiy = std::max(hiy, t.y);
        }
        const double n = static_cast<double>(rows.size());
        return {std::clamp(sx / n, lox, hix), std::clamp(sy / n, loy, hiy)};
    }

    bool all_targets_equal(const std::vector<std::size_t>& rows) const
    {
        const auto& first = table_.targets[rows.front()];
        return std::all_of(rows.begin(), rows.end(), [&](auto r) { return table_.targets[r] == first; });
    }

    std::vector<std::size_t> candidate_features()
    {
        std::vector<std::size_t> f(table_.num_features);
        std::iota(f.begin(), f.end(), std::size_t{0});
        if (fps_ < f.size()) {
            for (std::size_t i = 0; i < fps_; ++i) {
                const std::size_t j = i + static_cast<std::size_t>(rng_() % (f.size() - i));
                std::swap(f[i], f[j]);
            }
            f.resize(fps_);
            std::sort(f.begin(), f.end());
        }
        return f;
    }

    // Minimizes the summed x/y squared error of the two children over
    // midpoints between consecutive distinct values. Ties keep the first
    // candidate in (feature, threshold) ascending order.
    SplitChoice best_split(const std::vector<std::size_t>& rows)
    {
        const std::size_t n = rows.size();
        const std::size_t min_leaf = std::max<std::size_t>(params_.min_leaf_size, 1);
        double mx = 0.0, my = 0.0;
        for (auto r : rows) {
            mx += table_.targets[r].x;
            my += table_.targets[r].y;
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);

        SplitChoice best;
        double total = 0.0;
        for (auto r : rows)
            total += (table_.targets[r].x - mx) * (table_.targets[r].x - mx) +
                     (table_.targets[r].y - my) * (table_.targets[r].y - my);
        // Candidates within round-off of the incumbent count as ties, so the
        // choice does not depend on the summation order (i.e. on row order).
        const double tie = 1e-12 * total;
        std::vector<std::size_t> order(rows);
        std::vector<double> px(n + 1), py(n + 1), pxx(n + 1), pyy(n + 1);
        for (std::size_t f : candidate_features()) {
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return table_.at(a, f) < table_.at(b, f); });
            for (std::size_t k = 0; k < n; ++k) {
                const double dx = table_.targets[order[k]].x - mx;
                const double dy = table_.targets[order[k]].y - my;
                px[k + 1] = px[k] + dx;
                py[k + 1] = py[k] + dy;
                pxx[k + 1] = pxx[k] + dx * dx;
                pyy[k + 1] = pyy[k] + dy * dy;
            }
            for (std::size_t k = min_leaf; k + min_leaf <= n; ++k) {
                const double lo = table_.at(order[k - 1], f);
                const double hi = table_.at(order[k], f);
                if (!(lo < hi))
                    continue;
                const double nl = static_cast<double>(k);
                const double nr = static_cast<double>(n - k);
                const double sse_l = (pxx[k] - px[k] * px[k] / nl) + (pyy[k] - py[k] * py[k] / nl);
                const double rx = px[n] - px[k], ry = py[n] - py[k];
                const double sse_r = (pxx[n] - pxx[k] - rx * rx / nr) + (pyy[n] - pyy[k] - ry * ry / nr);
                const double sse = sse_l + sse_r;
                if (sse < best.sse - tie) {
                    double thr = lo + (hi - lo) / 2.0;
                    if (!(thr < hi))
                        thr = lo;
                    best = {static_cast<int>(f), thr, sse};
                }
            }
        }
        return best;
    }

    const TrainingTable& table_;
    const RfParams& params_;
    Rng& rng_;
    std::size_t fps_;
    Tree tree_;
};

} // namespace detail

/// Grows one regression tree on the given rows (duplicates allowed).
inline Tree fit_tree(const TrainingTable& table, std::vector<std::size_t> sample, const RfParams& params, Rng& rng)
{
    if (sample.empty())
        throw Error(ErrorCode::invalid_input, "cannot fit a tree on an empty sample");
    detail::TreeBuilder builder(table, params, rng);
    builder.build(std::move(sample), 0);
    return builder.take();
}

/// M draws with replacement from [0, M).
inline std::vector<std::size_t> bootstrap_sample(std::size_t m, Rng& rng)
{
    std::vector<std::size_t> s(m);
    for (auto& i : s)
        i = static_cast<std::size_t>(rng() % m);
    return s;
}

/// Bagged forest. Tree t uses its own stream derived from (params.seed, t).
inline RandomForestModel train_rf(const TrainingTable& table, const RfParams& params, unsigned threads = 0)
{
    if (table.rows() == 0)
        throw Error(ErrorCode::invalid_input, "cannot train a forest on an empty dataset");
    if (params.n_trees < 1)
        throw Error(ErrorCode::invalid_input, "forest needs at least one tree");
    RandomForestModel model;
    model.params = params;
    model.num_features = table.num_features;
    model.trees.resize(params.n_trees);
    const std::uint64_t base = derive_seed(params.seed, "rf-tree");
    parallel_for(
        params.n_trees,
        [&](std::size_t t) {
            Rng rng = make_stream(base, t);
            std::vector<std::size_t> sample;
            if (params.bootstrap) {
                sample = bootstrap_sample(table.rows(), rng);
            } else {
                sample.resize(table.rows());
                std::iota(sample.begin(), sample.end(), std::size_t{0});
            }
            model.trees[t] = fit_tree(table, std::move(sample), params, rng);
        },
        threads);
    return model;
}

inline RandomForestModel train_rf(const MeasurementSet& train, const RfParams& params, unsigned threads = 0)
{
    return train_rf(make_table(train), params, threads);
}

struct RfPrediction
{
    Point2 position;
    std::vector<Point2> per_tree;
};

inline RfPrediction predict_rf(const RandomForestModel& model, std::span<const double> x)
{
    if (x.size() != model.num_features)
        throw Error(ErrorCode::invalid_input, "feature vector length does not match the forest");
    for (double v : x)
        if (!std::isfinite(v))
            throw Error(ErrorCode::invalid_input, "non-finite feature");
    RfPrediction p;
    p.per_tree.reserve(model.trees.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& t : model.trees) {
        p.per_tree.push_back(t.predict(x));
        sx += p.per_tree.back().x;
        sy += p.per_tree.back().y;
    }
    const double k = static_cast<double>(model.trees.size());
    p.position = {sx / k, sy / k};
    return p;
}

// ---------------------------------------------------------------------------
// KNN baseline

struct KnnModel
{
    TrainingTable table;
    std::size_t k_neighbors = 3;
};

inline KnnModel make_knn(TrainingTable table, std::size_t k_neighbors = 3)
{
    if (table.rows() == 0)
        throw Error(ErrorCode::invalid_input, "KNN needs at least one training row");
    if (k_neighbors < 1 || k_neighbors > table.rows())
        throw Error(ErrorCode::invalid_input, "k_neighbors must lie in [1, rows]");
    return {std::move(table), k_neighbors};
}

/// Mean target of the k nearest rows (Euclidean over the feature vector);
/// equal distances prefer the lower row index.
inline Point2 predict_knn(const KnnModel& model, std::span<const double> x)
{
    const auto& t = model.table;
    if (x.size() != t.num_features)
        throw Error(ErrorCode::invalid_input, "feature vector length does not match the KNN model");
    std::vector<std::pair<double, std::size_t>> d(t.rows());
    for (std::size_t i = 0; i < t.rows(); ++i) {
        double s = 0.0;
        const auto r = t.row(i);
        for (std::size_t f = 0; f < x.size(); ++f)
            s += (r[f] - x[f]) * (r[f] - x[f]);
        d[i] = {s, i};
    }
    const auto k = static_cast<std::ptrdiff_t>(model.k_neighbors);
    std::partial_sort(d.begin(), d.begin() + k, d.end());
    double sx = 0.0, sy = 0.0;
    for (std::ptrdiff_t i = 0; i < k; ++i) {
        sx += t.targets[d[static_cast<std::size_t>(i)].second].x;
        sy += t.targets[d[static_cast<std::size_t>(i)].second].y;
    }
    return {sx / static_cast<double>(k), sy / static_cast<double>(k)};
}

// ---------------------------------------------------------------------------
// Cross-validation

struct RfCvResult
{
    RfParams best;
    std::vector<RfParams> candidates;
    std::vector<double> mean_error; // m, per candidate
};

/// k-fold CV over {25, 50, 100} trees x depth {8, 12, 16}; picks the lowest
/// mean Euclidean validation error (first wins on ties).
inline RfCvResult cross_validate_rf(const TrainingTable& table, const RfParams& base, std::size_t folds = 5,
                                    unsigned threads = 0)
{
    if (table.rows() < folds || folds < 2)
        throw Error(ErrorCode::invalid_input, "not enough rows for cross-validation");
    std::vector<std::size_t> order(table.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(base.seed, "rf-cv"));
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

    RfCvResult out;
    for (std::size_t trees : {25, 50, 100})
        for (int depth : {8, 12, 16}) {
            RfParams p = base;
            p.n_trees = trees;
            p.max_depth = depth;
            out.candidates.push_back(p);
        }

    for (const auto& p : out.candidates) {
        double err = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            TrainingTable fit, hold;
            fit.num_features = hold.num_features = table.num_features;
            for (std::size_t i = 0; i < order.size(); ++i)
                (i % folds == f ? hold : fit).add_row(table.row(order[i]), table.targets[order[i]]);
            const auto model = train_rf(fit, p, threads);
            for (std::size_t i = 0; i < hold.rows(); ++i)
                err += distance(predict_rf(model, hold.row(i)).position, hold.targets[i]);
        }
        out.mean_error.push_back(err / static_cast<double>(table.rows()));
    }
    const auto best = std::min_element(out.mean_error.begin(), out.mean_error.end()) - out.mean_error.begin();
    out.best = out.candidates[static_cast<std::size_t>(best)];
    return out;
}

} // namespace toaloc

#endif // TOALOC_RF_HPP
