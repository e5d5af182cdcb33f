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

#ifndef TOALOC_UNCERTAINTY_HPP
#define TOALOC_UNCERTAINTY_HPP

#include "toaloc/core.hpp"
#include "toaloc/gp.hpp"
#include "toaloc/otdoa.hpp"
#include "toaloc/scenario.hpp"

#include <cmath>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace toaloc
{

enum class Method
{
    gp,
    rf,
    rf_cnk,
};

inline std::string to_string(Method m)
{
    switch (m) {
    case Method::gp: return "gp";
    case Method::rf: return "rf";
    case Method::rf_cnk: return "rf_cnk";
    }
    return "?";
}

/// c = sqrt(v_x + v_y), the scalar uncertainty of a 2D estimate.
inline double combined_metric(const Variance2& v)
{
    if (!(v.x >= 0.0) || !(v.y >= 0.0))
        throw Error(ErrorCode::invalid_input, "variance components must be >= 0");
    return std::sqrt(v.x + v.y);
}

struct PositionEstimate
{
    Point2 position;
    Variance2 variance;
    double combined = 0.0; // m
    Method method = Method::gp;
};

inline PositionEstimate make_estimate(const Point2& position, const Variance2& variance, Method method)
{
    return {position, variance, combined_metric(variance), method};
}

/// Spread of the per-tree predictions around the forest mean, 1/(k-1) normalized.
inline Variance2 rf_ensemble_uncertainty(std::span<const Point2> per_tree, const Point2& mean)
{
    if (per_tree.size() < 2)
        throw Error(ErrorCode::insufficient_ensemble, "ensemble variance needs at least 2 trees");
    Variance2 v;
    for (const auto& p : per_tree) {
        v.x += (p.x - mean.x) * (p.x - mean.x);
        v.y += (p.y - mean.y) * (p.y - mean.y);
    }
    const double denom = static_cast<double>(per_tree.size() - 1);
    return {v.x / denom, v.y / denom};
}

/// Squared per-axis disagreement between a model and a KNN learner.
inline Variance2 cnk_uncertainty(const Point2& estimate, const Point2& knn_estimate)
{
    if (!is_finite(estimate) || !is_finite(knn_estimate))
        throw Error(ErrorCode::invalid_input, "non-finite position in CNK uncertainty");
    const double dx = estimate.x - knn_estimate.x;
    const double dy = estimate.y - knn_estimate.y;
    return {dx * dx, dy * dy};
}

// ---------------------------------------------------------------------------
// Sampling-based uncertainty for GP distance predictions.

struct SamplingOptions
{
    std::size_t num_samples = 200;
    std::uint64_t seed = 0;
    int max_redraws = 5;
    SolverSettings solver;
    unsigned threads = 1;
};

struct SamplingResult
{
    PositionEstimate estimate;
    std::vector<Point2> samples; // surviving sampled positions, slot order
    std::size_t skipped = 0;
};

/// Positions the UE from the mean distances, then re-solves with N_s
/// independent Gaussian distance draws (truncated at 0 m) and returns the
/// per-axis spread of those solutions around the mean-distance solution.
/// Slot n draws from a stream derived from (seed, n); a slot whose solve
/// fails is redrawn up to max_redraws times and skipped after that.
inline SamplingResult sample_position_uncertainty(std::span<const double> means, std::span<const double> variances,
                                                  const Deployment& deployment, const SamplingOptions& options)
{
    if (options.num_samples < 2)
        throw Error(ErrorCode::invalid_input, "need at least 2 samples");
    if (means.size() != deployment.num_bs() || variances.size() != means.size())
        throw Error(ErrorCode::invalid_input, "distance means/variances do not match the BS count");
    for (std::size_t i = 0; i < means.size(); ++i)
        if (!std::isfinite(means[i]) || !std::isfinite(variances[i]) || variances[i] < 0.0)
            throw Error(ErrorCode::invalid_input, "invalid distance distribution for BS " + std::to_string(i));

    SamplingResult out;
    const Point2 center = solve_from_distances(means, deployment, options.solver);

    std::vector<std::optional<Point2>> slots(options.num_samples);
    parallel_for(
        options.num_samples,
        [&](std::size_t n) {
            Rng rng = make_stream(options.seed, n);
            std::normal_distribution<double> normal(0.0, 1.0);
            std::vector<double> d(means.size());
            for (int attempt = 0; attempt <= options.max_redraws; ++attempt) {
                for (std::size_t i = 0; i < d.size(); ++i) {
                    const double sd = std::sqrt(variances[i]);
                    double v = means[i] + sd * normal(rng);
                    for (int tries = 0; v < 0.0 && tries < 1000; ++tries)
                        v = means[i] + sd * normal(rng);
                    d[i] = std::max(v, 0.0);
                }
                try {
                    const auto res = solve_from_distances_detailed(d, deployment, options.solver);
                    if (res.plausible) {
                        slots[n] = res.best.position;
                        return;
                    }
                } catch (const Error&) {
                }
            }
        },
        options.threads);

    Variance2 v;
    for (const auto& s : slots) {
        if (!s) {
            ++out.skipped;
            continue;
        }
        out.samples.push_back(*s);
        v.x += (s->x - center.x) * (s->x - center.x);
        v.y += (s->y - center.y) * (s->y - center.y);
    }
    if (out.samples.size() < 2)
        throw Error(ErrorCode::uncertainty_unavailable,
                    "only " + std::to_string(out.samples.size()) + " sampled solves succeeded");
    const double denom = static_cast<double>(out.samples.size() - 1);
    out.estimate = make_estimate(center, {v.x / denom, v.y / denom}, Method::gp);
    return out;
}

/// GP distance predictions for every BS at the measured ToAs.
inline std::vector<GpPrediction> predict_distances(std::span<const GpModel> models, std::span<const double> toas)
{
    if (models.size() != toas.size())
        throw Error(ErrorCode::invalid_input, "one GP model per BS is required");
    std::vector<GpPrediction> out;
    out.reserve(toas.size());
    for (std::size_t i = 0; i < toas.size(); ++i)
        out.push_back(predict_distance(models[i], toas[i]));
    return out;
}

inline SamplingResult gp_sampling_uncertainty(std::span<const GpModel> models, const Deployment& deployment,
                                              std::span<const double> toas, const SamplingOptions& options)
{
    if (toas.size() != deployment.num_bs())
        throw Error(ErrorCode::invalid_input, "ToA vector length does not match the BS count");
    const auto pred = predict_distances(models, toas);
    std::vector<double> means, vars;
    for (const auto& p : pred) {
        means.push_back(p.mean);
        vars.push_back(p.variance);
    }
    return sample_position_uncertainty(means, vars, deployment, options);
}

} // namespace toaloc

#endif // TOALOC_UNCERTAINTY_HPP
