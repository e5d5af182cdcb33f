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

#ifndef TOALOC_GP_HPP
#define TOALOC_GP_HPP

#include "toaloc/core.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace toaloc
{

/// Squared-exponential kernel hyperparameters plus observation noise.
struct GpHyperparams
{
    double signal_std = 1.0;   // m
    double length_scale = 1.0; // s
    double noise_std = 1.0;    // m

    friend bool operator==(const GpHyperparams&, const GpHyperparams&) = default;
};

inline bool is_valid(const GpHyperparams& h)
{
    return h.signal_std > 0.0 && h.length_scale > 0.0 && h.noise_std > 0.0 && std::isfinite(h.signal_std) &&
           std::isfinite(h.length_scale) && std::isfinite(h.noise_std);
}

inline double se_kernel(double a, double b, const GpHyperparams& h)
{
    const double d = (a - b) / h.length_scale;
    return h.signal_std * h.signal_std * std::exp(-0.5 * d * d);
}

inline Eigen::MatrixXd kernel_matrix(std::span<const double> taus, const GpHyperparams& h)
{
    const auto m = static_cast<Eigen::Index>(taus.size());
    Eigen::MatrixXd k(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        k(i, i) = h.signal_std * h.signal_std;
        for (Eigen::Index j = 0; j < i; ++j)
            k(i, j) = k(j, i) = se_kernel(taus[static_cast<std::size_t>(i)], taus[static_cast<std::size_t>(j)], h);
    }
    return k;
}

/// Lower Cholesky factor of K + sigma^2 I (+ jitter I).
struct GpFactor
{
    Eigen::MatrixXd lower;
    double jitter = 0.0;
};

/// Factorizes K + sigma^2 I. Diagonal jitter starts at 1e-10 sigma_k^2 and
/// grows x10 per failure up to 1e-4 sigma_k^2; beyond that throws non_psd.
inline GpFactor factorize(std::span<const double> taus, const GpHyperparams& h)
{
    if (!is_valid(h))
        throw Error(ErrorCode::invalid_input, "GP hyperparameters must be finite and positive");
    Eigen::MatrixXd cov = kernel_matrix(taus, h);
    cov.diagonal().array() += h.noise_std * h.noise_std;
    const double sk2 = h.signal_std * h.signal_std;
    for (double rel = 1e-10; rel <= 1e-4 * 1.0000001; rel *= 10.0) {
        Eigen::MatrixXd trial = cov;
        trial.diagonal().array() += rel * sk2;
        Eigen::LLT<Eigen::MatrixXd> llt(trial);
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd l = llt.matrixL();
            if (l.allFinite() && (l.diagonal().array() > 0.0).all())
                return {std::move(l), rel * sk2};
        }
    }
    throw Error(ErrorCode::non_psd, "kernel matrix factorization failed after jitter escalation");
}

inline double log_marginal_likelihood(const GpFactor& f, std::span<const double> distances)
{
    const Eigen::Map<const Eigen::VectorXd> d(distances.data(), static_cast<Eigen::Index>(distances.size()));
    const Eigen::VectorXd w = f.lower.triangularView<Eigen::Lower>().solve(d);
    const double half_log_det = f.lower.diagonal().array().log().sum();
    return -0.5 * w.squaredNorm() - half_log_det -
           0.5 * static_cast<double>(distances.size()) * std::log(2.0 * std::numbers::pi);
}

/// log p(d | tau) under a zero-mean GP with the given hyperparameters.
inline double log_marginal_likelihood(std::span<const double> taus, std::span<const double> distances,
                                      const GpHyperparams& h)
{
    if (taus.size() != distances.size() || taus.empty())
        throw Error(ErrorCode::invalid_input, "training ToAs and distances must be non-empty and equal length");
    return log_marginal_likelihood(factorize(taus, h), distances);
}

/// Trained per-BS model: training data, hyperparameters and the cached
/// factorization used for prediction.
struct GpModel
{
    std::vector<double> train_toas;      // s
    std::vector<double> train_distances; // m
    GpHyperparams hyperparams;
    Eigen::MatrixXd chol_factor; // lower
    double jitter = 0.0;
    Eigen::VectorXd alpha; // (K + sigma^2 I)^-1 d

    std::size_t size() const { return train_toas.size(); }
};

inline GpModel make_gp_model(std::vector<double> taus, std::vector<double> distances, const GpHyperparams& h)
{
    if (taus.size() != distances.size() || taus.empty())
        throw Error(ErrorCode::invalid_input, "training ToAs and distances must be non-empty and equal length");
    GpModel m;
    GpFactor f = factorize(taus, h);
    const Eigen::Map<const Eigen::VectorXd> d(distances.data(), static_cast<Eigen::Index>(distances.size()));
    const Eigen::VectorXd w = f.lower.triangularView<Eigen::Lower>().solve(d);
    m.alpha = f.lower.transpose().triangularView<Eigen::Upper>().solve(w);
    m.chol_factor = std::move(f.lower);
    m.jitter = f.jitter;
    m.hyperparams = h;
    m.train_toas = std::move(taus);
    m.train_distances = std::move(distances);
    return m;
}

struct GpPrediction
{
    double mean = 0.0;     // m
    double variance = 0.0; // m^2
};

/// Posterior mean and variance of the distance at a new ToA. The variance
/// includes the observation noise sigma^2.
inline GpPrediction predict_distance(const GpModel& model, double tau)
{
    if (!std::isfinite(tau))
        throw Error(ErrorCode::invalid_input, "non-finite ToA for GP prediction");
    const auto& h = model.hyperparams;
    const auto m = static_cast<Eigen::Index>(model.size());
    Eigen::VectorXd kstar(m);
    for (Eigen::Index i = 0; i < m; ++i)
        kstar(i) = se_kernel(tau, model.train_toas[static_cast<std::size_t>(i)], h);
    const Eigen::VectorXd v = model.chol_factor.triangularView<Eigen::Lower>().solve(kstar);
    const double noise2 = h.noise_std * h.noise_std;
    GpPrediction p;
    p.mean = kstar.dot(model.alpha);
    // The Schur complement is >= sigma^2 analytically; clip round-off below it.
    p.variance = std::max(h.signal_std * h.signal_std + noise2 - v.squaredNorm(), noise2);
    return p;
}

struct GpTrainOptions
{
    std::size_t subsample_cap = 1000;
    std::uint64_t seed = 0;
    int refine_sweeps = 10;
    int golden_iterations = 12;
};

/// Result of hyperparameter search; exposes the grid for inspection.
struct GpTrainReport
{
    std::vector<GpHyperparams> grid;
    std::vector<double> grid_log_likelihood; // -inf where factorization failed
    GpHyperparams best;
    double best_log_likelihood = -std::numeric_limits<double>::infinity();
};

namespace detail
{

inline double rms(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v)
        s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

} // namespace detail

/// Log-spaced 3x3x3 start grid scaled to the data: signal std around the
/// RMS distance, length scale around the ToA span, noise below the RMS.
inline std::vector<GpHyperparams> gp_start_grid(std::span<const double> taus, std::span<const double> distances)
{
    double d_scale = detail::rms(distances);
    if (!(d_scale > 0.0))
        d_scale = 1.0;
    const auto [lo, hi] = std::minmax_element(taus.begin(), taus.end());
    double t_scale = *hi - *lo;
    if (!(t_scale > 0.0))
        t_scale = std::max(std::abs(*hi), 1e-9);

    std::vector<GpHyperparams> grid;
    for (double sk : {0.3, 1.0, 3.0})
        for (double l : {0.03, 0.3, 3.0})
            for (double sn : {1e-3, 1e-2, 1e-1})
                grid.push_back({sk * d_scale, l * t_scale, sn * d_scale});
    return grid;
}

/// Maximum-likelihood hyperparameters: best point of the start grid, then
/// coordinate-wise golden-section refinement in log space. Deterministic.
inline GpTrainReport optimize_hyperparams(std::span<const double> taus, std::span<const double> distances,
                                          const GpTrainOptions& options = {})
{
    const auto objective = [&](const GpHyperparams& h) {
        try {
            const double ll = log_marginal_likelihood(taus, distances, h);
            return std::isfinite(ll) ? ll : -std::numeric_limits<double>::infinity();
        } catch (const Error&) {
            return -std::numeric_limits<double>::infinity();
        }
    };

    GpTrainReport rep;
    rep.grid = gp_start_grid(taus, distances);
    for (const auto& h : rep.grid) {
        const double ll = objective(h);
        rep.grid_log_likelihood.push_back(ll);
        if (ll > rep.best_log_likelihood) {
            rep.best_log_likelihood = ll;
            rep.best = h;
        }
    }
    if (!std::isfinite(rep.best_log_likelihood))
        throw Error(ErrorCode::training_failed, "no start point admits a kernel factorization");

    std::array<double, 3> x{std::log(rep.best.signal_std), std::log(rep.best.length_scale),
                            std::log(rep.best.noise_std)};
    const auto unpack = [](const std::array<double, 3>& v) {
        return GpHyperparams{std::exp(v[0]), std::exp(v[1]), std::exp(v[2])};
    };
    const double half_width = std::log(10.0);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;

    for (int sweep = 0; sweep < options.refine_sweeps; ++sweep) {
        const double sweep_start = rep.best_log_likelihood;
        for (std::size_t c = 0; c < 3; ++c) {
            auto eval_at = [&](double v) {
                auto trial = x;
                trial[c] = v;
                return objective(unpack(trial));
            };
            double a = x[c] - half_width;
            double b = x[c] + half_width;
            double p = b - inv_phi * (b - a);
            double q = a + inv_phi * (b - a);
            double fp = eval_at(p);
            double fq = eval_at(q);
            double best_v = x[c];
            double best_f = rep.best_log_likelihood;
            for (int it = 0; it < options.golden_iterations; ++it) {
                if (fp > best_f) {
                    best_f = fp;
                    best_v = p;
                }
                if (fq > best_f) {
                    best_f = fq;
                    best_v = q;
                }
                if (fp >= fq) {
                    b = q;
                    q = p;
                    fq = fp;
                    p = b - inv_phi * (b - a);
                    fp = eval_at(p);
                } else {
                    a = p;
                    p = q;
                    fp = fq;
                    q = a + inv_phi * (b - a);
                    fq = eval_at(q);
                }
            }
            if (fp > best_f) {
                best_f = fp;
                best_v = p;
            }
            if (fq > best_f) {
                best_f = fq;
                best_v = q;
            }
            if (best_f > rep.best_log_likelihood) {
                rep.best_log_likelihood = best_f;
                x[c] = best_v;
                rep.best = unpack(x);
            }
        }
        if (rep.best_log_likelihood - sweep_start < 1e-6)
            break;
    }
    return rep;
}

/// Uniform subsample of at most `cap` indices, in ascending order.
inline std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t cap, std::uint64_t seed)
{
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (n <= cap)
        return idx;
    Rng rng(seed);
    for (std::size_t i = 0; i < cap; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(cap);
    std::sort(idx.begin(), idx.end());
    return idx;
}

/// Fits one GP mapping ToA to distance for a single BS.
inline GpModel train_gp(std::span<const double> taus, std::span<const double> distances,
                        const GpTrainOptions& options = {})
{
    if (taus.size() != distances.size())
        throw Error(ErrorCode::invalid_input, "training ToAs and distances differ in length");
    if (taus.size() < 2)
        throw Error(ErrorCode::invalid_input, "GP training needs at least 2 points");
    for (std::size_t i = 0; i < taus.size(); ++i)
        if (!std::isfinite(taus[i]) || !std::isfinite(distances[i]))
            throw Error(ErrorCode::invalid_input, "non-finite GP training pair at row " + std::to_string(i));

    const auto idx = subsample_indices(taus.size(), options.subsample_cap, options.seed);
    std::vector<double> t, d;
    t.reserve(idx.size());
    d.reserve(idx.size());
    for (auto i : idx) {
        t.push_back(taus[i]);
        d.push_back(distances[i]);
    }
    const GpTrainReport rep = optimize_hyperparams(t, d, options);
    return make_gp_model(std::move(t), std::move(d), rep.best);
}

} // namespace toaloc

#endif // TOALOC_GP_HPP
