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

#ifndef TOALOC_OTDOA_HPP
#define TOALOC_OTDOA_HPP

#include "toaloc/core.hpp"
#include "toaloc/scenario.hpp"

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace toaloc
{

/// Time differences against one reference BS, ordered by BS index with the
/// reference itself left out.
struct RstdVector
{
    std::size_t reference_bs = 0;
    std::vector<double> values; // s, toa_ref - toa_j

    /// BS index that values[j] refers to.
    std::size_t bs_index(std::size_t j) const { return j < reference_bs ? j : j + 1; }
};

struct SolverSettings
{
    int max_iterations = 50;
    double position_tolerance = 1e-4; // m
    double damping_init = 1e-3;
    double search_margin = 5.0; // m around the footprint that counts as a plausible solution
};

inline void validate(const SolverSettings& s)
{
    if (s.max_iterations < 1)
        throw Error(ErrorCode::config, "max_iterations must be >= 1");
    if (!(s.position_tolerance > 0.0))
        throw Error(ErrorCode::config, "position_tolerance must be > 0");
    if (!(s.damping_init > 0.0))
        throw Error(ErrorCode::config, "damping_init must be > 0");
    if (!(s.search_margin >= 0.0))
        throw Error(ErrorCode::config, "search_margin must be >= 0");
}

inline RstdVector form_rstd(std::span<const double> toas, std::size_t reference_bs)
{
    if (toas.size() < 3)
        throw Error(ErrorCode::insufficient_geometry,
                    "need at least 3 BSs, got " + std::to_string(toas.size()));
    if (reference_bs >= toas.size())
        throw Error(ErrorCode::invalid_input, "reference BS index out of range");
    for (double t : toas)
        if (!std::isfinite(t))
            throw Error(ErrorCode::invalid_input, "non-finite ToA");

    RstdVector out;
    out.reference_bs = reference_bs;
    out.values.reserve(toas.size() - 1);
    for (std::size_t j = 0; j < toas.size(); ++j)
        if (j != reference_bs)
            out.values.push_back(toas[reference_bs] - toas[j]);
    return out;
}

struct SolveResult
{
    Point2 position;
    int iterations = 0;
    bool converged = false;
    double cost = 0.0;                // 0.5 * sum r^2 at position, m^2
    std::vector<double> cost_history; // after each accepted step, starting with the initial cost
};

namespace detail
{

// Range-difference residuals r_j = c * rstd_j - (|p - bs_ref| - |p - bs_j|)
// and their Jacobian, using the 3D distance with the UE at ue_height.
struct HyperbolicModel
{
    const RstdVector& rstd;
    const Deployment& deployment;

    double range(const Point2& p, std::size_t bs, double& gx, double& gy) const
    {
        const Point3& b = deployment.bs_positions[bs];
        const double dx = p.x - b.x;
        const double dy = p.y - b.y;
        const double dz = deployment.ue_height - b.z;
        const double r = std::sqrt(dx * dx + dy * dy + dz * dz);
        gx = r > 0.0 ? dx / r : 0.0;
        gy = r > 0.0 ? dy / r : 0.0;
        return r;
    }

    // Returns 0.5 * |r|^2 and accumulates J^T J (a11, a12, a22) and J^T r (g1, g2).
    double evaluate(const Point2& p, double* a = nullptr, double* g = nullptr) const
    {
        double gxr = 0.0, gyr = 0.0;
        const double d_ref = range(p, rstd.reference_bs, gxr, gyr);
        double cost = 0.0;
        if (a) {
            a[0] = a[1] = a[2] = 0.0;
            g[0] = g[1] = 0.0;
        }
        for (std::size_t j = 0; j < rstd.values.size(); ++j) {
            double gxj = 0.0, gyj = 0.0;
            const double d_j = range(p, rstd.bs_index(j), gxj, gyj);
            const double r = kSpeedOfLight * rstd.values[j] - (d_ref - d_j);
            cost += 0.5 * r * r;
            if (a) {
                const double jx = -(gxr - gxj);
                const double jy = -(gyr - gyj);
                a[0] += jx * jx;
                a[1] += jx * jy;
                a[2] += jy * jy;
                g[0] += jx * r;
                g[1] += jy * r;
            }
        }
        return cost;
    }
};

} // namespace detail

/// Damped Gauss-Newton (Levenberg-Marquardt) over the hyperbolic residuals.
/// Terminates when an accepted step is shorter than position_tolerance or
/// after max_iterations trial steps; `converged` tells which.
inline SolveResult solve_position_detailed(const RstdVector& rstd, const Deployment& deployment, const Point2& init,
                                           const SolverSettings& settings = {})
{
    validate(settings);
    if (deployment.num_bs() < 3)
        throw Error(ErrorCode::insufficient_geometry, "need at least 3 BSs");
    if (rstd.values.size() + 1 != deployment.num_bs() || rstd.reference_bs >= deployment.num_bs())
        throw Error(ErrorCode::invalid_input, "RSTD vector does not match deployment");
    if (!is_finite(init))
        throw Error(ErrorCode::invalid_input, "non-finite initial point");
    for (double v : rstd.values)
        if (!std::isfinite(v))
            throw Error(ErrorCode::invalid_input, "non-finite RSTD");

    const detail::HyperbolicModel model{rstd, deployment};
    SolveResult res;
    res.position = init;
    double a[3], g[2];
    res.cost = model.evaluate(res.position, a, g);
    res.cost_history.push_back(res.cost);
    double lambda = settings.damping_init;
    bool ever_full_rank = false;
    bool need_jacobian = false;

    for (int it = 0; it < settings.max_iterations; ++it) {
        res.iterations = it + 1;
        if (need_jacobian) {
            model.evaluate(res.position, a, g);
            need_jacobian = false;
        }
        const double trace = a[0] + a[2];
        const double det = a[0] * a[2] - a[1] * a[1];
        if (trace > 0.0 && det > 1e-12 * trace * trace)
            ever_full_rank = true;
        if (!(trace > 0.0)) {
            // Zero gradient everywhere nearby: nothing to solve.
            res.converged = std::sqrt(g[0] * g[0] + g[1] * g[1]) == 0.0 && ever_full_rank;
            break;
        }

        const double mu = lambda * trace / 2.0;
        const double m11 = a[0] + mu;
        const double m22 = a[2] + mu;
        const double mdet = m11 * m22 - a[1] * a[1];
        const double dx = -(m22 * g[0] - a[1] * g[1]) / mdet;
        const double dy = -(m11 * g[1] - a[1] * g[0]) / mdet;
        const double step = std::hypot(dx, dy);
        const Point2 trial{res.position.x + dx, res.position.y + dy};
        const double trial_cost = model.evaluate(trial);

        if (std::isfinite(trial_cost) && trial_cost <= res.cost) {
            res.position = trial;
            res.cost = trial_cost;
            res.cost_history.push_back(trial_cost);
            lambda = std::max(lambda / 10.0, 1e-12);
            need_jacobian = true;
            if (step < settings.position_tolerance) {
                res.converged = true;
                break;
            }
        } else {
            if (step < settings.position_tolerance) {
                // Even a tiny step cannot lower the cost: stationary point.
                res.converged = true;
                break;
            }
            lambda *= 10.0;
        }
    }

    if (!ever_full_rank) {
        model.evaluate(res.position, a, g);
        const double trace = a[0] + a[2];
        if (!(trace > 0.0 && a[0] * a[2] - a[1] * a[1] > 1e-12 * trace * trace))
            throw Error(ErrorCode::degenerate_geometry, "Jacobian is rank deficient at every iterate");
    }
    return res;
}

inline Point2 solve_position(const RstdVector& rstd, const Deployment& deployment, const Point2& init,
                             const SolverSettings& settings = {})
{
    return solve_position_detailed(rstd, deployment, init, settings).position;
}

/// Index of the smallest entry; ties go to the lower index.
inline std::size_t nearest_bs(std::span<const double> toas_or_distances)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < toas_or_distances.size(); ++i)
        if (toas_or_distances[i] < toas_or_distances[best])
            best = i;
    return best;
}

/// Start points for the multi-start solve: footprint centroid, the
/// reference BS, and the quarter points of the long axis.
inline std::vector<Point2> start_points(const Deployment& deployment, std::size_t reference_bs)
{
    const Point3& ref = deployment.bs_positions[reference_bs];
    const double mid_y = deployment.area_width / 2.0;
    return {deployment.centroid(),
            {ref.x, ref.y},
            {deployment.area_length / 4.0, mid_y},
            {3.0 * deployment.area_length / 4.0, mid_y}};
}

inline bool in_search_region(const Point2& p, const Deployment& deployment, double margin)
{
    return p.x >= -margin && p.x <= deployment.area_length + margin && p.y >= -margin &&
           p.y <= deployment.area_width + margin;
}

struct MultiStartResult
{
    SolveResult best;
    bool plausible = false; // best lies within the footprint plus search_margin
};

/// Full OTDoA estimate from a ToA vector. The nearest BS is the reference.
/// The solver runs from every start point; the lowest-cost solution inside
/// the footprint (plus search_margin) wins, else the lowest-cost overall.
inline MultiStartResult solve_from_toas_detailed(std::span<const double> toas, const Deployment& deployment,
                                                 const SolverSettings& settings = {})
{
    if (toas.size() != deployment.num_bs())
        throw Error(ErrorCode::invalid_input, "ToA vector length does not match the BS count");
    const RstdVector rstd = form_rstd(toas, nearest_bs(toas));

    std::optional<SolveResult> best_in, best_any;
    std::optional<Error> first_error;
    for (const Point2& start : start_points(deployment, rstd.reference_bs)) {
        try {
            SolveResult r = solve_position_detailed(rstd, deployment, start, settings);
            if (in_search_region(r.position, deployment, settings.search_margin) &&
                (!best_in || r.cost < best_in->cost))
                best_in = r;
            if (!best_any || r.cost < best_any->cost)
                best_any = std::move(r);
        } catch (const Error& e) {
            if (!first_error)
                first_error = e;
        }
    }
    if (best_in)
        return {std::move(*best_in), true};
    if (best_any)
        return {std::move(*best_any), false};
    throw *first_error;
}

inline Point2 solve_from_toas(std::span<const double> toas, const Deployment& deployment,
                              const SolverSettings& settings = {})
{
    return solve_from_toas_detailed(toas, deployment, settings).best.position;
}

/// Positions from BS distances (m) by converting them to pseudo-ToAs.
inline MultiStartResult solve_from_distances_detailed(std::span<const double> distances,
                                                      const Deployment& deployment,
                                                      const SolverSettings& settings = {})
{
    if (distances.size() != deployment.num_bs())
        throw Error(ErrorCode::invalid_input, "distance vector length does not match the BS count");
    std::vector<double> toas(distances.size());
    for (std::size_t i = 0; i < distances.size(); ++i) {
        if (!std::isfinite(distances[i]))
            throw Error(ErrorCode::invalid_input, "non-finite distance to BS " + std::to_string(i));
        toas[i] = distances[i] / kSpeedOfLight;
    }
    return solve_from_toas_detailed(toas, deployment, settings);
}

inline Point2 solve_from_distances(std::span<const double> distances, const Deployment& deployment,
                                   const SolverSettings& settings = {})
{
    return solve_from_distances_detailed(distances, deployment, settings).best.position;
}

} // namespace toaloc

#endif // TOALOC_OTDOA_HPP
