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

#ifndef TOALOC_SCENARIO_HPP
#define TOALOC_SCENARIO_HPP

#include "toaloc/core.hpp"

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace toaloc
{

/// Geometric world: base stations on the ceiling of a rectangular floor.
/// x runs along area_length, y along area_width.
struct Deployment
{
    std::vector<Point3> bs_positions;
    double area_width = 0.0;  // m, y extent
    double area_length = 0.0; // m, x extent
    double bs_height = 0.0;
    double ue_height = 0.0;

    std::size_t num_bs() const { return bs_positions.size(); }

    Point2 centroid() const { return {area_length / 2.0, area_width / 2.0}; }

    Point3 lift(const Point2& ue) const { return {ue.x, ue.y, ue_height}; }

    bool contains(const Point2& p) const
    {
        return p.x >= 0.0 && p.x <= area_length && p.y >= 0.0 && p.y <= area_width;
    }

    friend bool operator==(const Deployment&, const Deployment&) = default;
};

/// Throws Error(invalid_input) when the deployment invariants do not hold.
inline void validate(const Deployment& d)
{
    if (d.bs_positions.empty())
        throw Error(ErrorCode::invalid_input, "deployment has no base stations");
    if (!(d.area_width > 0.0) || !(d.area_length > 0.0))
        throw Error(ErrorCode::invalid_input, "deployment footprint must be positive");
    std::set<std::pair<double, double>> seen;
    for (std::size_t i = 0; i < d.bs_positions.size(); ++i) {
        const auto& bs = d.bs_positions[i];
        if (bs.z != d.bs_height)
            throw Error(ErrorCode::invalid_input,
                        "BS " + std::to_string(i) + " height differs from bs_height");
        if (!d.contains({bs.x, bs.y}))
            throw Error(ErrorCode::invalid_input,
                        "BS " + std::to_string(i) + " lies outside the footprint");
        if (!seen.emplace(bs.x, bs.y).second)
            throw Error(ErrorCode::invalid_input, "duplicate BS position at index " + std::to_string(i));
    }
}

/// Indoor open office: 120 m x 50 m, two rows of six ceiling BSs at 20 m
/// pitch (x = 10..110, y = 15 and 35), BS height 3 m, UE height 1.5 m.
inline Deployment build_indoor_open_office()
{
    Deployment d;
    d.area_length = 120.0;
    d.area_width = 50.0;
    d.bs_height = 3.0;
    d.ue_height = 1.5;
    for (double y : {15.0, 35.0})
        for (int col = 0; col < 6; ++col)
            d.bs_positions.push_back({10.0 + 20.0 * col, y, d.bs_height});
    return d;
}

enum class LosModel
{
    always_los,
    distance_probabilistic,
};

inline std::string to_string(LosModel m)
{
    return m == LosModel::always_los ? "always-los" : "distance-probabilistic";
}

inline LosModel parse_los_model(const std::string& s)
{
    if (s == "always-los")
        return LosModel::always_los;
    if (s == "distance-probabilistic")
        return LosModel::distance_probabilistic;
    throw Error(ErrorCode::config, "unknown los_model '" + s + "'");
}

struct ScenarioConfig
{
    std::size_t n_ues = 1000;
    std::uint64_t rng_seed = 2021;
    double noise_std = 3e-9;         // s
    double nlos_excess_mean = 15e-9; // s
    LosModel los_model = LosModel::distance_probabilistic;
};

inline void validate(const ScenarioConfig& c)
{
    if (c.n_ues < 1)
        throw Error(ErrorCode::config, "n_ues must be >= 1");
    if (!(c.noise_std >= 0.0) || !std::isfinite(c.noise_std))
        throw Error(ErrorCode::config, "noise_std_s must be >= 0");
    if (!(c.nlos_excess_mean >= 0.0) || !std::isfinite(c.nlos_excess_mean))
        throw Error(ErrorCode::config, "nlos_excess_mean_s must be >= 0");
}

/// n UE positions uniform over the footprint. Same seed, same points.
inline std::vector<Point2> drop_ues(const Deployment& deployment, std::size_t n, std::uint64_t seed)
{
    if (n < 1)
        throw Error(ErrorCode::invalid_input, "drop_ues needs n >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> ux(0.0, deployment.area_length);
    std::uniform_real_distribution<double> uy(0.0, deployment.area_width);
    std::vector<Point2> ues(n);
    for (auto& p : ues) {
        p.x = ux(rng);
        p.y = uy(rng);
    }
    return ues;
}

} // namespace toaloc

#endif // TOALOC_SCENARIO_HPP
