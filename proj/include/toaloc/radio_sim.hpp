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

#ifndef TOALOC_RADIO_SIM_HPP
#define TOALOC_RADIO_SIM_HPP

#include "toaloc/core.hpp"
#include "toaloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace toaloc
{

/// One UE's measurements against every BS of a deployment.
struct ToaRecord
{
    std::size_t ue_index = 0;
    std::vector<double> toa; // s, one per BS
    std::vector<bool> los;   // one per BS
    Point2 true_position;

    friend bool operator==(const ToaRecord&, const ToaRecord&) = default;
};

enum class SplitTag
{
    all,
    train,
    test,
};

struct MeasurementSet
{
    std::vector<ToaRecord> records;
    Deployment deployment;
    SplitTag split = SplitTag::all;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }

    friend bool operator==(const MeasurementSet&, const MeasurementSet&) = default;
};

/// Propagation time from a UE (at the deployment's UE height) to a BS.
inline double geometric_toa(const Point2& ue, const Point3& bs, double ue_height)
{
    return distance(Point3{ue.x, ue.y, ue_height}, bs) / kSpeedOfLight;
}

/// LoS probability as a function of horizontal UE-BS distance:
/// 1 up to 5 m, then exp(-(d - 5) / 70.8).
inline double los_probability(double horizontal_distance)
{
    if (horizontal_distance <= 5.0)
        return 1.0;
    return std::exp(-(horizontal_distance - 5.0) / 70.8);
}

/// Measured ToA: truth plus Gaussian noise, plus an exponential excess delay
/// when the link is NLoS. Clamped to >= truth - 3 sigma and >= 0.
inline double synthesize_toa(double true_toa, bool los, double noise_std, double nlos_excess_mean, Rng& rng)
{
    if (noise_std < 0.0 || nlos_excess_mean < 0.0)
        throw Error(ErrorCode::invalid_input, "noise_std and nlos_excess_mean must be >= 0");
    double toa = true_toa;
    if (noise_std > 0.0)
        toa += std::normal_distribution<double>(0.0, noise_std)(rng);
    if (!los && nlos_excess_mean > 0.0)
        toa += std::exponential_distribution<double>(1.0 / nlos_excess_mean)(rng);
    return std::max({toa, true_toa - 3.0 * noise_std, 0.0});
}

/// Builds a ToaRecord for a UE using the given per-UE stream.
inline ToaRecord measure_ue(const Deployment& deployment, const ScenarioConfig& config, std::size_t ue_index,
                            const Point2& ue, Rng& rng)
{
    ToaRecord rec;
    rec.ue_index = ue_index;
    rec.true_position = ue;
    rec.toa.reserve(deployment.num_bs());
    rec.los.reserve(deployment.num_bs());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& bs : deployment.bs_positions) {
        bool los = true;
        if (config.los_model == LosModel::distance_probabilistic)
            los = unit(rng) < los_probability(distance(ue, Point2{bs.x, bs.y}));
        const double t = geometric_toa(ue, bs, deployment.ue_height);
        rec.toa.push_back(synthesize_toa(t, los, config.noise_std, config.nlos_excess_mean, rng));
        rec.los.push_back(los);
    }
    return rec;
}

/// Drops config.n_ues UEs and measures each against all BSs. UE i draws
/// from its own stream derived from (seed, i), so the result does not
/// depend on the number of worker threads.
inline MeasurementSet generate_dataset(const Deployment& deployment, const ScenarioConfig& config, std::uint64_t seed,
                                       unsigned threads = 0)
{
    validate(deployment);
    validate(config);
    const auto ues = drop_ues(deployment, config.n_ues, derive_seed(seed, "drop"));
    const std::uint64_t noise_seed = derive_seed(seed, "noise");

    MeasurementSet set;
    set.deployment = deployment;
    set.records.resize(ues.size());
    parallel_for(
        ues.size(),
        [&](std::size_t i) {
            Rng rng = make_stream(noise_seed, i);
            set.records[i] = measure_ue(deployment, config, i, ues[i], rng);
        },
        threads);
    return set;
}

/// Random split by UE. round(fraction * n) records go to train; both
/// halves keep ascending ue_index order.
inline std::pair<MeasurementSet, MeasurementSet> split_dataset(const MeasurementSet& all, double train_fraction,
                                                               std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw Error(ErrorCode::invalid_input, "train fraction must lie in (0, 1)");
    std::vector<std::size_t> order(all.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    // Fisher-Yates with an explicit draw so the permutation is library independent.
    for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(all.size())));
    std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    MeasurementSet train{{}, all.deployment, SplitTag::train};
    MeasurementSet test{{}, all.deployment, SplitTag::test};
    for (auto i : train_idx)
        train.records.push_back(all.records[i]);
    for (auto i : test_idx)
        test.records.push_back(all.records[i]);
    return {std::move(train), std::move(test)};
}

} // namespace toaloc

#endif // TOALOC_RADIO_SIM_HPP
