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

#include "helpers.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace toaloc;
using testing::throws_code;

TEST_CASE("geometric ToA uses the 3D path")
{
    const Point3 bs{0.0, 0.0, 3.0};
    // 3-4-5 in the plane, 1.5 m height difference
    const double expect = std::sqrt(25.0 + 2.25) / kSpeedOfLight;
    CHECK(geometric_toa({3.0, 4.0}, bs, 1.5) == Catch::Approx(expect).epsilon(1e-15));
}

TEST_CASE("LoS probability")
{
    CHECK(los_probability(0.0) == 1.0);
    CHECK(los_probability(5.0) == 1.0);
    CHECK(los_probability(75.8) == Catch::Approx(std::exp(-1.0)));
    double prev = 1.0;
    for (double d = 5.0; d < 200.0; d += 1.0) {
        const double p = los_probability(d);
        CHECK(p <= prev);
        prev = p;
    }
}

TEST_CASE("synthesize_toa")
{
    Rng rng(1);
    const double t = 1e-7;

    SECTION("zero noise LoS is exact")
    {
        for (int i = 0; i < 10; ++i)
            CHECK(synthesize_toa(t, true, 0.0, 20e-9, rng) == t);
    }
    SECTION("zero noise NLoS never early")
    {
        for (int i = 0; i < 1000; ++i)
            CHECK(synthesize_toa(t, false, 0.0, 20e-9, rng) >= t);
    }
    SECTION("NLoS mean matches t + m")
    {
        const double m = 15e-9;
        double sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i)
            sum += synthesize_toa(t, false, 0.0, m, rng);
        CHECK(std::abs(sum / n - (t + m)) < 0.02 * (t + m));
    }
    SECTION("clamped below at t - 3 sigma and 0")
    {
        const double s = 3e-9;
        for (int i = 0; i < 20000; ++i)
            CHECK(synthesize_toa(t, true, s, 0.0, rng) >= t - 3.0 * s);
        for (int i = 0; i < 2000; ++i)
            CHECK(synthesize_toa(1e-9, true, s, 0.0, rng) >= 0.0);
    }
    SECTION("negative knobs rejected")
    {
        CHECK(throws_code([&] { synthesize_toa(t, true, -1.0, 0.0, rng); }, ErrorCode::invalid_input));
        CHECK(throws_code([&] { synthesize_toa(t, true, 0.0, -1.0, rng); }, ErrorCode::invalid_input));
    }
}

TEST_CASE("dataset generation")
{
    const Deployment d = build_indoor_open_office();
    ScenarioConfig c;
    c.n_ues = 300;

    const auto a = generate_dataset(d, c, 42, 1);
    REQUIRE(a.size() == 300);

    SECTION("thread count does not change the data")
    {
        CHECK(generate_dataset(d, c, 42, 4) == a);
    }
    SECTION("clamping contract holds per record")
    {
        for (const auto& r : a.records) {
            REQUIRE(r.toa.size() == 12);
            REQUIRE(r.los.size() == 12);
            for (std::size_t i = 0; i < 12; ++i) {
                const double dist = distance(d.lift(r.true_position), d.bs_positions[i]);
                CHECK(r.toa[i] * kSpeedOfLight >= dist - 3.0 * c.noise_std * kSpeedOfLight - 1e-9);
            }
        }
    }
    SECTION("noiseless always-LoS equals geometry")
    {
        ScenarioConfig clean = c;
        clean.noise_std = 0.0;
        clean.los_model = LosModel::always_los;
        const auto s = generate_dataset(d, clean, 42);
        for (const auto& r : s.records)
            for (std::size_t i = 0; i < 12; ++i) {
                CHECK(r.los[i]);
                CHECK(r.toa[i] == geometric_toa(r.true_position, d.bs_positions[i], d.ue_height));
            }
    }
    SECTION("some links are NLoS under the distance model")
    {
        std::size_t nlos = 0;
        for (const auto& r : a.records)
            for (bool l : r.los)
                nlos += l ? 0 : 1;
        CHECK(nlos > 0);
        CHECK(nlos < a.size() * 12);
    }
}

TEST_CASE("train/test split")
{
    const Deployment d = build_indoor_open_office();
    ScenarioConfig c;
    c.n_ues = 1000;
    const auto all = generate_dataset(d, c, 3);
    const auto [train, test] = split_dataset(all, 0.7, 99);
    CHECK(train.size() == 700);
    CHECK(test.size() == 300);
    CHECK(train.split == SplitTag::train);
    CHECK(test.split == SplitTag::test);

    std::vector<int> seen(1000, 0);
    for (const auto* part : {&train, &test}) {
        for (std::size_t i = 1; i < part->size(); ++i)
            CHECK(part->records[i - 1].ue_index < part->records[i].ue_index);
        for (const auto& r : part->records)
            seen[r.ue_index] += 1;
    }
    for (int s : seen)
        CHECK(s == 1);

    const auto again = split_dataset(all, 0.7, 99);
    CHECK(again.first == train);
    CHECK(throws_code([&] { split_dataset(all, 1.0, 1); }, ErrorCode::invalid_input));
}
