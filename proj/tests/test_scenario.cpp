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

TEST_CASE("office layout")
{
    const Deployment d = build_indoor_open_office();
    REQUIRE(d.num_bs() == 12);
    CHECK(d.area_length == 120.0);
    CHECK(d.area_width == 50.0);
    CHECK(d.bs_height == 3.0);
    CHECK(d.ue_height == 1.5);
    CHECK(d.bs_positions.front() == Point3{10.0, 15.0, 3.0});
    CHECK(d.bs_positions.back() == Point3{110.0, 35.0, 3.0});
    CHECK_NOTHROW(validate(d));
    CHECK(d.centroid() == Point2{60.0, 25.0});
}

TEST_CASE("deployment validation")
{
    Deployment d = build_indoor_open_office();

    SECTION("duplicate BS")
    {
        d.bs_positions[1] = d.bs_positions[0];
        CHECK(throws_code([&] { validate(d); }, ErrorCode::invalid_input));
    }
    SECTION("BS outside footprint")
    {
        d.bs_positions[0].x = 130.0;
        CHECK(throws_code([&] { validate(d); }, ErrorCode::invalid_input));
    }
    SECTION("height mismatch")
    {
        d.bs_positions[3].z = 2.0;
        CHECK(throws_code([&] { validate(d); }, ErrorCode::invalid_input));
    }
    SECTION("empty")
    {
        d.bs_positions.clear();
        CHECK(throws_code([&] { validate(d); }, ErrorCode::invalid_input));
    }
}

TEST_CASE("scenario config validation")
{
    ScenarioConfig c;
    CHECK_NOTHROW(validate(c));
    c.n_ues = 0;
    CHECK(throws_code([&] { validate(c); }, ErrorCode::config));
    c = {};
    c.noise_std = -1e-9;
    CHECK(throws_code([&] { validate(c); }, ErrorCode::config));
    c = {};
    c.nlos_excess_mean = std::nan("");
    CHECK(throws_code([&] { validate(c); }, ErrorCode::config));

    CHECK(parse_los_model("always-los") == LosModel::always_los);
    CHECK(parse_los_model(to_string(LosModel::distance_probabilistic)) == LosModel::distance_probabilistic);
    CHECK(throws_code([] { parse_los_model("sometimes"); }, ErrorCode::config));
}

TEST_CASE("UE drop")
{
    const Deployment d = build_indoor_open_office();
    const auto a = drop_ues(d, 1000, 7);
    const auto b = drop_ues(d, 1000, 7);
    CHECK(a == b);
    CHECK(drop_ues(d, 1000, 8) != a);
    for (const auto& p : a)
        CHECK(d.contains(p));
    CHECK(throws_code([&] { drop_ues(d, 0, 1); }, ErrorCode::invalid_input));

    // uniform drop: mean within 5% of the footprint center
    const auto many = drop_ues(d, 20000, 11);
    double mx = 0.0, my = 0.0;
    for (const auto& p : many) {
        mx += p.x;
        my += p.y;
    }
    mx /= static_cast<double>(many.size());
    my /= static_cast<double>(many.size());
    CHECK(std::abs(mx - 60.0) < 0.05 * 60.0);
    CHECK(std::abs(my - 25.0) < 0.05 * 25.0);
}

TEST_CASE("seed derivation")
{
    CHECK(derive_seed(1, "drop") == derive_seed(1, "drop"));
    CHECK(derive_seed(1, "drop") != derive_seed(1, "noise"));
    CHECK(derive_seed(1, "drop") != derive_seed(2, "drop"));
    CHECK(stream_seed(5, 0) != stream_seed(5, 1));
    Rng a = make_stream(9, 3), b = make_stream(9, 3);
    CHECK(a() == b());
}

TEST_CASE("parallel_for covers every index and rethrows")
{
    std::vector<int> hit(101, 0);
    parallel_for(hit.size(), [&](std::size_t i) { hit[i] += 1; }, 4);
    for (int h : hit)
        CHECK(h == 1);
    CHECK(throws_code(
        [] {
            parallel_for(10, [](std::size_t i) {
                if (i == 7)
                    throw Error(ErrorCode::io, "boom");
            }, 3);
        },
        ErrorCode::io));
}
