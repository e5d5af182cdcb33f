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

namespace
{

std::vector<double> true_distances(const Deployment& d, const Point2& ue)
{
    std::vector<double> out;
    for (const auto& bs : d.bs_positions)
        out.push_back(distance(d.lift(ue), bs));
    return out;
}

} // namespace

TEST_CASE("combined metric")
{
    CHECK(combined_metric({0.0, 0.0}) == 0.0);
    CHECK(combined_metric({9.0, 16.0}) == 5.0);
    CHECK(combined_metric({2.0, 8.0}) == Catch::Approx(3.16227766016838).epsilon(1e-13));
    CHECK(throws_code([] { combined_metric({-1e-12, 1.0}); }, ErrorCode::invalid_input));
    CHECK(throws_code([] { combined_metric({1.0, std::nan("")}); }, ErrorCode::invalid_input));
    double prev = 0.0;
    for (double vx = 0.0; vx < 10.0; vx += 0.5) {
        const double c = combined_metric({vx, 3.0});
        CHECK(c >= prev);
        prev = c;
    }
    const auto e = make_estimate({1.0, 2.0}, {9.0, 16.0}, Method::rf);
    CHECK(e.combined == 5.0);
    CHECK(e.method == Method::rf);
}

TEST_CASE("ensemble variance")
{
    const std::vector<Point2> two{{0.0, 0.0}, {2.0, 4.0}};
    CHECK(rf_ensemble_uncertainty(two, {1.0, 2.0}) == Variance2{2.0, 8.0});

    const std::vector<Point2> same(5, Point2{3.0, -1.0});
    CHECK(rf_ensemble_uncertainty(same, {3.0, -1.0}) == Variance2{0.0, 0.0});

    const std::vector<Point2> one{{1.0, 1.0}};
    CHECK(throws_code([&] { rf_ensemble_uncertainty(one, {1.0, 1.0}); }, ErrorCode::insufficient_ensemble));

    // k = 5 against the sum-of-squares form of the sample variance
    Rng rng(4);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Point2> pts(5);
        double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
        for (auto& p : pts) {
            p = {u(rng), u(rng)};
            sx += p.x;
            sy += p.y;
            sxx += p.x * p.x;
            syy += p.y * p.y;
        }
        const Point2 mean{sx / 5.0, sy / 5.0};
        const Variance2 v = rf_ensemble_uncertainty(pts, mean);
        CHECK(v.x == Catch::Approx((sxx - 5.0 * mean.x * mean.x) / 4.0).epsilon(1e-9));
        CHECK(v.y == Catch::Approx((syy - 5.0 * mean.y * mean.y) / 4.0).epsilon(1e-9));
    }
}

TEST_CASE("CNK")
{
    CHECK(cnk_uncertainty({1.5, 2.5}, {1.5, 2.5}) == Variance2{0.0, 0.0});
    CHECK(cnk_uncertainty({3.0, 0.0}, {0.0, 4.0}) == Variance2{9.0, 16.0});
    CHECK(cnk_uncertainty({0.0, 4.0}, {3.0, 0.0}) == Variance2{9.0, 16.0});
    CHECK(combined_metric(cnk_uncertainty({3.0, 0.0}, {0.0, 4.0})) == 5.0);
    CHECK(throws_code([] { cnk_uncertainty({std::nan(""), 0.0}, {0.0, 0.0}); }, ErrorCode::invalid_input));
}

TEST_CASE("sampling uncertainty")
{
    const Deployment d = build_indoor_open_office();
    const Point2 ue{42.0, 18.0};
    const auto means = true_distances(d, ue);
    std::vector<double> vars(means.size(), 1.0);
    SamplingOptions opt;
    opt.num_samples = 200;
    opt.seed = 77;

    SECTION("zero variance collapses to the center")
    {
        const std::vector<double> zero(means.size(), 0.0);
        const auto r = sample_position_uncertainty(means, zero, d, opt);
        CHECK(r.estimate.variance.x <= 1e-20);
        CHECK(r.estimate.variance.y <= 1e-20);
        CHECK(r.estimate.combined <= 1e-10);
        CHECK(distance(r.estimate.position, ue) <= 1e-6);
    }
    SECTION("reproducible and thread independent")
    {
        const auto a = sample_position_uncertainty(means, vars, d, opt);
        const auto b = sample_position_uncertainty(means, vars, d, opt);
        opt.threads = 4;
        const auto c = sample_position_uncertainty(means, vars, d, opt);
        CHECK(a.estimate.variance == b.estimate.variance);
        CHECK(a.estimate.variance == c.estimate.variance);
        CHECK(a.samples == c.samples);
        CHECK(a.estimate.variance.x >= 0.0);
        CHECK(a.estimate.variance.y >= 0.0);
        CHECK(a.estimate.combined == std::sqrt(a.estimate.variance.x + a.estimate.variance.y));
    }
    SECTION("centering on the mean-distance solution never lowers the spread")
    {
        Rng rng(8);
        std::uniform_real_distribution<double> u(0.2, 9.0);
        for (int trial = 0; trial < 10; ++trial) {
            for (auto& v : vars)
                v = u(rng);
            opt.seed = 1000 + static_cast<std::uint64_t>(trial);
            const auto r = sample_position_uncertainty(means, vars, d, opt);
            double mx = 0.0, my = 0.0;
            for (const auto& s : r.samples) {
                mx += s.x;
                my += s.y;
            }
            const double n = static_cast<double>(r.samples.size());
            mx /= n;
            my /= n;
            double vx = 0.0, vy = 0.0;
            for (const auto& s : r.samples) {
                vx += (s.x - mx) * (s.x - mx);
                vy += (s.y - my) * (s.y - my);
            }
            CHECK(r.estimate.variance.x >= vx / (n - 1.0) * (1.0 - 1e-12));
            CHECK(r.estimate.variance.y >= vy / (n - 1.0) * (1.0 - 1e-12));
        }
    }
    SECTION("shrinking the distance spread shrinks v")
    {
        Variance2 prev{1e300, 1e300};
        for (double lambda : {1.0, 0.5, 0.1}) {
            std::vector<double> scaled(vars.size());
            for (std::size_t i = 0; i < vars.size(); ++i)
                scaled[i] = lambda * lambda * 4.0;
            const auto r = sample_position_uncertainty(means, scaled, d, opt);
            CHECK(r.estimate.variance.x <= prev.x);
            CHECK(r.estimate.variance.y <= prev.y);
            prev = r.estimate.variance;
        }
    }
    SECTION("input checks")
    {
        opt.num_samples = 1;
        CHECK(throws_code([&] { sample_position_uncertainty(means, vars, d, opt); }, ErrorCode::invalid_input));
        opt.num_samples = 10;
        vars[3] = -1.0;
        CHECK(throws_code([&] { sample_position_uncertainty(means, vars, d, opt); }, ErrorCode::invalid_input));
    }
    SECTION("no usable draw")
    {
        // distances measured from a point far outside the building
        const auto wild = true_distances(d, {900.0, -700.0});
        const std::vector<double> tight(means.size(), 1e-6);
        CHECK(throws_code([&] { sample_position_uncertainty(wild, tight, d, opt); },
                          ErrorCode::uncertainty_unavailable));
    }
}

TEST_CASE("GP sampling end to end")
{
    const Deployment d = build_indoor_open_office();
    ScenarioConfig c;
    c.n_ues = 200;
    const auto set = generate_dataset(d, c, 10);
    std::vector<GpModel> models;
    for (std::size_t b = 0; b < d.num_bs(); ++b) {
        std::vector<double> t, dist;
        for (const auto& r : set.records) {
            t.push_back(r.toa[b]);
            dist.push_back(distance(d.lift(r.true_position), d.bs_positions[b]));
        }
        GpTrainOptions o;
        o.subsample_cap = 100;
        models.push_back(train_gp(t, dist, o));
    }
    SamplingOptions opt;
    opt.num_samples = 50;
    opt.seed = 3;
    const auto& rec = set.records[7];
    const auto a = gp_sampling_uncertainty(models, d, rec.toa, opt);
    const auto b = gp_sampling_uncertainty(models, d, rec.toa, opt);
    CHECK(a.estimate.variance == b.estimate.variance);
    CHECK(a.estimate.method == Method::gp);
    CHECK(a.samples.size() + a.skipped == 50);
    CHECK(std::isfinite(a.estimate.combined));

    const std::vector<double> short_toas(3, 1e-8);
    CHECK(throws_code([&] { gp_sampling_uncertainty(models, d, short_toas, opt); }, ErrorCode::invalid_input));
}
