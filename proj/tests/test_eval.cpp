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

TEST_CASE("position error")
{
    CHECK(position_error({1.0, 1.0}, {1.0, 1.0}) == 0.0);
    CHECK(position_error({0.0, 0.0}, {3.0, 4.0}) == 5.0);
    CHECK(position_error({10.0, -7.0}, {13.0, -3.0}) == 5.0);
    CHECK(throws_code([] { position_error({std::nan(""), 0.0}, {0.0, 0.0}); }, ErrorCode::invalid_input));
}

TEST_CASE("empirical CDF")
{
    const std::vector<double> one{5.0};
    const auto c1 = empirical_cdf(one);
    REQUIRE(c1.size() == 1);
    CHECK(c1[0] == CdfPoint{5.0, 1.0});

    const std::vector<double> four{3.0, 1.0, 4.0, 2.0};
    const auto c4 = empirical_cdf(four);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(c4[i].value == static_cast<double>(i + 1));
        CHECK(c4[i].probability == 0.25 * static_cast<double>(i + 1));
    }
    CHECK(throws_code([] { empirical_cdf(std::vector<double>{}); }, ErrorCode::invalid_input));

    // the CDF's 0.5 crossing is the lower sample median for odd n
    Rng rng(3);
    std::exponential_distribution<double> e(0.5);
    std::vector<double> v(101);
    for (auto& x : v)
        x = e(rng);
    const auto c = empirical_cdf(v);
    std::vector<double> s = v;
    std::nth_element(s.begin(), s.begin() + 50, s.end());
    CHECK(cdf_inverse(c, 0.5) == s[50]);
    CHECK(quantile(v, 0.5) == s[50]);
    for (std::size_t i = 1; i < c.size(); ++i) {
        CHECK(c[i].value >= c[i - 1].value);
        CHECK(c[i].probability > c[i - 1].probability);
    }
    CHECK(c.back().probability == 1.0);
}

TEST_CASE("quantile interpolation")
{
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile(v, 0.5) == 2.5);
    CHECK(quantile(v, 0.9) == Catch::Approx(3.7));
}

TEST_CASE("Pearson correlation")
{
    const std::vector<double> a{1.0, 2.0, 4.0, 7.0, 11.0};
    std::vector<double> lin, neg;
    for (double x : a) {
        lin.push_back(2.0 * x + 3.0);
        neg.push_back(-x);
    }
    CHECK(pearson_correlation(a, lin) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(pearson_correlation(a, neg) == Catch::Approx(-1.0).epsilon(1e-15));

    // covariance-formula oracle on random 5-element lists
    Rng rng(9);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> x(5), y(5);
        for (int i = 0; i < 5; ++i) {
            x[i] = n01(rng);
            y[i] = 0.3 * x[i] + n01(rng);
        }
        double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
        for (int i = 0; i < 5; ++i) {
            sx += x[i];
            sy += y[i];
            sxy += x[i] * y[i];
            sxx += x[i] * x[i];
            syy += y[i] * y[i];
        }
        const double cov = sxy / 5 - (sx / 5) * (sy / 5);
        const double vx = sxx / 5 - (sx / 5) * (sx / 5);
        const double vy = syy / 5 - (sy / 5) * (sy / 5);
        CHECK(std::abs(pearson_correlation(x, y) - cov / std::sqrt(vx * vy)) <= 1e-12);

        // positive affine maps leave it unchanged
        std::vector<double> xs = x;
        for (auto& v : xs)
            v = 4.0 * v - 17.0;
        CHECK(pearson_correlation(xs, y) == Catch::Approx(pearson_correlation(x, y)).epsilon(1e-12));
    }

    const std::vector<double> flat(4, 2.0), other{1.0, 2.0, 3.0, 4.0};
    CHECK(throws_code([&] { pearson_correlation(flat, other); }, ErrorCode::undefined_correlation));
    CHECK(throws_code([&] { pearson_correlation(other, std::vector<double>{1.0}); }, ErrorCode::invalid_input));
}

TEST_CASE("report assembly")
{
    const std::vector<Point2> truths{{0, 0}, {10, 0}, {0, 10}, {5, 5}};
    const std::vector<std::size_t> idx{3, 8, 11, 20};

    SECTION("perfect estimates: zero errors, undefined correlation")
    {
        std::vector<PositionEstimate> est;
        for (const auto& t : truths)
            est.push_back(make_estimate(t, {1.0, 1.0}, Method::gp));
        const auto rep = build_report({{Method::gp, est}}, truths, idx);
        const auto& r = rep.per_method.at(Method::gp);
        for (double e : r.errors)
            CHECK(e == 0.0);
        CHECK(!r.correlation.has_value());
        CHECK(r.cdf.front().value == 0.0);
        CHECK(r.cdf.back().value == 0.0);
    }
    SECTION("uncertainty proportional to error")
    {
        std::vector<PositionEstimate> est;
        for (std::size_t i = 0; i < truths.size(); ++i) {
            const double off = static_cast<double>(i + 1);
            // error = off, c = 2 off
            est.push_back(make_estimate({truths[i].x + off, truths[i].y}, {4.0 * off * off, 0.0}, Method::rf));
        }
        const auto rep = build_report({{Method::rf, est}}, truths, idx);
        const auto& r = rep.per_method.at(Method::rf);
        REQUIRE(r.correlation.has_value());
        CHECK(*r.correlation == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(r.errors.size() == truths.size());
        CHECK(r.ue_index == idx);
        CHECK(r.median_error() == 2.5);
    }
    SECTION("count mismatch and empty input")
    {
        std::vector<PositionEstimate> est(2);
        CHECK(throws_code([&] { build_report({{Method::gp, est}}, truths, idx); }, ErrorCode::invalid_input));
        CHECK(throws_code([&] { score_method({}, {}, {}); }, ErrorCode::empty_split));
    }
}
