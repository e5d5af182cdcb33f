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

#ifndef TOALOC_EVAL_HPP
#define TOALOC_EVAL_HPP

#include "toaloc/core.hpp"
#include "toaloc/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace toaloc
{

/// Per-UE positioning error: Euclidean distance in the plane.
inline double position_error(const Point2& estimate, const Point2& truth)
{
    if (!is_finite(estimate) || !is_finite(truth))
        throw Error(ErrorCode::invalid_input, "non-finite position");
    return distance(estimate, truth);
}

struct CdfPoint
{
    double value = 0.0;
    double probability = 0.0;

    friend bool operator==(const CdfPoint&, const CdfPoint&) = default;
};

/// Steps of the empirical CDF: i-th smallest value gets probability i/n.
inline std::vector<CdfPoint> empirical_cdf(std::span<const double> values)
{
    if (values.empty())
        throw Error(ErrorCode::invalid_input, "empirical CDF of an empty list");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<CdfPoint> cdf(sorted.size());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        cdf[i] = {sorted[i], static_cast<double>(i + 1) / n};
    return cdf;
}

/// Smallest value whose CDF probability reaches p.
inline double cdf_inverse(std::span<const CdfPoint> cdf, double p)
{
    for (const auto& c : cdf)
        if (c.probability >= p)
            return c.value;
    return cdf.back().value;
}

/// Sample quantile with linear interpolation between order statistics.
inline double quantile(std::span<const double> values, double q)
{
    if (values.empty())
        throw Error(ErrorCode::invalid_input, "quantile of an empty list");
    std::vector<double> s(values.begin(), values.end());
    std::sort(s.begin(), s.end());
    const double pos = q * static_cast<double>(s.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

inline double pearson_correlation(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.size() < 2)
        throw Error(ErrorCode::invalid_input, "correlation needs two equal-length lists of at least 2 values");
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        throw Error(ErrorCode::undefined_correlation, "correlation of a constant list is undefined");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

struct MethodReport
{
    std::vector<std::size_t> ue_index;
    std::vector<double> errors;        // m
    std::vector<double> uncertainties; // m, combined metric
    std::optional<double> correlation; // empty when undefined
    std::vector<CdfPoint> cdf;

    double median_error() const { return quantile(errors, 0.5); }
    double p90_error() const { return quantile(errors, 0.9); }
};

struct EvaluationReport
{
    std::map<Method, MethodReport> per_method;
};

/// Scores one method: errors against truth, combined uncertainty, their
/// correlation and the error CDF. Pairs (errors[i], uncertainties[i]) are
/// the error-vs-uncertainty scatter.
inline MethodReport score_method(std::span<const PositionEstimate> estimates, std::span<const Point2> truths,
                                 std::span<const std::size_t> ue_index)
{
    if (estimates.size() != truths.size() || ue_index.size() != truths.size())
        throw Error(ErrorCode::invalid_input, "need exactly one estimate per test UE");
    if (estimates.empty())
        throw Error(ErrorCode::empty_split, "no estimates to evaluate");
    MethodReport r;
    r.ue_index.assign(ue_index.begin(), ue_index.end());
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        r.errors.push_back(position_error(estimates[i].position, truths[i]));
        r.uncertainties.push_back(combined_metric(estimates[i].variance));
    }
    try {
        r.correlation = pearson_correlation(r.uncertainties, r.errors);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::undefined_correlation && e.code() != ErrorCode::invalid_input)
            throw;
    }
    r.cdf = empirical_cdf(r.errors);
    return r;
}

inline EvaluationReport build_report(const std::map<Method, std::vector<PositionEstimate>>& estimates,
                                     std::span<const Point2> truths, std::span<const std::size_t> ue_index)
{
    EvaluationReport rep;
    for (const auto& [method, est] : estimates)
        rep.per_method.emplace(method, score_method(est, truths, ue_index));
    return rep;
}

} // namespace toaloc

#endif // TOALOC_EVAL_HPP
