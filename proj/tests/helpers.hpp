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

#ifndef TOALOC_TESTS_HELPERS_HPP
#define TOALOC_TESTS_HELPERS_HPP

#include "toaloc/toaloc.hpp"

#include <optional>
#include <string>

namespace testing
{

// Runs f and returns the toolkit error it raised, if any.
template <class F>
std::optional<toaloc::Error> error_of(F&& f)
{
    try {
        f();
    } catch (const toaloc::Error& e) {
        return e;
    }
    return std::nullopt;
}

template <class F>
bool throws_code(F&& f, toaloc::ErrorCode code)
{
    const auto e = error_of(f);
    return e && e->code() == code;
}

inline bool contains(const std::string& haystack, const std::string& needle)
{
    return haystack.find(needle) != std::string::npos;
}

// Same BS and UE height, so 3D and planar distances coincide.
inline toaloc::Deployment flat_deployment(std::vector<toaloc::Point2> bs, double length, double width)
{
    toaloc::Deployment d;
    d.area_length = length;
    d.area_width = width;
    d.bs_height = 0.0;
    d.ue_height = 0.0;
    for (const auto& p : bs)
        d.bs_positions.push_back({p.x, p.y, 0.0});
    return d;
}

inline std::vector<double> toas_for(const toaloc::Deployment& d, const toaloc::Point2& ue)
{
    std::vector<double> t;
    for (const auto& bs : d.bs_positions)
        t.push_back(toaloc::geometric_toa(ue, bs, d.ue_height));
    return t;
}

} // namespace testing

#endif // TOALOC_TESTS_HELPERS_HPP
