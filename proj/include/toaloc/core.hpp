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

#ifndef TOALOC_CORE_HPP
#define TOALOC_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace toaloc
{

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

struct Point2
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

struct Point3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Point3&, const Point3&) = default;
};

inline double distance(const Point2& a, const Point2& b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

inline double distance(const Point3& a, const Point3& b)
{
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline bool is_finite(const Point2& p)
{
    return std::isfinite(p.x) && std::isfinite(p.y);
}

/// Per-coordinate variance of a 2D estimate (m^2).
struct Variance2
{
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Variance2&, const Variance2&) = default;
};

enum class ErrorCode
{
    invalid_input,
    insufficient_geometry,
    degenerate_geometry,
    non_psd,
    training_failed,
    uncertainty_unavailable,
    insufficient_ensemble,
    undefined_correlation,
    empty_split,
    schema,
    io,
    config,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::insufficient_geometry: return "insufficient-geometry";
    case ErrorCode::degenerate_geometry: return "degenerate-geometry";
    case ErrorCode::non_psd: return "non-psd";
    case ErrorCode::training_failed: return "training-failed";
    case ErrorCode::uncertainty_unavailable: return "uncertainty-unavailable";
    case ErrorCode::insufficient_ensemble: return "insufficient-ensemble";
    case ErrorCode::undefined_correlation: return "undefined-correlation";
    case ErrorCode::empty_split: return "empty-split";
    case ErrorCode::schema: return "schema";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
    }
    return "unknown";
}

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Seeding. Every random stream in the toolkit is derived from one root seed
// through these mixers, so results never depend on evaluation order.

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for a named stage, e.g. derive_seed(root, "drop").
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label)
{
    std::uint64_t h = 0xcbf29ce484222325ULL; // FNV-1a
    for (unsigned char ch : label) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(root ^ splitmix64(h));
}

/// Seed for the index-th independent stream below a stage seed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index)
{
    return splitmix64(splitmix64(seed) + 0x632be59bd9b4e019ULL * (index + 1));
}

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t seed, std::uint64_t index)
{
    return Rng(stream_seed(seed, index));
}

// ---------------------------------------------------------------------------

/// Number of worker threads used by parallel_for when the caller passes 0.
inline unsigned default_concurrency()
{
    const unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : n;
}

/// Runs body(i) for i in [0, n). Work is split into contiguous chunks; body
/// must only write to slots owned by i. Exceptions from workers are rethrown
/// (the one from the lowest chunk wins).
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                         unsigned threads = 0)
{
    if (threads == 0)
        threads = default_concurrency();
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }

    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> workers;
        workers.reserve(threads);
        const std::size_t chunk = (n + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            workers.emplace_back([&, t] {
                const std::size_t begin = t * chunk;
                const std::size_t end = std::min(n, begin + chunk);
                try {
                    for (std::size_t i = begin; i < end; ++i)
                        body(i);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
        }
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

} // namespace toaloc

#endif // TOALOC_CORE_HPP
