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

#ifndef TOALOC_CONFIG_HPP
#define TOALOC_CONFIG_HPP

#include "toaloc/core.hpp"
#include "toaloc/io.hpp"
#include "toaloc/otdoa.hpp"
#include "toaloc/rf.hpp"
#include "toaloc/scenario.hpp"

#include <json.hpp>

#include <filesystem>
#include <set>
#include <string>

namespace toaloc
{

struct RunPaths
{
    std::filesystem::path dataset_dir = "out/data";
    std::filesystem::path models_dir = "out/models";
    std::filesystem::path report_dir = "out/report";

    std::filesystem::path train_csv() const { return dataset_dir / "train.csv"; }
    std::filesystem::path test_csv() const { return dataset_dir / "test.csv"; }
    std::filesystem::path gp_models() const { return models_dir / "gp_models.txt"; }
    std::filesystem::path rf_model() const { return models_dir / "rf_model.txt"; }
    std::filesystem::path summary_csv() const { return report_dir / "summary.csv"; }
};

struct RunConfig
{
    ScenarioConfig scenario;
    double split_fraction = 0.7;
    SolverSettings solver;
    std::size_t gp_subsample_cap = 1000;
    RfParams rf;                   // seed is derived from the root seed
    bool rf_cross_validate = false;
    std::size_t knn_neighbors = 3;
    std::size_t num_samples = 200;
    unsigned threads = 0; // 0: hardware concurrency
    RunPaths paths;
};

inline void validate(const RunConfig& c)
{
    validate(c.scenario);
    validate(c.solver);
    if (!(c.split_fraction > 0.0 && c.split_fraction < 1.0))
        throw Error(ErrorCode::config, "split_fraction must lie in (0, 1)");
    if (c.num_samples < 2)
        throw Error(ErrorCode::config, "uncertainty.num_samples must be >= 2");
    if (c.gp_subsample_cap < 2)
        throw Error(ErrorCode::config, "gp.subsample_cap must be >= 2");
    if (c.rf.n_trees < 1)
        throw Error(ErrorCode::config, "rf.n_trees must be >= 1");
    if (c.knn_neighbors < 1)
        throw Error(ErrorCode::config, "rf.knn_neighbors must be >= 1");
}

namespace detail
{

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object())
        throw Error(ErrorCode::config, where + " must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw Error(ErrorCode::config, "unknown key '" + key + "' in " + where);
}

template <class T>
void read_opt(const nlohmann::json& obj, const char* key, T& out)
{
    if (obj.contains(key)) {
        try {
            out = obj.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::config, std::string("bad value for '") + key + "': " + e.what());
        }
    }
}

} // namespace detail

/// Parses a JSON run configuration. Missing keys keep their defaults;
/// unknown keys are rejected.
inline RunConfig parse_config(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::config, std::string("malformed configuration: ") + e.what());
    }
    using detail::read_opt;
    RunConfig c;
    detail::reject_unknown(j, {"scenario", "split_fraction", "solver", "gp", "rf", "uncertainty", "threads", "paths"},
                           "configuration");
    if (j.contains("scenario")) {
        const auto& s = j["scenario"];
        detail::reject_unknown(s, {"n_ues", "rng_seed", "noise_std_s", "nlos_excess_mean_s", "los_model"}, "scenario");
        read_opt(s, "n_ues", c.scenario.n_ues);
        read_opt(s, "rng_seed", c.scenario.rng_seed);
        read_opt(s, "noise_std_s", c.scenario.noise_std);
        read_opt(s, "nlos_excess_mean_s", c.scenario.nlos_excess_mean);
        if (s.contains("los_model")) {
            std::string m;
            read_opt(s, "los_model", m);
            c.scenario.los_model = parse_los_model(m);
        }
    }
    read_opt(j, "split_fraction", c.split_fraction);
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        detail::reject_unknown(s, {"max_iterations", "position_tolerance_m", "damping_init", "search_margin_m"},
                               "solver");
        read_opt(s, "max_iterations", c.solver.max_iterations);
        read_opt(s, "position_tolerance_m", c.solver.position_tolerance);
        read_opt(s, "damping_init", c.solver.damping_init);
        read_opt(s, "search_margin_m", c.solver.search_margin);
    }
    if (j.contains("gp")) {
        detail::reject_unknown(j["gp"], {"subsample_cap"}, "gp");
        read_opt(j["gp"], "subsample_cap", c.gp_subsample_cap);
    }
    if (j.contains("rf")) {
        const auto& r = j["rf"];
        detail::reject_unknown(r,
                               {"n_trees", "max_depth", "min_leaf_size", "features_per_split", "cross_validate",
                                "knn_neighbors"},
                               "rf");
        read_opt(r, "n_trees", c.rf.n_trees);
        read_opt(r, "max_depth", c.rf.max_depth);
        read_opt(r, "min_leaf_size", c.rf.min_leaf_size);
        read_opt(r, "features_per_split", c.rf.features_per_split);
        read_opt(r, "cross_validate", c.rf_cross_validate);
        read_opt(r, "knn_neighbors", c.knn_neighbors);
    }
    if (j.contains("uncertainty")) {
        detail::reject_unknown(j["uncertainty"], {"num_samples"}, "uncertainty");
        read_opt(j["uncertainty"], "num_samples", c.num_samples);
    }
    read_opt(j, "threads", c.threads);
    if (j.contains("paths")) {
        const auto& p = j["paths"];
        detail::reject_unknown(p, {"dataset_dir", "models_dir", "report_dir"}, "paths");
        std::string s;
        if (p.contains("dataset_dir")) {
            read_opt(p, "dataset_dir", s);
            c.paths.dataset_dir = s;
        }
        if (p.contains("models_dir")) {
            read_opt(p, "models_dir", s);
            c.paths.models_dir = s;
        }
        if (p.contains("report_dir")) {
            read_opt(p, "report_dir", s);
            c.paths.report_dir = s;
        }
    }
    validate(c);
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path)
{
    return parse_config(io::read_text_file(path));
}

} // namespace toaloc

#endif // TOALOC_CONFIG_HPP
