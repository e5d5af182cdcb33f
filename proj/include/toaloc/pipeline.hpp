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

#ifndef TOALOC_PIPELINE_HPP
#define TOALOC_PIPELINE_HPP

#include "toaloc/config.hpp"
#include "toaloc/core.hpp"
#include "toaloc/eval.hpp"
#include "toaloc/gp.hpp"
#include "toaloc/io.hpp"
#include "toaloc/radio_sim.hpp"
#include "toaloc/rf.hpp"
#include "toaloc/scenario.hpp"
#include "toaloc/uncertainty.hpp"

#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

// Stage-file pipeline: simulate -> train -> evaluate -> report. Each stage
// reads only the files of earlier stages plus the configuration. All stage
// seeds are derived from scenario.rng_seed by labeled hashing.

namespace toaloc
{

struct SimulateSummary
{
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
};

inline SimulateSummary cmd_simulate(const RunConfig& config)
{
    validate(config);
    const Deployment deployment = build_indoor_open_office();
    const std::uint64_t root = config.scenario.rng_seed;
    const MeasurementSet all = generate_dataset(deployment, config.scenario, root, config.threads);
    const auto [train, test] = split_dataset(all, config.split_fraction, derive_seed(root, "split"));
    io::write_text_file(config.paths.train_csv(), io::dataset_to_csv(train));
    io::write_text_file(config.paths.test_csv(), io::dataset_to_csv(test));
    return {train.size(), test.size()};
}

inline MeasurementSet load_dataset(const std::filesystem::path& path, SplitTag tag)
{
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::io, "dataset not found at '" + path.string() + "'; run `simulate` first");
    return io::dataset_from_csv(io::read_text_file(path), build_indoor_open_office(), tag, path.string());
}

/// One GP per BS, trained on (measured ToA, true 3D distance) pairs.
inline std::vector<GpModel> train_gp_models(const MeasurementSet& train, std::size_t subsample_cap,
                                            std::uint64_t seed, unsigned threads = 0)
{
    if (train.empty())
        throw Error(ErrorCode::empty_split, "training split is empty");
    const auto& dep = train.deployment;
    std::vector<GpModel> models(dep.num_bs());
    parallel_for(
        dep.num_bs(),
        [&](std::size_t b) {
            std::vector<double> taus, dists;
            for (const auto& r : train.records) {
                taus.push_back(r.toa[b]);
                dists.push_back(distance(dep.lift(r.true_position), dep.bs_positions[b]));
            }
            GpTrainOptions opt;
            opt.subsample_cap = subsample_cap;
            opt.seed = stream_seed(seed, b);
            models[b] = train_gp(taus, dists, opt);
        },
        threads);
    return models;
}

struct TrainSummary
{
    std::size_t gp_models = 0;
    RfParams rf_params;
};

inline TrainSummary cmd_train(const RunConfig& config)
{
    validate(config);
    const MeasurementSet train = load_dataset(config.paths.train_csv(), SplitTag::train);
    if (train.empty())
        throw Error(ErrorCode::empty_split, "training split '" + config.paths.train_csv().string() + "' is empty");
    const std::uint64_t root = config.scenario.rng_seed;

    const auto gps = train_gp_models(train, config.gp_subsample_cap, derive_seed(root, "gp-subsample"),
                                     config.threads);

    const TrainingTable table = make_table(train);
    RfParams params = config.rf;
    params.seed = derive_seed(root, "rf");
    if (config.rf_cross_validate)
        params = cross_validate_rf(table, params, 5, config.threads).best;
    const RandomForestModel forest = train_rf(table, params, config.threads);

    io::write_text_file(config.paths.gp_models(), io::gp_models_to_text(gps));
    io::write_text_file(config.paths.rf_model(), io::rf_model_to_text(forest));
    return {gps.size(), params};
}

/// Estimates for every test UE by all three methods plus the plain KNN
/// positions (for the error CDF comparison).
struct Evaluation
{
    std::vector<Point2> truths;
    std::vector<std::size_t> ue_index;
    std::map<Method, std::vector<PositionEstimate>> estimates;
    std::vector<Point2> knn_positions;
    EvaluationReport report;
    std::vector<CdfPoint> knn_cdf;
};

inline Evaluation evaluate_methods(const MeasurementSet& train, const MeasurementSet& test,
                                   std::span<const GpModel> gps, const RandomForestModel& forest,
                                   const RunConfig& config)
{
    if (test.empty())
        throw Error(ErrorCode::empty_split, "test split is empty");
    if (gps.size() != test.deployment.num_bs())
        throw Error(ErrorCode::invalid_input, "expected one GP model per BS");
    const KnnModel knn = make_knn(make_table(train), config.knn_neighbors);
    const std::uint64_t sampling_seed = derive_seed(config.scenario.rng_seed, "gp-sampling");

    const std::size_t n = test.size();
    Evaluation ev;
    std::vector<PositionEstimate> gp_est(n), rf_est(n), cnk_est(n);
    ev.knn_positions.resize(n);
    parallel_for(
        n,
        [&](std::size_t i) {
            const auto& rec = test.records[i];
            try {
                SamplingOptions opt;
                opt.num_samples = config.num_samples;
                opt.seed = stream_seed(sampling_seed, rec.ue_index);
                opt.solver = config.solver;
                opt.threads = 1;
                gp_est[i] = gp_sampling_uncertainty(gps, test.deployment, rec.toa, opt).estimate;

                const RfPrediction rf = predict_rf(forest, rec.toa);
                rf_est[i] = make_estimate(rf.position, rf_ensemble_uncertainty(rf.per_tree, rf.position), Method::rf);
                ev.knn_positions[i] = predict_knn(knn, rec.toa);
                cnk_est[i] = make_estimate(rf.position, cnk_uncertainty(rf.position, ev.knn_positions[i]),
                                           Method::rf_cnk);
            } catch (const Error& e) {
                throw Error(e.code(), "UE " + std::to_string(rec.ue_index) + ": " + e.what());
            }
        },
        config.threads);

    for (const auto& rec : test.records) {
        ev.truths.push_back(rec.true_position);
        ev.ue_index.push_back(rec.ue_index);
    }
    ev.estimates[Method::gp] = std::move(gp_est);
    ev.estimates[Method::rf] = std::move(rf_est);
    ev.estimates[Method::rf_cnk] = std::move(cnk_est);
    ev.report = build_report(ev.estimates, ev.truths, ev.ue_index);

    std::vector<double> knn_err;
    for (std::size_t i = 0; i < n; ++i)
        knn_err.push_back(position_error(ev.knn_positions[i], ev.truths[i]));
    ev.knn_cdf = empirical_cdf(knn_err);
    return ev;
}

inline Evaluation cmd_evaluate(const RunConfig& config)
{
    validate(config);
    const MeasurementSet train = load_dataset(config.paths.train_csv(), SplitTag::train);
    const MeasurementSet test = load_dataset(config.paths.test_csv(), SplitTag::test);
    if (test.empty())
        throw Error(ErrorCode::empty_split, "test split '" + config.paths.test_csv().string() + "' is empty");
    for (const auto& p : {config.paths.gp_models(), config.paths.rf_model()})
        if (!std::filesystem::exists(p))
            throw Error(ErrorCode::io, "model file not found at '" + p.string() + "'; run `train` first");
    const auto gps = io::gp_models_from_text(io::read_text_file(config.paths.gp_models()),
                                             config.paths.gp_models().string());
    const auto forest = io::rf_model_from_text(io::read_text_file(config.paths.rf_model()),
                                               config.paths.rf_model().string());
    if (gps.size() != test.deployment.num_bs())
        throw Error(ErrorCode::schema, "expected " + std::to_string(test.deployment.num_bs()) + " GP models, found " +
                                           std::to_string(gps.size()));

    Evaluation ev = evaluate_methods(train, test, gps, forest, config);
    const auto& dir = config.paths.report_dir;
    io::write_text_file(dir / "report.csv", io::report_csv(ev.report));
    for (const auto& [method, r] : ev.report.per_method)
        io::write_text_file(dir / ("cdf_" + to_string(method) + ".csv"), io::cdf_csv(r.cdf));
    io::write_text_file(dir / "cdf_knn.csv", io::cdf_csv(ev.knn_cdf));
    io::write_text_file(config.paths.summary_csv(), io::summary_csv(ev.report));
    return ev;
}

/// Pretty-prints summary.csv as an aligned table.
inline std::string cmd_report(const RunConfig& config)
{
    const auto path = config.paths.summary_csv();
    if (!std::filesystem::exists(path))
        throw Error(ErrorCode::io, "summary not found at '" + path.string() + "'; run `evaluate` first");
    const auto lines = io::lines_of(io::read_text_file(path));
    if (lines.empty() || lines[0] != "method,correlation,median_error_m,p90_error_m")
        throw Error(ErrorCode::schema, path.string() + ": unexpected header");
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-8s %12s %16s %14s\n", "method", "correlation", "median_error_m", "p90_error_m");
    out << buf;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty())
            continue;
        const auto cells = io::split(lines[i], ',');
        if (cells.size() != 4)
            throw Error(ErrorCode::schema, path.string() + " line " + std::to_string(i + 1) + ": expected 4 fields");
        const double corr = io::parse_double(cells[1], path.string());
        std::snprintf(buf, sizeof buf, "%-8s %12.4f %16.3f %14.3f\n", std::string(cells[0]).c_str(), corr,
                      io::parse_double(cells[2], path.string()), io::parse_double(cells[3], path.string()));
        out << buf;
    }
    return out.str();
}

} // namespace toaloc

#endif // TOALOC_PIPELINE_HPP
