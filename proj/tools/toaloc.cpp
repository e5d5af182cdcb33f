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

// Command-line front end: simulate, train, evaluate, report.

#include "toaloc/toaloc.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>
#include <optional>

namespace
{

struct Overrides
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> num_samples;
    std::optional<int> max_iter;
    std::optional<double> pos_tol;
    std::optional<unsigned> threads;
    bool rf_cv = false;
};

toaloc::RunConfig resolve(const Overrides& o)
{
    toaloc::RunConfig c = o.config_path.empty() ? toaloc::RunConfig{} : toaloc::load_config(o.config_path);
    if (o.seed)
        c.scenario.rng_seed = *o.seed;
    if (o.num_samples)
        c.num_samples = *o.num_samples;
    if (o.max_iter)
        c.solver.max_iterations = *o.max_iter;
    if (o.pos_tol)
        c.solver.position_tolerance = *o.pos_tol;
    if (o.threads)
        c.threads = *o.threads;
    if (o.rf_cv)
        c.rf_cross_validate = true;
    toaloc::validate(c);
    return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ToA positioning with GP / random-forest uncertainty assessment"};
    app.require_subcommand(1);

    Overrides o;
    app.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "Root seed (overrides scenario.rng_seed)");
    app.add_option("--num-samples", o.num_samples, "GP sampling draws per UE")->check(CLI::Range(2, 100000000));
    app.add_option("--max-iter", o.max_iter, "Solver iteration cap")->check(CLI::PositiveNumber);
    app.add_option("--pos-tol", o.pos_tol, "Solver step tolerance in meters")->check(CLI::PositiveNumber);
    app.add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    app.add_flag("--rf-cv", o.rf_cv, "Select RF trees/depth by 5-fold cross-validation");

    auto* simulate = app.add_subcommand("simulate", "Generate train/test ToA datasets");
    auto* train = app.add_subcommand("train", "Train per-BS GPs and the random forest");
    auto* evaluate = app.add_subcommand("evaluate", "Estimate test positions and uncertainties, write report CSVs");
    auto* report = app.add_subcommand("report", "Print summary.csv");

    CLI11_PARSE(app, argc, argv);

    try {
        const toaloc::RunConfig config = resolve(o);
        const auto t0 = std::chrono::steady_clock::now();
        if (simulate->parsed()) {
            const auto s = toaloc::cmd_simulate(config);
            std::cout << "train rows: " << s.train_rows << " -> " << config.paths.train_csv().string() << "\n"
                      << "test rows:  " << s.test_rows << " -> " << config.paths.test_csv().string() << "\n";
        } else if (train->parsed()) {
            const auto s = toaloc::cmd_train(config);
            std::cout << "GP models: " << s.gp_models << " -> " << config.paths.gp_models().string() << "\n"
                      << "RF: " << s.rf_params.n_trees << " trees, depth " << s.rf_params.max_depth << " -> "
                      << config.paths.rf_model().string() << "\n";
        } else if (evaluate->parsed()) {
            const auto ev = toaloc::cmd_evaluate(config);
            std::cout << "evaluated " << ev.truths.size() << " test UEs -> " << config.paths.report_dir.string()
                      << "\n";
        } else if (report->parsed()) {
            std::cout << toaloc::cmd_report(config);
            return 0;
        }
        std::cerr << "done in " << seconds_since(t0) << " s\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
