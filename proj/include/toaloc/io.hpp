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

#ifndef TOALOC_IO_HPP
#define TOALOC_IO_HPP

#include "toaloc/core.hpp"
#include "toaloc/eval.hpp"
#include "toaloc/gp.hpp"
#include "toaloc/radio_sim.hpp"
#include "toaloc/rf.hpp"

#include <charconv>
#include <limits>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace toaloc::io
{

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::string_view what)
{
    double v = 0.0;
    if (s == "nan")
        return std::numeric_limits<double>::quiet_NaN();
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::schema, "cannot parse '" + std::string(s) + "' as a number in " + std::string(what));
    return v;
}

inline std::uint64_t parse_uint(std::string_view s, std::string_view what)
{
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::schema, "cannot parse '" + std::string(s) + "' as an integer in " + std::string(what));
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

inline std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes the whole file, creating parent directories.
inline void write_text_file(const std::filesystem::path& path, const std::string& content)
{
    std::error_code ec;
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::io, "cannot open '" + path.string() + "' for writing");
    out << content;
    out.flush();
    if (!out)
        throw Error(ErrorCode::io, "failed writing '" + path.string() + "'");
}

inline std::vector<std::string> lines_of(const std::string& text)
{
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        lines.push_back(std::move(line));
    }
    return lines;
}

// ---------------------------------------------------------------------------
// Dataset CSV: ue_index,true_x,true_y,los_0..los_{N-1},toa_0..toa_{N-1}

inline std::string dataset_header(std::size_t n_bs)
{
    std::string h = "ue_index,true_x,true_y";
    for (std::size_t i = 0; i < n_bs; ++i)
        h += ",los_" + std::to_string(i);
    for (std::size_t i = 0; i < n_bs; ++i)
        h += ",toa_" + std::to_string(i);
    return h;
}

inline std::string dataset_to_csv(const MeasurementSet& set)
{
    const std::size_t n_bs = set.deployment.num_bs();
    std::string out = dataset_header(n_bs) + "\n";
    for (const auto& r : set.records) {
        out += std::to_string(r.ue_index) + "," + format_double(r.true_position.x) + "," +
               format_double(r.true_position.y);
        for (bool l : r.los)
            out += l ? ",1" : ",0";
        for (double t : r.toa)
            out += "," + format_double(t);
        out += "\n";
    }
    return out;
}

/// Parses a dataset written by dataset_to_csv. The column count must match
/// the deployment; the first unexpected column name is reported.
inline MeasurementSet dataset_from_csv(const std::string& text, const Deployment& deployment, SplitTag tag,
                                       std::string_view source = "dataset")
{
    const auto lines = lines_of(text);
    if (lines.empty())
        throw Error(ErrorCode::schema, std::string(source) + ": missing header");
    const std::string header = dataset_header(deployment.num_bs());
    const auto expected = split(header, ',');
    const auto got = split(lines[0], ',');
    for (std::size_t i = 0; i < std::max(expected.size(), got.size()); ++i) {
        if (i >= got.size())
            throw Error(ErrorCode::schema,
                        std::string(source) + ": missing column '" + std::string(expected[i]) + "'");
        if (i >= expected.size() || got[i] != expected[i])
            throw Error(ErrorCode::schema, std::string(source) + ": unexpected column '" + std::string(got[i]) +
                                               "' at position " + std::to_string(i));
    }

    MeasurementSet set;
    set.deployment = deployment;
    set.split = tag;
    const std::size_t n_bs = deployment.num_bs();
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        if (lines[ln].empty())
            continue;
        const auto cells = split(lines[ln], ',');
        const std::string where = std::string(source) + " line " + std::to_string(ln + 1);
        if (cells.size() != expected.size())
            throw Error(ErrorCode::schema, where + ": expected " + std::to_string(expected.size()) + " fields");
        ToaRecord r;
        r.ue_index = static_cast<std::size_t>(parse_uint(cells[0], where));
        r.true_position = {parse_double(cells[1], where), parse_double(cells[2], where)};
        for (std::size_t i = 0; i < n_bs; ++i) {
            const auto c = cells[3 + i];
            if (c != "0" && c != "1")
                throw Error(ErrorCode::schema, where + ": los flag must be 0 or 1");
            r.los.push_back(c == "1");
        }
        for (std::size_t i = 0; i < n_bs; ++i) {
            const double t = parse_double(cells[3 + n_bs + i], where);
            if (!(t >= 0.0) || !std::isfinite(t))
                throw Error(ErrorCode::schema, where + ": ToA must be finite and >= 0");
            r.toa.push_back(t);
        }
        set.records.push_back(std::move(r));
    }
    return set;
}

// ---------------------------------------------------------------------------
// gpmodel-v1
//
//   gpmodel-v1
//   models <N>
//   bs <i> points <M>
//   hyperparams <signal_std_m> <length_scale_s> <noise_std_m>
//   <toa_s> <distance_m>        (M lines)
//   ... repeated per BS
//
// The Cholesky factor is not stored; loading refactorizes deterministically.

inline std::string gp_models_to_text(std::span<const GpModel> models)
{
    std::string out = "gpmodel-v1\nmodels " + std::to_string(models.size()) + "\n";
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto& m = models[i];
        out += "bs " + std::to_string(i) + " points " + std::to_string(m.size()) + "\n";
        out += "hyperparams " + format_double(m.hyperparams.signal_std) + " " +
               format_double(m.hyperparams.length_scale) + " " + format_double(m.hyperparams.noise_std) + "\n";
        for (std::size_t j = 0; j < m.size(); ++j)
            out += format_double(m.train_toas[j]) + " " + format_double(m.train_distances[j]) + "\n";
    }
    return out;
}

namespace detail
{

class TokenReader
{
public:
    TokenReader(const std::string& text, std::string source) : source_(std::move(source))
    {
        const auto lines = lines_of(text);
        for (std::size_t i = 0; i < lines.size(); ++i)
            for (auto tok : split(lines[i], ' '))
                if (!tok.empty())
                    tokens_.push_back({std::string(tok), i + 1});
    }

    bool done() const { return pos_ >= tokens_.size(); }

    std::string next()
    {
        if (done())
            throw Error(ErrorCode::schema, source_ + ": unexpected end of file");
        return tokens_[pos_++].text;
    }

    void expect(std::string_view word)
    {
        const auto line = done() ? 0 : tokens_[pos_].line;
        const auto tok = next();
        if (tok != word)
            throw Error(ErrorCode::schema, source_ + " line " + std::to_string(line) + ": expected '" +
                                               std::string(word) + "', found '" + tok + "'");
    }

    double number() { return parse_double(next(), source_); }
    std::uint64_t integer() { return parse_uint(next(), source_); }

    const std::string& source() const { return source_; }

private:
    struct Token
    {
        std::string text;
        std::size_t line;
    };
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::string source_;
};

} // namespace detail

inline std::vector<GpModel> gp_models_from_text(const std::string& text, std::string source = "gpmodel")
{
    detail::TokenReader in(text, std::move(source));
    in.expect("gpmodel-v1");
    in.expect("models");
    const auto n = in.integer();
    std::vector<GpModel> models;
    for (std::uint64_t i = 0; i < n; ++i) {
        in.expect("bs");
        if (in.integer() != i)
            throw Error(ErrorCode::schema, in.source() + ": BS entries out of order");
        in.expect("points");
        const auto m = in.integer();
        in.expect("hyperparams");
        GpHyperparams h;
        h.signal_std = in.number();
        h.length_scale = in.number();
        h.noise_std = in.number();
        if (!is_valid(h))
            throw Error(ErrorCode::schema, in.source() + ": invalid hyperparameters for BS " + std::to_string(i));
        std::vector<double> t, d;
        for (std::uint64_t j = 0; j < m; ++j) {
            t.push_back(in.number());
            d.push_back(in.number());
        }
        models.push_back(make_gp_model(std::move(t), std::move(d), h));
    }
    if (!in.done())
        throw Error(ErrorCode::schema, in.source() + ": trailing content");
    return models;
}

// ---------------------------------------------------------------------------
// rfmodel-v1
//
//   rfmodel-v1
//   params <n_trees> <max_depth> <min_leaf_size> <features_per_split> <bootstrap 0|1> <seed> <num_features>
//   tree <t> nodes <count>
//   S <feature> <threshold>     internal node; left subtree follows, then right
//   L <x> <y>                   leaf
//
// Nodes are listed in pre-order.

inline std::string rf_model_to_text(const RandomForestModel& model)
{
    const auto& p = model.params;
    std::string out = "rfmodel-v1\n";
    out += "params " + std::to_string(p.n_trees) + " " + std::to_string(p.max_depth) + " " +
           std::to_string(p.min_leaf_size) + " " + std::to_string(p.features_per_split) + " " +
           (p.bootstrap ? "1" : "0") + " " + std::to_string(p.seed) + " " + std::to_string(model.num_features) +
           "\n";
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& nodes = model.trees[t].nodes;
        out += "tree " + std::to_string(t) + " nodes " + std::to_string(nodes.size()) + "\n";
        for (const auto& n : nodes) {
            if (n.is_leaf())
                out += "L " + format_double(n.value.x) + " " + format_double(n.value.y) + "\n";
            else
                out += "S " + std::to_string(n.feature) + " " + format_double(n.threshold) + "\n";
        }
    }
    return out;
}

inline RandomForestModel rf_model_from_text(const std::string& text, std::string source = "rfmodel")
{
    detail::TokenReader in(text, std::move(source));
    in.expect("rfmodel-v1");
    in.expect("params");
    RandomForestModel model;
    auto& p = model.params;
    p.n_trees = in.integer();
    p.max_depth = static_cast<int>(in.integer());
    p.min_leaf_size = in.integer();
    p.features_per_split = in.integer();
    p.bootstrap = in.integer() != 0;
    p.seed = in.integer();
    model.num_features = in.integer();
    if (p.n_trees < 1)
        throw Error(ErrorCode::schema, in.source() + ": forest has no trees");

    for (std::size_t t = 0; t < p.n_trees; ++t) {
        in.expect("tree");
        if (in.integer() != t)
            throw Error(ErrorCode::schema, in.source() + ": trees out of order");
        in.expect("nodes");
        const auto count = in.integer();
        Tree tree;
        tree.nodes.reserve(count);
        std::function<int()> parse = [&]() -> int {
            if (tree.nodes.size() >= count)
                throw Error(ErrorCode::schema, in.source() + ": tree " + std::to_string(t) + " node count mismatch");
            const int id = static_cast<int>(tree.nodes.size());
            tree.nodes.emplace_back();
            const auto kind = in.next();
            if (kind == "L") {
                const double x = in.number();
                const double y = in.number();
                tree.nodes[static_cast<std::size_t>(id)].value = {x, y};
            } else if (kind == "S") {
                const auto f = in.integer();
                if (f >= model.num_features)
                    throw Error(ErrorCode::schema, in.source() + ": split feature out of range");
                const double thr = in.number();
                const int l = parse();
                const int r = parse();
                auto& node = tree.nodes[static_cast<std::size_t>(id)];
                node.feature = static_cast<int>(f);
                node.threshold = thr;
                node.left = l;
                node.right = r;
            } else {
                throw Error(ErrorCode::schema, in.source() + ": unknown node kind '" + kind + "'");
            }
            return id;
        };
        parse();
        if (tree.nodes.size() != count)
            throw Error(ErrorCode::schema, in.source() + ": tree " + std::to_string(t) + " node count mismatch");
        model.trees.push_back(std::move(tree));
    }
    if (!in.done())
        throw Error(ErrorCode::schema, in.source() + ": trailing content");
    return model;
}

// ---------------------------------------------------------------------------
// Report CSVs

inline std::string report_csv(const EvaluationReport& rep)
{
    std::string out = "method,ue_index,error_m,uncertainty_m\n";
    for (const auto& [method, r] : rep.per_method)
        for (std::size_t i = 0; i < r.errors.size(); ++i)
            out += to_string(method) + "," + std::to_string(r.ue_index[i]) + "," + format_double(r.errors[i]) + "," +
                   format_double(r.uncertainties[i]) + "\n";
    return out;
}

inline std::string cdf_csv(std::span<const CdfPoint> cdf)
{
    std::string out = "error_m,probability\n";
    for (const auto& c : cdf)
        out += format_double(c.value) + "," + format_double(c.probability) + "\n";
    return out;
}

inline std::string summary_csv(const EvaluationReport& rep)
{
    std::string out = "method,correlation,median_error_m,p90_error_m\n";
    for (const auto& [method, r] : rep.per_method)
        out += to_string(method) + "," + (r.correlation ? format_double(*r.correlation) : std::string("nan")) + "," +
               format_double(r.median_error()) + "," + format_double(r.p90_error()) + "\n";
    return out;
}

} // namespace toaloc::io

#endif // TOALOC_IO_HPP
