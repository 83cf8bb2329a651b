// Copyright 2026 The qgadget Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Batch experiments driven by a JSON config. Every experiment has a full
// default config; a user file may only override keys that exist there.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "qgadget/errors.hpp"
#include "qgadget/farm.hpp"
#include "qgadget/gadgets.hpp"
#include "qgadget/metrics.hpp"
#include "qgadget/optimizer.hpp"
#include "qgadget/parallel.hpp"
#include "qgadget/teleport.hpp"

namespace qgadget::experiment {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"train-grid",   "pnr-sweep", "random-targets",
                                                "noise-sweep",  "farm-table", "teleport-verify"};
    return names;
}

inline bool needs_seed(const std::string& name) {
    return name == "train-grid" || name == "pnr-sweep" || name == "random-targets" || name == "noise-sweep";
}

inline json optimizer_defaults() {
    return {{"niter", 40},
            {"step_size", 1.0},
            {"temperature", 1.0},
            {"local_tol", 1e-9},
            {"local_gtol", 1e-6},
            {"max_local_iters", 200},
            {"stage2", "auto"},
            {"min_probability", 1e-5},
            {"stage2_fidelity_drop", 3e-3},
            {"stop_fidelity", 1.0},
            {"retries", 0},
            {"retry_below", 0.99},
            {"prob_opt", {{"enabled", false}, {"nbh", 20}, {"fidelity_band", 1e-3}}}};
}

inline json grid_defaults() {
    const GridSpec g;
    return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"p_min", g.p_min},
            {"p_max", g.p_max}, {"nx", g.nx},       {"np", g.np}};
}

/// Complete default config for one experiment.
inline json defaults(const std::string& name) {
    json j = {{"schema_version", kSchemaVersion}, {"experiment", name}, {"seed", nullptr}, {"workers", 1}};
    if (name == "train-grid") {
        j["architecture"] = "ThreeMode";
        j["pnr"] = {1, 2};
        j["cutoff"] = 15;
        j["a_grid"] = {{"start", 0.3}, {"stop", 1.0}, {"count", 9}};
        j["optimizer"] = optimizer_defaults();
        j["loss"] = {{"penalty_weight", 100.0}};
    } else if (name == "pnr-sweep") {
        j["architecture"] = "TwoMode";
        j["patterns"] = {{0}, {1}, {2}, {3}, {4}, {5}};
        j["cutoff"] = 15;
        j["a_values"] = {0.3};
        j["optimizer"] = optimizer_defaults();
        j["optimizer"]["niter"] = 20;
        j["loss"] = {{"penalty_weight", 100.0}};
    } else if (name == "random-targets") {
        j["architecture"] = "ThreeMode";
        j["pnr"] = {1, 2};
        j["cutoff"] = 15;
        j["n_c"] = {1, 2, 3, 4, 5, 6};
        j["samples"] = {100, 100, 100, 100, 100, 100};
        j["optimizer"] = optimizer_defaults();
        j["loss"] = {{"penalty_weight", 100.0}};
    } else if (name == "noise-sweep") {
        j["architecture"] = "ThreeMode";
        j["pnr"] = {1, 2};
        j["cutoff"] = 15;
        j["a"] = 0.3;
        j["params_file"] = "";
        j["eta_det"] = 0.96;
        j["kmax"] = -1;
        j["loss_grid"] = {{"start", 0.0}, {"stop", 0.6}, {"count", 13}};
        j["wigner_grid"] = grid_defaults();
        j["optimizer"] = optimizer_defaults();
        j["loss"] = {{"penalty_weight", 100.0}};
    } else if (name == "farm-table") {
        j["fixed"] = "probability";
        j["value"] = 0.02;
        j["epsilon"] = 0.005;
        j["n_range"] = {{"start", 1}, {"stop", 400}, {"step", 1}};
        j["baseline"] = {{"transmission", 0.98}, {"mean_photon", 1.0}, {"events", 3}, {"gadget_probability", 0.02}};
    } else if (name == "teleport-verify") {
        j["cutoff"] = 25;
        j["a_values"] = {0.3, 1.0};
        j["r_values"] = {0.3, 1.0};
        j["m_values"] = {-1.0, 0.0, 1.0};
        j["inputs"] = {"0", "1", "+"};
        j["x_grid"] = {{"start", -16.0}, {"stop", 16.0}, {"count", 801}};
        j["threshold"] = 0.99;
    } else {
        throw Error(Errc::ConfigError, "unknown experiment '" + name + "'");
    }
    return j;
}

namespace detail {

inline bool same_kind(const json& def, const json& v) {
    if (def.is_null()) return v.is_null() || v.is_number_integer() || v.is_number_unsigned();
    if (def.is_number()) return v.is_number();
    return def.type() == v.type();
}

/// Overlays `user` on `base`, rejecting keys or types absent from `base`.
inline void overlay(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) throw Error(Errc::ConfigError, path + " must be an object");
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) throw Error(Errc::ConfigError, "unknown key '" + key + "'");
        json& slot = base[it.key()];
        if (!same_kind(slot, it.value())) throw Error(Errc::ConfigError, "wrong type for '" + key + "'");
        if (slot.is_object()) {
            overlay(slot, it.value(), key);
        } else {
            slot = it.value();
        }
    }
}

template <class T>
T get(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(Errc::ConfigError, std::string("bad value for '") + key + "': " + e.what());
    }
}

inline std::vector<double> linear_grid(const json& g) {
    const int count = get<int>(g, "count");
    if (count < 1) throw Error(Errc::ConfigError, "grid count must be >= 1");
    const double a = get<double>(g, "start");
    const double b = get<double>(g, "stop");
    if (count == 1) return {a};
    return linspace(a, b, count);
}

}  // namespace detail

/// Flag values that override the file.
struct Overrides {
    std::string experiment;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> cutoff;
};

/// Defaults <- file <- flags, then validation.
inline json resolve(const json& file, const Overrides& flags = {}) {
    if (!file.is_null() && !file.is_object()) throw Error(Errc::ConfigError, "config must be a JSON object");
    std::string name = flags.experiment;
    if (name.empty() && file.is_object() && file.contains("experiment")) {
        if (!file["experiment"].is_string()) throw Error(Errc::ConfigError, "experiment must be a string");
        name = file["experiment"].get<std::string>();
    }
    if (name.empty()) throw Error(Errc::ConfigError, "no experiment given");
    if (file.is_object() && file.contains("experiment") && file["experiment"] != name) {
        throw Error(Errc::ConfigError, "experiment flag disagrees with the config file");
    }
    json cfg = defaults(name);
    if (file.is_object()) detail::overlay(cfg, file, "");
    if (cfg["schema_version"] != kSchemaVersion) {
        throw Error(Errc::ConfigError, "unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
    }
    if (flags.seed) cfg["seed"] = *flags.seed;
    if (flags.workers) cfg["workers"] = *flags.workers;
    if (flags.cutoff) {
        if (!cfg.contains("cutoff")) throw Error(Errc::ConfigError, "experiment has no cutoff");
        cfg["cutoff"] = *flags.cutoff;
    }
    if (needs_seed(name) && cfg["seed"].is_null()) throw Error(Errc::ConfigError, "seed is required for " + name);
    if (!cfg["seed"].is_null() && !cfg["seed"].is_number_unsigned()) {
        if (!(cfg["seed"].is_number_integer() && cfg["seed"].get<std::int64_t>() >= 0)) {
            throw Error(Errc::ConfigError, "seed must be a non-negative integer");
        }
    }
    if (detail::get<int>(cfg, "workers") < 1) throw Error(Errc::ConfigError, "workers must be >= 1");
    if (cfg.contains("cutoff") && detail::get<int>(cfg, "cutoff") < 4) {
        throw Error(Errc::ConfigError, "cutoff must be >= 4");
    }
    if (cfg.contains("architecture")) parse_architecture(detail::get<std::string>(cfg, "architecture"));
    return cfg;
}

// ---------------------------------------------------------------------------
// Results.

struct Table {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Two '#' comment lines carry the schema version and the config.
    std::string csv(const json& cfg) const {
        std::ostringstream os;
        os << "# schema_version " << kSchemaVersion << '\n' << "# config " << cfg.dump() << '\n';
        for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
        os << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
            os << '\n';
        }
        return os.str();
    }
};

struct Result {
    std::vector<Table> tables;
    json summary = json::object();
    json extra_files = json::object();  // file name -> JSON document
};

inline std::string fmt(double v) { return format_double(v); }
inline std::string fmt(long long v) { return std::to_string(v); }
inline std::string fmt(int v) { return std::to_string(v); }

namespace detail {

inline std::uint64_t seed_of(const json& cfg) { return cfg.at("seed").get<std::uint64_t>(); }

inline std::vector<PnrOutcome> pattern_from(const json& counts) {
    std::vector<PnrOutcome> out;
    int mode = 1;
    for (const auto& c : counts) {
        if (!c.is_number_integer()) throw Error(Errc::ConfigError, "PNR counts must be integers");
        out.push_back({mode++, c.get<int>()});
    }
    return out;
}

inline std::string pattern_label(const std::vector<PnrOutcome>& p) {
    std::string s;
    for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "-" : "") + std::to_string(p[i].count);
    return s;
}

inline TrainConfig train_config(const json& cfg, const std::vector<PnrOutcome>& pnr) {
    const json& o = cfg.at("optimizer");
    TrainConfig t;
    t.pnr = pnr;
    t.cutoff = CutoffDim(get<int>(cfg, "cutoff"));
    t.hopper.niter = get<int>(o, "niter");
    t.hopper.step_size = get<double>(o, "step_size");
    t.hopper.temperature = get<double>(o, "temperature");
    t.hopper.seed = seed_of(cfg);
    t.hopper.local_tol = get<double>(o, "local_tol");
    t.hopper.local_gtol = get<double>(o, "local_gtol");
    t.hopper.max_local_iters = get<int>(o, "max_local_iters");
    t.penalty_weight = get<double>(cfg.at("loss"), "penalty_weight");
    const auto stage2 = get<std::string>(o, "stage2");
    if (stage2 == "auto") {
        t.stage2 = -1;
    } else if (stage2 == "always") {
        t.stage2 = 1;
    } else if (stage2 == "never") {
        t.stage2 = 0;
    } else {
        throw Error(Errc::ConfigError, "optimizer.stage2 must be auto, always or never");
    }
    t.min_probability = get<double>(o, "min_probability");
    t.stage2_fidelity_drop = get<double>(o, "stage2_fidelity_drop");
    t.stop_fidelity = get<double>(o, "stop_fidelity");
    if (t.hopper.niter < 0 || !(t.hopper.step_size > 0.0) || !(t.hopper.temperature > 0.0)) {
        throw Error(Errc::ConfigError, "optimizer needs niter >= 0, step_size > 0, temperature > 0");
    }
    return t;
}

/// One trained point: prob_opt or plain training, retried on new run
/// indices while the fidelity stays below `retry_below`.
inline TrainedResult train_point(Architecture arch, const StateVector& target, TrainConfig t, const json& o,
                                 std::uint64_t base_index, int& attempts) {
    const int retries = get<int>(o, "retries");
    const double below = get<double>(o, "retry_below");
    const json& po = o.at("prob_opt");
    // Basinhopping can fall back to a minimum under the probability floor when
    // no hop clears it; such a run counts as a failed attempt.
    auto feasible = [&t](const TrainedResult& r) { return r.probability >= t.min_probability; };
    TrainedResult best;
    bool have = false;
    for (int k = 0; k <= retries; ++k) {
        t.run_index = base_index + 100u * static_cast<std::uint64_t>(k);
        TrainedResult r = get<bool>(po, "enabled")
                              ? prob_opt(arch, target, t,
                                         {get<int>(po, "nbh"), get<double>(po, "fidelity_band"), 1})
                              : train_gadget(arch, target, t);
        attempts = k + 1;
        const bool better = feasible(r) != feasible(best) ? feasible(r) : r.fidelity > best.fidelity;
        if (!have || better) {
            best = std::move(r);
            have = true;
        }
        if (feasible(best) && best.fidelity >= below) break;
    }
    return best;
}

inline std::vector<std::string> result_columns() {
    return {"fidelity", "probability", "stage1_fidelity", "stage1_probability", "loss_value", "norm_in", "norm_out"};
}

inline std::vector<std::string> result_cells(const TrainedResult& r) {
    return {fmt(r.fidelity),          fmt(r.probability), fmt(r.stage1_fidelity), fmt(r.stage1_probability),
            fmt(r.loss_value),        fmt(r.norm_in),     fmt(r.norm_out)};
}

template <class T>
void append(std::vector<T>& a, const std::vector<T>& b) {
    a.insert(a.end(), b.begin(), b.end());
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace detail

inline Result run_train_grid(const json& cfg) {
    using namespace detail;
    const auto arch = parse_architecture(get<std::string>(cfg, "architecture"));
    const auto pnr = pattern_from(cfg.at("pnr"));
    const TrainConfig t = train_config(cfg, pnr);
    const auto grid = linear_grid(cfg.at("a_grid"));
    const json& o = cfg.at("optimizer");
    struct Point {
        TrainedResult r;
        int attempts = 0;
    };
    const auto points = parallel_map(grid.size(), get<int>(cfg, "workers"), [&](std::size_t i) {
        Point p;
        p.r = train_point(arch, weak_cubic_state(grid[i], t.cutoff), t, o, 1000u * i, p.attempts);
        return p;
    });
    Table tab{"train_grid.csv", {"a", "pattern", "attempts"}, {}};
    append(tab.header, result_columns());
    append(tab.header, split_csv(params_csv_header(arch)));
    json runs = json::array();
    double min_fid = 1.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::vector<std::string> row{fmt(grid[i]), pattern_label(pnr), fmt(points[i].attempts)};
        append(row, result_cells(points[i].r));
        append(row, split_csv(params_csv_row(points[i].r.params)));
        tab.rows.push_back(std::move(row));
        json run = trained_to_json(points[i].r);
        run["a"] = grid[i];
        runs.push_back(std::move(run));
        min_fid = std::min(min_fid, points[i].r.fidelity);
    }
    Result res;
    res.tables.push_back(std::move(tab));
    res.summary = {{"points", grid.size()}, {"min_fidelity", min_fid}};
    res.extra_files["trained.json"] = {{"runs", runs}};
    return res;
}

inline Result run_pnr_sweep(const json& cfg) {
    using namespace detail;
    const auto arch = parse_architecture(get<std::string>(cfg, "architecture"));
    std::vector<std::vector<PnrOutcome>> patterns;
    for (const auto& p : cfg.at("patterns")) patterns.push_back(pattern_from(p));
    if (patterns.empty()) throw Error(Errc::ConfigError, "patterns must not be empty");
    const auto a_values = get<std::vector<double>>(cfg, "a_values");
    const TrainConfig t = train_config(cfg, {});
    const json& o = cfg.at("optimizer");

    // Same ordering as pnr_sweep: by counts.
    std::sort(patterns.begin(), patterns.end(), [](const auto& x, const auto& y) {
        std::vector<int> a;
        std::vector<int> b;
        for (const auto& q : x) a.push_back(q.count);
        for (const auto& q : y) b.push_back(q.count);
        return a < b;
    });
    const std::size_t jobs = a_values.size() * patterns.size();
    const auto results = parallel_map(jobs, get<int>(cfg, "workers"), [&](std::size_t job) {
        const std::size_t ia = job / patterns.size();
        TrainConfig c = t;
        c.pnr = patterns[job % patterns.size()];
        int attempts = 0;
        return std::make_pair(train_point(arch, weak_cubic_state(a_values[ia], t.cutoff), c, o, 1000u * ia, attempts),
                              attempts);
    });
    Table tab{"pnr_sweep.csv", {"a", "pattern", "attempts"}, {}};
    append(tab.header, result_columns());
    append(tab.header, split_csv(params_csv_header(arch)));
    for (std::size_t job = 0; job < jobs; ++job) {
        std::vector<std::string> row{fmt(a_values[job / patterns.size()]), pattern_label(patterns[job % patterns.size()]),
                                     fmt(results[job].second)};
        append(row, result_cells(results[job].first));
        append(row, split_csv(params_csv_row(results[job].first.params)));
        tab.rows.push_back(std::move(row));
    }
    Result res;
    res.tables.push_back(std::move(tab));
    res.summary = {{"runs", jobs}};
    return res;
}

/// Target seed and run index of sample k at support n_c.
inline std::uint64_t random_target_seed(std::uint64_t seed, int n_c, int k) {
    auto rng = run_rng(seed, 1'000'000u * static_cast<std::uint64_t>(n_c) + static_cast<std::uint64_t>(k));
    return rng();
}

inline Result run_random_targets(const json& cfg) {
    using namespace detail;
    const auto arch = parse_architecture(get<std::string>(cfg, "architecture"));
    const auto pnr = pattern_from(cfg.at("pnr"));
    const TrainConfig t = train_config(cfg, pnr);
    const auto ncs = get<std::vector<int>>(cfg, "n_c");
    const auto samples = get<std::vector<int>>(cfg, "samples");
    if (samples.size() != ncs.size()) throw Error(Errc::ConfigError, "samples and n_c differ in length");
    std::vector<std::pair<int, int>> jobs;
    for (std::size_t i = 0; i < ncs.size(); ++i) {
        if (ncs[i] < 0 || ncs[i] >= t.cutoff.value()) throw Error(Errc::ConfigError, "n_c must lie in [0, cutoff)");
        for (int k = 0; k < samples[i]; ++k) jobs.emplace_back(ncs[i], k);
    }
    const json& o = cfg.at("optimizer");
    const auto results = parallel_map(jobs.size(), get<int>(cfg, "workers"), [&](std::size_t j) {
        const auto [nc, k] = jobs[j];
        const auto target = random_target(nc, random_target_seed(seed_of(cfg), nc, k), t.cutoff);
        int attempts = 0;
        return train_point(arch, target, t, o, 1'000'000u * static_cast<std::uint64_t>(nc) + 1000u * k, attempts);
    });
    Table runs{"random_targets.csv", {"n_c", "sample", "target_seed"}, {}};
    append(runs.header, result_columns());
    Table summary{"random_targets_summary.csv", {"n_c", "samples", "mean_fidelity", "min_fidelity", "mean_probability"},
                  {}};
    json means = json::object();
    std::size_t j = 0;
    for (std::size_t i = 0; i < ncs.size(); ++i) {
        double sum_f = 0.0;
        double min_f = 1.0;
        double sum_p = 0.0;
        for (int k = 0; k < samples[i]; ++k, ++j) {
            const auto& r = results[j];
            std::vector<std::string> row{fmt(ncs[i]), fmt(k),
                                         std::to_string(random_target_seed(seed_of(cfg), ncs[i], k))};
            append(row, result_cells(r));
            runs.rows.push_back(std::move(row));
            sum_f += r.fidelity;
            sum_p += r.probability;
            min_f = std::min(min_f, r.fidelity);
        }
        const double n = std::max(1, samples[i]);
        summary.rows.push_back({fmt(ncs[i]), fmt(samples[i]), fmt(sum_f / n), fmt(min_f), fmt(sum_p / n)});
        means[std::to_string(ncs[i])] = sum_f / n;
    }
    Result res;
    res.tables.push_back(std::move(runs));
    res.tables.push_back(std::move(summary));
    res.summary = {{"mean_fidelity", means}};
    return res;
}

inline Result run_noise_sweep(const json& cfg) {
    using namespace detail;
    const auto arch = parse_architecture(get<std::string>(cfg, "architecture"));
    const auto pnr = pattern_from(cfg.at("pnr"));
    const TrainConfig t = train_config(cfg, pnr);
    const double a = get<double>(cfg, "a");
    const auto target = weak_cubic_state(a, t.cutoff);

    Result res;
    CircuitParams params;
    const auto params_file = get<std::string>(cfg, "params_file");
    if (!params_file.empty()) {
        std::ifstream in(params_file);
        if (!in) throw Error(Errc::ConfigError, "cannot read params_file '" + params_file + "'");
        json j;
        try {
            j = json::parse(in);
        } catch (const json::exception& e) {
            throw Error(Errc::ConfigError, std::string("params_file is not JSON: ") + e.what());
        }
        params = j.contains("params") ? params_from_json(j.at("params")) : params_from_json(j);
        if (params.architecture != arch) throw Error(Errc::ConfigError, "params_file architecture mismatch");
    } else {
        int attempts = 0;
        const auto trained = train_point(arch, target, t, cfg.at("optimizer"), 0, attempts);
        params = trained.params;
        res.extra_files["trained.json"] = trained_to_json(trained);
    }
    const auto losses = linear_grid(cfg.at("loss_grid"));
    const double eta_det = get<double>(cfg, "eta_det");
    const int kmax = get<int>(cfg, "kmax");
    const json& g = cfg.at("wigner_grid");
    GridSpec grid;
    grid.x_min = get<double>(g, "x_min");
    grid.x_max = get<double>(g, "x_max");
    grid.p_min = get<double>(g, "p_min");
    grid.p_max = get<double>(g, "p_max");
    grid.nx = get<int>(g, "nx");
    grid.np = get<int>(g, "np");
    for (double l : losses) {
        if (!(l >= 0.0 && l < 1.0)) throw Error(Errc::ConfigError, "source loss must lie in [0, 1)");
    }
    struct Row {
        double fidelity, probability, wmin, neg;
    };
    const auto rows = parallel_map(losses.size(), get<int>(cfg, "workers"), [&](std::size_t i) {
        const auto r = run_gadget_noisy(params, 1.0 - losses[i], eta_det, kmax, t.cutoff);
        const auto w = wigner(*r.density, grid);
        const auto rep = negativity_report(w);
        return Row{fidelity(*r.density, target), r.probability, rep.min_value, rep.negative_mass};
    });
    Table tab{"noise_sweep.csv", {"loss", "fidelity", "probability", "wigner_min", "negative_mass"}, {}};
    for (std::size_t i = 0; i < losses.size(); ++i) {
        tab.rows.push_back(
            {fmt(losses[i]), fmt(rows[i].fidelity), fmt(rows[i].probability), fmt(rows[i].wmin), fmt(rows[i].neg)});
    }
    // First crossing of the Wigner minimum through zero, linearly interpolated.
    json crossing = nullptr;
    for (std::size_t i = 1; i < losses.size(); ++i) {
        if (rows[i - 1].wmin < 0.0 && rows[i].wmin >= 0.0) {
            const double f = rows[i - 1].wmin / (rows[i - 1].wmin - rows[i].wmin);
            crossing = losses[i - 1] + f * (losses[i] - losses[i - 1]);
            break;
        }
    }
    res.tables.push_back(std::move(tab));
    res.summary = {{"wigner_zero_crossing", crossing}, {"params_csv_row", params_csv_row(params)}};
    return res;
}

inline Result run_farm_table(const json& cfg) {
    using namespace detail;
    const auto fixed_s = get<std::string>(cfg, "fixed");
    TradeoffFixed fixed;
    if (fixed_s == "probability") {
        fixed = TradeoffFixed::Probability;
    } else if (fixed_s == "epsilon") {
        fixed = TradeoffFixed::Epsilon;
    } else {
        throw Error(Errc::ConfigError, "fixed must be probability or epsilon");
    }
    const json& nr = cfg.at("n_range");
    const auto rows = tradeoff_table(fixed, get<double>(cfg, "value"), get<std::int64_t>(nr, "start"),
                                     get<std::int64_t>(nr, "stop"), get<std::int64_t>(nr, "step"));
    Table tab{"farm_table.csv", {"n", "epsilon", "p"}, {}};
    for (const auto& r : rows) tab.rows.push_back({std::to_string(r.n), fmt(r.epsilon), fmt(r.p)});

    const json& b = cfg.at("baseline");
    const double theta = theta_from_transmission(get<double>(b, "transmission"));
    const double one = subtraction_probability(theta, get<double>(b, "mean_photon"));
    const double seq = sequential_subtraction_probability(theta, get<double>(b, "mean_photon"), get<int>(b, "events"));
    const double gadget_p = get<double>(b, "gadget_probability");
    Result res;
    res.tables.push_back(std::move(tab));
    json summary = {{"subtraction_single", one}, {"subtraction_sequential", seq}, {"gadget_over_baseline", gadget_p / seq}};
    if (fixed == TradeoffFixed::Probability) {
        summary["min_gadgets"] = min_gadgets(get<double>(cfg, "value"), get<double>(cfg, "epsilon"));
    }
    res.summary = std::move(summary);
    return res;
}

inline StateVector named_input(const std::string& name, CutoffDim c) {
    if (name == "0") return vacuum(1, c);
    if (name == "1") return fock_state(1, c);
    if (name == "+") {
        const double h = 1.0 / std::sqrt(2.0);
        const cplx coeffs[] = {h, h};
        return single_mode(coeffs, c);
    }
    throw Error(Errc::ConfigError, "unknown input state '" + name + "' (use 0, 1 or +)");
}

inline Result run_teleport_verify(const json& cfg) {
    using namespace detail;
    const CutoffDim c(get<int>(cfg, "cutoff"));
    const auto as = get<std::vector<double>>(cfg, "a_values");
    const auto rs = get<std::vector<double>>(cfg, "r_values");
    const auto ms = get<std::vector<double>>(cfg, "m_values");
    const auto inputs = get<std::vector<std::string>>(cfg, "inputs");
    for (const auto& s : inputs) named_input(s, c);
    const auto grid = linear_grid(cfg.at("x_grid"));
    const double threshold = get<double>(cfg, "threshold");

    struct Job {
        double a, r, m;
        std::string input;
    };
    std::vector<Job> jobs;
    for (double a : as)
        for (double r : rs)
            for (double m : ms)
                for (const auto& s : inputs) jobs.push_back({a, r, m, s});
    const auto checks = parallel_map(jobs.size(), get<int>(cfg, "workers"), [&](std::size_t i) {
        TeleportSetup s{jobs[i].a, jobs[i].r, jobs[i].m, c};
        return verify_teleport(named_input(jobs[i].input, c), s, grid);
    });
    Table tab{"teleport_verify.csv", {"a", "r", "m", "input", "gamma", "circuit_vs_analytic", "corrected_vs_ideal"}, {}};
    json report = json::array();
    int passed = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& k = checks[i];
        tab.rows.push_back({fmt(k.a), fmt(k.r), fmt(k.m), jobs[i].input, fmt(k.gamma), fmt(k.circuit_vs_analytic),
                            fmt(k.corrected_vs_ideal)});
        const bool ok = k.corrected_vs_ideal >= threshold;
        passed += ok ? 1 : 0;
        report.push_back({{"a", k.a},
                          {"r", k.r},
                          {"m", k.m},
                          {"input", jobs[i].input},
                          {"gamma", k.gamma},
                          {"circuit_vs_analytic", k.circuit_vs_analytic},
                          {"corrected_vs_ideal", k.corrected_vs_ideal},
                          {"pass", ok}});
    }
    Result res;
    res.tables.push_back(std::move(tab));
    res.extra_files["teleport_verify.json"] = {{"threshold", threshold}, {"checks", report}};
    res.summary = {{"checks", jobs.size()}, {"passed", passed}};
    return res;
}

/// Runs a resolved config.
inline Result run(const json& cfg) {
    const auto name = cfg.at("experiment").get<std::string>();
    if (name == "train-grid") return run_train_grid(cfg);
    if (name == "pnr-sweep") return run_pnr_sweep(cfg);
    if (name == "random-targets") return run_random_targets(cfg);
    if (name == "noise-sweep") return run_noise_sweep(cfg);
    if (name == "farm-table") return run_farm_table(cfg);
    if (name == "teleport-verify") return run_teleport_verify(cfg);
    throw Error(Errc::ConfigError, "unknown experiment '" + name + "'");
}

/// The manifest is the only file with a wall time, so the CSVs stay
/// byte-identical across reruns.
inline json manifest(const json& cfg, const Result& res, double wall_time_s) {
    json files = json::array();
    for (const auto& t : res.tables) files.push_back(t.file);
    for (auto it = res.extra_files.begin(); it != res.extra_files.end(); ++it) files.push_back(it.key());
    return {{"schema_version", kSchemaVersion},
            {"experiment", cfg.at("experiment")},
            {"config", cfg},
            {"files", files},
            {"summary", res.summary},
            {"wall_time_s", wall_time_s}};
}

}  // namespace qgadget::experiment
