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

// qgadget_cli: batch experiment runner.
//
// Exit codes: 0 success, 2 config error, 3 numerical failure.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qgadget/experiment.hpp"

namespace fs = std::filesystem;
namespace ex = qgadget::experiment;
using nlohmann::json;

namespace {

constexpr int kConfigExit = 2;
constexpr int kNumericalExit = 3;

std::atomic<long> g_warnings{0};

void count_warning(qgadget::Errc, std::string_view) { ++g_warnings; }

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw qgadget::Error(qgadget::Errc::ConfigError, "cannot write " + path.string());
    out << text;
}

int fail(const fs::path& out_dir, int exit_code, const std::string& code, const std::string& message) {
    const json record = {{"status", "error"}, {"exit_code", exit_code}, {"code", code}, {"message", message}};
    std::cerr << record.dump() << '\n';
    std::error_code ec;
    if (!out_dir.empty() && fs::is_directory(out_dir, ec)) {
        std::ofstream(out_dir / "error.json") << record.dump(2) << '\n';
    }
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trains and evaluates photonic state-preparation gadgets"};
    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> cutoff;
    std::string out_dir = "results";
    bool print_defaults = false;

    app.add_option("-e,--experiment", experiment, "train-grid | pnr-sweep | random-targets | noise-sweep | "
                                                  "farm-table | teleport-verify");
    app.add_option("-c,--config", config_path, "JSON config file");
    app.add_option("-s,--seed", seed, "Master seed (required for training experiments)");
    app.add_option("-w,--workers", workers, "Worker threads");
    app.add_option("-o,--out", out_dir, "Output directory");
    app.add_option("--cutoff", cutoff, "Fock cutoff override");
    app.add_flag("--print-defaults", print_defaults, "Print the full default config and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigExit;
    }

    const fs::path out(out_dir);
    json cfg;
    try {
        if (print_defaults) {
            std::cout << ex::defaults(experiment.empty() ? "train-grid" : experiment).dump(2) << '\n';
            return 0;
        }
        json file;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw qgadget::Error(qgadget::Errc::ConfigError, "cannot open " + config_path);
            try {
                file = json::parse(in);
            } catch (const json::exception& e) {
                throw qgadget::Error(qgadget::Errc::ConfigError, std::string("config is not valid JSON: ") + e.what());
            }
        }
        cfg = ex::resolve(file, {experiment, seed, workers, cutoff});
        fs::create_directories(out);
    } catch (const qgadget::Error& e) {
        return fail(out, kConfigExit, qgadget::errc_name(e.code()), e.what());
    } catch (const std::exception& e) {
        return fail(out, kConfigExit, "ConfigError", e.what());
    }

    qgadget::set_warning_handler(count_warning);
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const ex::Result res = ex::run(cfg);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        for (const auto& t : res.tables) write_file(out / t.file, t.csv(cfg));
        for (auto it = res.extra_files.begin(); it != res.extra_files.end(); ++it) {
            json doc = it.value();
            doc["schema_version"] = ex::kSchemaVersion;
            doc["config"] = cfg;
            write_file(out / it.key(), doc.dump(2) + "\n");
        }
        json manifest = ex::manifest(cfg, res, wall);
        manifest["warnings"] = g_warnings.load();
        write_file(out / "manifest.json", manifest.dump(2) + "\n");
        std::cout << json{{"status", "ok"}, {"summary", res.summary}, {"wall_time_s", wall}}.dump() << '\n';
        return 0;
    } catch (const qgadget::Error& e) {
        const int rc = e.code() == qgadget::Errc::ConfigError ? kConfigExit : kNumericalExit;
        return fail(out, rc, qgadget::errc_name(e.code()), e.what());
    } catch (const std::exception& e) {
        return fail(out, kNumericalExit, "NumericalError", e.what());
    }
}
