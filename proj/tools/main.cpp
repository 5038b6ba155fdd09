// nhcurrent command-line driver: validate / run / oracle / sweep.

#include "nhcurrent/config.hpp"
#include "nhcurrent/error.hpp"
#include "nhcurrent/pipeline.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <regex>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { ok = 0, config_error = 2, numerical_failure = 3 };

struct Options {
    std::string output_dir;
    std::string format;
    bool quiet = false;
};

struct Outcome {
    int code = ok;
    std::string message;
};

nlohmann::json error_record(const char* kind, const std::string& message, const std::string& key = {}) {
    nlohmann::json j{{"error", {{"kind", kind}, {"message", message}}}};
    if (!key.empty()) j["error"]["key"] = key;
    return j;
}

void write_error_record(const fs::path& dir, const nlohmann::json& rec) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) return;
    std::ofstream(dir / "error.json") << rec.dump(2) << '\n';
}

fs::path output_directory(const nhc::RunConfig& cfg, const Options& opt) {
    return opt.output_dir.empty() ? fs::path(cfg.output.directory) : fs::path(opt.output_dir);
}

nhc::OutputFormat output_format(const nhc::RunConfig& cfg, const Options& opt) {
    return opt.format.empty() ? cfg.output.formats : nhc::parse_output_format(opt.format);
}

// Runs `body` and maps the exception taxonomy onto exit codes. Errors are
// reported on stderr as a JSON record and, when possible, as error.json in
// the output directory.
template <class Body>
Outcome guarded(const fs::path& fallback_dir, Body&& body) {
    nlohmann::json rec;
    Outcome out;
    fs::path dir = fallback_dir;
    try {
        body(dir);
        return out;
    } catch (const nhc::ConfigError& e) {
        rec = error_record("config", e.what(), e.key());
        out.code = config_error;
    } catch (const nhc::InvalidInput& e) {
        rec = error_record("config", e.what());
        out.code = config_error;
    } catch (const nhc::NumericalError& e) {
        rec = error_record("numerical", e.what());
        out.code = numerical_failure;
    } catch (const std::exception& e) {
        rec = error_record("numerical", e.what());
        out.code = numerical_failure;
    }
    out.message = rec.dump();
    if (!dir.empty()) write_error_record(dir, rec);
    return out;
}

Outcome do_validate(const std::string& path, const Options& opt) {
    return guarded({}, [&](fs::path&) {
        const auto cfg = nhc::parse_config(path);
        if (!opt.quiet)
            std::cout << path << ": ok (" << cfg.model.sites() << " sites, " << cfg.evolve.steps << " steps)\n";
    });
}

Outcome do_run(const std::string& path, const Options& opt) {
    return guarded(opt.output_dir, [&](fs::path& dir) {
        const auto cfg = nhc::parse_config(path);
        const auto fmt = output_format(cfg, opt);
        dir = output_directory(cfg, opt);
        const auto result = nhc::simulate(cfg);
        for (const auto& w : result.warnings)
            if (!opt.quiet) std::cerr << "warning: " << w << '\n';
        nhc::write_outputs(cfg, result, dir, fmt);
        if (!opt.quiet)
            std::cout << path << ": " << result.trajectory.size() << " records written to " << dir.string() << '\n';
    });
}

Outcome do_oracle(const std::string& path, const Options& opt) {
    return guarded(opt.output_dir, [&](fs::path& dir) {
        const auto cfg = nhc::parse_config(path);
        dir = output_directory(cfg, opt);
        const auto report = nhc::run_oracle(cfg);
        nhc::write_oracle_outputs(cfg, report, dir);
        if (!opt.quiet) {
            std::cout << path << ": oracle report written to " << dir.string() << '\n';
            if (report.postselection)
                for (const auto& row : report.postselection->rows)
                    std::cout << "  tau=" << row.tau << " deviation=" << row.deviation << " ratio=" << row.ratio
                              << '\n';
        }
    });
}

// Shell-style glob over a single directory level ("configs/*.json").
std::vector<std::string> expand_glob(const std::string& pattern) {
    const fs::path p(pattern);
    if (pattern.find_first_of("*?[") == std::string::npos) return {pattern};
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    std::string rx;
    for (char c : p.filename().string()) {
        switch (c) {
            case '*': rx += ".*"; break;
            case '?': rx += '.'; break;
            case '.': rx += "\\."; break;
            default: rx += c;
        }
    }
    const std::regex re(rx);
    std::vector<std::string> out;
    if (fs::is_directory(dir))
        for (const auto& e : fs::directory_iterator(dir))
            if (e.is_regular_file() && std::regex_match(e.path().filename().string(), re))
                out.push_back(e.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

int do_sweep(const std::vector<std::string>& patterns, const Options& opt) {
    std::vector<std::string> files;
    for (const auto& p : patterns) {
        auto more = expand_glob(p);
        files.insert(files.end(), more.begin(), more.end());
    }
    if (files.empty()) {
        std::cerr << error_record("config", "sweep pattern matched no config files").dump() << '\n';
        return config_error;
    }

    std::vector<std::future<Outcome>> jobs;
    for (const auto& f : files) {
        Options per = opt;
        if (!opt.output_dir.empty()) per.output_dir = (fs::path(opt.output_dir) / fs::path(f).stem()).string();
        jobs.push_back(std::async(std::launch::async, [f, per] { return do_run(f, per); }));
    }
    int worst = ok;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto out = jobs[i].get();
        if (out.code != ok) std::cerr << files[i] << ": " << out.message << '\n';
        worst = std::max(worst, out.code);
    }
    return worst;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nhcurrent: continuity-equation analysis for non-Hermitian lattice dynamics"};
    app.set_version_flag("--version", std::string(nhc::version()));
    app.require_subcommand(1);

    Options opt;
    app.add_option("--output-dir", opt.output_dir, "Output directory (overrides output.directory)");
    app.add_flag("--quiet", opt.quiet, "Suppress progress output");
    app.add_option("--format", opt.format, "Output tables")->check(CLI::IsMember({"csv", "ndjson", "both"}));

    std::string config;
    std::vector<std::string> patterns;
    auto* validate = app.add_subcommand("validate", "Parse and validate a config");
    validate->add_option("config", config, "Config file")->required();
    auto* run = app.add_subcommand("run", "Run the full pipeline");
    run->add_option("config", config, "Config file")->required();
    auto* oracle = app.add_subcommand("oracle", "Run the brute-force oracle checks");
    oracle->add_option("config", config, "Config file")->required();
    auto* sweep = app.add_subcommand("sweep", "Run several configs concurrently");
    sweep->add_option("configs", patterns, "Config files or glob patterns")->required();

    for (auto* sub : {validate, run, oracle, sweep}) {
        sub->fallthrough();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : config_error;
    }

    Outcome out;
    if (*validate)
        out = do_validate(config, opt);
    else if (*run)
        out = do_run(config, opt);
    else if (*oracle)
        out = do_oracle(config, opt);
    else
        return do_sweep(patterns, opt);

    if (out.code != ok) std::cerr << out.message << '\n';
    return out.code;
}
