#pragma once

#include "nhcurrent/evolve.hpp"
#include "nhcurrent/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nhc {

enum class InitialKind { localized, gaussian, plane_wave, custom };
enum class FieldSolver { quasistatic, retarded, wave };
enum class OutputFormat { csv, ndjson, both };

std::string_view to_string(InitialKind k) noexcept;
std::string_view to_string(FieldSolver s) noexcept;
std::string_view to_string(OutputFormat f) noexcept;
FieldSolver parse_field_solver(std::string_view name);
OutputFormat parse_output_format(std::string_view name);

struct InitialSpec {
    InitialKind kind = InitialKind::localized;
    int site = 0;                    // localized
    std::vector<double> center;      // gaussian, one entry per axis
    double width = 1.0;              // gaussian
    std::vector<double> k;           // gaussian carrier / plane_wave, radians per site
    ComplexVector amplitudes;        // custom, normalized on load
};

struct FieldOptions {
    bool enable = false;
    FieldSolver solver = FieldSolver::quasistatic;
};

struct OracleOptions {
    bool enable = false;
    double g2tau = 1.0;
    std::vector<double> taus{1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4};
};

struct OutputOptions {
    std::string directory = "out";
    OutputFormat formats = OutputFormat::both;
};

/// A validated run description. Defaults: dt = 1e-3, steps = 1000,
/// record_every = 10, method = rk4_nonlinear, hopping = 1, charge = 1,
/// zero potential, zero Gamma, boundary = open, initial = localized at site 0.
struct RunConfig {
    ModelSpec model;
    EvolveConfig evolve;
    InitialSpec initial;
    FieldOptions fields;
    OracleOptions oracle;
    OutputOptions output;
    std::string source_json;  // canonical echo of the parsed document

    explicit RunConfig(ModelSpec m) : model(std::move(m)) {}
};

/// Reads the JSON config at `path`. Every failure is a ConfigError whose
/// key() is the dotted path of the offending entry ("" for syntax errors).
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(std::string_view text);

/// Builds the initial state described by `cfg.initial` (normalized).
QuantumState initial_state(const RunConfig& cfg);

}  // namespace nhc
