#pragma once

#include "nhcurrent/config.hpp"
#include "nhcurrent/evolve.hpp"
#include "nhcurrent/fieldsolve.hpp"
#include "nhcurrent/oracle.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nhc {

std::string_view version() noexcept;

struct OracleReport {
    double final_time = 0.0;
    std::optional<double> exact_vs_evolved;   // phase-aligned distance at the final recorded time
    std::optional<double> eigen_vs_pade;      // distance between the two exact routes
    std::optional<double> effective_hamiltonian_deviation;
    std::optional<ConvergenceStudy> postselection;
    std::vector<std::string> notes;
};

struct RunResult {
    Trajectory trajectory;
    std::vector<CurrentSet> currents;     // one per recorded state
    std::vector<SiteField> phi;           // one per recorded state
    std::vector<FieldSnapshot> fields;    // interior recorded times, when enabled
    std::optional<OracleReport> oracle;
    std::vector<std::string> warnings;
    bool neutralizing_background = false;
};

/// Full pipeline: evolve -> observe -> corrected currents -> potentials ->
/// optional oracle checks. Deterministic in the config.
RunResult simulate(const RunConfig& cfg);

/// Oracle checks only (exact propagators, postselection study).
OracleReport run_oracle(const RunConfig& cfg, const Trajectory* trajectory = nullptr);

/// Writes run_meta.json plus the tables selected by `formats`:
/// observables.csv, currents.csv (csv), fields.ndjson (ndjson, fields enabled),
/// oracle_report.json when an oracle report is present.
void write_outputs(const RunConfig& cfg, const RunResult& result, const std::filesystem::path& dir,
                   OutputFormat formats);

/// Writes run_meta.json and oracle_report.json only.
void write_oracle_outputs(const RunConfig& cfg, const OracleReport& report, const std::filesystem::path& dir);

}  // namespace nhc
