#include "nhcurrent/pipeline.hpp"

#include "nhcurrent/error.hpp"
#include "nhcurrent/observe.hpp"
#include "nhcurrent/table_io.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>

#ifndef NHC_VERSION
#define NHC_VERSION "0.0.0"
#endif

namespace nhc {

using nlohmann::json;

std::string_view version() noexcept { return NHC_VERSION; }

namespace {

// Single coupling A with g2tau * A^dagger A = -2 (Gamma - lambda_max), so the
// effective Gamma differs from the model's only by a constant shift, which
// the norm-preserving prescription removes.
ComplexMatrix coupling_from_gamma(const ComplexMatrix& gamma, double g2tau) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gamma);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of Gamma failed");
    const RealVector lam = es.eigenvalues();
    const double top = lam.maxCoeff();
    const RealVector root = ((top - lam.array()).max(0.0) * (2.0 / g2tau)).sqrt().matrix();
    return es.eigenvectors() * root.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

std::vector<VectorField> vector_potentials(const RunConfig& cfg, const std::vector<VectorField>& history,
                                           double spacing) {
    const Lattice& lat = cfg.model.lattice;
    const double q = cfg.model.charge;
    std::vector<VectorField> a;
    switch (cfg.fields.solver) {
        case FieldSolver::quasistatic:
            for (const auto& jt : history) a.push_back(vector_potential_quasistatic(jt, lat, q));
            break;
        case FieldSolver::retarded:
            for (std::size_t k = 0; k < history.size(); ++k)
                a.push_back(vector_potential_retarded(std::span(history.data(), k + 1), lat, spacing,
                                                      spacing * static_cast<double>(k), q));
            break;
        case FieldSolver::wave:
            a = vector_potential_wave(history, lat, spacing, q);
            break;
    }
    return a;
}

json tolerances_json() {
    return {{"hermiticity", hermiticity_tolerance},
            {"state_norm", state_norm_tolerance},
            {"poisson_residual", 1e-10},
            {"source_sum", 1e-8}};
}

json meta_json(const RunConfig& cfg, bool neutralizing, const std::vector<std::string>& warnings) {
    json meta;
    meta["tool"] = "nhcurrent";
    meta["version"] = std::string(version());
    meta["config"] = json::parse(cfg.source_json.empty() ? "{}" : cfg.source_json);
    meta["tolerances"] = tolerances_json();
    meta["neutralizing_background"] = neutralizing;
    meta["background_note"] = neutralizing
                                  ? "periodic Poisson solves subtract the uniform mean charge (neutralizing background)"
                                  : "open lattice: Dirichlet phi = 0 outside the lattice, no background charge";
    meta["lattice_spacing"] = cfg.model.lattice.spacing();
    meta["units"] = "hbar = eps0 = mu0 = 1, internal lattice spacing 1";
    meta["warnings"] = warnings;
    return meta;
}

json oracle_json(const OracleReport& r) {
    json j;
    j["final_time"] = r.final_time;
    j["exact_vs_evolved"] = r.exact_vs_evolved ? json(*r.exact_vs_evolved) : json(nullptr);
    j["eigen_vs_pade"] = r.eigen_vs_pade ? json(*r.eigen_vs_pade) : json(nullptr);
    j["effective_hamiltonian_deviation"] =
        r.effective_hamiltonian_deviation ? json(*r.effective_hamiltonian_deviation) : json(nullptr);
    if (r.postselection) {
        json rows = json::array();
        for (const auto& row : r.postselection->rows)
            rows.push_back({{"tau", row.tau},
                            {"g", row.g},
                            {"deviation", row.deviation},
                            {"success_probability", row.success_probability},
                            {"halving_ratio", row.ratio}});
        j["postselection"] = {{"rows", rows},
                              {"monotone", r.postselection->monotone},
                              {"fitted_exponent", r.postselection->fitted_exponent}};
    } else {
        j["postselection"] = nullptr;
    }
    j["notes"] = r.notes;
    return j;
}

void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

}  // namespace

OracleReport run_oracle(const RunConfig& cfg, const Trajectory* trajectory) {
    const ComplexMatrix h0 = build_h0(cfg.model);
    const ComplexMatrix gamma = build_gamma(cfg.model);
    const QuantumState psi0 = initial_state(cfg);

    Trajectory local;
    if (!trajectory) {
        local = evolve(psi0, h0, gamma, cfg.evolve);
        trajectory = &local;
    }

    OracleReport report;
    report.final_time = trajectory->back().time;
    if (cfg.model.sites() > exact_propagation_max_sites) {
        report.notes.push_back("exact propagation skipped: more than " +
                               std::to_string(exact_propagation_max_sites) + " sites");
        return report;
    }

    const double span = trajectory->back().time - trajectory->front().time;
    const QuantumState exact = propagate_exact(h0, gamma, trajectory->front(), span);
    report.exact_vs_evolved = phase_aligned_distance(trajectory->back().amps, exact.amps);
    try {
        const auto eig = propagate_eigen(h0, gamma, trajectory->front(), span);
        const auto pade = propagate_pade(h0, gamma, trajectory->front(), span);
        report.eigen_vs_pade = (eig.amps - pade.amps).norm();
    } catch (const NumericalError& e) {
        report.notes.push_back(std::string("eigen route unavailable: ") + e.what());
    }

    const std::vector<ComplexMatrix> couplings{coupling_from_gamma(gamma, cfg.oracle.g2tau)};
    if (!cfg.oracle.taus.empty()) {
        const double g = std::sqrt(cfg.oracle.g2tau / cfg.oracle.taus.front());
        report.effective_hamiltonian_deviation =
            effective_hamiltonian_check(build_meter_model(cfg.model, 2, couplings, g));
        report.postselection =
            postselection_convergence(cfg.model, couplings, psi0, cfg.oracle.g2tau, cfg.oracle.taus);
    }
    return report;
}

RunResult simulate(const RunConfig& cfg) {
    const ModelSpec& model = cfg.model;
    const Lattice& lat = model.lattice;
    const ComplexMatrix h0 = build_h0(model);
    const ComplexMatrix gamma = build_gamma(model);

    RunResult result;
    result.warnings = check_evolve_config(cfg.evolve, h0, gamma);
    result.trajectory = evolve(initial_state(cfg), h0, gamma, cfg.evolve);

    const PoissonSolver poisson(lat);
    result.neutralizing_background = poisson.neutralizing_background();
    for (const auto& state : result.trajectory) {
        result.currents.push_back(compute_currents(state, model, gamma, cfg.fields.enable));
        result.phi.push_back(poisson.solve(density(state), model.charge));
    }

    if (cfg.fields.enable && result.trajectory.size() >= 3) {
        const double spacing = cfg.evolve.dt * cfg.evolve.record_every;
        std::vector<VectorField> history;
        for (const auto& cs : result.currents) history.push_back(*cs.j_tilde_trans);
        const auto a = vector_potentials(cfg, history, spacing);

        for (std::size_t k = 1; k + 1 < result.trajectory.size(); ++k) {
            const std::array<PotentialSample, 3> window{
                PotentialSample{result.trajectory[k - 1].time, result.phi[k - 1], a[k - 1]},
                PotentialSample{result.trajectory[k].time, result.phi[k], a[k]},
                PotentialSample{result.trajectory[k + 1].time, result.phi[k + 1], a[k + 1]}};
            const GammaShift shift = gamma_shift(gamma, result.trajectory[k]);
            const double shifted_mean = result.trajectory[k].amps.dot(shift.action).real();
            result.fields.push_back(assemble_fields(window, lat, shifted_mean));
        }
    }

    if (cfg.oracle.enable) result.oracle = run_oracle(cfg, &result.trajectory);
    return result;
}

void write_outputs(const RunConfig& cfg, const RunResult& result, const std::filesystem::path& dir,
                   OutputFormat formats) {
    std::filesystem::create_directories(dir);
    json meta = meta_json(cfg, result.neutralizing_background, result.warnings);
    meta["records"] = result.trajectory.size();
    meta["formats"] = std::string(to_string(formats));
    meta["fields_solver"] = cfg.fields.enable ? json(std::string(to_string(cfg.fields.solver))) : json(nullptr);
    write_json(dir / "run_meta.json", meta);

    const Lattice& lat = cfg.model.lattice;
    if (formats != OutputFormat::ndjson) {
        std::vector<ObservableRow> obs;
        std::vector<CurrentRow> cur;
        for (std::size_t k = 0; k < result.trajectory.size(); ++k) {
            const auto rho = density(result.trajectory[k]);
            const auto& cs = result.currents[k];
            for (int x = 0; x < lat.size(); ++x)
                obs.push_back({result.trajectory[k].time, x, rho[x], cs.s[x], result.phi[k][x]});
            auto rows = current_rows(lat, cs);
            cur.insert(cur.end(), rows.begin(), rows.end());
        }
        std::ofstream o(dir / "observables.csv");
        write_observables_csv(o, obs);
        std::ofstream c(dir / "currents.csv");
        write_currents_csv(c, cur);
        if (!o || !c) throw Error("failed writing CSV tables to '" + dir.string() + "'");
    }
    if (formats != OutputFormat::csv && cfg.fields.enable) {
        std::ofstream f(dir / "fields.ndjson");
        write_fields_ndjson(f, result.fields);
        if (!f) throw Error("failed writing fields.ndjson to '" + dir.string() + "'");
    }
    if (result.oracle) write_json(dir / "oracle_report.json", oracle_json(*result.oracle));
}

void write_oracle_outputs(const RunConfig& cfg, const OracleReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    PoissonSolver probe(cfg.model.lattice);
    write_json(dir / "run_meta.json", meta_json(cfg, probe.neutralizing_background(), {}));
    write_json(dir / "oracle_report.json", oracle_json(report));
}

}  // namespace nhc
