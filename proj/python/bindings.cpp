#include "nhcurrent/config.hpp"
#include "nhcurrent/error.hpp"
#include "nhcurrent/observe.hpp"
#include "nhcurrent/pipeline.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace nhc;

namespace {

// Stacks per-record site fields into a (records, sites) array.
RealMatrix stack(const std::vector<SiteField>& rows) {
    if (rows.empty()) return {};
    RealMatrix out(static_cast<Eigen::Index>(rows.size()), rows.front().size());
    for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = rows[k].transpose();
    return out;
}

// (records, dim * sites), axis-major within a record.
RealMatrix stack(const std::vector<VectorField>& rows) {
    if (rows.empty()) return {};
    const int dim = rows.front().dim(), n = rows.front().sites();
    RealMatrix out(static_cast<Eigen::Index>(rows.size()), dim * n);
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (int a = 0; a < dim; ++a) out.block(static_cast<Eigen::Index>(k), a * n, 1, n) = rows[k][a].transpose();
    return out;
}

py::dict result_dict(const RunConfig& cfg, const RunResult& r) {
    std::vector<double> times;
    std::vector<SiteField> rho, s;
    std::vector<VectorField> j, dj, jt;
    for (std::size_t k = 0; k < r.trajectory.size(); ++k) {
        times.push_back(r.trajectory[k].time);
        rho.push_back(density(r.trajectory[k]));
        s.push_back(r.currents[k].s);
        j.push_back(r.currents[k].j);
        dj.push_back(r.currents[k].delta_j);
        jt.push_back(r.currents[k].j_tilde);
    }
    py::dict d;
    d["extent"] = cfg.model.lattice.extent();
    d["time"] = times;
    d["rho"] = stack(rho);
    d["s"] = stack(s);
    d["phi"] = stack(r.phi);
    d["j"] = stack(j);
    d["delta_j"] = stack(dj);
    d["j_tilde"] = stack(jt);
    d["warnings"] = r.warnings;
    d["neutralizing_background"] = r.neutralizing_background;
    return d;
}

py::dict oracle_dict(const OracleReport& r) {
    py::dict d;
    d["final_time"] = r.final_time;
    d["exact_vs_evolved"] = r.exact_vs_evolved;
    d["eigen_vs_pade"] = r.eigen_vs_pade;
    d["effective_hamiltonian_deviation"] = r.effective_hamiltonian_deviation;
    d["notes"] = r.notes;
    if (r.postselection) {
        py::list rows;
        for (const auto& row : r.postselection->rows) {
            py::dict e;
            e["tau"] = row.tau;
            e["g"] = row.g;
            e["deviation"] = row.deviation;
            e["success_probability"] = row.success_probability;
            e["halving_ratio"] = row.ratio;
            rows.append(e);
        }
        py::dict p;
        p["rows"] = rows;
        p["monotone"] = r.postselection->monotone;
        p["fitted_exponent"] = r.postselection->fitted_exponent;
        d["postselection"] = p;
    } else {
        d["postselection"] = py::none();
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Continuity-equation analysis for non-Hermitian lattice dynamics";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    auto invalid = py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
    // The type object is kept alive by pybind11's own registration storage.
    static py::handle config_error = py::register_exception<ConfigError>(m, "ConfigError", invalid.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    // Registered last so it runs first: attaches the dotted key path as `key`.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            py::object exc = py::reinterpret_borrow<py::object>(config_error)(e.what());
            exc.attr("key") = e.key();
            PyErr_SetObject(config_error.ptr(), exc.ptr());
        }
    });

    m.def("version", [] { return std::string(version()); });

    py::class_<RunConfig>(m, "RunConfig")
        .def_property_readonly("sites", [](const RunConfig& c) { return c.model.sites(); })
        .def_property_readonly("extent", [](const RunConfig& c) { return c.model.lattice.extent(); })
        .def_property_readonly("periodic", [](const RunConfig& c) { return c.model.lattice.periodic(); })
        .def_property_readonly("dt", [](const RunConfig& c) { return c.evolve.dt; })
        .def_property_readonly("steps", [](const RunConfig& c) { return c.evolve.steps; })
        .def_property_readonly("record_every", [](const RunConfig& c) { return c.evolve.record_every; })
        .def_property(
            "charge", [](const RunConfig& c) { return c.model.charge; },
            [](RunConfig& c, double q) { c.model.charge = q; })
        .def_property_readonly("json", [](const RunConfig& c) { return c.source_json; });

    m.def("parse_config", &parse_config, py::arg("path"), "Read and validate a JSON run config.");
    m.def("parse_config_text", &parse_config_text, py::arg("text"), "Validate a JSON run config given as text.");

    m.def(
        "simulate",
        [](const RunConfig& cfg) {
            RunResult r;
            {
                py::gil_scoped_release release;
                r = simulate(cfg);
            }
            return result_dict(cfg, r);
        },
        py::arg("config"),
        "Run the pipeline in memory. Arrays are (records, sites); bond fields are "
        "(records, dim * sites), axis-major.");

    m.def(
        "run",
        [](const RunConfig& cfg, const std::filesystem::path& out, const std::string& format) {
            py::gil_scoped_release release;
            write_outputs(cfg, simulate(cfg), out, parse_output_format(format));
        },
        py::arg("config"), py::arg("output_dir"), py::arg("format") = "both",
        "Run the pipeline and write the output tables to `output_dir`.");

    m.def(
        "oracle",
        [](const RunConfig& cfg) {
            OracleReport r;
            {
                py::gil_scoped_release release;
                r = run_oracle(cfg);
            }
            return oracle_dict(r);
        },
        py::arg("config"), "Brute-force oracle checks for a config.");
}
