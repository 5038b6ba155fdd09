#include "nhcurrent/config.hpp"

#include "nhcurrent/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace nhc {

using nlohmann::json;

std::string_view to_string(InitialKind k) noexcept {
    switch (k) {
        case InitialKind::localized: return "localized";
        case InitialKind::gaussian: return "gaussian";
        case InitialKind::plane_wave: return "plane_wave";
        case InitialKind::custom: return "custom";
    }
    return "";
}

std::string_view to_string(FieldSolver s) noexcept {
    switch (s) {
        case FieldSolver::quasistatic: return "quasistatic";
        case FieldSolver::retarded: return "retarded";
        case FieldSolver::wave: return "wave";
    }
    return "";
}

std::string_view to_string(OutputFormat f) noexcept {
    switch (f) {
        case OutputFormat::csv: return "csv";
        case OutputFormat::ndjson: return "ndjson";
        case OutputFormat::both: return "both";
    }
    return "";
}

FieldSolver parse_field_solver(std::string_view name) {
    if (name == "quasistatic") return FieldSolver::quasistatic;
    if (name == "retarded") return FieldSolver::retarded;
    if (name == "wave") return FieldSolver::wave;
    throw InvalidInput("unknown field solver '" + std::string(name) + "' (expected quasistatic|retarded|wave)");
}

OutputFormat parse_output_format(std::string_view name) {
    if (name == "csv") return OutputFormat::csv;
    if (name == "ndjson") return OutputFormat::ndjson;
    if (name == "both") return OutputFormat::both;
    throw InvalidInput("unknown output format '" + std::string(name) + "' (expected csv|ndjson|both)");
}

namespace {

std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

// Thin cursor over a JSON object that remembers its dotted path.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    const std::string& path() const { return path_; }

    void allow_only(std::initializer_list<const char*> keys) const {
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!allowed.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
    }

    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key) const {
        if (!j_.contains(key)) throw ConfigError(join(path_, key), "missing key");
        return j_.at(key);
    }
    Node child(const char* key) const { return Node(raw(key), join(path_, key)); }
    std::string key_path(const char* key) const { return join(path_, key); }

    double number(const char* key) const {
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ConfigError(key_path(key), "must be finite");
        return d;
    }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    int integer(const char* key) const {
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
        const auto i = v.get<long long>();
        if (i < std::numeric_limits<int>::min() || i > std::numeric_limits<int>::max())
            throw ConfigError(key_path(key), "integer out of range");
        return static_cast<int>(i);
    }
    int integer(const char* key, int fallback) const { return has(key) ? integer(key) : fallback; }

    bool boolean(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(key_path(key), "expected true or false");
        return v.get<bool>();
    }

    std::string string(const char* key) const {
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
        return v.get<std::string>();
    }
    std::string string(const char* key, std::string fallback) const { return has(key) ? string(key) : fallback; }

private:
    const json& j_;
    std::string path_;
};

std::vector<double> number_list(const json& v, const std::string& path) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError(path, "expected a number or an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(v[i].get<double>());
        if (!std::isfinite(out.back())) throw ConfigError(path + "[" + std::to_string(i) + "]", "must be finite");
    }
    return out;
}

RealMatrix real_matrix(const json& v, const std::string& path, int n) {
    if (!v.is_array() || static_cast<int>(v.size()) != n)
        throw ConfigError(path, "expected " + std::to_string(n) + " rows");
    RealMatrix m(n, n);
    for (int r = 0; r < n; ++r) {
        const std::string rp = path + "[" + std::to_string(r) + "]";
        auto row = number_list(v[static_cast<std::size_t>(r)], rp);
        if (static_cast<int>(row.size()) != n) throw ConfigError(rp, "expected " + std::to_string(n) + " columns");
        for (int c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
    }
    return m;
}

ComplexMatrix complex_matrix(const Node& node, int n) {
    node.allow_only({"real", "imag"});
    ComplexMatrix m = real_matrix(node.raw("real"), node.key_path("real"), n).cast<Complex>();
    if (node.has("imag")) m += Complex{0.0, 1.0} * real_matrix(node.raw("imag"), node.key_path("imag"), n).cast<Complex>();
    return m;
}

Lattice parse_lattice(const Node& node) {
    node.allow_only({"dim", "extent", "boundary", "spacing"});
    const auto ext_d = number_list(node.raw("extent"), node.key_path("extent"));
    std::vector<int> extent;
    for (std::size_t i = 0; i < ext_d.size(); ++i) {
        const double e = ext_d[i];
        if (e != std::floor(e) || e < 2 || e > 1 << 20)
            throw ConfigError(node.key_path("extent") + "[" + std::to_string(i) + "]", "extent must be an integer >= 2");
        extent.push_back(static_cast<int>(e));
    }
    if (extent.empty() || extent.size() > 2) throw ConfigError(node.key_path("extent"), "lattice must be 1D or 2D");
    if (node.has("dim") && node.integer("dim") != static_cast<int>(extent.size()))
        throw ConfigError(node.key_path("dim"), "dim does not match the number of extents");

    Boundary boundary = Boundary::open;
    if (node.has("boundary")) {
        try {
            boundary = parse_boundary(node.string("boundary"));
        } catch (const ConfigError&) {
            throw;
        } catch (const InvalidInput& e) {
            throw ConfigError(node.key_path("boundary"), e.what());
        }
    }
    const double spacing = node.number("spacing", 1.0);
    if (!(spacing > 0.0)) throw ConfigError(node.key_path("spacing"), "must be positive");
    long long total = 1;
    for (int e : extent) total *= e;
    if (total > 4096) throw ConfigError(node.key_path("extent"), "at most 4096 sites are supported");
    return Lattice(extent, boundary, spacing);
}

GammaSpec parse_gamma(const Node& node, int n) {
    const std::string kind = node.string("kind", "none");
    if (kind == "none") {
        node.allow_only({"kind"});
        return OnsiteGamma{RealVector::Zero(n)};
    }
    if (kind == "onsite") {
        node.allow_only({"kind", "values"});
        auto vals = number_list(node.raw("values"), node.key_path("values"));
        if (static_cast<int>(vals.size()) != n)
            throw ConfigError(node.key_path("values"), "expected " + std::to_string(n) + " values, got " +
                                                           std::to_string(vals.size()));
        return OnsiteGamma{Eigen::Map<RealVector>(vals.data(), n)};
    }
    if (kind == "matrix") {
        node.allow_only({"kind", "real", "imag"});
        ComplexMatrix m = real_matrix(node.raw("real"), node.key_path("real"), n).cast<Complex>();
        if (node.has("imag"))
            m += Complex{0.0, 1.0} * real_matrix(node.raw("imag"), node.key_path("imag"), n).cast<Complex>();
        const double dev = hermiticity_deviation(m);
        if (!(dev <= hermiticity_tolerance)) {
            std::ostringstream os;
            os << "matrix is not Hermitian (max deviation " << dev << ")";
            throw ConfigError(node.key_path("real"), os.str());
        }
        return MatrixGamma{m};
    }
    if (kind == "jumps") {
        node.allow_only({"kind", "ops"});
        const json& ops = node.raw("ops");
        if (!ops.is_array()) throw ConfigError(node.key_path("ops"), "expected an array of matrices");
        JumpGamma g;
        for (std::size_t i = 0; i < ops.size(); ++i)
            g.ops.push_back(complex_matrix(Node(ops[i], node.key_path("ops") + "[" + std::to_string(i) + "]"), n));
        return g;
    }
    throw ConfigError(node.key_path("kind"), "unknown gamma kind '" + kind + "' (expected none|onsite|matrix|jumps)");
}

ModelSpec parse_model(const Node& node) {
    node.allow_only({"lattice", "hopping", "potential", "charge", "gamma"});
    ModelSpec model(parse_lattice(node.child("lattice")));
    const int n = model.sites();
    model.hopping = node.number("hopping", 1.0);
    if (!(model.hopping > 0.0)) throw ConfigError(node.key_path("hopping"), "must be positive");
    model.charge = node.number("charge", 1.0);
    if (node.has("potential")) {
        auto v = number_list(node.raw("potential"), node.key_path("potential"));
        if (v.size() == 1 && n != 1)
            model.potential = RealVector::Constant(n, v[0]);
        else if (static_cast<int>(v.size()) == n)
            model.potential = Eigen::Map<RealVector>(v.data(), n);
        else
            throw ConfigError(node.key_path("potential"), "expected a number or " + std::to_string(n) + " values");
    }
    if (node.has("gamma")) model.gamma = parse_gamma(node.child("gamma"), n);
    return model;
}

EvolveConfig parse_evolve(const Node& node) {
    node.allow_only({"dt", "steps", "method", "record_every"});
    EvolveConfig cfg;
    cfg.dt = node.number("dt", cfg.dt);
    if (!(cfg.dt > 0.0)) throw ConfigError(node.key_path("dt"), "must be positive");
    cfg.steps = node.integer("steps", cfg.steps);
    if (cfg.steps < 0) throw ConfigError(node.key_path("steps"), "must be >= 0");
    cfg.record_every = node.integer("record_every", cfg.record_every);
    if (cfg.record_every < 1) throw ConfigError(node.key_path("record_every"), "must be >= 1");
    if (node.has("method")) {
        try {
            cfg.method = parse_method(node.string("method"));
        } catch (const ConfigError&) {
            throw;
        } catch (const InvalidInput& e) {
            throw ConfigError(node.key_path("method"), e.what());
        }
    }
    return cfg;
}

InitialSpec parse_initial(const Node& node, const Lattice& lat) {
    InitialSpec init;
    const std::string kind = node.string("kind", "localized");
    const int dim = lat.dim();
    auto per_axis = [&](const char* key, std::vector<double> fallback) {
        if (!node.has(key)) return fallback;
        auto v = number_list(node.raw(key), node.key_path(key));
        if (static_cast<int>(v.size()) != dim)
            throw ConfigError(node.key_path(key), "expected " + std::to_string(dim) + " components");
        return v;
    };

    if (kind == "localized") {
        node.allow_only({"kind", "site"});
        init.kind = InitialKind::localized;
        if (node.has("site")) {
            const json& s = node.raw("site");
            if (s.is_array()) {
                auto c = number_list(s, node.key_path("site"));
                if (static_cast<int>(c.size()) != dim)
                    throw ConfigError(node.key_path("site"), "expected " + std::to_string(dim) + " coordinates");
                std::array<int, Lattice::max_dim> coords{};
                for (int a = 0; a < dim; ++a) {
                    const double ca = c[static_cast<std::size_t>(a)];
                    if (ca != std::floor(ca) || ca < 0 || ca >= lat.extent(a))
                        throw ConfigError(node.key_path("site"), "coordinate out of range");
                    coords[static_cast<std::size_t>(a)] = static_cast<int>(ca);
                }
                init.site = lat.index(coords);
            } else {
                init.site = node.integer("site");
            }
        }
        if (init.site < 0 || init.site >= lat.size())
            throw ConfigError(node.key_path("site"), "site " + std::to_string(init.site) + " out of range");
    } else if (kind == "gaussian") {
        node.allow_only({"kind", "center", "width", "k"});
        init.kind = InitialKind::gaussian;
        init.center = per_axis("center", std::vector<double>(static_cast<std::size_t>(dim), 0.0));
        init.width = node.number("width", 1.0);
        if (!(init.width > 0.0)) throw ConfigError(node.key_path("width"), "must be positive");
        init.k = per_axis("k", std::vector<double>(static_cast<std::size_t>(dim), 0.0));
    } else if (kind == "plane_wave") {
        node.allow_only({"kind", "k"});
        init.kind = InitialKind::plane_wave;
        if (!node.has("k")) throw ConfigError(node.key_path("k"), "missing key");
        init.k = per_axis("k", {});
    } else if (kind == "custom") {
        node.allow_only({"kind", "amplitudes"});
        init.kind = InitialKind::custom;
        const json& amps = node.raw("amplitudes");
        const std::string p = node.key_path("amplitudes");
        if (!amps.is_array() || static_cast<int>(amps.size()) != lat.size())
            throw ConfigError(p, "expected " + std::to_string(lat.size()) + " amplitudes");
        init.amplitudes.resize(lat.size());
        for (int x = 0; x < lat.size(); ++x) {
            const json& a = amps[static_cast<std::size_t>(x)];
            const std::string ap = p + "[" + std::to_string(x) + "]";
            if (a.is_number()) {
                init.amplitudes[x] = a.get<double>();
            } else if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) {
                init.amplitudes[x] = Complex{a[0].get<double>(), a[1].get<double>()};
            } else {
                throw ConfigError(ap, "expected a number or a [re, im] pair");
            }
        }
        if (!init.amplitudes.allFinite()) throw ConfigError(p, "amplitudes must be finite");
        const double nrm = init.amplitudes.norm();
        if (!(nrm > 1e-300)) throw ConfigError(p, "amplitudes must not all vanish");
        init.amplitudes /= nrm;
    } else {
        throw ConfigError(node.key_path("kind"),
                          "unknown initial kind '" + kind + "' (expected localized|gaussian|plane_wave|custom)");
    }
    return init;
}

RunConfig parse_document(const json& doc) {
    const Node root(doc, "");
    root.allow_only({"model", "evolve", "initial", "fields", "oracle", "output"});

    RunConfig cfg(parse_model(root.child("model")));
    if (root.has("evolve")) cfg.evolve = parse_evolve(root.child("evolve"));
    if (root.has("initial")) cfg.initial = parse_initial(root.child("initial"), cfg.model.lattice);

    if (root.has("fields")) {
        const Node f = root.child("fields");
        f.allow_only({"enable", "solver"});
        cfg.fields.enable = f.boolean("enable", false);
        if (f.has("solver")) {
            try {
                cfg.fields.solver = parse_field_solver(f.string("solver"));
            } catch (const ConfigError&) {
                throw;
            } catch (const InvalidInput& e) {
                throw ConfigError(f.key_path("solver"), e.what());
            }
        }
    }
    if (root.has("oracle")) {
        const Node o = root.child("oracle");
        o.allow_only({"enable", "g2tau", "taus"});
        cfg.oracle.enable = o.boolean("enable", false);
        cfg.oracle.g2tau = o.number("g2tau", cfg.oracle.g2tau);
        if (!(cfg.oracle.g2tau > 0.0)) throw ConfigError(o.key_path("g2tau"), "must be positive");
        if (o.has("taus")) {
            cfg.oracle.taus = number_list(o.raw("taus"), o.key_path("taus"));
            for (double t : cfg.oracle.taus)
                if (!(t > 0.0)) throw ConfigError(o.key_path("taus"), "every tau must be positive");
        }
    }
    if (root.has("output")) {
        const Node o = root.child("output");
        o.allow_only({"directory", "formats"});
        cfg.output.directory = o.string("directory", cfg.output.directory);
        if (o.has("formats")) {
            try {
                cfg.output.formats = parse_output_format(o.string("formats"));
            } catch (const ConfigError&) {
                throw;
            } catch (const InvalidInput& e) {
                throw ConfigError(o.key_path("formats"), e.what());
            }
        }
    }

    const Lattice& lat = cfg.model.lattice;
    if (cfg.fields.enable) {
        if (!lat.periodic() && lat.dim() == 2)
            throw ConfigError("fields.enable", "field solves on open 2D lattices are not supported");
        if (cfg.fields.solver == FieldSolver::wave) {
            if (!lat.periodic()) throw ConfigError("fields.solver", "the wave solver needs a periodic lattice");
            const double spacing = cfg.evolve.dt * cfg.evolve.record_every;
            if (spacing > 1.0 / std::sqrt(static_cast<double>(lat.dim())))
                throw ConfigError("evolve.record_every", "recorded time step violates the wave solver CFL bound");
        }
    }
    if (cfg.initial.kind == InitialKind::plane_wave && !lat.periodic())
        throw ConfigError("initial.kind", "plane_wave needs a periodic lattice");

    try {
        cfg.model.validate();
    } catch (const InvalidInput& e) {
        throw ConfigError("model", e.what());
    }
    cfg.source_json = doc.dump(2);
    return cfg;
}

}  // namespace

RunConfig parse_config_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError("", std::string("malformed JSON: ") + e.what());
    }
    return parse_document(doc);
}

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

QuantumState initial_state(const RunConfig& cfg) {
    const Lattice& lat = cfg.model.lattice;
    const int n = lat.size();
    const auto& init = cfg.initial;
    ComplexVector amps = ComplexVector::Zero(n);
    switch (init.kind) {
        case InitialKind::localized:
            amps[init.site] = 1.0;
            break;
        case InitialKind::custom:
            amps = init.amplitudes;
            break;
        case InitialKind::gaussian:
        case InitialKind::plane_wave:
            for (int x = 0; x < n; ++x) {
                const auto c = lat.coords(x);
                double r2 = 0.0;
                double phase = 0.0;
                for (int a = 0; a < lat.dim(); ++a) {
                    const auto ua = static_cast<std::size_t>(a);
                    phase += init.k[ua] * c[ua];
                    if (init.kind == InitialKind::gaussian) {
                        double d = c[ua] - init.center[ua];
                        if (lat.periodic()) {
                            const double len = lat.extent(a);
                            d -= len * std::round(d / len);
                        }
                        r2 += d * d;
                    }
                }
                const double env = init.kind == InitialKind::gaussian ? std::exp(-r2 / (2.0 * init.width * init.width)) : 1.0;
                amps[x] = env * Complex{std::cos(phase), std::sin(phase)};
            }
            break;
    }
    return QuantumState::normalized(std::move(amps), 0.0);
}

}  // namespace nhc
