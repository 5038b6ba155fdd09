// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance --only N   run criterion N alone (exit status reflects it)

#include "nhcurrent/config.hpp"
#include "nhcurrent/evolve.hpp"
#include "nhcurrent/fieldsolve.hpp"
#include "nhcurrent/observe.hpp"
#include "nhcurrent/oracle.hpp"
#include "nhcurrent/pipeline.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace nhc;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits, one block per criterion.
namespace tol {
constexpr double norm_drift = 1e-9;             // 1
constexpr double corrected_eoc = 5e-6;          // 2
constexpr double source_match = 5e-6;           // 2
constexpr double ratio_lo = 3.5, ratio_hi = 4.5;  // 2, 5: "about 4x" on halving dt
constexpr double hermitian_floor = 1e-10;       // 3
constexpr double scheme_gap = 1e-6;             // 4
constexpr double postselect_lo = 2.5, postselect_hi = 3.2;  // 6
constexpr double route_gap = 1e-5;              // 7
constexpr double gauss = 1e-10;                 // 8
constexpr double helmholtz = 1e-10;             // 8
constexpr double source_sum = 1e-12;            // 9
constexpr double density_sum = 1e-9;            // 9
constexpr double q_invariant = 1e-12;           // 10
constexpr double q_linear = 1e-10;              // 10
constexpr double retarded_gap = 1e-10;          // 11
}  // namespace tol

struct Verdict {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double time_limit;  // seconds, 0 when the criterion states none
    std::function<Verdict()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// N = 64 open chain with a mixed-sign onsite Gamma and a moving wavepacket.
constexpr int chain_sites = 64;
constexpr double gamma_amplitude = 0.5;

ModelSpec lossy_chain() {
    ModelSpec m(Lattice({chain_sites}, Boundary::open));
    RealVector g(chain_sites);
    for (int x = 0; x < chain_sites; ++x)
        g[x] = gamma_amplitude * std::sin(2.0 * std::numbers::pi * 3.0 * x / chain_sites);
    m.gamma = OnsiteGamma{g};
    return m;
}

QuantumState chain_packet() { return fixtures::wavepacket(chain_sites, 20.0, 4.0, 0.5); }

ModelSpec lossy_ring(int n) {
    ModelSpec m(Lattice({n}, Boundary::periodic));
    RealVector g(n);
    for (int x = 0; x < n; ++x) g[x] = -0.4 * std::exp(-std::pow((x - n / 2.0) / 5.0, 2)) + 0.1 * std::cos(0.3 * x);
    m.gamma = OnsiteGamma{g};
    return m;
}

ModelSpec lossy_torus(int l) {
    ModelSpec m(Lattice({l, l}, Boundary::periodic));
    RealVector g(l * l);
    for (int i = 0; i < l * l; ++i) {
        const double dx = i / l - l / 2.0, dy = i % l - l / 2.0;
        g[i] = -0.3 * std::exp(-(dx * dx + dy * dy) / 8.0) + 0.05 * std::sin(0.7 * i);
    }
    m.gamma = OnsiteGamma{g};
    return m;
}

QuantumState torus_packet(int l) {
    ComplexVector v(l * l);
    for (int i = 0; i < l * l; ++i) {
        const double x = i / l, y = i % l;
        const double r2 = (x - 6) * (x - 6) + (y - 6) * (y - 6);
        v[i] = std::exp(-r2 / (2 * 2.5 * 2.5)) * std::exp(fixtures::I * (0.6 * x + 0.3 * y));
    }
    return QuantumState::normalized(v);
}

// Max over interior windows of |d rho/dt + div j| and |d rho/dt + div j~|,
// plus the largest gap between the first residual and the source term.
struct EocScan {
    double conventional = 0.0;
    double corrected = 0.0;
    double source_gap = 0.0;
};

EocScan scan_eoc(const Trajectory& traj, const ModelSpec& m, const ComplexMatrix& gamma) {
    EocScan out;
    for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
        const std::span<const QuantumState> w(traj.data() + k - 1, 3);
        const SiteField r = eoc_residual(w, m.lattice, m.hopping);
        const SiteField s = source_term(traj[k], gamma);
        const auto cc = corrected_current(bond_current(traj[k], m), s, m.lattice);
        const SiteField rt = density_rate(w) + divergence(m.lattice, cc.j_tilde);
        out.conventional = std::max(out.conventional, r.cwiseAbs().maxCoeff());
        out.corrected = std::max(out.corrected, rt.cwiseAbs().maxCoeff());
        out.source_gap = std::max(out.source_gap, (r - s).cwiseAbs().maxCoeff());
    }
    return out;
}

Verdict norm_preservation() {
    const ModelSpec m = lossy_chain();
    const auto traj = evolve(chain_packet(), m, EvolveConfig{1e-3, 10000, Method::rk4_nonlinear, 1});
    double worst = 0.0;
    for (const auto& s : traj) worst = std::max(worst, std::abs(s.norm() - 1.0));
    return {worst < tol::norm_drift, fmt("max | ||psi|| - 1 | = %.3e over %zu states (< %.0e)", worst, traj.size(),
                                         tol::norm_drift)};
}

Verdict eoc_violation_and_repair() {
    const ModelSpec m = lossy_chain();
    const ComplexMatrix gamma = build_gamma(m);
    const auto coarse = scan_eoc(evolve(chain_packet(), m, EvolveConfig{1e-3, 10000, Method::rk4_nonlinear, 1}), m, gamma);
    const auto fine = scan_eoc(evolve(chain_packet(), m, EvolveConfig{5e-4, 20000, Method::rk4_nonlinear, 1}), m, gamma);
    const double ratio = coarse.corrected / fine.corrected;
    // O(1) * ||gamma||: clearly nonzero, bounded by a few times the loss scale.
    const bool violated = coarse.conventional > 1e-2 * gamma_amplitude && coarse.conventional < 10.0 * gamma_amplitude;
    const bool pass = violated && coarse.source_gap < tol::source_match && coarse.corrected < tol::corrected_eoc &&
                      ratio >= tol::ratio_lo && ratio <= tol::ratio_hi;
    return {pass, fmt("|drho+div j| = %.3e, |r - s| = %.3e, |drho+div j~| = %.3e (dt=1e-3), %.3e (dt=5e-4), ratio %.2f",
                      coarse.conventional, coarse.source_gap, coarse.corrected, fine.corrected, ratio)};
}

Verdict hermitian_regression() {
    // Centered differences carry an O(dt^2) truncation error, so the 1e-10
    // floor is checked on a finely resolved window sequence.
    ModelSpec m = lossy_chain();
    m.gamma = OnsiteGamma{RealVector::Zero(chain_sites)};
    const ComplexMatrix gamma = build_gamma(m);
    const auto traj = evolve(chain_packet(), m, EvolveConfig{1e-5, 2000, Method::rk4_nonlinear, 1});
    double s_max = 0.0, dj_max = 0.0, gap = 0.0;
    for (const auto& st : traj) {
        const SiteField s = source_term(st, gamma);
        const BondField j = bond_current(st, m);
        const auto cc = corrected_current(j, s, m.lattice);
        s_max = std::max(s_max, s.cwiseAbs().maxCoeff());
        dj_max = std::max(dj_max, cc.delta_j.max_abs());
        gap = std::max(gap, (cc.j_tilde - j).max_abs());
    }
    const auto eoc = scan_eoc(traj, m, gamma);
    const bool pass = s_max < tol::hermitian_floor && dj_max < tol::hermitian_floor && gap == 0.0 &&
                      eoc.conventional < tol::hermitian_floor && eoc.corrected < tol::hermitian_floor;
    return {pass, fmt("max|s| = %.1e, max|dj| = %.1e, max|j~ - j| = %.1e, EOC residuals %.2e / %.2e (dt=1e-5)", s_max,
                      dj_max, gap, eoc.conventional, eoc.corrected)};
}

Verdict scheme_equivalence() {
    double worst = 0.0;
    auto compare = [&](const ModelSpec& m, const QuantumState& psi) {
        const auto a = evolve(psi, m, EvolveConfig{1e-3, 1000, Method::rk4_nonlinear, 10});
        const auto b = evolve(psi, m, EvolveConfig{1e-3, 1000, Method::expm_renorm, 10});
        for (std::size_t k = 0; k < a.size(); ++k)
            worst = std::max(worst, phase_aligned_distance(a[k].amps, b[k].amps));
    };
    compare(fixtures::canonical_model(), fixtures::basis_state(2, 0));
    compare(lossy_chain(), chain_packet());
    compare(lossy_ring(64), fixtures::wavepacket(64, 24.0, 3.0, 0.8));
    return {worst < tol::scheme_gap, fmt("max phase-aligned distance %.3e at T = 1 (< %.0e)", worst, tol::scheme_gap)};
}

Verdict ehrenfest_identity() {
    std::mt19937_64 rng(20240611);
    const double tc = 0.5;
    double lo = 1e300, hi = 0.0;
    auto check = [&](const ModelSpec& m, const QuantumState& psi0) {
        const ComplexMatrix h0 = build_h0(m), gamma = build_gamma(m);
        auto fd_error = [&](const ComplexMatrix& op, double h) {
            const int steps = static_cast<int>(std::lround(tc / h));
            const auto traj = evolve(psi0, h0, gamma, EvolveConfig{h, steps + 1, Method::rk4_nonlinear, 1});
            const auto& mid = traj[static_cast<std::size_t>(steps)];
            const double fd = (expectation(op, traj[static_cast<std::size_t>(steps) + 1]) -
                               expectation(op, traj[static_cast<std::size_t>(steps) - 1])) / (2 * h);
            return std::abs(fd - ehrenfest_rhs(op, mid, h0, gamma));
        };
        for (int k = 0; k < 5; ++k) {
            const ComplexMatrix op = fixtures::random_hermitian(m.sites(), rng);
            const double ratio = fd_error(op, 2e-2) / fd_error(op, 1e-2);
            lo = std::min(lo, ratio);
            hi = std::max(hi, ratio);
        }
    };
    check(fixtures::canonical_model(), fixtures::basis_state(2, 0));
    check(lossy_ring(32), fixtures::wavepacket(32, 10.0, 3.0, 0.6));
    return {lo >= tol::ratio_lo && hi <= tol::ratio_hi,
            fmt("halving ratios in [%.3f, %.3f] over 10 observables (window [%.1f, %.1f])", lo, hi, tol::ratio_lo,
                tol::ratio_hi)};
}

Verdict postselection_convergence_rate() {
    const ModelSpec sys(Lattice({2}, Boundary::open));
    ComplexMatrix a = ComplexMatrix::Zero(2, 2);
    a(0, 0) = 1.0;
    const std::vector<ComplexMatrix> ops{a};
    const std::vector<double> taus{1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4};
    const auto study = postselection_convergence(sys, ops, fixtures::uniform_state(2), 1.0, taus);
    bool in_window = true;
    std::ostringstream ratios;
    for (std::size_t k = 1; k < study.rows.size(); ++k) {
        const double r = study.rows[k].ratio;
        in_window = in_window && r >= tol::postselect_lo && r <= tol::postselect_hi;
        ratios << (k > 1 ? ", " : "") << fmt("%.3f", r);
    }
    return {study.monotone && in_window,
            fmt("monotone %s, halving ratios [%s], fitted exponent %.3f (window [%.1f, %.1f])",
                study.monotone ? "yes" : "no", ratios.str().c_str(), study.fitted_exponent, tol::postselect_lo,
                tol::postselect_hi)};
}

Verdict longitudinal_route_equivalence() {
    const double dt = 1e-3;
    double worst = 0.0;
    auto check = [&](const ModelSpec& m, const QuantumState& psi0, Method method) {
        const ComplexMatrix gamma = build_gamma(m);
        const auto traj = evolve(psi0, m, EvolveConfig{dt, 1000, method, 1});
        for (std::size_t k : {1u, 250u, 500u, 999u}) {
            std::array<FieldSnapshot, 3> w;
            for (int d = 0; d < 3; ++d) {
                const auto& st = traj[k + d - 1];
                w[d] = FieldSnapshot{st.time, poisson_phi(density(st), m.charge, m.lattice), {}, {}, {}};
            }
            const VectorField jl = jl_from_phi(w, m.charge, m.lattice);
            const auto cs = compute_currents(traj[k], m, gamma, true);
            worst = std::max(worst, (*cs.j_tilde_long - jl).max_abs());
        }
    };
    check(lossy_ring(64), fixtures::wavepacket(64, 24.0, 3.0, 0.8), Method::rk4_nonlinear);
    check(lossy_torus(16), torus_packet(16), Method::expm_renorm);
    return {worst < tol::route_gap, fmt("max |long(j~) - j_L(phi)| = %.3e (< %.0e)", worst, tol::route_gap)};
}

Verdict gauss_and_helmholtz() {
    std::mt19937_64 rng(8);
    double gauss = 0.0;
    for (auto ext : {std::vector<int>{64}, std::vector<int>{16, 16}, std::vector<int>{9, 13}})
        for (auto b : {Boundary::periodic, Boundary::open}) {
            const Lattice lat(ext, b);
            const PoissonSolver solver(lat);
            for (int trial = 0; trial < 5; ++trial) {
                const SiteField rho = density(fixtures::random_state(lat.size(), rng));
                const double q = 0.5 + trial;
                const SiteField phi = solver.solve(rho, q);
                gauss = std::max(gauss, (laplacian(lat, phi) + solver.effective_charge(rho, q)).cwiseAbs().maxCoeff());
            }
        }
    double reassembly = 0.0, cross = 0.0;
    const std::vector<Lattice> lattices{Lattice({64}, Boundary::periodic), Lattice({16, 16}, Boundary::periodic),
                                        Lattice({7, 9}, Boundary::periodic), Lattice({2, 5}, Boundary::periodic)};
    for (int k = 0; k < 100; ++k) {
        const Lattice& lat = lattices[static_cast<std::size_t>(k) % lattices.size()];
        VectorField v(lat.dim(), lat.size());
        for (int a = 0; a < lat.dim(); ++a) v[a] = fixtures::random_real(lat.size(), rng);
        const auto parts = helmholtz(v, lat);
        reassembly = std::max(reassembly, (parts.longitudinal + parts.transverse - v).max_abs());
        cross = std::max(cross, std::abs(parts.longitudinal.dot(parts.transverse)));
    }
    return {gauss < tol::gauss && reassembly < tol::helmholtz && cross < tol::helmholtz,
            fmt("Gauss residual %.2e, reassembly %.2e, |<long, trans>| %.2e on 100 fields", gauss, reassembly, cross)};
}

std::vector<fs::path> canonical_configs() {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(fs::path(NHC_SOURCE_DIR) / "configs"))
        if (e.path().extension() == ".json") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

Verdict conservation_bookkeeping() {
    double s_sum = 0.0, rho_sum = 0.0;
    std::size_t records = 0;
    const auto paths = canonical_configs();
    for (const auto& p : paths) {
        RunConfig cfg = parse_config(p);
        cfg.fields.enable = false;
        cfg.oracle.enable = false;
        const auto result = simulate(cfg);
        for (std::size_t k = 0; k < result.trajectory.size(); ++k) {
            s_sum = std::max(s_sum, std::abs(result.currents[k].s.sum()));
            rho_sum = std::max(rho_sum, std::abs(density(result.trajectory[k]).sum() - 1.0));
        }
        records += result.trajectory.size();
    }
    return {!paths.empty() && s_sum < tol::source_sum && rho_sum < tol::density_sum,
            fmt("max |sum s| = %.2e, max |sum rho - 1| = %.2e over %zu records of %zu runs", s_sum, rho_sum, records,
                paths.size())};
}

Verdict charge_invariance() {
    double invariant = 0.0, linear = 0.0;
    for (const char* name : {"torus16_lossy.json", "ring64_wave.json", "canonical_2site.json"}) {
        RunConfig one = parse_config(fs::path(NHC_SOURCE_DIR) / "configs" / name);
        one.oracle.enable = false;
        RunConfig two = one;
        two.model.charge = 2.0 * one.model.charge;
        const auto r1 = simulate(one), r2 = simulate(two);
        for (std::size_t k = 0; k < r1.currents.size(); ++k) {
            const auto &c1 = r1.currents[k], &c2 = r2.currents[k];
            invariant = std::max({invariant, (c1.s - c2.s).cwiseAbs().maxCoeff(), (c1.delta_j - c2.delta_j).max_abs(),
                                  (c1.j_tilde - c2.j_tilde).max_abs()});
            linear = std::max(linear, (r2.phi[k] - 2.0 * r1.phi[k]).cwiseAbs().maxCoeff());
        }
        for (std::size_t k = 0; k < r1.fields.size(); ++k)
            linear = std::max(linear, (r2.fields[k].e - 2.0 * r1.fields[k].e).max_abs());
    }
    return {invariant < tol::q_invariant && linear < tol::q_linear,
            fmt("max change of s, dj, j~ = %.2e; max |X(2q) - 2 X(q)| for phi, E = %.2e", invariant, linear)};
}

Verdict retarded_vs_quasistatic() {
    std::mt19937_64 rng(11);
    double worst = 0.0;
    for (const auto& lat : {Lattice({16, 16}, Boundary::periodic), Lattice({64}, Boundary::periodic)}) {
        VectorField v(lat.dim(), lat.size());
        for (int a = 0; a < lat.dim(); ++a) v[a] = fixtures::random_real(lat.size(), rng);
        const VectorField jt = helmholtz(v, lat).transverse;
        double diameter = 0.0;
        for (int a = 0; a < lat.dim(); ++a) diameter += std::pow(lat.extent(a) - 1, 2);
        diameter = std::sqrt(diameter);
        const double dt = 0.1, t_eval = std::ceil(diameter) + 2.0;
        const std::vector<VectorField> history(static_cast<std::size_t>(std::lround(t_eval / dt)) + 1, jt);
        const VectorField ret = vector_potential_retarded(history, lat, dt, t_eval, 1.0);
        worst = std::max(worst, (ret - vector_potential_quasistatic(jt, lat, 1.0)).max_abs());
    }
    return {worst < tol::retarded_gap, fmt("max |A_ret - A_qs| = %.2e (< %.0e)", worst, tol::retarded_gap)};
}

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> all{
        {1, "norm preservation", 5.0, norm_preservation},
        {2, "EOC violation then repair", 10.0, eoc_violation_and_repair},
        {3, "Hermitian regression", 5.0, hermitian_regression},
        {4, "scheme equivalence", 30.0, scheme_equivalence},
        {5, "Ehrenfest identity", 10.0, ehrenfest_identity},
        {6, "postselection convergence", 10.0, postselection_convergence_rate},
        {7, "longitudinal route equivalence", 30.0, longitudinal_route_equivalence},
        {8, "Gauss law and Helmholtz exactness", 5.0, gauss_and_helmholtz},
        {9, "conservation bookkeeping", 0.0, conservation_bookkeeping},
        {10, "q-invariance", 0.0, charge_invariance},
        {11, "retarded vs quasi-static", 0.0, retarded_vs_quasistatic},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
            return 2;
        }
    }
    if (only < 0 || only > static_cast<int>(criteria().size())) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 2;
    }

    int failures = 0;
    for (const auto& c : criteria()) {
        if (only && c.id != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::string timing = fmt("%.2fs", secs);
        if (c.time_limit > 0.0) {
            timing += fmt(" / limit %.0fs", c.time_limit);
            if (secs > c.time_limit) {
                v.pass = false;
                v.detail += "; over time limit";
            }
        }
        std::printf("[%s] criterion %2d  %-34s %s (%s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(),
                    timing.c_str());
        std::fflush(stdout);
        if (!v.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
