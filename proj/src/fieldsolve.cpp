#include "nhcurrent/fieldsolve.hpp"

#include "nhcurrent/error.hpp"
#include "nhcurrent/evolve.hpp"
#include "nhcurrent/observe.hpp"
#include "spectral.hpp"

#include <Eigen/Sparse>

#include <cmath>
#include <numbers>
#include <sstream>

namespace nhc {

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

constexpr double source_sum_tolerance = 1e-8;

// Dirichlet-padded -laplacian on an open lattice (SPD).
SparseMatrix dirichlet_operator(const Lattice& lat) {
    std::vector<Eigen::Triplet<double>> trip;
    for (int x = 0; x < lat.size(); ++x) {
        trip.emplace_back(x, x, 2.0 * lat.dim());
        for (int a = 0; a < lat.dim(); ++a)
            for (int step : {+1, -1})
                if (auto y = lat.neighbor(x, a, step)) trip.emplace_back(x, *y, -1.0);
    }
    SparseMatrix m(lat.size(), lat.size());
    m.setFromTriplets(trip.begin(), trip.end());
    return m;
}

void require_sites(const SiteField& f, const Lattice& lat, const char* what) {
    if (f.size() != lat.size())
        throw InvalidInput(std::string(what) + " has " + std::to_string(f.size()) + " entries, lattice has " +
                           std::to_string(lat.size()) + " sites");
}

void require_field(const VectorField& v, const Lattice& lat, const char* what) {
    if (v.dim() != lat.dim() || v.sites() != lat.size())
        throw InvalidInput(std::string(what) + " does not match the lattice shape");
}

void check_window_times(std::span<const double> times) {
    const double lo = times[1] - times[0];
    const double hi = times[2] - times[1];
    if (!(lo > 0.0) || std::abs(hi - lo) > 1e-9 * std::max(1.0, std::abs(lo)))
        throw InvalidInput("mismatched snapshot times: expected three equally spaced times");
}

BondField correction_open_chain(const SiteField& s, const Lattice& lat) {
    BondField dj(1, lat.size());
    double acc = 0.0;
    for (int x = 0; x + 1 < lat.size(); ++x) {
        acc += s[x];
        dj[0][x] = -acc;
    }
    return dj;
}

// Neumann graph Laplacian div(grad u) = -s on an open lattice, u pinned at site 0.
BondField correction_open_graph(const SiteField& s, const Lattice& lat) {
    const int n = lat.size();
    std::vector<Eigen::Triplet<double>> trip;
    for (int x = 1; x < n; ++x) {
        int degree = 0;
        for (int a = 0; a < lat.dim(); ++a)
            for (int step : {+1, -1})
                if (auto y = lat.neighbor(x, a, step)) {
                    ++degree;
                    if (*y != 0) trip.emplace_back(x - 1, *y - 1, -1.0);
                }
        trip.emplace_back(x - 1, x - 1, static_cast<double>(degree));
    }
    SparseMatrix m(n - 1, n - 1);
    m.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SparseMatrix> solver(m);
    if (solver.info() != Eigen::Success) throw NumericalError("graph Laplacian factorization failed");
    // -div(grad u) = s restricted to sites 1..n-1.
    RealVector rhs = s.tail(n - 1);
    RealVector sol = solver.solve(rhs);
    SiteField u = SiteField::Zero(n);
    u.tail(n - 1) = sol;
    return gradient(lat, u);
}

}  // namespace

struct PoissonSolver::Factorization {
    Eigen::SimplicialLLT<SparseMatrix> llt;
    SparseMatrix op;
};

PoissonSolver::PoissonSolver(const Lattice& lat) : lat_(lat) {
    if (!lat.periodic()) {
        factor_ = std::make_unique<Factorization>();
        factor_->op = dirichlet_operator(lat);
        factor_->llt.compute(factor_->op);
        if (factor_->llt.info() != Eigen::Success) throw NumericalError("Poisson factorization failed");
    }
}

PoissonSolver::~PoissonSolver() = default;
PoissonSolver::PoissonSolver(PoissonSolver&&) noexcept = default;
PoissonSolver& PoissonSolver::operator=(PoissonSolver&&) noexcept = default;

SiteField PoissonSolver::effective_charge(const SiteField& rho, double q) const {
    SiteField c = q * rho;
    if (lat_.periodic()) c.array() -= c.mean();
    return c;
}

SiteField PoissonSolver::solve(const SiteField& rho, double q) const {
    require_sites(rho, lat_, "rho");
    const SiteField charge = effective_charge(rho, q);
    SiteField phi;
    if (lat_.periodic()) {
        const detail::LatticeFft fft(lat_);
        ComplexVector ck = fft.forward(charge);
        for (int k = 0; k < lat_.size(); ++k) {
            const double mag = fft.laplacian_magnitude(k);
            ck[k] = mag > 1e-14 ? ck[k] / mag : Complex{0.0, 0.0};
        }
        phi = fft.inverse_real(ck);
    } else {
        phi = factor_->llt.solve(charge);
    }

    const double residual = (laplacian(lat_, phi) + charge).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, charge.cwiseAbs().maxCoeff());
    if (!(residual <= 1e-10 * scale)) {
        std::ostringstream os;
        os << "Poisson solve residual " << residual << " exceeds tolerance";
        throw NumericalError(os.str());
    }
    return phi;
}

SiteField poisson_phi(const SiteField& rho, double q, const Lattice& lat) {
    return PoissonSolver(lat).solve(rho, q);
}

HelmholtzParts helmholtz(const VectorField& v, const Lattice& lat) {
    if (!lat.periodic())
        throw Unsupported("spectral Helmholtz decomposition needs a periodic lattice (open boundary given)");
    require_field(v, lat, "vector field");
    const detail::LatticeFft fft(lat);
    const int dim = lat.dim();

    std::vector<ComplexVector> vk;
    for (int a = 0; a < dim; ++a) vk.push_back(fft.forward(v[a]));

    std::vector<ComplexVector> lk(static_cast<std::size_t>(dim), ComplexVector::Zero(lat.size()));
    for (int k = 0; k < lat.size(); ++k) {
        const double mag = fft.laplacian_magnitude(k);
        if (mag <= 1e-14) continue;  // uniform mode stays transverse
        Complex proj{0.0, 0.0};
        for (int a = 0; a < dim; ++a) proj += std::conj(fft.difference_symbol(k, a)) * vk[static_cast<std::size_t>(a)][k];
        proj /= mag;
        for (int a = 0; a < dim; ++a) lk[static_cast<std::size_t>(a)][k] = fft.difference_symbol(k, a) * proj;
    }

    HelmholtzParts out{VectorField(dim, lat.size()), VectorField(dim, lat.size())};
    for (int a = 0; a < dim; ++a) {
        out.longitudinal[a] = fft.inverse_real(lk[static_cast<std::size_t>(a)]);
        out.transverse[a] = v[a] - out.longitudinal[a];
    }
    return out;
}

HelmholtzParts decompose_current(const BondField& v, const Lattice& lat) {
    if (lat.periodic()) return helmholtz(v, lat);
    if (lat.dim() == 1) {
        require_field(v, lat, "current");
        return {v, VectorField(1, lat.size())};
    }
    throw Unsupported("longitudinal/transverse split is not available on open 2D lattices");
}

BondField current_correction(const SiteField& s, const Lattice& lat) {
    require_sites(s, lat, "source term");
    const double total = s.sum();
    if (!(std::abs(total) <= source_sum_tolerance)) {
        std::ostringstream os;
        os << "inconsistent source: sum(s) = " << total << " (must vanish for a number-conserving model)";
        throw InvalidInput(os.str());
    }
    if (lat.periodic()) {
        const detail::LatticeFft fft(lat);
        ComplexVector sk = fft.forward(s);
        for (int k = 0; k < lat.size(); ++k) {
            const double mag = fft.laplacian_magnitude(k);
            sk[k] = mag > 1e-14 ? sk[k] / mag : Complex{0.0, 0.0};
        }
        return gradient(lat, fft.inverse_real(sk));
    }
    if (lat.dim() == 1) return correction_open_chain(s, lat);
    return correction_open_graph(s, lat);
}

CorrectedCurrent corrected_current(const BondField& j, const SiteField& s, const Lattice& lat) {
    require_field(j, lat, "current");
    CorrectedCurrent out;
    out.delta_j = current_correction(s, lat);
    out.j_tilde = j + out.delta_j;
    return out;
}

CurrentSet compute_currents(const QuantumState& state, const ModelSpec& model, const ComplexMatrix& gamma,
                            bool decompose) {
    CurrentSet cs;
    cs.time = state.time;
    cs.j = bond_current(state, model);
    cs.s = source_term(state, gamma);
    auto corr = corrected_current(cs.j, cs.s, model.lattice);
    cs.delta_j = std::move(corr.delta_j);
    cs.j_tilde = std::move(corr.j_tilde);
    if (decompose) {
        auto parts = decompose_current(cs.j_tilde, model.lattice);
        cs.j_tilde_long = std::move(parts.longitudinal);
        cs.j_tilde_trans = std::move(parts.transverse);
    }
    return cs;
}

VectorField jl_from_phi(std::span<const FieldSnapshot> window, double q, const Lattice& lat) {
    if (window.size() != 3) throw InvalidInput("jl_from_phi needs exactly three snapshots");
    if (q == 0.0) throw InvalidInput("jl_from_phi needs a nonzero charge");
    const std::array<double, 3> times{window[0].time, window[1].time, window[2].time};
    check_window_times(times);
    for (const auto& snap : window) require_sites(snap.phi, lat, "phi");
    const SiteField dphi = (window[2].phi - window[0].phi) / (times[2] - times[0]);
    return (1.0 / q) * gradient(lat, dphi);
}

std::vector<VectorField> vector_potential_wave(std::span<const VectorField> jt_history, const Lattice& lat,
                                               double dt, double q) {
    if (!lat.periodic()) throw Unsupported("wave-equation vector potential needs a periodic lattice");
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    const double cfl = 1.0 / std::sqrt(static_cast<double>(lat.dim()));
    if (dt > cfl) {
        std::ostringstream os;
        os << "CFL violation: dt = " << dt << " exceeds 1/sqrt(dim) = " << cfl;
        throw InvalidInput(os.str());
    }
    for (const auto& j : jt_history) require_field(j, lat, "transverse current");

    const int dim = lat.dim();
    std::vector<VectorField> a;
    a.reserve(jt_history.size());
    if (jt_history.empty()) return a;
    a.emplace_back(dim, lat.size());
    if (jt_history.size() == 1) return a;

    const double dt2 = dt * dt;
    VectorField first(dim, lat.size());
    for (int c = 0; c < dim; ++c) first[c] = 0.5 * dt2 * (laplacian(lat, a[0][c]) + q * jt_history[0][c]);
    a.push_back(std::move(first));

    for (std::size_t n = 1; n + 1 < jt_history.size(); ++n) {
        VectorField next(dim, lat.size());
        for (int c = 0; c < dim; ++c)
            next[c] = 2.0 * a[n][c] - a[n - 1][c] + dt2 * (laplacian(lat, a[n][c]) + q * jt_history[n][c]);
        a.push_back(std::move(next));
    }
    return a;
}

namespace {

double site_distance(const Lattice& lat, int x, int y) {
    const auto cx = lat.coords(x);
    const auto cy = lat.coords(y);
    double d2 = 0.0;
    for (int a = 0; a < lat.dim(); ++a) {
        const double d = cx[static_cast<std::size_t>(a)] - cy[static_cast<std::size_t>(a)];
        d2 += d * d;
    }
    return std::sqrt(d2);
}

}  // namespace

VectorField vector_potential_retarded(std::span<const VectorField> jt_history, const Lattice& lat, double dt,
                                      double t_eval, double q) {
    if (jt_history.empty()) throw InvalidInput("empty current history");
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    for (const auto& j : jt_history) require_field(j, lat, "transverse current");
    const double t_end = dt * static_cast<double>(jt_history.size() - 1);
    if (t_eval < 0.0 || t_eval > t_end * (1.0 + 1e-12) + 1e-12) {
        std::ostringstream os;
        os << "t_eval = " << t_eval << " outside stored history [0, " << t_end << "]";
        throw InvalidInput(os.str());
    }

    const int dim = lat.dim();
    const int last = static_cast<int>(jt_history.size()) - 1;
    const double prefactor = q / (4.0 * std::numbers::pi);
    VectorField a(dim, lat.size());
    for (int x = 0; x < lat.size(); ++x)
        for (int y = 0; y < lat.size(); ++y) {
            if (y == x) continue;
            const double r = site_distance(lat, x, y);
            const double tr = t_eval - r;
            if (tr < 0.0) continue;
            const double pos = std::min(tr / dt, static_cast<double>(last));
            const int k0 = std::min(static_cast<int>(std::floor(pos)), last);
            const int k1 = std::min(k0 + 1, last);
            const double w = pos - k0;
            for (int c = 0; c < dim; ++c) {
                const double jv = (1.0 - w) * jt_history[static_cast<std::size_t>(k0)][c][y] +
                                  w * jt_history[static_cast<std::size_t>(k1)][c][y];
                a[c][x] += prefactor * jv / r;
            }
        }
    return a;
}

VectorField vector_potential_quasistatic(const VectorField& jt, const Lattice& lat, double q) {
    require_field(jt, lat, "transverse current");
    const double prefactor = q / (4.0 * std::numbers::pi);
    VectorField a(lat.dim(), lat.size());
    for (int x = 0; x < lat.size(); ++x)
        for (int y = 0; y < lat.size(); ++y) {
            if (y == x) continue;
            const double r = site_distance(lat, x, y);
            for (int c = 0; c < lat.dim(); ++c) a[c][x] += prefactor * jt[c][y] / r;
        }
    return a;
}

VectorField classical_gamma_anticommutator(const VectorField& a, double shifted_gamma_mean) {
    return (2.0 * shifted_gamma_mean) * a;
}

FieldSnapshot assemble_fields(std::span<const PotentialSample> window, const Lattice& lat,
                              double shifted_gamma_mean) {
    if (window.size() != 3) throw InvalidInput("assemble_fields needs exactly three potential samples");
    const std::array<double, 3> times{window[0].time, window[1].time, window[2].time};
    check_window_times(times);
    for (const auto& w : window) {
        require_sites(w.phi, lat, "phi");
        require_field(w.a, lat, "vector potential");
    }

    const auto& mid = window[1];
    FieldSnapshot snap;
    snap.time = mid.time;
    snap.phi = mid.phi;
    snap.a = mid.a;
    const VectorField dadt = (1.0 / (times[2] - times[0])) * (window[2].a - window[0].a);
    snap.e = (-1.0 * gradient(lat, mid.phi)) - dadt + classical_gamma_anticommutator(mid.a, shifted_gamma_mean);
    if (lat.dim() == 2) snap.b = curl(lat, mid.a);
    return snap;
}

}  // namespace nhc
