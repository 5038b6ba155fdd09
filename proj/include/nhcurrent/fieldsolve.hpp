#pragma once

#include "nhcurrent/lattice.hpp"
#include "nhcurrent/model.hpp"

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace nhc {

/// Solves -laplacian(phi) = q rho.
///
/// Periodic lattices: spectral solve against a uniform neutralizing
/// background (rho - mean(rho)), gauge fixed by mean(phi) = 0.
/// Open lattices: Dirichlet phi = 0 on the zero-padded ring outside the
/// lattice, sparse Cholesky factorization reused across solves.
class PoissonSolver {
public:
    explicit PoissonSolver(const Lattice& lat);
    ~PoissonSolver();
    PoissonSolver(PoissonSolver&&) noexcept;
    PoissonSolver& operator=(PoissonSolver&&) noexcept;

    /// Throws NumericalError if the Gauss-law residual exceeds 1e-10 * max(1, |q rho|_inf).
    SiteField solve(const SiteField& rho, double q) const;

    /// True when a neutralizing background is subtracted (periodic lattices).
    bool neutralizing_background() const noexcept { return lat_.periodic(); }

    /// Charge density the solution actually satisfies: q rho, minus its mean if periodic.
    SiteField effective_charge(const SiteField& rho, double q) const;

private:
    struct Factorization;

    Lattice lat_;
    std::unique_ptr<Factorization> factor_;
};

SiteField poisson_phi(const SiteField& rho, double q, const Lattice& lat);

struct HelmholtzParts {
    VectorField longitudinal;  // gradient of a scalar: curl-free
    VectorField transverse;    // divergence-free, includes the uniform (k = 0) mode
};

/// Spectral longitudinal/transverse split of a staggered vector field on a
/// periodic lattice; long(k) = D(k) (D(k)^dagger v(k)) / |D(k)|^2 with the
/// forward-difference symbol D_a(k) = e^{i k_a} - 1. Throws Unsupported on
/// open lattices.
HelmholtzParts helmholtz(const VectorField& v, const Lattice& lat);

/// helmholtz() on periodic lattices; on an open 1D chain every bond field is
/// a gradient, so the split is (v, 0). Open 2D lattices are Unsupported.
HelmholtzParts decompose_current(const BondField& v, const Lattice& lat);

struct CorrectedCurrent {
    BondField delta_j;
    BondField j_tilde;  // j + delta_j
};

/// Longitudinal correction delta_j = grad(u) with laplacian(u) = -s, so that
/// div(j + delta_j) = div(j) - s. Periodic lattices solve spectrally with
/// zero-mean u; an open chain uses the cumulative sum
/// delta_{x -> x+1} = -sum_{y <= x} s_y; open 2D solves the Neumann graph
/// Laplacian. Throws InvalidInput when |sum(s)| > 1e-8.
BondField current_correction(const SiteField& s, const Lattice& lat);
CorrectedCurrent corrected_current(const BondField& j, const SiteField& s, const Lattice& lat);

/// Per-time bundle of conventional, source, correction and corrected currents.
struct CurrentSet {
    double time = 0.0;
    BondField j;
    SiteField s;
    BondField delta_j;
    BondField j_tilde;
    std::optional<VectorField> j_tilde_long;
    std::optional<VectorField> j_tilde_trans;
};

CurrentSet compute_currents(const QuantumState& state, const ModelSpec& model, const ComplexMatrix& gamma,
                            bool decompose);

/// Classical potentials and fields at one time. `a`, `e` are bond fields;
/// `b` is the 2D scalar curl (absent in 1D).
struct FieldSnapshot {
    double time = 0.0;
    SiteField phi;
    VectorField a;
    VectorField e;
    std::optional<SiteField> b;
};

/// j_L = (1/q) grad((phi(t+dt) - phi(t-dt)) / (2 dt)) from three equally
/// spaced snapshots. Independent of q since phi scales with q.
VectorField jl_from_phi(std::span<const FieldSnapshot> window, double q, const Lattice& lat);

/// Leapfrog solution of (d_t^2 - laplacian) A = q j_T with A(0) = dA/dt(0) = 0:
///   A_1 = dt^2/2 (q j_0),  A_{n+1} = 2 A_n - A_{n-1} + dt^2 (laplacian A_n + q j_n).
/// Output has one entry per history sample. Periodic lattices only;
/// enforces dt <= 1/sqrt(dim).
std::vector<VectorField> vector_potential_wave(std::span<const VectorField> jt_history, const Lattice& lat,
                                               double dt, double q);

/// Retarded Coulomb-kernel sum on the lattice embedded in 3D:
///   A(x) = 1/(4 pi) sum_{x' != x} q j_T(t_eval - |x - x'|, x') / |x - x'|
/// History samples sit at t = k dt, k = 0..n-1; linear interpolation in time,
/// source 0 before t = 0. Distances use plain lattice coordinates (no periodic
/// images).
VectorField vector_potential_retarded(std::span<const VectorField> jt_history, const Lattice& lat, double dt,
                                      double t_eval, double q);

/// The same kernel sum with t' = t (instantaneous).
VectorField vector_potential_quasistatic(const VectorField& jt, const Lattice& lat, double q);

/// Classical-regime value of <{Gamma(t), A}> = 2 A <Gamma(t)>; zero whenever
/// the norm-preserving shift has been applied.
VectorField classical_gamma_anticommutator(const VectorField& a, double shifted_gamma_mean);

/// Potentials at three equally spaced times.
struct PotentialSample {
    double time = 0.0;
    SiteField phi;
    VectorField a;
};

/// E = -grad(phi) - dA/dt + <{Gamma(t), A}>, B = curl(A) (2D), at the middle time.
FieldSnapshot assemble_fields(std::span<const PotentialSample> window, const Lattice& lat,
                              double shifted_gamma_mean = 0.0);

}  // namespace nhc
