#pragma once

#include "nhcurrent/lattice.hpp"
#include "nhcurrent/types.hpp"

#include <span>
#include <variant>
#include <vector>

namespace nhc {

/// Tolerance on max|M - M^dagger| for matrices accepted as Hermitian.
inline constexpr double hermiticity_tolerance = 1e-12;

// The non-Hermitian part of H = H0 + i*Gamma, in one of three forms.

/// Complex on-site potential: Gamma = diag(gamma(x)).
struct OnsiteGamma {
    RealVector values;
};

/// Arbitrary (possibly nonlocal) Hermitian Gamma_{xy}.
struct MatrixGamma {
    ComplexMatrix entries;
};

/// Measurement channels: Gamma = -1/2 sum_m L_m^dagger L_m.
struct JumpGamma {
    std::vector<ComplexMatrix> ops;
};

using GammaSpec = std::variant<OnsiteGamma, MatrixGamma, JumpGamma>;

struct ModelSpec {
    Lattice lattice;
    double hopping = 1.0;   // t = 1/(2 m a^2)
    RealVector potential;   // V(x), one entry per site
    double charge = 1.0;    // q, with eps0 = mu0 = 1
    GammaSpec gamma;

    /// Model with zero potential and zero Gamma on `lattice`.
    explicit ModelSpec(Lattice lat, double t = 1.0);

    int sites() const noexcept { return lattice.size(); }

    /// Throws InvalidInput naming the offending field.
    void validate() const;
};

/// Single-particle sector of the kinetic + potential Hamiltonian:
///   (H0 psi)_x = -t sum_{y in nbr(x)} psi_y + (2 dim t + V_x) psi_x
/// Built bond by bond, so a 2-site periodic ring carries both bonds.
ComplexMatrix build_h0(const ModelSpec& model);

/// Gamma as a dense Hermitian matrix. Rejects a non-Hermitian MatrixGamma
/// (deviation reported in the message) and mis-shaped jump operators.
ComplexMatrix build_gamma(const ModelSpec& model);

/// max_{ij} |M_ij - conj(M_ji)|.
double hermiticity_deviation(const ComplexMatrix& m);

/// System coupled to a finite meter with basis {|chi>, |chi_1>, ..., |chi_{D-1}>}.
///
/// Composite states are meter-major: index = meter * N + site, so the
/// Hamiltonian is a D x D grid of N x N blocks. B_m = |chi_m><chi| (m >= 1)
/// and H_int = g sum_m (A_m (x) B_m + A_m^dagger (x) B_m^dagger), so
/// <chi|H_int|chi> = 0 holds by construction.
struct MeterModel {
    ComplexMatrix hamiltonian;    // H0 (x) 1 + H_int
    ComplexMatrix interaction;    // H_int alone
    ComplexMatrix system_h0;
    std::vector<ComplexMatrix> couplings;  // A_m
    double g = 0.0;
    int system_dim = 0;
    int meter_dim = 0;

    /// N x N block <meter_row| M |meter_col> of a composite operator.
    ComplexMatrix block(const ComplexMatrix& m, int meter_row, int meter_col) const;
};

MeterModel build_meter_model(const ModelSpec& sys, int meter_dim, std::span<const ComplexMatrix> couplings,
                             double g);

/// Normalized wavefunction over lattice sites at a given time.
struct QuantumState {
    ComplexVector amps;
    double time = 0.0;

    /// Divides by the norm; throws NumericalError when the norm is below 1e-300.
    static QuantumState normalized(ComplexVector amps, double time = 0.0);

    double norm() const { return amps.norm(); }
    Eigen::Index size() const noexcept { return amps.size(); }
};

/// Tolerance on | ||psi|| - 1 | for states accepted as normalized.
inline constexpr double state_norm_tolerance = 1e-9;

}  // namespace nhc
