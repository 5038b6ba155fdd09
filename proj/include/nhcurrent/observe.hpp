#pragma once

#include "nhcurrent/lattice.hpp"
#include "nhcurrent/model.hpp"

#include <span>

namespace nhc {

/// rho_x = |psi_x|^2.
SiteField density(const QuantumState& state);

/// Conventional current derived from H0:  j_{x -> x+e} = 2 t Im(conj(psi_x) psi_{x+e}).
/// Positive values flow along +e. With Gamma = 0 this makes
/// d rho/dt = -div j hold exactly on the lattice.
BondField bond_current(const QuantumState& state, const Lattice& lat, double hopping);
BondField bond_current(const QuantumState& state, const ModelSpec& model);

/// <psi|O|psi> for Hermitian O. Throws InvalidInput when the imaginary
/// residue exceeds 1e-10 (a non-Hermitian O was passed).
double expectation(const ComplexMatrix& op, const QuantumState& state);

/// <psi| i[H0, O] + {Gamma - <Gamma>, O} |psi>: exact d<O>/dt under the
/// norm-preserving flow.
double ehrenfest_rhs(const ComplexMatrix& op, const QuantumState& state, const ComplexMatrix& h0,
                     const ComplexMatrix& gamma);

/// s_x = 2 Re(conj(psi_x) (Gamma psi)_x) - 2 <Gamma> rho_x, the local
/// violation of the conventional continuity equation. Sums to zero.
SiteField source_term(const QuantumState& state, const ComplexMatrix& gamma);

/// r_x = (rho_x(t+dt) - rho_x(t-dt)) / (2 dt) + (div j)_x(t) from three
/// equally spaced states; equals source_term(t) up to O(dt^2).
SiteField eoc_residual(std::span<const QuantumState> window, const Lattice& lat, double hopping);

/// d rho/dt by centered difference over a three-state window.
SiteField density_rate(std::span<const QuantumState> window);

}  // namespace nhc
