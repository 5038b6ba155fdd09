#pragma once

#include "nhcurrent/model.hpp"

#include <span>
#include <vector>

namespace nhc {

/// Largest system propagate_exact accepts.
inline constexpr int exact_propagation_max_sites = 256;

/// exp(-i (H0 + i Gamma) t) psi0 / ||.|| via eigendecomposition of the
/// non-normal generator. Throws NumericalError when the eigenvector basis is
/// too ill-conditioned (cond > 1e10).
QuantumState propagate_eigen(const ComplexMatrix& h0, const ComplexMatrix& gamma, const QuantumState& psi0, double t);

/// Same propagator via scaling-and-squaring Pade.
QuantumState propagate_pade(const ComplexMatrix& h0, const ComplexMatrix& gamma, const QuantumState& psi0, double t);

/// Eigendecomposition route, falling back to Pade on a defective or
/// ill-conditioned generator.
QuantumState propagate_exact(const ComplexMatrix& h0, const ComplexMatrix& gamma, const QuantumState& psi0, double t);

struct PostselectionResult {
    QuantumState state;
    double success_probability = 0.0;
};

/// Evolves psi0 (x) |chi_{chi_index}> under the composite Hamiltonian for
/// time tau, projects the meter onto that basis state and renormalizes.
PostselectionResult postselect_step(const MeterModel& composite, const QuantumState& psi0, double tau,
                                    int chi_index = 0);

/// The effective non-Hermitian step (1 - i H tau) psi0 / ||.|| with
/// H = H0 - (i/2) g^2 tau sum_m A_m^dagger A_m.
QuantumState effective_step(const MeterModel& composite, const QuantumState& psi0, double tau);

/// || <chi|H_int^2|chi> - g^2 sum_m A_m^dagger A_m ||_max.
double effective_hamiltonian_check(const MeterModel& composite);

struct ConvergenceRow {
    double tau = 0.0;
    double g = 0.0;
    double deviation = 0.0;            // || postselected - effective ||
    double success_probability = 0.0;
    double ratio = 0.0;                // previous deviation / this deviation (0 for the first row)
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    bool monotone = false;
    double fitted_exponent = 0.0;  // least-squares slope of log(deviation) vs log(tau)
};

/// Postselected composite step against the effective step for each tau at
/// fixed g^2 tau = `g2tau` (so g = sqrt(g2tau / tau)).
ConvergenceStudy postselection_convergence(const ModelSpec& sys, std::span<const ComplexMatrix> couplings,
                                           const QuantumState& psi0, double g2tau, std::span<const double> taus);

struct Derivative {
    std::vector<double> values;
    // Endpoints use one-sided O(dt) differences.
    bool endpoints_low_accuracy = true;
};

/// Centered differences of a uniformly sampled series (>= 3 samples).
Derivative finite_diff(std::span<const double> series, double dt);

}  // namespace nhc
