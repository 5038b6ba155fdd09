#pragma once

#include "nhcurrent/model.hpp"
#include "nhcurrent/types.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace nhc {

enum class Method { rk4_nonlinear, expm_renorm };

Method parse_method(std::string_view name);
std::string_view to_string(Method m) noexcept;

struct EvolveConfig {
    double dt = 1e-3;
    int steps = 1000;
    Method method = Method::rk4_nonlinear;
    int record_every = 10;
};

/// Throws InvalidInput on non-positive dt / record_every or negative steps.
/// Returns advisory warnings, e.g. when dt * ||H||_inf exceeds 0.1.
std::vector<std::string> check_evolve_config(const EvolveConfig& cfg, const ComplexMatrix& h0,
                                             const ComplexMatrix& gamma);

/// Norm-preserving shift Gamma(t) = Gamma - <psi|Gamma|psi>.
struct GammaShift {
    double mean = 0.0;          // <psi|Gamma|psi>
    ComplexVector action;       // Gamma psi - mean * psi
};

/// Requires | ||psi|| - 1 | <= 1e-6.
GammaShift gamma_shift(const ComplexMatrix& gamma, const QuantumState& state);

/// One classic RK4 step of the nonlinear flow
///   d psi/dt = -i H0 psi + (Gamma - <Gamma>_psi) psi
/// with <Gamma>_psi re-evaluated (as a Rayleigh quotient) at every stage,
/// followed by explicit renormalization.
QuantumState step_rk4(const QuantumState& state, const ComplexMatrix& h0, const ComplexMatrix& gamma, double dt);

/// psi <- exp(-i (H0 + i Gamma) dt) psi / ||.||, one-off Pade exponential.
QuantumState step_expm(const QuantumState& state, const ComplexMatrix& h0, const ComplexMatrix& gamma, double dt);

/// Caches exp(-i H dt) for repeated expm_renorm steps.
class ExpmPropagator {
public:
    ExpmPropagator(const ComplexMatrix& h0, const ComplexMatrix& gamma, double dt);

    QuantumState step(const QuantumState& state) const;
    const ComplexMatrix& matrix() const noexcept { return propagator_; }

private:
    ComplexMatrix propagator_;
    double dt_;
};

using Trajectory = std::vector<QuantumState>;

/// Applies `cfg.steps` steps, recording step 0 and every `cfg.record_every`-th step.
Trajectory evolve(const QuantumState& initial, const ComplexMatrix& h0, const ComplexMatrix& gamma,
                  const EvolveConfig& cfg);
Trajectory evolve(const QuantumState& initial, const ModelSpec& model, const EvolveConfig& cfg);

/// min over theta of || a - e^{i theta} b ||.
double phase_aligned_distance(const ComplexVector& a, const ComplexVector& b);

}  // namespace nhc
