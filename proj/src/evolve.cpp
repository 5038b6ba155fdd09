#include "nhcurrent/evolve.hpp"

#include "nhcurrent/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace nhc {

namespace {

constexpr Complex I{0.0, 1.0};

void require_square(const ComplexMatrix& m, Eigen::Index n, const char* what) {
    if (m.rows() != n || m.cols() != n) {
        std::ostringstream os;
        os << what << " is " << m.rows() << "x" << m.cols() << ", state has " << n << " amplitudes";
        throw InvalidInput(os.str());
    }
}

ComplexVector nonlinear_rhs(const ComplexMatrix& h0, const ComplexMatrix& gamma, const ComplexVector& psi) {
    ComplexVector g = gamma * psi;
    const double mean = psi.dot(g).real() / psi.squaredNorm();
    return -I * (h0 * psi) + g - mean * psi;
}

ComplexMatrix exponentiate(const ComplexMatrix& h0, const ComplexMatrix& gamma, double dt) {
    const ComplexMatrix generator = (-I * dt) * (h0 + I * gamma);
    ComplexMatrix u = generator.exp();
    if (!u.allFinite())
        throw NumericalError("matrix exponential did not converge for ||H dt|| = " +
                             std::to_string(generator.cwiseAbs().rowwise().sum().maxCoeff()) +
                             "; reduce dt");
    return u;
}

}  // namespace

Method parse_method(std::string_view name) {
    if (name == "rk4_nonlinear") return Method::rk4_nonlinear;
    if (name == "expm_renorm") return Method::expm_renorm;
    throw InvalidInput("unknown method '" + std::string(name) + "' (expected rk4_nonlinear|expm_renorm)");
}

std::string_view to_string(Method m) noexcept {
    return m == Method::rk4_nonlinear ? "rk4_nonlinear" : "expm_renorm";
}

std::vector<std::string> check_evolve_config(const EvolveConfig& cfg, const ComplexMatrix& h0,
                                             const ComplexMatrix& gamma) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) throw InvalidInput("dt must be positive");
    if (cfg.steps < 0) throw InvalidInput("steps must be non-negative");
    if (cfg.record_every < 1) throw InvalidInput("record_every must be >= 1");

    std::vector<std::string> warnings;
    const double hnorm = (h0 + I * gamma).cwiseAbs().rowwise().sum().maxCoeff();
    if (cfg.dt * hnorm > 0.1) {
        std::ostringstream os;
        os << "dt * ||H||_inf = " << cfg.dt * hnorm << " exceeds 0.1; results may be inaccurate";
        warnings.push_back(os.str());
    }
    return warnings;
}

GammaShift gamma_shift(const ComplexMatrix& gamma, const QuantumState& state) {
    require_square(gamma, state.size(), "gamma");
    const double nrm = state.norm();
    if (!(std::abs(nrm - 1.0) <= 1e-6))
        throw InvalidInput("gamma_shift needs a normalized state, got norm " + std::to_string(nrm));
    GammaShift out;
    out.action = gamma * state.amps;
    out.mean = state.amps.dot(out.action).real();
    out.action -= out.mean * state.amps;
    return out;
}

QuantumState step_rk4(const QuantumState& state, const ComplexMatrix& h0, const ComplexMatrix& gamma, double dt) {
    require_square(h0, state.size(), "h0");
    require_square(gamma, state.size(), "gamma");
    const ComplexVector& psi = state.amps;
    const ComplexVector k1 = nonlinear_rhs(h0, gamma, psi);
    const ComplexVector k2 = nonlinear_rhs(h0, gamma, psi + (0.5 * dt) * k1);
    const ComplexVector k3 = nonlinear_rhs(h0, gamma, psi + (0.5 * dt) * k2);
    const ComplexVector k4 = nonlinear_rhs(h0, gamma, psi + dt * k3);
    ComplexVector next = psi + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    return QuantumState::normalized(std::move(next), state.time + dt);
}

QuantumState step_expm(const QuantumState& state, const ComplexMatrix& h0, const ComplexMatrix& gamma, double dt) {
    return ExpmPropagator(h0, gamma, dt).step(state);
}

ExpmPropagator::ExpmPropagator(const ComplexMatrix& h0, const ComplexMatrix& gamma, double dt)
    : propagator_(exponentiate(h0, gamma, dt)), dt_(dt) {}

QuantumState ExpmPropagator::step(const QuantumState& state) const {
    require_square(propagator_, state.size(), "propagator");
    return QuantumState::normalized(propagator_ * state.amps, state.time + dt_);
}

Trajectory evolve(const QuantumState& initial, const ComplexMatrix& h0, const ComplexMatrix& gamma,
                  const EvolveConfig& cfg) {
    check_evolve_config(cfg, h0, gamma);
    require_square(h0, initial.size(), "h0");
    require_square(gamma, initial.size(), "gamma");

    Trajectory traj;
    traj.reserve(static_cast<std::size_t>(cfg.steps / cfg.record_every + 1));
    QuantumState state = QuantumState::normalized(initial.amps, initial.time);
    traj.push_back(state);

    if (cfg.method == Method::rk4_nonlinear) {
        for (int k = 1; k <= cfg.steps; ++k) {
            state = step_rk4(state, h0, gamma, cfg.dt);
            // Accumulated time drifts; pin it to the step grid.
            state.time = initial.time + k * cfg.dt;
            if (k % cfg.record_every == 0) traj.push_back(state);
        }
    } else {
        if (cfg.steps == 0) return traj;
        const ExpmPropagator prop(h0, gamma, cfg.dt);
        for (int k = 1; k <= cfg.steps; ++k) {
            state = prop.step(state);
            state.time = initial.time + k * cfg.dt;
            if (k % cfg.record_every == 0) traj.push_back(state);
        }
    }
    return traj;
}

Trajectory evolve(const QuantumState& initial, const ModelSpec& model, const EvolveConfig& cfg) {
    return evolve(initial, build_h0(model), build_gamma(model), cfg);
}

double phase_aligned_distance(const ComplexVector& a, const ComplexVector& b) {
    const Complex overlap = b.dot(a);  // <b|a>
    const Complex phase = std::abs(overlap) > 0.0 ? overlap / std::abs(overlap) : Complex{1.0, 0.0};
    return (a - phase * b).norm();
}

}  // namespace nhc
