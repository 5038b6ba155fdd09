#include "nhcurrent/oracle.hpp"

#include "nhcurrent/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace nhc {

namespace {

constexpr Complex I{0.0, 1.0};

void require_dense_size(const ComplexMatrix& h0, const ComplexMatrix& gamma, const QuantumState& psi0) {
    const auto n = psi0.size();
    if (h0.rows() != n || h0.cols() != n || gamma.rows() != n || gamma.cols() != n)
        throw InvalidInput("propagator operands do not match the state size");
    if (n > exact_propagation_max_sites)
        throw InvalidInput("exact propagation is limited to " + std::to_string(exact_propagation_max_sites) +
                           " sites");
}

}  // namespace

QuantumState propagate_eigen(const ComplexMatrix& h0, const ComplexMatrix& gamma, const QuantumState& psi0, double t) {
    require_dense_size(h0, gamma, psi0);
    const ComplexMatrix h = h0 + I * gamma;
    Eigen::ComplexEigenSolver<ComplexMatrix> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of H failed");

    const ComplexMatrix& v = es.eigenvectors();
    Eigen::PartialPivLU<ComplexMatrix> lu(v);
    const double cond = 1.0 / lu.rcond();
    if (!std::isfinite(cond) || cond > 1e10) {
        std::ostringstream os;
        os << "eigenvector basis is ill-conditioned (cond ~ " << cond << "); H is (nearly) defective";
        throw NumericalError(os.str());
    }
    ComplexVector coeff = lu.solve(psi0.amps);
    const ComplexVector phases = (-I * t * es.eigenvalues().array()).exp().matrix();
    return QuantumState::normalized(v * phases.cwiseProduct(coeff), psi0.time + t);
}

QuantumState propagate_pade(const ComplexMatrix& h0, const ComplexMatrix& gamma, const QuantumState& psi0, double t) {
    require_dense_size(h0, gamma, psi0);
    const ComplexMatrix u = ((-I * t) * (h0 + I * gamma)).exp();
    if (!u.allFinite()) throw NumericalError("Pade matrix exponential did not converge");
    return QuantumState::normalized(u * psi0.amps, psi0.time + t);
}

QuantumState propagate_exact(const ComplexMatrix& h0, const ComplexMatrix& gamma, const QuantumState& psi0, double t) {
    try {
        return propagate_eigen(h0, gamma, psi0, t);
    } catch (const NumericalError&) {
        return propagate_pade(h0, gamma, psi0, t);
    }
}

PostselectionResult postselect_step(const MeterModel& composite, const QuantumState& psi0, double tau,
                                    int chi_index) {
    const int n = composite.system_dim;
    if (psi0.size() != n) throw InvalidInput("state does not match the composite system dimension");
    if (chi_index < 0 || chi_index >= composite.meter_dim) throw InvalidInput("meter index out of range");

    ComplexVector full = ComplexVector::Zero(composite.hamiltonian.rows());
    full.segment(Eigen::Index{chi_index} * n, n) = psi0.amps;
    const ComplexMatrix u = ((-I * tau) * composite.hamiltonian).exp();
    const ComplexVector evolved = u * full;

    ComplexVector projected = evolved.segment(Eigen::Index{chi_index} * n, n);
    const double prob = projected.squaredNorm();
    if (!(prob >= 1e-300)) throw NumericalError("postselection probability vanished");
    return {QuantumState::normalized(std::move(projected), psi0.time + tau), prob};
}

QuantumState effective_step(const MeterModel& composite, const QuantumState& psi0, double tau) {
    const int n = composite.system_dim;
    ComplexMatrix lindblad_sum = ComplexMatrix::Zero(n, n);
    for (const auto& a : composite.couplings) lindblad_sum += a.adjoint() * a;
    const double g2tau = composite.g * composite.g * tau;
    const ComplexMatrix h = composite.system_h0 - (0.5 * g2tau) * I * lindblad_sum;
    ComplexVector next = psi0.amps - (I * tau) * (h * psi0.amps);
    return QuantumState::normalized(std::move(next), psi0.time + tau);
}

double effective_hamiltonian_check(const MeterModel& composite) {
    const int n = composite.system_dim;
    const ComplexMatrix sq = composite.interaction * composite.interaction;
    ComplexMatrix expected = ComplexMatrix::Zero(n, n);
    for (const auto& a : composite.couplings) expected += (composite.g * composite.g) * (a.adjoint() * a);
    return (composite.block(sq, 0, 0) - expected).cwiseAbs().maxCoeff();
}

ConvergenceStudy postselection_convergence(const ModelSpec& sys, std::span<const ComplexMatrix> couplings,
                                           const QuantumState& psi0, double g2tau, std::span<const double> taus) {
    if (!(g2tau > 0.0)) throw InvalidInput("g^2 tau must be positive");
    ConvergenceStudy study;
    const int meter_dim = static_cast<int>(couplings.size()) + 1;
    for (double tau : taus) {
        if (!(tau > 0.0)) throw InvalidInput("tau must be positive");
        ConvergenceRow row;
        row.tau = tau;
        row.g = std::sqrt(g2tau / tau);
        const MeterModel composite = build_meter_model(sys, meter_dim, couplings, row.g);
        const auto post = postselect_step(composite, psi0, tau);
        const auto eff = effective_step(composite, psi0, tau);
        row.deviation = (post.state.amps - eff.amps).norm();
        row.success_probability = post.success_probability;
        if (!study.rows.empty() && row.deviation > 0.0) row.ratio = study.rows.back().deviation / row.deviation;
        study.rows.push_back(row);
    }

    study.monotone = !study.rows.empty();
    for (std::size_t i = 1; i < study.rows.size(); ++i)
        if (!(study.rows[i].deviation < study.rows[i - 1].deviation)) study.monotone = false;

    if (study.rows.size() >= 2) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(study.rows.size());
        for (const auto& r : study.rows) {
            const double lx = std::log(r.tau);
            const double ly = std::log(std::max(r.deviation, 1e-300));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        study.fitted_exponent = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return study;
}

Derivative finite_diff(std::span<const double> series, double dt) {
    if (series.size() < 3) throw InvalidInput("finite_diff needs at least 3 samples");
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    const std::size_t n = series.size();
    Derivative d;
    d.values.resize(n);
    d.values[0] = (series[1] - series[0]) / dt;
    d.values[n - 1] = (series[n - 1] - series[n - 2]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i) d.values[i] = (series[i + 1] - series[i - 1]) / (2.0 * dt);
    return d;
}

}  // namespace nhc
