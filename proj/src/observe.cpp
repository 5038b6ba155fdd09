#include "nhcurrent/observe.hpp"

#include "nhcurrent/error.hpp"
#include "nhcurrent/evolve.hpp"

#include <cmath>
#include <sstream>

namespace nhc {

SiteField density(const QuantumState& state) {
    return state.amps.cwiseAbs2();
}

BondField bond_current(const QuantumState& state, const Lattice& lat, double hopping) {
    if (state.size() != lat.size()) throw InvalidInput("state size does not match lattice");
    BondField j(lat.dim(), lat.size());
    const auto& psi = state.amps;
    for (int a = 0; a < lat.dim(); ++a)
        for (int x = 0; x < lat.size(); ++x)
            if (auto y = lat.neighbor(x, a, +1)) j[a][x] = 2.0 * hopping * (std::conj(psi[x]) * psi[*y]).imag();
    return j;
}

BondField bond_current(const QuantumState& state, const ModelSpec& model) {
    return bond_current(state, model.lattice, model.hopping);
}

double expectation(const ComplexMatrix& op, const QuantumState& state) {
    if (op.rows() != state.size() || op.cols() != state.size())
        throw InvalidInput("operator shape does not match state");
    const Complex v = state.amps.dot(op * state.amps);
    if (std::abs(v.imag()) > 1e-10) {
        std::ostringstream os;
        os << "expectation value has imaginary part " << v.imag() << "; operator is not Hermitian";
        throw InvalidInput(os.str());
    }
    return v.real();
}

double ehrenfest_rhs(const ComplexMatrix& op, const QuantumState& state, const ComplexMatrix& h0,
                     const ComplexMatrix& gamma) {
    const GammaShift shift = gamma_shift(gamma, state);
    const ComplexMatrix shifted = gamma - shift.mean * ComplexMatrix::Identity(gamma.rows(), gamma.cols());
    const ComplexMatrix generator =
        Complex{0.0, 1.0} * (h0 * op - op * h0) + (shifted * op + op * shifted);
    return expectation(generator, state);
}

SiteField source_term(const QuantumState& state, const ComplexMatrix& gamma) {
    const GammaShift shift = gamma_shift(gamma, state);
    // Gamma psi - <Gamma> psi already carries the shift, so
    // s_x = 2 Re(conj(psi_x) (Gamma(t) psi)_x).
    return 2.0 * (state.amps.conjugate().cwiseProduct(shift.action)).real();
}

SiteField density_rate(std::span<const QuantumState> window) {
    if (window.size() != 3) throw InvalidInput("density_rate needs exactly three states");
    const double dt_lo = window[1].time - window[0].time;
    const double dt_hi = window[2].time - window[1].time;
    if (!(dt_lo > 0.0) || std::abs(dt_hi - dt_lo) > 1e-9 * std::max(1.0, std::abs(dt_lo)))
        throw InvalidInput("inconsistent timestamps in three-state window");
    return (density(window[2]) - density(window[0])) / (dt_lo + dt_hi);
}

SiteField eoc_residual(std::span<const QuantumState> window, const Lattice& lat, double hopping) {
    SiteField r = density_rate(window);
    r += divergence(lat, bond_current(window[1], lat, hopping));
    return r;
}

}  // namespace nhc
