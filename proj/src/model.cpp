#include "nhcurrent/model.hpp"

#include "nhcurrent/error.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace nhc {

namespace {

std::string shape(const ComplexMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

ModelSpec::ModelSpec(Lattice lat, double t)
    : lattice(std::move(lat)),
      hopping(t),
      potential(RealVector::Zero(lattice.size())),
      gamma(OnsiteGamma{RealVector::Zero(lattice.size())}) {}

void ModelSpec::validate() const {
    const auto n = lattice.size();
    if (!(hopping > 0.0) || !std::isfinite(hopping)) throw InvalidInput("hopping must be positive and finite");
    if (potential.size() != n)
        throw InvalidInput("potential has " + std::to_string(potential.size()) + " entries, lattice has " +
                           std::to_string(n) + " sites");
    if (!potential.allFinite()) throw InvalidInput("potential contains non-finite values");
    if (!std::isfinite(charge)) throw InvalidInput("charge must be finite");

    std::visit(
        [n](const auto& g) {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, OnsiteGamma>) {
                if (g.values.size() != n)
                    throw InvalidInput("onsite gamma has " + std::to_string(g.values.size()) +
                                       " entries, lattice has " + std::to_string(n) + " sites");
                if (!g.values.allFinite()) throw InvalidInput("onsite gamma contains non-finite values");
            } else if constexpr (std::is_same_v<G, MatrixGamma>) {
                if (g.entries.rows() != n || g.entries.cols() != n)
                    throw InvalidInput("gamma matrix is " + shape(g.entries) + ", expected " +
                                       std::to_string(n) + "x" + std::to_string(n));
                const double dev = hermiticity_deviation(g.entries);
                if (!(dev <= hermiticity_tolerance)) {
                    std::ostringstream os;
                    os << "gamma matrix is not Hermitian: max |G - G^dagger| = " << dev << " exceeds "
                       << hermiticity_tolerance;
                    throw InvalidInput(os.str());
                }
            } else {
                for (std::size_t m = 0; m < g.ops.size(); ++m)
                    if (g.ops[m].rows() != n || g.ops[m].cols() != n)
                        throw InvalidInput("jump operator " + std::to_string(m) + " is " + shape(g.ops[m]) +
                                           ", expected " + std::to_string(n) + "x" + std::to_string(n));
            }
        },
        gamma);
}

double hermiticity_deviation(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) return INFINITY;
    if (m.size() == 0) return 0.0;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

ComplexMatrix build_h0(const ModelSpec& model) {
    model.validate();
    const auto& lat = model.lattice;
    const int n = lat.size();
    const double t = model.hopping;

    ComplexMatrix h = ComplexMatrix::Zero(n, n);
    for (int x = 0; x < n; ++x) h(x, x) = 2.0 * lat.dim() * t + model.potential[x];
    for (int a = 0; a < lat.dim(); ++a)
        for (int x = 0; x < n; ++x)
            if (auto y = lat.neighbor(x, a, +1)) {
                h(x, *y) -= t;
                h(*y, x) -= t;
            }
    return h;
}

ComplexMatrix build_gamma(const ModelSpec& model) {
    model.validate();
    const int n = model.sites();
    return std::visit(
        [n](const auto& g) -> ComplexMatrix {
            using G = std::decay_t<decltype(g)>;
            if constexpr (std::is_same_v<G, OnsiteGamma>) {
                return g.values.template cast<Complex>().asDiagonal();
            } else if constexpr (std::is_same_v<G, MatrixGamma>) {
                return g.entries;
            } else {
                ComplexMatrix out = ComplexMatrix::Zero(n, n);
                for (const auto& l : g.ops) out.noalias() -= 0.5 * (l.adjoint() * l);
                return out;
            }
        },
        model.gamma);
}

ComplexMatrix MeterModel::block(const ComplexMatrix& m, int meter_row, int meter_col) const {
    return m.block(Eigen::Index{meter_row} * system_dim, Eigen::Index{meter_col} * system_dim, system_dim,
                   system_dim);
}

MeterModel build_meter_model(const ModelSpec& sys, int meter_dim, std::span<const ComplexMatrix> couplings,
                             double g) {
    const int n = sys.sites();
    if (meter_dim < static_cast<int>(couplings.size()) + 1)
        throw InvalidInput("meter dimension " + std::to_string(meter_dim) + " cannot host " +
                           std::to_string(couplings.size()) + " outcome states plus |chi>");
    for (std::size_t m = 0; m < couplings.size(); ++m)
        if (couplings[m].rows() != n || couplings[m].cols() != n)
            throw InvalidInput("coupling operator " + std::to_string(m) + " is " + shape(couplings[m]) +
                               ", system has " + std::to_string(n) + " sites");

    MeterModel out;
    out.system_dim = n;
    out.meter_dim = meter_dim;
    out.g = g;
    out.system_h0 = build_h0(sys);
    out.couplings.assign(couplings.begin(), couplings.end());

    const Eigen::Index dim = Eigen::Index{n} * meter_dim;
    out.interaction = ComplexMatrix::Zero(dim, dim);
    // A_m (x) |chi_m><chi| fills block (m, 0); its adjoint fills block (0, m).
    for (std::size_t m = 0; m < couplings.size(); ++m) {
        const Eigen::Index row = static_cast<Eigen::Index>(m + 1) * n;
        out.interaction.block(row, 0, n, n) += g * couplings[m];
        out.interaction.block(0, row, n, n) += g * couplings[m].adjoint();
    }

    out.hamiltonian = out.interaction;
    for (int k = 0; k < meter_dim; ++k) out.hamiltonian.block(Eigen::Index{k} * n, Eigen::Index{k} * n, n, n) += out.system_h0;
    return out;
}

QuantumState QuantumState::normalized(ComplexVector amps, double time) {
    const double nrm = amps.norm();
    if (!(nrm >= 1e-300) || !std::isfinite(nrm)) throw NumericalError("cannot normalize a state with vanishing or non-finite norm");
    amps /= nrm;
    return QuantumState{std::move(amps), time};
}

}  // namespace nhc
