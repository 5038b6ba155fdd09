#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <vector>

namespace nhc {

using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Real value per lattice site (density, source term, potentials).
using SiteField = Eigen::VectorXd;

/// One SiteField per lattice axis.
///
/// For bond quantities (currents, vector potential, electric field) the entry
/// `axis[a][x]` lives on the directed bond x -> x + e_a, i.e. the fields sit on
/// a staggered grid. Bonds that would leave an open lattice hold 0.
struct VectorField {
    std::vector<SiteField> axis;

    VectorField() = default;
    VectorField(int dim, Eigen::Index sites) : axis(static_cast<std::size_t>(dim), SiteField::Zero(sites)) {}

    int dim() const noexcept { return static_cast<int>(axis.size()); }
    Eigen::Index sites() const noexcept { return axis.empty() ? 0 : axis.front().size(); }

    SiteField& operator[](int a) { return axis[static_cast<std::size_t>(a)]; }
    const SiteField& operator[](int a) const { return axis[static_cast<std::size_t>(a)]; }

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double s);

    /// max over axes and sites of |value|.
    double max_abs() const;
    /// Sum over axes of the Euclidean inner product.
    double dot(const VectorField& o) const;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

using BondField = VectorField;

}  // namespace nhc
