#pragma once

#include "nhcurrent/lattice.hpp"

#include <array>

namespace nhc::detail {

/// Discrete Fourier transform over a periodic lattice, same row-major layout
/// in real and reciprocal space. Inverse includes the 1/N factor.
class LatticeFft {
public:
    explicit LatticeFft(const Lattice& lat);

    ComplexVector forward(const ComplexVector& f) const;
    ComplexVector inverse(const ComplexVector& fk) const;

    ComplexVector forward(const SiteField& f) const { return forward(ComplexVector(f.cast<Complex>())); }
    SiteField inverse_real(const ComplexVector& fk) const { return inverse(fk).real(); }

    /// Wavevector component k_a = 2 pi m / L_a of reciprocal index `kidx`.
    double wavenumber(int kidx, int axis) const;

    /// Forward-difference symbol e^{i k_a} - 1 (gradient along `axis`).
    Complex difference_symbol(int kidx, int axis) const;

    /// sum_a |e^{i k_a} - 1|^2 = sum_a (2 - 2 cos k_a), minus the Laplacian symbol.
    double laplacian_magnitude(int kidx) const;

private:
    ComplexVector transform(const ComplexVector& f, bool inverse) const;

    Lattice lat_;
};

}  // namespace nhc::detail
