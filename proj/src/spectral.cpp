#include "spectral.hpp"

#include "nhcurrent/error.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <numbers>
#include <vector>

namespace nhc::detail {

LatticeFft::LatticeFft(const Lattice& lat) : lat_(lat) {
    if (!lat.periodic()) throw Unsupported("spectral solve requires a periodic lattice");
}

ComplexVector LatticeFft::forward(const ComplexVector& f) const { return transform(f, false); }
ComplexVector LatticeFft::inverse(const ComplexVector& fk) const { return transform(fk, true); }

ComplexVector LatticeFft::transform(const ComplexVector& f, bool inverse) const {
    if (f.size() != lat_.size()) throw InvalidInput("field size does not match lattice");
    Eigen::FFT<double> fft;
    ComplexVector out = f;

    // Axis a has extent L_a and stride = product of later extents.
    int stride = 1;
    for (int a = lat_.dim() - 1; a >= 0; --a) {
        const int len = lat_.extent(a);
        const int outer = lat_.size() / (len * stride);
        std::vector<Complex> line(static_cast<std::size_t>(len));
        std::vector<Complex> res(static_cast<std::size_t>(len));
        for (int o = 0; o < outer; ++o)
            for (int s = 0; s < stride; ++s) {
                const int base = o * len * stride + s;
                for (int i = 0; i < len; ++i) line[static_cast<std::size_t>(i)] = out[base + i * stride];
                if (inverse)
                    fft.inv(res, line);
                else
                    fft.fwd(res, line);
                for (int i = 0; i < len; ++i) out[base + i * stride] = res[static_cast<std::size_t>(i)];
            }
        stride *= len;
    }
    return out;
}

double LatticeFft::wavenumber(int kidx, int axis) const {
    const int m = lat_.coords(kidx)[static_cast<std::size_t>(axis)];
    return 2.0 * std::numbers::pi * m / lat_.extent(axis);
}

Complex LatticeFft::difference_symbol(int kidx, int axis) const {
    const double k = wavenumber(kidx, axis);
    return {std::cos(k) - 1.0, std::sin(k)};
}

double LatticeFft::laplacian_magnitude(int kidx) const {
    double s = 0.0;
    for (int a = 0; a < lat_.dim(); ++a) s += 2.0 - 2.0 * std::cos(wavenumber(kidx, a));
    return s;
}

}  // namespace nhc::detail
