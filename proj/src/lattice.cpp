#include "nhcurrent/lattice.hpp"

#include "nhcurrent/error.hpp"

#include <cmath>
#include <string>

namespace nhc {

VectorField& VectorField::operator+=(const VectorField& o) {
    for (int a = 0; a < dim(); ++a) (*this)[a] += o[a];
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
    for (int a = 0; a < dim(); ++a) (*this)[a] -= o[a];
    return *this;
}

VectorField& VectorField::operator*=(double s) {
    for (auto& c : axis) c *= s;
    return *this;
}

double VectorField::max_abs() const {
    double m = 0.0;
    for (const auto& c : axis)
        if (c.size() > 0) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
}

double VectorField::dot(const VectorField& o) const {
    double s = 0.0;
    for (int a = 0; a < dim(); ++a) s += (*this)[a].dot(o[a]);
    return s;
}

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

Boundary parse_boundary(std::string_view name) {
    if (name == "periodic") return Boundary::periodic;
    if (name == "open") return Boundary::open;
    throw InvalidInput("unknown boundary '" + std::string(name) + "' (expected periodic|open)");
}

std::string_view to_string(Boundary b) noexcept {
    return b == Boundary::periodic ? "periodic" : "open";
}

Lattice::Lattice(std::vector<int> extent, Boundary boundary, double spacing)
    : extent_(std::move(extent)), boundary_(boundary), spacing_(spacing) {
    if (extent_.empty() || static_cast<int>(extent_.size()) > max_dim)
        throw InvalidInput("lattice dimension must be 1 or 2, got " + std::to_string(extent_.size()));
    for (int e : extent_)
        if (e < 2) throw InvalidInput("every lattice extent must be >= 2, got " + std::to_string(e));
    if (!(spacing_ > 0.0) || !std::isfinite(spacing_))
        throw InvalidInput("lattice spacing must be positive");

    size_ = 1;
    for (int a = dim() - 1; a >= 0; --a) {
        stride_[static_cast<std::size_t>(a)] = size_;
        size_ *= extent_[static_cast<std::size_t>(a)];
    }
}

std::array<int, Lattice::max_dim> Lattice::coords(int site) const {
    std::array<int, max_dim> c{};
    for (int a = 0; a < dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        c[ua] = (site / stride_[ua]) % extent_[ua];
    }
    return c;
}

int Lattice::index(const std::array<int, max_dim>& coords) const {
    int site = 0;
    for (int a = 0; a < dim(); ++a) {
        const auto ua = static_cast<std::size_t>(a);
        site += coords[ua] * stride_[ua];
    }
    return site;
}

std::optional<int> Lattice::neighbor(int site, int axis, int step) const {
    auto c = coords(site);
    const auto ua = static_cast<std::size_t>(axis);
    int moved = c[ua] + step;
    const int n = extent_[ua];
    if (moved < 0 || moved >= n) {
        if (!periodic()) return std::nullopt;
        moved = ((moved % n) + n) % n;
    }
    c[ua] = moved;
    return index(c);
}

int Lattice::bond_count() const {
    int count = 0;
    for (int a = 0; a < dim(); ++a)
        for (int x = 0; x < size_; ++x)
            if (neighbor(x, a, +1)) ++count;
    return count;
}

BondField gradient(const Lattice& lat, const SiteField& u) {
    BondField g(lat.dim(), lat.size());
    for (int a = 0; a < lat.dim(); ++a)
        for (int x = 0; x < lat.size(); ++x)
            if (auto y = lat.neighbor(x, a, +1)) g[a][x] = u[*y] - u[x];
    return g;
}

SiteField divergence(const Lattice& lat, const BondField& v) {
    SiteField d = SiteField::Zero(lat.size());
    for (int a = 0; a < lat.dim(); ++a)
        for (int x = 0; x < lat.size(); ++x) {
            d[x] += v[a][x];
            if (auto y = lat.neighbor(x, a, -1)) d[x] -= v[a][*y];
        }
    return d;
}

SiteField laplacian(const Lattice& lat, const SiteField& u) {
    SiteField l = SiteField::Zero(lat.size());
    for (int a = 0; a < lat.dim(); ++a)
        for (int x = 0; x < lat.size(); ++x) {
            double acc = -2.0 * u[x];
            if (auto y = lat.neighbor(x, a, +1)) acc += u[*y];
            if (auto y = lat.neighbor(x, a, -1)) acc += u[*y];
            l[x] += acc;
        }
    return l;
}

SiteField curl(const Lattice& lat, const BondField& v) {
    if (lat.dim() != 2) throw Unsupported("curl is defined for 2D lattices only");
    SiteField c = SiteField::Zero(lat.size());
    for (int x = 0; x < lat.size(); ++x) {
        auto x0 = lat.neighbor(x, 0, +1);
        auto x1 = lat.neighbor(x, 1, +1);
        if (!x0 || !x1) continue;
        c[x] = v[0][x] + v[1][*x0] - v[0][*x1] - v[1][x];
    }
    return c;
}

}  // namespace nhc
