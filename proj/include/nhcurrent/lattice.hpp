#pragma once

#include "nhcurrent/types.hpp"

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace nhc {

enum class Boundary { periodic, open };

Boundary parse_boundary(std::string_view name);
std::string_view to_string(Boundary b) noexcept;

/// Hypercubic lattice in one or two dimensions with row-major site order
/// (last axis fastest). Internal computations use unit spacing; `spacing()`
/// is carried along as metadata for unit conversion.
class Lattice {
public:
    static constexpr int max_dim = 2;

    Lattice(std::vector<int> extent, Boundary boundary, double spacing = 1.0);

    int dim() const noexcept { return static_cast<int>(extent_.size()); }
    int size() const noexcept { return size_; }
    const std::vector<int>& extent() const noexcept { return extent_; }
    int extent(int axis) const { return extent_.at(static_cast<std::size_t>(axis)); }
    Boundary boundary() const noexcept { return boundary_; }
    bool periodic() const noexcept { return boundary_ == Boundary::periodic; }
    double spacing() const noexcept { return spacing_; }

    std::array<int, max_dim> coords(int site) const;
    int index(const std::array<int, max_dim>& coords) const;

    /// Site reached from `site` by `step` (+1 or -1) along `axis`; empty when
    /// the move leaves an open lattice.
    std::optional<int> neighbor(int site, int axis, int step) const;

    /// Number of directed bonds x -> x + e_a that exist.
    int bond_count() const;

    bool operator==(const Lattice&) const = default;

private:
    std::vector<int> extent_;
    Boundary boundary_;
    double spacing_;
    int size_ = 0;
    std::array<int, max_dim> stride_{};
};

// Discrete vector calculus on the staggered grid. Conventions:
//   gradient:   (grad u)_a[x] = u[x+e_a] - u[x]                (0 on missing bonds)
//   divergence: (div v)[x]    = sum_a v_a[x] - v_a[x-e_a]      (outflow minus inflow)
//   laplacian:  sum_a u[x+e_a] + u[x-e_a] - 2u[x], missing neighbors read as 0
//               (Dirichlet padding; equals div(grad u) on periodic lattices)
//   curl (2D):  circulation v_0[x] + v_1[x+e_0] - v_0[x+e_1] - v_1[x] around the
//               plaquette with lower corner x (0 where the plaquette is cut off)

BondField gradient(const Lattice& lat, const SiteField& u);
SiteField divergence(const Lattice& lat, const BondField& v);
SiteField laplacian(const Lattice& lat, const SiteField& u);
SiteField curl(const Lattice& lat, const BondField& v);

}  // namespace nhc
