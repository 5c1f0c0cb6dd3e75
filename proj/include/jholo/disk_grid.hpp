#pragma once

// Tensor polar discretization of the disk of radius R <= 1.
//
// Nodes sit at (r_j, theta_k) with r_j = (j + 1/2) * h_r midpoint radii and
// equispaced angles; the cell weights r_j * h_r * h_theta sum to pi R^2 exactly.
// The angle count is a fixed even multiple of the radial count, so the node set
// is symmetric under z -> -z; principal-value sums over such a grid cancel their
// leading odd error terms, which the singular operators rely on.
//
// Wirtinger derivatives are realized by second-order central differences in the
// polar frame:
//     d/dz   = e^{-i theta}/2 * (d/dr - (i/r) d/dtheta)
//     d/dzb  = e^{+i theta}/2 * (d/dr + (i/r) d/dtheta)
// The innermost ring differentiates radially through the origin using the
// antipodal node at (r_0, theta + pi), which is the grid point at signed radius
// -r_0 along the same ray, so the stencil stays equispaced and second order.
// The outermost ring has no outward neighbour and is flagged instead of
// extrapolated; consumers restrict error norms to interior nodes.

#include <cmath>
#include <functional>
#include <vector>

#include "jholo/core.hpp"

namespace jholo {

struct DiskGrid {
    int resolution = 0;   ///< radial ring count n_r
    double radius = 1.0;  ///< covered disk radius, in (0, 1]
    int n_r = 0;
    int n_theta = 0;  ///< = 4 * resolution (even)
    double h_r = 0.0;
    double h_theta = 0.0;
    std::vector<double> ring_radius;  ///< r_j, size n_r
    std::vector<double> angle;        ///< theta_k, size n_theta
    std::vector<cplx> nodes;          ///< ring-major: index = j * n_theta + k
    std::vector<double> weights;      ///< per-node cell area r_j h_r h_theta

    int index(int j, int k) const { return j * n_theta + k; }
    int ring_of(int i) const { return i / n_theta; }
    int angle_of(int i) const { return i % n_theta; }
    std::size_t size() const { return nodes.size(); }

    /// Node at the same radius, angle + pi (exists because n_theta is even).
    int antipode(int i) const {
        const int j = ring_of(i), k = angle_of(i);
        return index(j, (k + n_theta / 2) % n_theta);
    }

    /// True away from the outermost ring, where full derivative stencils exist.
    bool has_full_stencil(int i) const { return ring_of(i) < n_r - 1; }
};

/// Grids are interchangeable for sampled data when their layout parameters agree.
inline bool same_layout(const DiskGrid& a, const DiskGrid& b) {
    return a.resolution == b.resolution && a.radius == b.radius;
}

inline DiskGrid build_grid(int resolution, double radius = 1.0) {
    if (resolution < 8) throw SchemaError("grid resolution must be at least 8");
    if (!(radius > 0.0) || radius > 1.0) throw SchemaError("grid radius must lie in (0, 1]");
    DiskGrid g;
    g.resolution = resolution;
    g.radius = radius;
    g.n_r = resolution;
    g.n_theta = 4 * resolution;
    g.h_r = radius / g.n_r;
    g.h_theta = 2.0 * kPi / g.n_theta;
    g.ring_radius.resize(g.n_r);
    g.angle.resize(g.n_theta);
    for (int j = 0; j < g.n_r; ++j) g.ring_radius[j] = (j + 0.5) * g.h_r;
    for (int k = 0; k < g.n_theta; ++k) g.angle[k] = k * g.h_theta;
    g.nodes.resize(static_cast<std::size_t>(g.n_r) * g.n_theta);
    g.weights.resize(g.nodes.size());
    for (int j = 0; j < g.n_r; ++j) {
        const double r = g.ring_radius[j];
        const double w = r * g.h_r * g.h_theta;
        for (int k = 0; k < g.n_theta; ++k) {
            g.nodes[g.index(j, k)] = cplx{r * std::cos(g.angle[k]), r * std::sin(g.angle[k])};
            g.weights[g.index(j, k)] = w;
        }
    }
    return g;
}

struct GridFunction {
    const DiskGrid* grid = nullptr;
    std::vector<cplx> values;

    GridFunction() = default;
    explicit GridFunction(const DiskGrid& g) : grid(&g), values(g.size(), cplx{0.0, 0.0}) {}

    cplx& operator[](std::size_t i) { return values[i]; }
    const cplx& operator[](std::size_t i) const { return values[i]; }
    std::size_t size() const { return values.size(); }
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (a.grid == nullptr || b.grid == nullptr || !same_layout(*a.grid, *b.grid))
        throw SchemaError("grid mismatch between sampled functions");
}

/// Sample a pointwise function; rejects non-finite values.
inline GridFunction sample(const std::function<cplx(cplx)>& f, const DiskGrid& grid) {
    GridFunction out(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx v = f(grid.nodes[i]);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericalError("non-finite value while sampling a grid function");
        out[i] = v;
    }
    return out;
}

// ===== norms =====

/// Discrete L2 norm, sqrt(sum w_i |f_i|^2); optionally over interior nodes only.
inline double l2_norm(const GridFunction& f, bool interior_only = false) {
    double acc = 0.0;
    const DiskGrid& g = *f.grid;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (interior_only && !g.has_full_stencil(static_cast<int>(i))) continue;
        acc += g.weights[i] * std::norm(f[i]);
    }
    return std::sqrt(acc);
}

inline double sup_norm(const GridFunction& f) {
    double acc = 0.0;
    for (const cplx& v : f.values) acc = std::max(acc, std::abs(v));
    return acc;
}

/// Relative discrete L2 error of `got` against `want`, normalized by the norm
/// of `want` (floor-guarded to keep zero references meaningful).
inline double rel_l2_error(const GridFunction& got, const GridFunction& want, bool interior_only = false) {
    require_same_grid(got, want);
    const DiskGrid& g = *got.grid;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (interior_only && !g.has_full_stencil(static_cast<int>(i))) continue;
        num += g.weights[i] * std::norm(got[i] - want[i]);
        den += g.weights[i] * std::norm(want[i]);
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-14);
}

// ===== Wirtinger finite differences =====

namespace detail {

enum class WirtingerKind { dz, dzbar };

inline GridFunction finite_diff(const GridFunction& f, WirtingerKind kind) {
    const DiskGrid& g = *f.grid;
    if (g.n_r < 2) throw SchemaError("grid too coarse for the derivative stencil");
    GridFunction out(g);
    const double sign = (kind == WirtingerKind::dzbar) ? 1.0 : -1.0;
    for (int j = 0; j + 1 < g.n_r; ++j) {
        for (int k = 0; k < g.n_theta; ++k) {
            const int i = g.index(j, k);
            // Radial central difference; ring 0 reaches through the origin to
            // the antipodal node at signed radius -r_0 on the same ray.
            const cplx f_out = f[g.index(j + 1, k)];
            const cplx f_in = (j == 0) ? f[g.antipode(i)] : f[g.index(j - 1, k)];
            const cplx df_dr = (f_out - f_in) / (2.0 * g.h_r);
            // Angular central difference (periodic).
            const int kp = (k + 1) % g.n_theta;
            const int km = (k + g.n_theta - 1) % g.n_theta;
            const cplx df_dth = (f[g.index(j, kp)] - f[g.index(j, km)]) / (2.0 * g.h_theta);
            const double th = g.angle[k];
            const cplx phase{std::cos(th), sign * std::sin(th)};  // e^{+- i theta}
            const cplx radial_part = df_dr + sign * cplx{0.0, 1.0} * df_dth / g.ring_radius[j];
            out[i] = 0.5 * phase * radial_part;
        }
    }
    // Outermost ring: no full stencil; left at zero and excluded from interior norms.
    return out;
}

}  // namespace detail

/// d/dz-bar by second-order differences; valid on nodes with full stencils.
inline GridFunction finite_diff_dbar(const GridFunction& f) {
    return detail::finite_diff(f, detail::WirtingerKind::dzbar);
}

/// d/dz by second-order differences; valid on nodes with full stencils.
inline GridFunction finite_diff_dz(const GridFunction& f) {
    return detail::finite_diff(f, detail::WirtingerKind::dz);
}

}  // namespace jholo
