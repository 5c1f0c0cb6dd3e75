#pragma once

// Solid Cauchy transform and its principal-value derivative on the unit disk.
//
// Normalization (confirmed against an independent midpoint-quadrature oracle in
// the test suite):
//     T_CG g(z) = -(1/pi)        Int_Disk g(zeta)/(zeta - z)   dA(zeta)
//     T_CZ g(z) = -(1/pi)  p.v.  Int_Disk g(zeta)/(zeta - z)^2 dA(zeta)
// so that  dbar(T_CG g) = g  and  T_CZ = dz o T_CG  on the open disk.
//
// Discretization: global singularity subtraction with closed-form disk moments.
// For T_CG, subtracting the node value g(z) leaves a bounded integrand, and the
// subtracted term integrates exactly:  -(1/pi) Int dA/(zeta-z) = conj(z)  (this
// moment is independent of the disk radius for any radius >= |z|, so no boundary
// correction appears).  For T_CZ the full first-order Taylor jet is subtracted;
// the two first-order moments vanish (p.v. Int dA/(zeta-z)^2 = 0 and
// p.v. Int conj(zeta-z)/(zeta-z)^2 dA = 0), leaving
//     T_CZ g(z_i) = dg_i * conj(z_i) - (1/pi) sum_{j != i} w_j R_j / (zeta_j - z_i)^2,
//     R_j = g_j - g_i - dg_i (zeta_j - z_i) - dbg_i conj(zeta_j - z_i),
// with dg, dbg from the second-order Wirtinger differences.  On the outermost
// ring, where no derivative stencil exists, only the zeroth-order term is
// subtracted; interior accuracy is unaffected and contracts exclude that ring.
// The remainder sums are evaluated pairwise; the z -> -z node symmetry cancels
// the leading odd quadrature error of the principal value.
//
// Cost is O(N^2) in the node count; the loops are written in plain real
// arithmetic and partitioned across hardware threads with disjoint output
// ranges, so results are bit-reproducible for any thread count.

#include <thread>
#include <vector>

#include "jholo/disk_grid.hpp"

namespace jholo {

namespace detail {

inline void require_unit_disk_input(const GridFunction& g) {
    if (g.grid == nullptr) throw SchemaError("operator input lacks a grid");
    if (g.grid->radius != 1.0) throw SchemaError("singular operators require a unit-disk grid");
    for (const cplx& v : g.values)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
            throw NumericalError("non-finite operator input");
}

template <class RowFn>
void parallel_rows(std::size_t n, RowFn&& row) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) row(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t) {
        const std::size_t lo = t * chunk, hi = std::min(n, lo + chunk);
        pool.emplace_back([&, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) row(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// T_CG: inverts dbar on the disk (up to a holomorphic addend fixed by the
/// kernel's vanishing moments); weakly singular, desingularized by value
/// subtraction with the exact conj(z) moment.
inline GridFunction cauchy_green(const GridFunction& g) {
    detail::require_unit_disk_input(g);
    const DiskGrid& grid = *g.grid;
    const std::size_t n = grid.size();
    std::vector<double> xs(n), ys(n), ws(n), gr(n), gi(n);
    for (std::size_t j = 0; j < n; ++j) {
        xs[j] = grid.nodes[j].real();
        ys[j] = grid.nodes[j].imag();
        ws[j] = grid.weights[j];
        gr[j] = g[j].real();
        gi[j] = g[j].imag();
    }
    GridFunction out(grid);
    detail::parallel_rows(n, [&](std::size_t i) {
        const double xi = xs[i], yi = ys[i], gri = gr[i], gii = gi[i];
        double accr = 0.0, acci = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = xs[j] - xi, dy = ys[j] - yi;
            const double s = ws[j] / (dx * dx + dy * dy);
            const double ur = gr[j] - gri, ui = gi[j] - gii;
            // (u / d) * w = u * conj(d) * w / |d|^2
            accr += s * (ur * dx + ui * dy);
            acci += s * (ui * dx - ur * dy);
        }
        // g_i * conj(z_i) - (1/pi) * remainder
        out[i] = cplx{gri * xi + gii * yi - accr / kPi, gii * xi - gri * yi - acci / kPi};
    });
    return out;
}

/// T_CZ: principal-value derivative kernel; first-order jet subtraction plus
/// antipodal node cancellation.  Satisfies T_CZ = dz o T_CG within the same
/// tolerance class as the derivative stencils.
inline GridFunction calderon_zygmund(const GridFunction& g) {
    detail::require_unit_disk_input(g);
    const DiskGrid& grid = *g.grid;
    if (grid.n_theta % 2 != 0) throw SchemaError("principal value needs the z -> -z node symmetry");
    const std::size_t n = grid.size();
    std::vector<double> xs(n), ys(n), ws(n), gr(n), gi(n);
    for (std::size_t j = 0; j < n; ++j) {
        xs[j] = grid.nodes[j].real();
        ys[j] = grid.nodes[j].imag();
        ws[j] = grid.weights[j];
        gr[j] = g[j].real();
        gi[j] = g[j].imag();
    }
    const GridFunction dg = finite_diff_dz(g);
    const GridFunction dbg = finite_diff_dbar(g);
    GridFunction out(grid);
    detail::parallel_rows(n, [&](std::size_t i) {
        const double xi = xs[i], yi = ys[i], gri = gr[i], gii = gi[i];
        const bool full = grid.has_full_stencil(static_cast<int>(i));
        const double pr = full ? dg[i].real() : 0.0, pi_ = full ? dg[i].imag() : 0.0;
        const double qr = full ? dbg[i].real() : 0.0, qi = full ? dbg[i].imag() : 0.0;
        double accr = 0.0, acci = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dx = xs[j] - xi, dy = ys[j] - yi;
            const double inv = 1.0 / (dx * dx + dy * dy);
            // Taylor remainder u = g_j - g_i - dg*d - dbg*conj(d)
            double ur = gr[j] - gri - (pr * dx - pi_ * dy) - (qr * dx + qi * dy);
            double ui = gi[j] - gii - (pr * dy + pi_ * dx) - (qi * dx - qr * dy);
            // (u / d^2) * w = u * conj(d)^2 * w / |d|^4
            const double cr = (dx * dx - dy * dy) * inv * inv, ci = -2.0 * dx * dy * inv * inv;
            const double s = ws[j];
            accr += s * (ur * cr - ui * ci);
            acci += s * (ur * ci + ui * cr);
        }
        // dg_i * conj(z_i) - (1/pi) * remainder
        out[i] = cplx{pr * xi + pi_ * yi - accr / kPi, pi_ * xi - pr * yi - acci / kPi};
    });
    return out;
}

}  // namespace jholo
