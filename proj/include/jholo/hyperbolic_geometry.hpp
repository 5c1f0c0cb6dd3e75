#pragma once

// Hyperbolic geometry of the bidisk and the punctured disk, and
// extremal-disk estimates of the infinitesimal Kobayashi-Royden metric.
//
// The metric at a point p in direction xi is 1/R of the largest disk of radius
// R admitting a pseudoholomorphic map f with f(0) = p and f'(0) = R xi.  The
// upper estimate here searches that radius directly: an explicit competitor
// family (Moebius seeds in each factor, or the exponential covering of the
// punctured disk) is corrected by the coupled solver, and a radius counts as
// feasible when the corrected pair converges and stays inside the target with
// a safety margin.  Exponential bracketing plus bisection pins the threshold.
//
// Lower bounds are closed-form model expressions with calibration constants:
//   bidisk:     max(C1 |xi| / (1 - |a|^2),  C2 |eta| / (1 - |b|^2))
//   punctured:  K1 |xi| / (|a| ln(1/|a|))   for 0 < |a| < r0, combined with
//               the second-factor bidisk term.
// calibrate_constants() fixes C1 and K1 as the largest values consistent with
// the measured upper estimates on a deterministic validation set, and reports
// an FNV-1a hash of that dataset so downstream records can cite it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <vector>

#include "jholo/beltrami_solver.hpp"

namespace jholo {

// ---------------------------------------------------------------------------
// disk automorphisms and the punctured cover
// ---------------------------------------------------------------------------

/// phi_a(l) = (a - l)/(1 - conj(a) l); an involution of the disk swapping 0 and a.
struct Mobius {
    cplx a{0.0, 0.0};
    cplx operator()(cplx l) const { return (a - l) / (1.0 - std::conj(a) * l); }
    cplx deriv(cplx l) const {
        const cplx d = 1.0 - std::conj(a) * l;
        return (std::norm(a) - 1.0) / (d * d);
    }
};

inline Mobius mobius(cplx a) {
    if (!(std::abs(a) < 1.0)) throw SchemaError("Moebius parameter must lie in the open disk");
    return Mobius{a};
}

/// Principal logarithm with the branch cut convention Im in [-pi, pi).
inline cplx branch_log(cplx a) {
    cplx b = std::log(a);
    if (b.imag() == kPi) b = cplx{b.real(), -kPi};
    return b;
}

/// Universal cover of the punctured disk: pi(l) = exp((l - 1)/(l + 1)) maps the
/// unit disk onto the punctured disk.  branch_point(a) is the preimage of a
/// carried by the principal branch.
inline cplx covering_punctured(cplx l) { return std::exp((l - 1.0) / (l + 1.0)); }

inline cplx covering_punctured_deriv(cplx l) {
    const cplx d = l + 1.0;
    return covering_punctured(l) * 2.0 / (d * d);
}

inline cplx branch_point(cplx a) {
    const double r = std::abs(a);
    if (!(r > 0.0) || !(r < 1.0))
        throw SchemaError("branch point requires a point of the punctured open disk");
    const cplx b = branch_log(a);
    return (1.0 + b) / (1.0 - b);
}

/// Derivative at the origin of the normalized lift through the cover: if u is a
/// disk map with u(0) = a (avoiding the puncture) and w its lift normalized by
/// w(0) = 0, then dw(0) = chain_rule_factor(a) * du(0).
inline cplx chain_rule_factor(cplx a) {
    const cplx b = branch_log(a);
    const cplx c = branch_point(a);
    const cplx one_minus_b = 1.0 - b;
    return 2.0 / ((std::norm(c) - 1.0) * a * one_minus_b * one_minus_b);
}

// ---------------------------------------------------------------------------
// closed-form lower bounds
// ---------------------------------------------------------------------------

inline double lower_bound_bidisk(double c1, double c2, const C2& base, const C2& dir) {
    const double da = 1.0 - std::norm(base.z1);
    const double db = 1.0 - std::norm(base.z2);
    if (da <= 0.0 || db <= 0.0) throw SchemaError("base point must lie in the open bidisk");
    return std::max(c1 * std::abs(dir.z1) / da, c2 * std::abs(dir.z2) / db);
}

/// Lower bound adapted to a puncture in the first factor, valid for
/// 0 < |a| < r0; away from that range the plain bidisk bound applies.
inline double lower_bound_punctured(double k1, double c2, const C2& base, const C2& dir,
                                    double r0 = 0.3) {
    const double r = std::abs(base.z1);
    if (!(r > 0.0) || !(r < r0))
        throw SchemaError("punctured bound requires 0 < |a| < r0 in the first factor");
    const double db = 1.0 - std::norm(base.z2);
    if (db <= 0.0) throw SchemaError("base point must lie in the open bidisk");
    const double first = k1 * std::abs(dir.z1) / (r * std::log(1.0 / r));
    return std::max(first, c2 * std::abs(dir.z2) / db);
}

// ---------------------------------------------------------------------------
// extremal-disk upper estimates
// ---------------------------------------------------------------------------

struct RoydenOptions {
    int resolution = 16;
    double rho_max = 0.995;  // largest seed dilation attempted
    double margin = 1e-3;    // required containment margin
    int bisections = 12;
    SolveConfig solve;
};

struct MetricSample {
    C2 base{};
    C2 direction{};
    double upper = std::numeric_limits<double>::infinity();  // metric estimate 1/R_max
    double feasible_radius = 0.0;                            // R_max
    bool feasible = false;
    int solves = 0;
};

namespace detail {

/// Moebius competitor through a with initial direction s and dilation rho.
inline Seed mobius_seed(cplx a, cplx s, double rho, const DiskGrid& grid) {
    const cplx ca = std::conj(a);
    const double flat = 1.0 - std::norm(a);
    auto value = [a, ca, s, rho](cplx z) {
        const cplx w = s * rho * z;
        return (a + w) / (1.0 + ca * w);
    };
    auto deriv = [ca, s, rho, flat](cplx z) {
        const cplx d = 1.0 + ca * s * rho * z;
        return s * rho * flat / (d * d);
    };
    return make_seed(value, deriv, grid);
}

/// Covering competitor through a in the punctured first factor: the cover
/// composed with a Moebius map through the branch point, with complex dilation
/// tau chosen by the caller.  The image avoids the puncture automatically.
inline Seed punctured_seed(cplx a, cplx tau, const DiskGrid& grid) {
    const cplx c = branch_point(a);
    const Mobius phi = mobius(c);
    auto value = [phi, tau](cplx z) { return covering_punctured(phi(tau * z)); };
    auto deriv = [phi, tau](cplx z) {
        const cplx l = phi(tau * z);
        return covering_punctured_deriv(l) * phi.deriv(tau * z) * tau;
    };
    return make_seed(value, deriv, grid);
}

struct FeasibilityProbe {
    // returns true if radius R admits a corrected pair; counts solves
    std::function<bool(double)> try_radius;
    double flat_radius = 0.0;  // radius feasible for the uncorrected seeds
};

inline MetricSample bracket_and_bisect(const C2& base, const C2& dir, FeasibilityProbe probe,
                                       const RoydenOptions& opt, int* solve_count) {
    MetricSample out;
    out.base = base;
    out.direction = dir;

    double lo = 0.5 * probe.flat_radius;
    int shrink = 0;
    while (!probe.try_radius(lo)) {
        lo *= 0.5;
        if (++shrink > 20) {
            out.solves = *solve_count;
            return out;  // nothing feasible at any scale
        }
    }
    double hi = lo * 2.0;
    int grow = 0;
    while (probe.try_radius(hi)) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 30) break;
    }
    for (int i = 0; i < opt.bisections; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (probe.try_radius(mid))
            lo = mid;
        else
            hi = mid;
    }
    out.feasible = true;
    out.feasible_radius = lo;
    out.upper = 1.0 / lo;
    out.solves = *solve_count;
    return out;
}

}  // namespace detail

/// Upper estimate of the Kobayashi-Royden metric of the bidisk carrying the
/// given structure, at base in direction dir (not both components zero).
inline MetricSample royden_estimate(const AlmostComplexStructure& structure, const C2& base,
                                    const C2& dir, const RoydenOptions& opt = {}) {
    const double na = std::abs(dir.z1), nb = std::abs(dir.z2);
    if (na == 0.0 && nb == 0.0) throw SchemaError("metric direction must be nonzero");
    const double da = 1.0 - std::norm(base.z1), db = 1.0 - std::norm(base.z2);
    if (da <= 0.0 || db <= 0.0) throw SchemaError("base point must lie in the open bidisk");

    const DiskGrid grid = build_grid(opt.resolution);
    int solves = 0;

    detail::FeasibilityProbe probe;
    double flat = std::numeric_limits<double>::infinity();
    if (na > 0.0) flat = std::min(flat, opt.rho_max * da / na);
    if (nb > 0.0) flat = std::min(flat, opt.rho_max * db / nb);
    probe.flat_radius = flat;
    probe.try_radius = [&, base, dir](double R) {
        const double rho_u = na > 0.0 ? R * na / da : 0.0;
        const double rho_v = nb > 0.0 ? R * nb / db : 0.0;
        if (rho_u > opt.rho_max || rho_v > opt.rho_max) return false;
        Seed su = na > 0.0 ? detail::mobius_seed(base.z1, dir.z1 / na, rho_u, grid)
                           : constant_seed(base.z1, grid);
        Seed sv = nb > 0.0 ? detail::mobius_seed(base.z2, dir.z2 / nb, rho_v, grid)
                           : constant_seed(base.z2, grid);
        ++solves;
        try {
            BidiskMap m = solve_coupled(su, sv, structure, opt.solve);
            return m.converged && m.containment_margin() >= opt.margin;
        } catch (const OutOfRegimeError&) {
            return false;
        } catch (const NumericalError&) {
            return false;
        }
    };
    return detail::bracket_and_bisect(base, dir, probe, opt, &solves);
}

/// Upper estimate with the first factor punctured at the origin: competitors
/// run through the exponential cover, so their first component omits 0.
inline MetricSample royden_estimate_punctured(const AlmostComplexStructure& structure,
                                              const C2& base, const C2& dir,
                                              const RoydenOptions& opt = {}) {
    const double na = std::abs(dir.z1), nb = std::abs(dir.z2);
    if (na == 0.0) throw SchemaError("punctured estimate needs a nonzero first direction");
    const double db = 1.0 - std::norm(base.z2);
    if (db <= 0.0) throw SchemaError("base point must lie in the open bidisk");

    const cplx c = branch_point(base.z1);
    const Mobius phi = mobius(c);
    // u'(0) = pi'(c) phi'(0) tau, so tau = R dir / (pi'(c) phi'(0))
    const cplx jet_scale = covering_punctured_deriv(c) * phi.deriv(cplx{0.0, 0.0});

    const DiskGrid grid = build_grid(opt.resolution);
    int solves = 0;

    detail::FeasibilityProbe probe;
    const double tau_unit = std::abs(jet_scale);
    double flat = opt.rho_max * tau_unit / na;
    if (nb > 0.0) flat = std::min(flat, opt.rho_max * db / nb);
    probe.flat_radius = flat;
    probe.try_radius = [&, base, dir](double R) {
        const cplx tau = R * dir.z1 / jet_scale;
        const double rho_v = nb > 0.0 ? R * nb / db : 0.0;
        if (std::abs(tau) > opt.rho_max || rho_v > opt.rho_max) return false;
        Seed su = detail::punctured_seed(base.z1, tau, grid);
        Seed sv = nb > 0.0 ? detail::mobius_seed(base.z2, dir.z2 / nb, rho_v, grid)
                           : constant_seed(base.z2, grid);
        ++solves;
        try {
            BidiskMap m = solve_coupled(su, sv, structure, opt.solve);
            return m.converged && m.containment_margin() >= opt.margin;
        } catch (const OutOfRegimeError&) {
            return false;
        } catch (const NumericalError&) {
            return false;
        }
    };
    return detail::bracket_and_bisect(base, dir, probe, opt, &solves);
}

// ---------------------------------------------------------------------------
// path lengths and completeness probes
// ---------------------------------------------------------------------------

/// Polygonal length of a path under a pointwise metric: sum of
/// metric(midpoint) * |chord| over consecutive points.
inline double path_length(const std::function<double(cplx)>& metric, const std::vector<cplx>& pts) {
    if (pts.size() < 2) throw SchemaError("path needs at least two points");
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const cplx mid = 0.5 * (pts[i] + pts[i + 1]);
        total += metric(mid) * std::abs(pts[i + 1] - pts[i]);
    }
    return total;
}

struct CompletenessReport {
    double delta = 0.0;      // inner endpoint of the radial path
    double length = 0.0;     // measured metric length from delta to 0.3
    double predicted = 0.0;  // K1 (ln ln (1/delta) - ln ln (1/0.3))
    double ratio = 1.0;
};

/// Length of the radial segment [delta, 0.3] toward the puncture under the
/// calibrated punctured lower bound.  The doubly logarithmic growth in delta
/// is the completeness signature: the puncture is infinitely far away.
inline CompletenessReport completeness_probe(double k1, double delta, int points_per_decade = 2000) {
    if (!(delta > 0.0) || !(delta < 0.3)) throw SchemaError("delta must lie in (0, 0.3)");
    const double decades = std::log10(0.3 / delta);
    const int n = std::max(2, static_cast<int>(decades * points_per_decade) + 1);
    std::vector<cplx> pts(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        pts[static_cast<std::size_t>(i)] = cplx{delta * std::pow(0.3 / delta, t), 0.0};
    }
    auto metric = [k1](cplx z) {
        const double r = std::abs(z);
        return k1 / (r * std::log(1.0 / r));
    };
    CompletenessReport rep;
    rep.delta = delta;
    rep.length = path_length(metric, pts);
    rep.predicted = k1 * (std::log(std::log(1.0 / delta)) - std::log(std::log(1.0 / 0.3)));
    rep.ratio = rep.length / rep.predicted;
    return rep;
}

// ---------------------------------------------------------------------------
// calibration
// ---------------------------------------------------------------------------

struct Calibration {
    double c1_bidisk = 0.0;
    double k1_punctured = 0.0;
    std::uint64_t dataset_hash = 0;
    int samples = 0;
};

namespace detail {

inline void fnv_accumulate(std::uint64_t& h, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xffULL;
        h *= 1099511628211ULL;
    }
}

}  // namespace detail

/// Fix the lower-bound constants against measured upper estimates at the given
/// structure: the largest C1 and K1 with lower <= upper across the validation
/// set.  Deterministic, and stamped with an FNV-1a hash of the inputs and the
/// measured thresholds.
inline Calibration calibrate_constants(const AlmostComplexStructure& structure,
                                       const RoydenOptions& opt = {}) {
    Calibration cal;
    std::uint64_t h = 14695981039346656037ULL;

    const double bidisk_bases[] = {0.0, 0.3, 0.5, 0.7};
    double c1 = std::numeric_limits<double>::infinity();
    for (double a : bidisk_bases) {
        const C2 base{cplx{a, 0.0}, cplx{0.0, 0.0}};
        const C2 dir{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
        MetricSample s = royden_estimate(structure, base, dir, opt);
        if (!s.feasible) throw NumericalError("calibration sample infeasible");
        c1 = std::min(c1, s.upper * (1.0 - a * a));
        detail::fnv_accumulate(h, a);
        detail::fnv_accumulate(h, s.upper);
        ++cal.samples;
    }

    const double punctured_bases[] = {0.05, 0.1, 0.2, 0.25};
    double k1 = std::numeric_limits<double>::infinity();
    for (double a : punctured_bases) {
        const C2 base{cplx{a, 0.0}, cplx{0.0, 0.0}};
        const C2 dir{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
        MetricSample s = royden_estimate_punctured(structure, base, dir, opt);
        if (!s.feasible) throw NumericalError("calibration sample infeasible");
        k1 = std::min(k1, s.upper * a * std::log(1.0 / a));
        detail::fnv_accumulate(h, a);
        detail::fnv_accumulate(h, s.upper);
        ++cal.samples;
    }

    cal.c1_bidisk = c1;
    cal.k1_punctured = k1;
    cal.dataset_hash = h;
    return cal;
}

}  // namespace jholo
