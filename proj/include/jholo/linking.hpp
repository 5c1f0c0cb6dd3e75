#pragma once

// Intersection indices of parametrized disks in C^2 and linking numbers of
// their sphere slices.
//
// The central identity this module makes checkable: for two disks through the
// origin, the linking number of their boundary curves on a small sphere equals
// the sum of local intersection indices of the disk pair inside the ball.
//
// Instruments:
//  - intersection_index: the local degree delta_p of the difference map
//    G(z, w) = f(z) - g(w) at an isolated zero, computed as a product of two
//    circle windings.  The product equals the degree exactly when G_1 is
//    zero-free on the first polydisk face (|z - z*| = rho1, |w - w*| <= rho2)
//    and G_2 on the second; both conditions are sampled at two densities with
//    the windings cross-checked.  When a face fails, deterministic coordinate
//    remixes (a swap, then seeded SU(2) rotations — degree-invariant since
//    SU(2) is connected) and radius retries are attempted before giving up.
//  - branch_multiplicity: 1 + the minimal vanishing order of ell(df) over a
//    basket of linear functionals ell; the local index always satisfies
//    delta_p >= mult(f) * mult(g).
//  - intersect_disks: localization of all zeros of G by a coarse product-grid
//    scan followed by box shrinking, then indices and multiplicities per zero.
//  - sphere_slice: marches the parameter-space level curve |f(z)| = r with
//    predictor/corrector steps, orients it as the boundary of {|f| < r}, and
//    reports the minimal contact angle asin(|<T, i p>| / |T||p|) against the
//    Hopf direction i p (90 degrees for the Hopf circle itself).
//  - linking_number: signed crossings of the stereographic projections of two
//    closed curves on a sphere, computed from two independent poles that must
//    agree.  Orientation is calibrated so the standard Hopf pair links +1.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "jholo/core.hpp"
#include "jholo/rng.hpp"

namespace jholo {

// ---------------------------------------------------------------------------
// maps and windings
// ---------------------------------------------------------------------------

/// A parametrized disk in C^2 carried with its complex derivative.
struct AnalyticDisk {
    std::function<C2(cplx)> value;
    std::function<C2(cplx)> deriv;
};

/// Disk map with polynomial components: coefficient k multiplies z^k.
inline AnalyticDisk polynomial_disk(std::vector<cplx> cu, std::vector<cplx> cv) {
    if (cu.empty() || cv.empty()) throw SchemaError("polynomial components need coefficients");
    auto eval = [](const std::vector<cplx>& c, cplx z) {
        cplx acc{0.0, 0.0};
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * z + c[k];
        return acc;
    };
    auto eval_deriv = [](const std::vector<cplx>& c, cplx z) {
        cplx acc{0.0, 0.0};
        for (std::size_t k = c.size(); k-- > 1;) acc = acc * z + static_cast<double>(k) * c[k];
        return acc;
    };
    AnalyticDisk d;
    d.value = [cu, cv, eval](cplx z) { return C2{eval(cu, z), eval(cv, z)}; };
    d.deriv = [cu, cv, eval_deriv](cplx z) { return C2{eval_deriv(cu, z), eval_deriv(cv, z)}; };
    return d;
}

/// Winding number of a nonvanishing loop sampled at n points, cross-checked at
/// twice the density.  Throws NumericalError on a vanishing sample, an angular
/// step too large to trust, or disagreement between the two densities.
inline int winding_number(const std::function<cplx(double)>& loop, int n_samples = 256) {
    if (n_samples < 8) throw SchemaError("winding needs at least 8 samples");
    auto accumulate = [&loop](int n) {
        double total = 0.0;
        cplx prev = loop(0.0);
        for (int k = 1; k <= n; ++k) {
            const double th = 2.0 * kPi * k / n;
            const cplx cur = loop(th);
            if (!(std::abs(cur) > 0.0) || !(std::abs(prev) > 0.0))
                throw NumericalError("winding loop passes through zero");
            const double step = std::arg(cur / prev);
            if (std::abs(step) > 0.8 * kPi)
                throw NumericalError("winding loop under-sampled: angular step too large");
            total += step;
            prev = cur;
        }
        const double turns = total / (2.0 * kPi);
        const double rounded = std::round(turns);
        if (std::abs(turns - rounded) > 0.05)
            throw NumericalError("winding did not close to an integer");
        return static_cast<int>(rounded);
    };
    const int coarse = accumulate(n_samples);
    const int fine = accumulate(2 * n_samples);
    if (coarse != fine) throw NumericalError("winding disagrees across sample densities");
    return fine;
}

/// Branching order of a disk at a point: 1 plus the minimal winding of
/// ell(df) on a small circle, over a basket of linear functionals ell.
inline int branch_multiplicity(const AnalyticDisk& f, cplx center, double radius = 0.05,
                               int samples = 512) {
    if (!(radius > 0.0)) throw SchemaError("multiplicity radius must be positive");
    radius = std::min(radius, 0.5 * (1.0 - std::abs(center)));
    if (!(radius > 0.0)) throw SchemaError("multiplicity center must lie inside the disk");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const std::array<C2, 4> functionals = {
        C2{cplx{1.0, 0.0}, cplx{0.0, 0.0}},
        C2{cplx{0.0, 0.0}, cplx{1.0, 0.0}},
        C2{cplx{inv_sqrt2, 0.0}, cplx{inv_sqrt2, 0.0}},
        C2{cplx{inv_sqrt2, 0.0}, cplx{0.0, inv_sqrt2}},
    };
    int best = std::numeric_limits<int>::max();
    for (const C2& ell : functionals) {
        auto loop = [&](double th) {
            const C2 d = f.deriv(center + radius * cplx{std::cos(th), std::sin(th)});
            return ell.z1 * d.z1 + ell.z2 * d.z2;
        };
        try {
            best = std::min(best, winding_number(loop, samples));
        } catch (const NumericalError&) {
            // this functional annihilates the leading term; others will not
        }
    }
    if (best == std::numeric_limits<int>::max())
        throw NumericalError("differential vanishes identically on the probe circle");
    return 1 + best;
}

// ---------------------------------------------------------------------------
// local intersection index
// ---------------------------------------------------------------------------

struct IndexOptions {
    double rho1 = 0.1;
    double rho2 = 0.1;
    int winding_samples = 256;
    int face_samples = 32;       // per direction, refined to 64 for the cross-check
    int max_remixes = 4;         // seeded SU(2) attempts after identity and swap
    std::uint64_t remix_seed = 0x51EDULL;
    double face_margin = 1e-6;   // required min/max ratio of |G_i| on its face
};

struct IntersectionIndex {
    int delta = 0;
    int winding1 = 0;
    int winding2 = 0;
    double rho1 = 0.0;
    double rho2 = 0.0;
    int attempt = 0;  // 0 identity, 1 coordinate swap, >= 2 seeded remix
};

namespace detail {

using DifferenceMap = std::function<C2(cplx, cplx)>;

/// min and max of |component| over one polydisk face, sampled n x n.
inline std::pair<double, double> face_range(const DifferenceMap& G, bool first_component,
                                            bool boundary_in_z, cplx z0, cplx w0, double rho1,
                                            double rho2, int n) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    const int rings = std::max(1, n / 8);
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * i / n;
        const cplx on_circle{std::cos(th), std::sin(th)};
        for (int j = 0; j < n; ++j) {
            // interior samples: nested circles including center and full radius
            const int ring = j / 8;
            const double rr = (j == 0) ? 0.0 : static_cast<double>(ring + 1) / rings;
            const double ph = 2.0 * kPi * (j % 8) / 8.0;
            const cplx inside = rr * cplx{std::cos(ph), std::sin(ph)};
            const cplx z = boundary_in_z ? z0 + rho1 * on_circle : z0 + rho1 * inside;
            const cplx w = boundary_in_z ? w0 + rho2 * inside : w0 + rho2 * on_circle;
            const C2 g = G(z, w);
            const double v = first_component ? std::abs(g.z1) : std::abs(g.z2);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    return {lo, hi};
}

inline bool face_ok(const DifferenceMap& G, bool first_component, bool boundary_in_z, cplx z0,
                    cplx w0, double rho1, double rho2, int n, double margin) {
    const auto [lo, hi] = face_range(G, first_component, boundary_in_z, z0, w0, rho1, rho2, n);
    return hi > 0.0 && lo > margin * hi;
}

/// SU(2) matrix acting on C^2 values; attempt 0 is the identity, attempt 1 the
/// coordinate swap, further attempts are seeded random rotations.
inline std::array<cplx, 4> remix_matrix(int attempt, std::uint64_t seed) {
    if (attempt == 0) return {cplx{1, 0}, cplx{0, 0}, cplx{0, 0}, cplx{1, 0}};
    if (attempt == 1) return {cplx{0, 0}, cplx{-1, 0}, cplx{1, 0}, cplx{0, 0}};
    SplitMix64 stream = sample_stream(seed, static_cast<std::uint64_t>(attempt));
    for (;;) {
        const cplx a{stream.next_normal(), stream.next_normal()};
        const cplx b{stream.next_normal(), stream.next_normal()};
        const double n = std::sqrt(std::norm(a) + std::norm(b));
        if (n < 1e-6) continue;
        return {a / n, -std::conj(b) / n, b / n, std::conj(a) / n};
    }
}

}  // namespace detail

/// Local degree of G(z, w) = f(z) - g(w) at the isolated zero (z*, w*), as a
/// certified product of circle windings.  Throws NumericalError when no remix
/// or radius retry validates the polydisk face conditions.
inline IntersectionIndex intersection_index(const AnalyticDisk& f, const AnalyticDisk& g,
                                            cplx z_star, cplx w_star,
                                            const IndexOptions& opt = {}) {
    if (!(opt.rho1 > 0.0) || !(opt.rho2 > 0.0)) throw SchemaError("index radii must be positive");
    const detail::DifferenceMap G0 = [&f, &g](cplx z, cplx w) {
        return f.value(z) - g.value(w);
    };
    const std::array<std::pair<double, double>, 5> radius_factors = {
        std::pair<double, double>{1.0, 1.0}, {1.0, 0.5}, {0.5, 1.0}, {1.0, 2.0}, {2.0, 1.0}};

    for (int attempt = 0; attempt < 2 + opt.max_remixes; ++attempt) {
        const std::array<cplx, 4> U = detail::remix_matrix(attempt, opt.remix_seed);
        const detail::DifferenceMap G = [G0, U](cplx z, cplx w) {
            const C2 v = G0(z, w);
            return C2{U[0] * v.z1 + U[1] * v.z2, U[2] * v.z1 + U[3] * v.z2};
        };
        for (const auto& [m1, m2] : radius_factors) {
            const double r1 = opt.rho1 * m1;
            const double r2 = opt.rho2 * m2;
            if (std::abs(z_star) + r1 >= 1.0 || std::abs(w_star) + r2 >= 1.0) continue;
            const int n = opt.face_samples;
            if (!detail::face_ok(G, true, true, z_star, w_star, r1, r2, n, opt.face_margin) ||
                !detail::face_ok(G, true, true, z_star, w_star, r1, r2, 2 * n, opt.face_margin) ||
                !detail::face_ok(G, false, false, z_star, w_star, r1, r2, n, opt.face_margin) ||
                !detail::face_ok(G, false, false, z_star, w_star, r1, r2, 2 * n, opt.face_margin))
                continue;
            try {
                const int w1 = winding_number(
                    [&](double th) {
                        return G(z_star + r1 * cplx{std::cos(th), std::sin(th)}, w_star).z1;
                    },
                    opt.winding_samples);
                const int w2 = winding_number(
                    [&](double th) {
                        return G(z_star, w_star + r2 * cplx{std::cos(th), std::sin(th)}).z2;
                    },
                    opt.winding_samples);
                IntersectionIndex out;
                out.delta = w1 * w2;
                out.winding1 = w1;
                out.winding2 = w2;
                out.rho1 = r1;
                out.rho2 = r2;
                out.attempt = attempt;
                return out;
            } catch (const NumericalError&) {
                continue;  // windings unreliable at these radii; keep trying
            }
        }
    }
    throw NumericalError("no radius or remix validated the face conditions for the local index");
}

// ---------------------------------------------------------------------------
// intersection localization
// ---------------------------------------------------------------------------

struct IntersectionPoint {
    cplx z{0.0, 0.0};
    cplx w{0.0, 0.0};
    double gap = 0.0;  // |f(z) - g(w)| at the located zero
    int delta = 0;
    int mult_f = 1;
    int mult_g = 1;
};

struct IntersectOptions {
    double search_radius = 0.95;
    int coarse = 21;            // coarse samples per real axis
    int shrink_levels = 40;
    double shrink = 0.6;
    double accept_gap = 1e-7;
    double dedupe_distance = 1e-3;
    int max_points = 8;
    IndexOptions index;
};

namespace detail {

inline double difference_gap(const DifferenceMap& G, cplx z, cplx w) {
    return norm(G(z, w));
}

/// Shrinking 5^4 box search from a starting guess; returns the refined point.
inline std::pair<cplx, cplx> box_shrink(const DifferenceMap& G, cplx z0, cplx w0,
                                        double half_width, const IntersectOptions& opt) {
    cplx z = z0, w = w0;
    double s = half_width;
    for (int level = 0; level < opt.shrink_levels; ++level) {
        double best = std::numeric_limits<double>::infinity();
        cplx bz = z, bw = w;
        for (int a = -2; a <= 2; ++a)
            for (int b = -2; b <= 2; ++b)
                for (int c = -2; c <= 2; ++c)
                    for (int d = -2; d <= 2; ++d) {
                        const cplx zz = z + cplx{s * a / 2.0, s * b / 2.0};
                        const cplx ww = w + cplx{s * c / 2.0, s * d / 2.0};
                        if (std::abs(zz) > opt.search_radius || std::abs(ww) > opt.search_radius)
                            continue;
                        const double v = difference_gap(G, zz, ww);
                        if (v < best) {
                            best = v;
                            bz = zz;
                            bw = ww;
                        }
                    }
        z = bz;
        w = bw;
        s *= opt.shrink;
    }
    return {z, w};
}

}  // namespace detail

/// Locate the zeros of f(z) - g(w) over the product of search disks, then
/// attach the local index and branching orders at each zero.
inline std::vector<IntersectionPoint> intersect_disks(const AnalyticDisk& f,
                                                      const AnalyticDisk& g,
                                                      const IntersectOptions& opt = {}) {
    if (!(opt.search_radius > 0.0) || !(opt.search_radius < 1.0))
        throw SchemaError("search radius must lie in (0, 1)");
    const detail::DifferenceMap G = [&f, &g](cplx z, cplx w) { return f.value(z) - g.value(w); };

    // coarse product grid over the two parameter disks
    struct Node {
        cplx z, w;
        double gap;
    };
    std::vector<Node> coarse;
    const int n = opt.coarse;
    const double R = opt.search_radius;
    std::vector<cplx> axis;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const cplx p{-R + 2.0 * R * i / (n - 1), -R + 2.0 * R * j / (n - 1)};
            if (std::abs(p) <= R) axis.push_back(p);
        }
    coarse.reserve(axis.size() * axis.size());
    for (const cplx z : axis)
        for (const cplx w : axis) coarse.push_back({z, w, detail::difference_gap(G, z, w)});

    std::vector<IntersectionPoint> out;
    const double spacing = 2.0 * R / (n - 1);
    std::vector<bool> masked(coarse.size(), false);
    for (int round = 0; round < opt.max_points; ++round) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t arg = coarse.size();
        for (std::size_t i = 0; i < coarse.size(); ++i) {
            if (!masked[i] && coarse[i].gap < best) {
                best = coarse[i].gap;
                arg = i;
            }
        }
        if (arg == coarse.size()) break;
        const auto [z, w] = detail::box_shrink(G, coarse[arg].z, coarse[arg].w, spacing, opt);
        const double gap = detail::difference_gap(G, z, w);
        if (gap > opt.accept_gap) break;  // remaining minima are not zeros
        bool duplicate = false;
        for (const IntersectionPoint& p : out)
            if (std::abs(p.z - z) + std::abs(p.w - w) < opt.dedupe_distance) duplicate = true;
        if (duplicate) {
            // localization fell back onto a known zero; mask its basin and move on
            for (std::size_t i = 0; i < coarse.size(); ++i)
                if (std::abs(coarse[i].z - coarse[arg].z) + std::abs(coarse[i].w - coarse[arg].w) <
                    2.0 * spacing)
                    masked[i] = true;
            continue;
        }
        IntersectionPoint p;
        p.z = z;
        p.w = w;
        p.gap = gap;
        p.delta = intersection_index(f, g, z, w, opt.index).delta;
        p.mult_f = branch_multiplicity(f, z);
        p.mult_g = branch_multiplicity(g, w);
        out.push_back(p);
        for (std::size_t i = 0; i < coarse.size(); ++i)
            if (std::abs(coarse[i].z - z) + std::abs(coarse[i].w - w) < 2.0 * spacing)
                masked[i] = true;
    }
    return out;
}

// ---------------------------------------------------------------------------
// sphere slices
// ---------------------------------------------------------------------------

struct SliceOptions {
    double step = 0.01;               // parameter-space arc step
    int max_steps = 20000;
    int newton_iters = 3;
    double grad_floor = 1e-8;         // transversality floor for |grad F|
    double angle_threshold_deg = 5.0; // minimal allowed contact angle
};

struct SphereSlice {
    std::vector<cplx> parameter;  // closed polyline in the parameter disk (ccw)
    std::vector<C2> image;        // its image on the sphere |p| = radius
    double radius = 0.0;
    double min_contact_angle_deg = 90.0;
};

namespace detail {

inline double dot4(const C2& a, const C2& b) {
    return (std::conj(a.z1) * b.z1).real() + (std::conj(a.z2) * b.z2).real();
}

}  // namespace detail

/// March the closed parameter curve |f(z)| = radius surrounding the origin,
/// orient it positively, and measure the contact angle of its image against
/// the Hopf direction i p.  Throws SchemaError when f(0) is not strictly
/// inside the sphere and NumericalError on tangency or failure to close.
inline SphereSlice sphere_slice(const AnalyticDisk& f, double radius,
                                const SliceOptions& opt = {}) {
    if (!(radius > 0.0)) throw SchemaError("slice radius must be positive");
    if (!(opt.step > 0.0) || !(opt.step < 0.2)) throw SchemaError("slice step must lie in (0, 0.2)");
    auto F = [&f, radius](cplx z) {
        const C2 v = f.value(z);
        return std::norm(v.z1) + std::norm(v.z2) - radius * radius;
    };
    if (!(F(cplx{0.0, 0.0}) < 0.0))
        throw SchemaError("slice radius must exceed |f(0)|: the sphere must enclose the center");

    // derivative of F by central differences; the instrument is C^1-grade
    const double h = 1e-6;
    auto gradF = [&F, h](cplx z) {
        return cplx{(F(z + cplx{h, 0.0}) - F(z - cplx{h, 0.0})) / (2.0 * h),
                    (F(z + cplx{0.0, h}) - F(z - cplx{0.0, h})) / (2.0 * h)};
    };
    auto newton = [&](cplx z) {
        for (int i = 0; i < opt.newton_iters; ++i) {
            const cplx g = gradF(z);
            const double g2 = std::norm(g);
            if (g2 < opt.grad_floor * opt.grad_floor)
                throw NumericalError("slice tangency: gradient below the transversality floor");
            z -= F(z) * g / g2;
        }
        return z;
    };

    // find a boundary point along rays from the center
    cplx start{0.0, 0.0};
    bool found = false;
    for (int ray = 0; ray < 8 && !found; ++ray) {
        const double th = 2.0 * kPi * ray / 8.0;
        const cplx dir{std::cos(th), std::sin(th)};
        double lo = 0.0, hi = 0.0;
        for (int k = 1; k <= 200; ++k) {
            const double t = k / 200.0;
            if (F(t * dir) > 0.0) {
                hi = t;
                lo = (k - 1) / 200.0;
                break;
            }
        }
        if (hi == 0.0) continue;
        for (int i = 0; i < 60; ++i) {
            const double mid = 0.5 * (lo + hi);
            (F(mid * dir) < 0.0 ? lo : hi) = mid;
        }
        start = newton(0.5 * (lo + hi) * dir);
        found = true;
    }
    if (!found)
        throw NumericalError("slice level set not found: the image stays inside the sphere");

    SphereSlice out;
    out.radius = radius;
    cplx z = start;
    cplx prev_tangent{0.0, 0.0};
    for (int step = 0; step < opt.max_steps; ++step) {
        out.parameter.push_back(z);
        const cplx g = gradF(z);
        if (std::norm(g) < opt.grad_floor * opt.grad_floor)
            throw NumericalError("slice tangency: gradient below the transversality floor");
        cplx t = cplx{0.0, 1.0} * g / std::abs(g);  // rotate the gradient a quarter turn
        if (step > 0 && (std::conj(t) * prev_tangent).real() < 0.0) t = -t;
        prev_tangent = t;
        z = newton(z + opt.step * t);
        if (std::abs(z) >= 1.0) throw NumericalError("slice leaves the parameter disk");
        if (step >= 10 && std::abs(z - start) < 0.6 * opt.step) break;
        if (step + 1 == opt.max_steps) throw NumericalError("slice failed to close");
    }

    // orient as the positively-traversed boundary of {|f| < radius}
    double area2 = 0.0;
    const std::size_t m = out.parameter.size();
    for (std::size_t k = 0; k < m; ++k) {
        const cplx a = out.parameter[k];
        const cplx b = out.parameter[(k + 1) % m];
        area2 += a.real() * b.imag() - b.real() * a.imag();
    }
    if (area2 < 0.0) std::reverse(out.parameter.begin(), out.parameter.end());

    out.image.reserve(m);
    for (const cplx p : out.parameter) out.image.push_back(f.value(p));

    for (std::size_t k = 0; k < m; ++k) {
        const C2& p = out.image[k];
        const C2 tangent = out.image[(k + 1) % m] - out.image[(k + m - 1) % m];
        const C2 hopf{cplx{0.0, 1.0} * p.z1, cplx{0.0, 1.0} * p.z2};
        const double tn = norm(tangent);
        const double hn = norm(hopf);
        if (tn == 0.0 || hn == 0.0) continue;
        double s = std::abs(detail::dot4(tangent, hopf)) / (tn * hn);
        s = std::min(s, 1.0);
        out.min_contact_angle_deg =
            std::min(out.min_contact_angle_deg, std::asin(s) * 180.0 / kPi);
    }
    if (out.min_contact_angle_deg < opt.angle_threshold_deg)
        throw NumericalError("slice is nearly tangent to the Hopf direction: contact angle " +
                             std::to_string(out.min_contact_angle_deg) + " degrees");
    return out;
}

// ---------------------------------------------------------------------------
// linking number via stereographic crossings
// ---------------------------------------------------------------------------

struct LinkOptions {
    double pole_clearance = 0.05;  // minimal chordal distance from pole to curves
    int seeded_poles = 8;          // extra candidate poles beyond the fixed list
    std::uint64_t seed = 0x5EEDULL;
};

namespace detail {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;
};
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 scale3(double t, Vec3 a) { return {t * a.x, t * a.y, t * a.z}; }
inline double dot3(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross3(Vec3 a, Vec3 b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm3(Vec3 a) { return std::sqrt(dot3(a, a)); }

inline C2 scale4(double t, const C2& a) { return {t * a.z1, t * a.z2}; }

/// Determinant of four R^4 vectors written as C^2 pairs (Re z1, Im z1, Re z2, Im z2).
inline double det4(const std::array<C2, 4>& col) {
    std::array<std::array<double, 4>, 4> m{};
    for (int j = 0; j < 4; ++j)
        m[j] = {col[j].z1.real(), col[j].z1.imag(), col[j].z2.real(), col[j].z2.imag()};
    double det = 0.0;
    for (int j = 0; j < 4; ++j) {
        std::array<int, 3> rest{};
        for (int k = 0, t = 0; k < 4; ++k)
            if (k != j) rest[t++] = k;
        double minor = 0.0;
        for (int c = 0; c < 3; ++c) {
            const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
            minor += m[rest[0]][1 + c] * (m[rest[1]][1 + c1] * m[rest[2]][1 + c2] -
                                          m[rest[1]][1 + c2] * m[rest[2]][1 + c1]);
        }
        det += (j % 2 == 0 ? 1.0 : -1.0) * m[j][0] * minor;
    }
    return det;
}

/// Orthonormal basis of the hyperplane orthogonal to the unit vector q, with
/// the frame (q, b1, b2, b3) always positively oriented so every stereographic
/// view shares one handedness.
inline std::array<C2, 3> hyperplane_basis(const C2& q) {
    std::array<C2, 4> candidates = {C2{cplx{1, 0}, cplx{0, 0}}, C2{cplx{0, 1}, cplx{0, 0}},
                                    C2{cplx{0, 0}, cplx{1, 0}}, C2{cplx{0, 0}, cplx{0, 1}}};
    std::array<C2, 3> basis{};
    int have = 0;
    for (const C2& c : candidates) {
        C2 v = c - scale4(dot4(c, q), q);
        for (int i = 0; i < have; ++i) v = v - scale4(dot4(v, basis[i]), basis[i]);
        const double n = norm(v);
        if (n > 1e-6) {
            basis[have] = scale4(1.0 / n, v);
            if (++have == 3) break;
        }
    }
    if (have != 3) throw NumericalError("degenerate stereographic basis");
    if (det4({q, basis[0], basis[1], basis[2]}) < 0.0) basis[2] = scale4(-1.0, basis[2]);
    return basis;
}

/// Stereographic image of a unit-sphere polyline from the unit pole q.
inline std::vector<Vec3> stereographic(const std::vector<C2>& pts, const C2& q) {
    const std::array<C2, 3> basis = hyperplane_basis(q);
    std::vector<Vec3> out;
    out.reserve(pts.size());
    for (const C2& raw : pts) {
        const double pn = norm(raw);
        const C2 p = scale4(1.0 / pn, raw);
        const double a = dot4(p, q);
        const C2 perp = p - scale4(a, q);
        const C2 y = scale4(1.0 / (1.0 - a), perp);
        out.push_back({dot4(y, basis[0]), dot4(y, basis[1]), dot4(y, basis[2])});
    }
    return out;
}

/// Signed crossings of the xy-projections, curve A counted over curve B.
/// Returns false on a geometric degeneracy that demands a different pole.
inline bool crossing_sum(const std::vector<Vec3>& A, const std::vector<Vec3>& B, int* total) {
    int sum = 0;
    const std::size_t na = A.size(), nb = B.size();
    double scale = 0.0;
    for (const Vec3& p : A) scale = std::max(scale, std::abs(p.x) + std::abs(p.y));
    for (const Vec3& p : B) scale = std::max(scale, std::abs(p.x) + std::abs(p.y));
    for (std::size_t i = 0; i < na; ++i) {
        const Vec3 p1 = A[i], p2 = A[(i + 1) % na];
        const double dax = p2.x - p1.x, day = p2.y - p1.y;
        for (std::size_t j = 0; j < nb; ++j) {
            const Vec3 q1 = B[j], q2 = B[(j + 1) % nb];
            if (std::max(p1.x, p2.x) < std::min(q1.x, q2.x) ||
                std::max(q1.x, q2.x) < std::min(p1.x, p2.x) ||
                std::max(p1.y, p2.y) < std::min(q1.y, q2.y) ||
                std::max(q1.y, q2.y) < std::min(p1.y, p2.y))
                continue;
            const double dbx = q2.x - q1.x, dby = q2.y - q1.y;
            const double det = dax * dby - day * dbx;
            const double rx = q1.x - p1.x, ry = q1.y - p1.y;
            if (std::abs(det) < 1e-14 * scale * scale) {
                // parallel segments whose boxes overlap: only harmful if they
                // actually touch; detect via the cross of the offset
                if (std::abs(rx * day - ry * dax) < 1e-12 * scale * scale) return false;
                continue;
            }
            const double s = (rx * dby - ry * dbx) / det;
            const double t = (rx * day - ry * dax) / det;
            const double edge = 1e-9;
            if (std::min(std::abs(s), std::abs(s - 1.0)) < edge ||
                std::min(std::abs(t), std::abs(t - 1.0)) < edge)
                return false;  // crossing at a vertex: ambiguous view
            if (s <= 0.0 || s >= 1.0 || t <= 0.0 || t >= 1.0) continue;
            const double za = p1.z + s * (p2.z - p1.z);
            const double zb = q1.z + t * (q2.z - q1.z);
            if (std::abs(za - zb) < 1e-12 * (1.0 + std::abs(za) + std::abs(zb))) return false;
            if (za > zb) sum += det > 0.0 ? 1 : -1;
        }
    }
    *total = sum;
    return true;
}

}  // namespace detail

/// Linking number of two disjoint closed curves on a sphere about the origin,
/// via signed stereographic crossings from two independent poles that must
/// agree.  Orientation convention: the standard Hopf pair links +1.
inline int linking_number(const std::vector<C2>& a, const std::vector<C2>& b,
                          const LinkOptions& opt = {}) {
    if (a.size() < 3 || b.size() < 3) throw SchemaError("linking needs closed curves");

    // candidate poles: axes, diagonals, then seeded extras
    std::vector<C2> candidates;
    for (int axis = 0; axis < 4; ++axis)
        for (double sgn : {1.0, -1.0}) {
            C2 q{};
            (axis == 0 ? q.z1 : axis == 1 ? q.z1 : axis == 2 ? q.z2 : q.z2) =
                axis % 2 == 0 ? cplx{sgn, 0.0} : cplx{0.0, sgn};
            candidates.push_back(q);
        }
    for (int mask = 0; mask < 16; ++mask)
        candidates.push_back(C2{cplx{mask & 1 ? 0.5 : -0.5, mask & 2 ? 0.5 : -0.5},
                                cplx{mask & 4 ? 0.5 : -0.5, mask & 8 ? 0.5 : -0.5}});
    SplitMix64 stream(opt.seed);
    for (int k = 0; k < opt.seeded_poles; ++k) {
        const C2 d{cplx{stream.next_normal(), stream.next_normal()},
                   cplx{stream.next_normal(), stream.next_normal()}};
        const double n = norm(d);
        if (n > 1e-6) candidates.push_back(detail::scale4(1.0 / n, d));
    }

    auto clearance = [&](const C2& q) {
        double c = std::numeric_limits<double>::infinity();
        for (const C2& p : a) c = std::min(c, norm(detail::scale4(1.0 / norm(p), p) - q));
        for (const C2& p : b) c = std::min(c, norm(detail::scale4(1.0 / norm(p), p) - q));
        return c;
    };
    std::vector<std::pair<double, std::size_t>> ranked;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double c = clearance(candidates[i]);
        if (c > opt.pole_clearance) ranked.push_back({c, i});
    }
    if (ranked.size() < 2) throw NumericalError("no clear stereographic poles for these curves");
    std::sort(ranked.begin(), ranked.end(), [](const auto& l, const auto& r) {
        return l.first != r.first ? l.first > r.first : l.second < r.second;
    });

    std::vector<int> results;
    for (const auto& [c, idx] : ranked) {
        const std::vector<detail::Vec3> A = detail::stereographic(a, candidates[idx]);
        const std::vector<detail::Vec3> B = detail::stereographic(b, candidates[idx]);
        int sum = 0;
        if (!detail::crossing_sum(A, B, &sum)) continue;  // degenerate view, next pole
        results.push_back(sum);
        if (results.size() == 2) break;
    }
    if (results.size() < 2)
        throw NumericalError("fewer than two clean stereographic views of the curve pair");
    if (results[0] != results[1])
        throw NumericalError("stereographic views disagree on the crossing count");
    return -results[0];  // sign pinned by the Hopf pair linking +1
}

// ---------------------------------------------------------------------------
// slice-vs-intersection report
// ---------------------------------------------------------------------------

struct LinkingReport {
    double radius = 0.0;
    int linking = 0;
    int delta_sum = 0;
    bool match = false;
    std::vector<IntersectionPoint> intersections;
    SphereSlice slice_f, slice_g;
};

/// The module's headline identity, measured: slice both disks at the given
/// radius, link the slices, localize the interior intersections, and compare
/// the linking number with the sum of local indices.
inline LinkingReport linking_report(const AnalyticDisk& f, const AnalyticDisk& g, double radius,
                                    const SliceOptions& slice_opt = {},
                                    const IntersectOptions& intersect_opt = {},
                                    const LinkOptions& link_opt = {}) {
    LinkingReport rep;
    rep.radius = radius;
    rep.slice_f = sphere_slice(f, radius, slice_opt);
    rep.slice_g = sphere_slice(g, radius, slice_opt);
    rep.linking = linking_number(rep.slice_f.image, rep.slice_g.image, link_opt);
    rep.intersections = intersect_disks(f, g, intersect_opt);
    rep.delta_sum = 0;
    for (const IntersectionPoint& p : rep.intersections) rep.delta_sum += p.delta;
    rep.match = rep.linking == rep.delta_sum;
    return rep;
}

}  // namespace jholo
