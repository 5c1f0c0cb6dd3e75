#pragma once

// Statistical probes of the Schwarz inequality for disk maps.
//
// Three instruments:
//  - gromov_scan: samples random jets (base point, direction, magnitude) in the
//    bidisk, certifies each by solving for an actual corrected disk pair with
//    that jet, and reports the normalized derivative |du(0)| / (1 - |u(0)|^2)
//    maxed over the two components.  Every stride-th sample is a deterministic
//    near-extremal probe, so a scan always contains jets close to the sharp
//    constant.  Sample i depends only on (seed, i), never on the total count,
//    which makes suprema monotone in the sample count for a fixed seed.
//  - gauge_scan: sweeps the base point ("gauge") of the first component,
//    solves a corrected pair through each gauge, and measures the derivative
//    at 0 of the normalized lift w (w(0) = 0) through a cover of the target:
//    the identity cover of the disk (normalization by a disk automorphism) or
//    the exponential cover of the punctured disk (normalization at the branch
//    point).  The supremum of ||dw(0)|| over gauges is the scan's Schwarz
//    constant for the structure.
//  - brody_reparametrize: relocates a differentiable disk map so the maximizer
//    of the boundary-weighted gradient sits at the origin, then rescales the
//    domain to unit gradient there — the classical renormalization step that
//    turns a degenerating family into a bounded one.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "jholo/hyperbolic_geometry.hpp"
#include "jholo/rng.hpp"

namespace jholo {

// ---------------------------------------------------------------------------
// uniform jet scan
// ---------------------------------------------------------------------------

struct ScanOptions {
    int resolution = 16;
    double rho_max = 0.995;      // cap on the per-component seed dilation
    double base_radius = 0.9;    // base points drawn in this closed sub-bidisk
    int extremal_stride = 25;    // every stride-th sample is the extremal probe
    SolveConfig solve;
};

struct ScanSample {
    std::uint64_t index = 0;
    C2 base{};
    C2 direction{};           // unit vector in C^2
    double magnitude = 0.0;   // jet scale t; the sampled jet is t * direction
    double quantity = 0.0;    // max_i |du_i(0)| / (1 - |u_i(0)|^2)
    double margin = 0.0;      // containment margin of the solved pair
    bool feasible = false;
    bool extremal_probe = false;
};

struct ScanResult {
    std::vector<ScanSample> samples;
    int n_feasible = 0;
    double sup_quantity = 0.0;  // over feasible samples
    std::uint64_t seed = 0;
};

namespace detail {

inline Seed jet_seed(cplx base, cplx jet_component, double flat, const DiskGrid& grid) {
    const double n = std::abs(jet_component);
    if (n == 0.0) return constant_seed(base, grid);
    return mobius_seed(base, jet_component / n, n / flat, grid);
}

}  // namespace detail

/// Sample n jets, certify each by a corrected pseudoholomorphic pair, and
/// report the normalized origin derivatives.  Throws NumericalError when
/// fewer than half the samples admit a corrected pair.
inline ScanResult gromov_scan(const AlmostComplexStructure& structure, int n_samples,
                              std::uint64_t seed, const ScanOptions& opt = {}) {
    if (n_samples <= 0) throw SchemaError("scan needs a positive sample count");
    if (!(opt.rho_max > 0.0) || !(opt.rho_max < 1.0))
        throw SchemaError("seed dilation cap must lie in (0, 1)");
    if (!(opt.base_radius > 0.0) || !(opt.base_radius < 1.0))
        throw SchemaError("base radius must lie in (0, 1)");
    if (opt.extremal_stride <= 0) throw SchemaError("extremal stride must be positive");

    const DiskGrid grid = build_grid(opt.resolution);
    ScanResult out;
    out.seed = seed;
    out.samples.reserve(static_cast<std::size_t>(n_samples));

    for (int i = 0; i < n_samples; ++i) {
        ScanSample s;
        s.index = static_cast<std::uint64_t>(i);
        if (i % opt.extremal_stride == 0) {
            s.extremal_probe = true;
            s.base = C2{};
            s.direction = C2{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
            s.magnitude = opt.rho_max;
        } else {
            SplitMix64 stream = sample_stream(seed, s.index);
            s.base = C2{stream.next_in_disk(opt.base_radius),
                        stream.next_in_disk(opt.base_radius)};
            s.direction = stream.next_direction_c2();
            double t_max = std::numeric_limits<double>::infinity();
            const double fa = 1.0 - std::norm(s.base.z1);
            const double fb = 1.0 - std::norm(s.base.z2);
            if (std::abs(s.direction.z1) > 0.0)
                t_max = std::min(t_max, fa / std::abs(s.direction.z1));
            if (std::abs(s.direction.z2) > 0.0)
                t_max = std::min(t_max, fb / std::abs(s.direction.z2));
            s.magnitude = stream.next_unit() * opt.rho_max * t_max;
        }

        const double fa = 1.0 - std::norm(s.base.z1);
        const double fb = 1.0 - std::norm(s.base.z2);
        s.quantity = std::max(s.magnitude * std::abs(s.direction.z1) / fa,
                              s.magnitude * std::abs(s.direction.z2) / fb);
        try {
            Seed su = detail::jet_seed(s.base.z1, s.magnitude * s.direction.z1, fa, grid);
            Seed sv = detail::jet_seed(s.base.z2, s.magnitude * s.direction.z2, fb, grid);
            BidiskMap m = solve_coupled(su, sv, structure, opt.solve);
            if (m.converged) {
                s.feasible = true;
                s.margin = m.containment_margin();
                // read the jet back off the solved pair: the anchored solve
                // preserves it exactly, so this is a measurement, not an echo
                const double qa = std::abs(m.u.origin_deriv()) / (1.0 - std::norm(m.u.origin_value()));
                const double qb = std::abs(m.v.origin_deriv()) / (1.0 - std::norm(m.v.origin_value()));
                s.quantity = std::max(qa, qb);
            }
        } catch (const OutOfRegimeError&) {
        } catch (const NumericalError&) {
        }
        if (s.feasible) {
            ++out.n_feasible;
            out.sup_quantity = std::max(out.sup_quantity, s.quantity);
        }
        out.samples.push_back(std::move(s));
    }
    if (2 * out.n_feasible < n_samples)
        throw NumericalError("scan coverage insufficient: " + std::to_string(out.n_feasible) +
                             " of " + std::to_string(n_samples) + " samples admitted a corrected pair");
    return out;
}

// ---------------------------------------------------------------------------
// gauge sweeps through covers
// ---------------------------------------------------------------------------

enum class CoverKind { identity, punctured };

struct GaugeOptions {
    int resolution = 16;
    double rho = 0.5;            // first-factor seed dilation (identity cover)
    double tau = 0.5;            // covering-seed dilation (punctured cover)
    double companion_rho = 0.3;  // second-factor seed dilation
    double base_radius = 0.9;    // identity gauges and companions drawn here
    double r0 = 0.3;             // punctured gauges drawn with 0.05 < |a| < r0
    SolveConfig solve;
};

struct GaugeSample {
    std::uint64_t index = 0;
    cplx gauge{0.0, 0.0};      // base point of the first component
    cplx companion{0.0, 0.0};  // base point of the second component
    cplx du0{0.0, 0.0};        // holomorphic part of the first-component jet
    cplx dbar_u0{0.0, 0.0};    // antiholomorphic part, from the converged equation
    cplx dw0{0.0, 0.0};        // derivative at 0 of the normalized lift
    double normalized = 0.0;   // ||dw(0)|| = |lift factor| (|du0| + |dbar_u0|)
    double margin = 0.0;
    bool feasible = false;
};

struct GaugeScanResult {
    CoverKind cover = CoverKind::identity;
    std::vector<GaugeSample> samples;
    int n_feasible = 0;
    double schwarz_constant = 0.0;  // sup of normalized over feasible samples
    std::uint64_t seed = 0;
};

/// Solve a corrected pair through one gauge and report the lifted jet.
/// direction_phase steers the first-component seed; the companion seed moves
/// with a fixed real direction so the coupling term is active.
inline GaugeSample gauge_probe(const AlmostComplexStructure& structure, CoverKind cover,
                               cplx gauge, cplx direction_phase, cplx companion,
                               const GaugeOptions& opt = {}) {
    const double g = std::abs(gauge);
    if (cover == CoverKind::identity) {
        if (!(g < 1.0)) throw SchemaError("identity-cover gauge must lie in the open disk");
    } else {
        if (!(g > 0.0) || !(g < 1.0))
            throw SchemaError("punctured-cover gauge must lie in the punctured open disk");
    }
    if (!(std::abs(companion) < 1.0)) throw SchemaError("companion must lie in the open disk");
    const double pn = std::abs(direction_phase);
    if (!(pn > 0.0)) throw SchemaError("direction phase must be nonzero");
    const cplx phase = direction_phase / pn;

    const DiskGrid grid = build_grid(opt.resolution);
    GaugeSample s;
    s.gauge = gauge;
    s.companion = companion;

    Seed su = cover == CoverKind::identity
                  ? detail::mobius_seed(gauge, phase, opt.rho, grid)
                  : detail::punctured_seed(gauge, opt.tau * phase, grid);
    Seed sv = detail::mobius_seed(companion, cplx{1.0, 0.0}, opt.companion_rho, grid);
    try {
        BidiskMap m = solve_coupled(su, sv, structure, opt.solve);
        if (!m.converged) return s;
        s.feasible = true;
        s.margin = m.containment_margin();
        s.du0 = m.u.origin_deriv();
        // at convergence dbar u = mu1 du + mu2 conj(du) holds pointwise; read
        // it at the origin, where the boundary cutoff equals 1
        const BeltramiPair mu =
            structure.coefficients_a(C2{m.u.origin_value(), m.v.origin_value()});
        s.dbar_u0 = mu.mu1 * s.du0 + mu.mu2 * std::conj(s.du0);
        const cplx factor = cover == CoverKind::identity
                                ? cplx{-1.0 / (1.0 - std::norm(m.u.origin_value())), 0.0}
                                : chain_rule_factor(m.u.origin_value());
        s.dw0 = factor * s.du0;
        s.normalized = std::abs(factor) * (std::abs(s.du0) + std::abs(s.dbar_u0));
    } catch (const OutOfRegimeError&) {
    } catch (const NumericalError&) {
    }
    return s;
}

/// Sweep random gauges through the chosen cover, accumulating the Schwarz
/// constant sup ||dw(0)||.  Throws NumericalError when fewer than half the
/// gauges admit a corrected pair.
inline GaugeScanResult gauge_scan(const AlmostComplexStructure& structure, CoverKind cover,
                                  int n_samples, std::uint64_t seed,
                                  const GaugeOptions& opt = {}) {
    if (n_samples <= 0) throw SchemaError("scan needs a positive sample count");
    if (!(opt.base_radius > 0.0) || !(opt.base_radius < 1.0))
        throw SchemaError("base radius must lie in (0, 1)");
    if (!(opt.r0 > 0.05) || !(opt.r0 < 1.0))
        throw SchemaError("punctured gauge range must satisfy 0.05 < r0 < 1");

    GaugeScanResult out;
    out.cover = cover;
    out.seed = seed;
    out.samples.reserve(static_cast<std::size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        SplitMix64 stream = sample_stream(seed, static_cast<std::uint64_t>(i));
        cplx gauge;
        if (cover == CoverKind::identity) {
            gauge = stream.next_in_disk(opt.base_radius);
        } else {
            const double r = 0.05 + (opt.r0 - 0.05) * stream.next_unit();
            gauge = r * stream.next_phase();
        }
        const cplx phase = stream.next_phase();
        const cplx companion = stream.next_in_disk(opt.base_radius);
        GaugeSample s = gauge_probe(structure, cover, gauge, phase, companion, opt);
        s.index = static_cast<std::uint64_t>(i);
        if (s.feasible) {
            ++out.n_feasible;
            out.schwarz_constant = std::max(out.schwarz_constant, s.normalized);
        }
        out.samples.push_back(std::move(s));
    }
    if (2 * out.n_feasible < n_samples)
        throw NumericalError("gauge coverage insufficient: " + std::to_string(out.n_feasible) +
                             " of " + std::to_string(n_samples) + " gauges admitted a corrected pair");
    return out;
}

// ---------------------------------------------------------------------------
// renormalization of a degenerating map
// ---------------------------------------------------------------------------

/// A C^2-valued map on a disk of the given radius, carried with its real
/// differential evaluated on the two coordinate directions.
struct DifferentiableMap {
    std::function<C2(cplx)> value;
    std::function<C2(cplx)> d_x;
    std::function<C2(cplx)> d_y;
    double radius = 1.0;
};

struct BrodyOptions {
    int rings = 24;
    int angles = 96;
    double tolerance = 1e-2;  // accept when W(0) >= (1 - tolerance) * sampled sup
    int max_relocations = 50;
};

struct BrodyResult {
    DifferentiableMap map;      // relocated and rescaled: unit x-gradient at 0
    int relocations = 0;
    double scale = 0.0;         // x-gradient at the final center before rescaling
    double sup_weighted = 0.0;  // sampled sup of the weighted gradient afterwards
};

namespace detail {

/// Boundary-weighted gradient ||df(d_x)(z)|| (R^2 - |z|^2) / R^2.
inline double weighted_gradient(const DifferentiableMap& f, cplx z) {
    const double w = (f.radius * f.radius - std::norm(z)) / (f.radius * f.radius);
    return norm(f.d_x(z)) * w;
}

/// Sampled maximizer of the weighted gradient over a polar grid.
inline std::pair<cplx, double> weighted_maximizer(const DifferentiableMap& f,
                                                  const BrodyOptions& opt) {
    cplx best{0.0, 0.0};
    double best_w = weighted_gradient(f, best);
    for (int j = 0; j < opt.rings; ++j) {
        const double r = f.radius * (j + 0.5) / opt.rings;
        for (int l = 0; l < opt.angles; ++l) {
            const double th = 2.0 * kPi * l / opt.angles;
            const cplx z{r * std::cos(th), r * std::sin(th)};
            const double w = weighted_gradient(f, z);
            if (w > best_w) {
                best_w = w;
                best = z;
            }
        }
    }
    return {best, best_w};
}

/// Precompose with the disk automorphism psi(z) = R phi_a(-z/R), which moves
/// the origin to the relocation center.  The differential chains through
/// df(t) = d_x Re t + d_y Im t with t = psi'(z).
inline DifferentiableMap relocate(const DifferentiableMap& f, cplx center) {
    const Mobius phi = mobius(center / f.radius);
    const double R = f.radius;
    auto psi = [phi, R](cplx z) { return R * phi(-z / R); };
    auto dpsi = [phi, R](cplx z) { return -phi.deriv(-z / R); };
    DifferentiableMap g;
    g.radius = R;
    g.value = [f, psi](cplx z) { return f.value(psi(z)); };
    g.d_x = [f, psi, dpsi](cplx z) {
        const cplx t = dpsi(z);
        const cplx w = psi(z);
        return t.real() * f.d_x(w) + t.imag() * f.d_y(w);
    };
    g.d_y = [f, psi, dpsi](cplx z) {
        const cplx t = cplx{0.0, 1.0} * dpsi(z);
        const cplx w = psi(z);
        return t.real() * f.d_x(w) + t.imag() * f.d_y(w);
    };
    return g;
}

}  // namespace detail

/// Relocate the maximizer of the boundary-weighted gradient to the origin
/// (repeating until the origin carries the sampled sup, up to the tolerance)
/// and rescale the domain so the x-gradient at the origin is exactly 1.
inline BrodyResult brody_reparametrize(const DifferentiableMap& f, const BrodyOptions& opt = {}) {
    if (!f.value || !f.d_x || !f.d_y) throw SchemaError("map must carry value, d_x, and d_y");
    if (!(f.radius > 0.0) || !std::isfinite(f.radius))
        throw SchemaError("map radius must be positive and finite");
    if (!(norm(f.d_x(cplx{0.0, 0.0})) > 0.0))
        throw NumericalError("differential vanishes at the origin; nothing to normalize");

    BrodyResult out;
    DifferentiableMap g = f;
    for (;;) {
        const auto [center, sup] = detail::weighted_maximizer(g, opt);
        if (detail::weighted_gradient(g, cplx{0.0, 0.0}) >= (1.0 - opt.tolerance) * sup) break;
        if (out.relocations >= opt.max_relocations)
            throw NumericalError("weighted gradient did not stabilize within " +
                                 std::to_string(opt.max_relocations) + " relocations");
        g = detail::relocate(g, center);
        ++out.relocations;
    }

    out.scale = norm(g.d_x(cplx{0.0, 0.0}));
    const double s = out.scale;
    DifferentiableMap m;
    m.radius = s * g.radius;
    m.value = [g, s](cplx z) { return g.value(z / s); };
    m.d_x = [g, s](cplx z) { return (1.0 / s) * g.d_x(z / s); };
    m.d_y = [g, s](cplx z) { return (1.0 / s) * g.d_y(z / s); };
    out.map = m;
    out.sup_weighted = detail::weighted_maximizer(m, opt).second;
    return out;
}

}  // namespace jholo
