// Usage sample: solve one corrected disk through the reference perturbation
// and walk the metric machinery — upper estimate, calibrated constants, and
// the completeness probe that the library builds from them.

#include <cstdio>

#include "jholo/almost_complex.hpp"
#include "jholo/beltrami_solver.hpp"
#include "jholo/hyperbolic_geometry.hpp"

using jholo::C2;
using jholo::cplx;

int main() {
    // a weak polynomial deformation of the standard structure
    const jholo::AlmostComplexStructure s = jholo::reference_perturbation().with_epsilon(0.1);
    std::printf("structure: %s (epsilon %.2f)\n", s.description.c_str(), s.epsilon);
    std::printf("coefficient bound: %.4f\n\n", jholo::coefficient_bound(s));

    // correct one holomorphic competitor into a J-holomorphic disk
    const jholo::DiskGrid grid = jholo::build_grid(16);
    const jholo::Seed seed =
        jholo::detail::mobius_seed(cplx{0.3, 0.1}, cplx{1.0, 0.0}, 0.5, grid);
    const jholo::DiskMap m =
        jholo::solve_disk(seed, jholo::structure_field_a(s), cplx{0.1, 0.0});
    std::printf("solve: converged=%d after %d iterations, residual %.3e\n", m.converged,
                m.iterations, m.residual);
    std::printf("origin jet: u(0) = %.6f%+.6fi, du(0) = %.6f%+.6fi\n",
                m.origin_value().real(), m.origin_value().imag(), m.origin_deriv().real(),
                m.origin_deriv().imag());
    std::printf("containment margin: %.4f\n\n", m.containment_margin);

    // upper estimate of the infinitesimal metric at a base point
    const C2 base{cplx{0.3, 0.0}, cplx{0.0, 0.0}};
    const C2 dir{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
    const jholo::MetricSample ms = jholo::royden_estimate(s, base, dir);
    std::printf("metric upper estimate at (0.3, 0): %.6f (feasible radius %.4f, %d solves)\n",
                ms.upper, ms.feasible_radius, ms.solves);

    // calibrate the lower-bound constants and probe completeness
    const jholo::Calibration cal = jholo::calibrate_constants(s);
    std::printf("calibrated constants: C1 = %.4f, K1 = %.4f\n", cal.c1_bidisk,
                cal.k1_punctured);
    for (const double delta : {1e-3, 1e-6, 1e-9}) {
        const jholo::CompletenessReport rep =
            jholo::completeness_probe(cal.k1_punctured, delta);
        std::printf("  delta %.0e: length %.5f, predicted %.5f, ratio %.5f\n", rep.delta,
                    rep.length, rep.predicted, rep.ratio);
    }
    return 0;
}
