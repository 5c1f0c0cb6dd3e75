// Usage sample: boundary linking versus interior intersection indices for
// the transversal pair (z, 0) and (0, w) — two flat disks meeting once at
// the origin, whose sphere slices form a Hopf link.

#include <cstdio>

#include "jholo/linking.hpp"

using jholo::cplx;

int main() {
    const cplx zero{0.0, 0.0}, one{1.0, 0.0};
    const jholo::AnalyticDisk f = jholo::polynomial_disk({zero, one}, {zero});
    const jholo::AnalyticDisk g = jholo::polynomial_disk({zero}, {zero, one});

    for (const double radius : {0.25, 0.45}) {
        const jholo::LinkingReport rep = jholo::linking_report(f, g, radius);
        std::printf("radius %.2f\n", radius);
        std::printf("  slices: %zu and %zu points, min contact angles %.1f and %.1f deg\n",
                    rep.slice_f.parameter.size(), rep.slice_g.parameter.size(),
                    rep.slice_f.min_contact_angle_deg, rep.slice_g.min_contact_angle_deg);
        std::printf("  linking number of the boundary curves: %d\n", rep.linking);
        for (const jholo::IntersectionPoint& p : rep.intersections)
            std::printf("  intersection at z = %.4f%+.4fi: index %d (multiplicities %d x %d)\n",
                        p.z.real(), p.z.imag(), p.delta, p.mult_f, p.mult_g);
        std::printf("  index sum %d, matches linking: %s\n\n", rep.delta_sum,
                    rep.match ? "yes" : "no");
    }
    return 0;
}
