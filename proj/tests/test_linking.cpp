#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <complex>
#include <vector>

#include "jholo/linking.hpp"

using jholo::AnalyticDisk;
using jholo::C2;
using jholo::cplx;
using jholo::IndexOptions;
using jholo::IntersectionIndex;
using jholo::LinkingReport;
using jholo::SphereSlice;

namespace {

const cplx kZero{0.0, 0.0};
const cplx kOne{1.0, 0.0};

AnalyticDisk flat_disk() { return jholo::polynomial_disk({kZero, kOne}, {kZero}); }

AnalyticDisk graph_disk(int power) {
    std::vector<cplx> cv(static_cast<std::size_t>(power) + 1, kZero);
    cv.back() = kOne;
    return jholo::polynomial_disk({kZero, kOne}, cv);
}

// ---------------------------------------------------------------------------
// independent oracle: Gauss linking integral of the stereographic images.
// Shares only the two calibration anchors with the library: the frame
// (pole, b1, b2, b3) is positively oriented in R^4 and the standard Hopf
// pair must link +1; the projection, basis construction, and the integral
// are computed by separate code below.
// ---------------------------------------------------------------------------

using A4 = std::array<double, 4>;

A4 to4(const C2& p) { return {p.z1.real(), p.z1.imag(), p.z2.real(), p.z2.imag()}; }

double dot4(const A4& a, const A4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

double det3(double a0, double a1, double a2, double b0, double b1, double b2, double c0, double c1,
            double c2) {
    return a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0);
}

/// Vector orthogonal to u, v, w by cofactor expansion; (x, u, v, w) is then a
/// positively oriented frame of R^4.
A4 cross4(const A4& u, const A4& v, const A4& w) {
    A4 x{};
    for (int i = 0; i < 4; ++i) {
        std::array<int, 3> c{};
        for (int k = 0, t = 0; k < 4; ++k)
            if (k != i) c[t++] = k;
        const double m = det3(u[c[0]], u[c[1]], u[c[2]], v[c[0]], v[c[1]], v[c[2]], w[c[0]],
                              w[c[1]], w[c[2]]);
        x[i] = ((i % 2 == 0) ? 1.0 : -1.0) * m;
    }
    return x;
}

struct V3 {
    double x, y, z;
};

std::vector<V3> oracle_project(const std::vector<C2>& pts) {
    A4 q{2.0, 3.0, 5.0, 7.0};
    const double qn = std::sqrt(dot4(q, q));
    for (double& c : q) c /= qn;
    A4 b1{1.0, 0.0, 0.0, 0.0};
    const double a1 = dot4(b1, q);
    for (int i = 0; i < 4; ++i) b1[i] -= a1 * q[i];
    const double n1 = std::sqrt(dot4(b1, b1));
    for (double& c : b1) c /= n1;
    A4 b2{0.0, 1.0, 0.0, 0.0};
    const double a2 = dot4(b2, q), a2b = dot4(b2, b1);
    for (int i = 0; i < 4; ++i) b2[i] -= a2 * q[i] + a2b * b1[i];
    const double n2 = std::sqrt(dot4(b2, b2));
    for (double& c : b2) c /= n2;
    // cross4 leads the frame; moving it to the last slot costs three swaps,
    // so negate to keep (q, b1, b2, b3) positively oriented
    A4 b3 = cross4(q, b1, b2);
    for (double& c : b3) c = -c;
    std::vector<V3> out;
    out.reserve(pts.size());
    for (const C2& praw : pts) {
        A4 p = to4(praw);
        const double pn = std::sqrt(dot4(p, p));
        for (double& c : p) c /= pn;
        const double a = dot4(p, q);
        A4 y{};
        for (int i = 0; i < 4; ++i) y[i] = (p[i] - a * q[i]) / (1.0 - a);
        out.push_back({dot4(y, b1), dot4(y, b2), dot4(y, b3)});
    }
    return out;
}

/// Midpoint-rule Gauss linking integral of the projected curves.
double oracle_gauss_linking(const std::vector<C2>& ca, const std::vector<C2>& cb) {
    const std::vector<V3> A = oracle_project(ca);
    const std::vector<V3> B = oracle_project(cb);
    double sum = 0.0;
    const std::size_t na = A.size(), nb = B.size();
    for (std::size_t i = 0; i < na; ++i) {
        const V3 p1 = A[i], p2 = A[(i + 1) % na];
        const V3 da{p2.x - p1.x, p2.y - p1.y, p2.z - p1.z};
        const V3 ma{0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y), 0.5 * (p1.z + p2.z)};
        for (std::size_t j = 0; j < nb; ++j) {
            const V3 q1 = B[j], q2 = B[(j + 1) % nb];
            const V3 db{q2.x - q1.x, q2.y - q1.y, q2.z - q1.z};
            const V3 mb{0.5 * (q1.x + q2.x), 0.5 * (q1.y + q2.y), 0.5 * (q1.z + q2.z)};
            const V3 r{mb.x - ma.x, mb.y - ma.y, mb.z - ma.z};
            const double rn = std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z);
            const V3 cx{da.y * db.z - da.z * db.y, da.z * db.x - da.x * db.z,
                        da.x * db.y - da.y * db.x};
            sum += (r.x * cx.x + r.y * cx.y + r.z * cx.z) / (rn * rn * rn);
        }
    }
    return sum / (4.0 * jholo::kPi);
}

std::vector<C2> circle_curve(const std::function<C2(double)>& param, int n = 400) {
    std::vector<C2> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k) out.push_back(param(2.0 * jholo::kPi * k / n));
    return out;
}

}  // namespace

TEST_CASE("winding numbers count loop turns and reject unreliable loops") {
    for (const int k : {1, 3, -2}) {
        const int w = jholo::winding_number(
            [k](double th) { return std::polar(1.0, k * th) + cplx{0.1, 0.0}; });
        // an offset of 0.1 keeps |k| turns for these powers since the loop
        // still encircles the origin |k| times
        CHECK(w == k);
    }
    CHECK(jholo::winding_number([](double th) { return std::polar(2.0, th) + cplx{0.5, 0.5}; }) ==
          1);
    CHECK(jholo::winding_number([](double) { return cplx{0.3, -0.2}; }) == 0);
    // a loop through the origin is rejected rather than guessed at
    CHECK_THROWS_AS(jholo::winding_number([](double th) { return cplx{std::cos(th), 0.0}; }),
                    jholo::NumericalError);
    // angular steps beyond the trust bound are rejected
    CHECK_THROWS_AS(jholo::winding_number([](double th) { return std::polar(1.0, 110.0 * th); }),
                    jholo::NumericalError);
    CHECK_THROWS_AS(jholo::winding_number([](double) { return cplx{1.0, 0.0}; }, 4),
                    jholo::SchemaError);
}

TEST_CASE("branching order is one plus the differential's vanishing order") {
    CHECK(jholo::branch_multiplicity(flat_disk(), kZero) == 1);
    CHECK(jholo::branch_multiplicity(graph_disk(2), cplx{0.3, 0.1}) == 1);
    const AnalyticDisk cusp = jholo::polynomial_disk({kZero, kZero, kOne}, {kZero, kZero, kZero, kOne});
    CHECK(jholo::branch_multiplicity(cusp, kZero) == 2);
    const AnalyticDisk deep =
        jholo::polynomial_disk({kZero, kZero, kZero, kOne}, {kZero, kZero, kZero, kZero, kZero, kOne});
    CHECK(jholo::branch_multiplicity(deep, kZero) == 3);
    CHECK_THROWS_AS(jholo::branch_multiplicity(flat_disk(), cplx{1.0, 0.0}), jholo::SchemaError);
}

TEST_CASE("local index certifies the canonical tangency ladder") {
    const AnalyticDisk f = flat_disk();
    for (const double base_rho : {0.1, 0.15}) {
        IndexOptions opt;
        opt.rho1 = opt.rho2 = base_rho;
        for (const int power : {1, 2, 3}) {
            const AnalyticDisk g = power == 1 ? jholo::polynomial_disk({kZero}, {kZero, kOne})
                                              : graph_disk(power);
            const IntersectionIndex ix = jholo::intersection_index(f, g, kZero, kZero, opt);
            CHECK(ix.delta == power);
            CHECK(ix.winding2 == power);
            CHECK(ix.winding1 == 1);
            CHECK(ix.attempt == 0);  // no remix needed for these pairs
            if (power > 1) CHECK(ix.rho2 < ix.rho1);  // tangency forces uneven radii
        }
    }
}

TEST_CASE("coordinate swap rescues an identically degenerate face") {
    // the cusp against an axis: the second difference component z^3 vanishes
    // on a whole slice of every polydisk face, so the identity attempt can
    // never validate; the coordinate swap must take over and certify 3
    const AnalyticDisk cusp = jholo::polynomial_disk({kZero, kZero, kOne}, {kZero, kZero, kZero, kOne});
    const AnalyticDisk axis = flat_disk();
    const IntersectionIndex ix = jholo::intersection_index(cusp, axis, kZero, kZero);
    CHECK(ix.delta == 3);
    CHECK(ix.attempt == 1);
    const int mf = jholo::branch_multiplicity(cusp, kZero);
    const int mg = jholo::branch_multiplicity(axis, kZero);
    CHECK(mf == 2);
    CHECK(mg == 1);
    CHECK(ix.delta >= mf * mg);
}

TEST_CASE("local index away from the origin") {
    const AnalyticDisk f = flat_disk();
    // graph of (w - 0.2)^2 touches the flat disk at (0.2, 0.2)
    const AnalyticDisk g =
        jholo::polynomial_disk({kZero, kOne}, {cplx{0.04, 0.0}, cplx{-0.4, 0.0}, kOne});
    const IntersectionIndex ix = jholo::intersection_index(f, g, cplx{0.2, 0.0}, cplx{0.2, 0.0});
    CHECK(ix.delta == 2);
    IndexOptions bad;
    bad.rho1 = -1.0;
    CHECK_THROWS_AS(jholo::intersection_index(f, g, kZero, kZero, bad), jholo::SchemaError);
}

TEST_CASE("intersection localization finds and grades every zero") {
    const AnalyticDisk f = flat_disk();

    SECTION("a single tangential intersection") {
        const auto pts = jholo::intersect_disks(f, graph_disk(2));
        REQUIRE(pts.size() == 1);
        CHECK(std::abs(pts[0].z) < 1e-6);
        CHECK(std::abs(pts[0].w) < 1e-6);
        CHECK(pts[0].gap < 1e-7);
        CHECK(pts[0].delta == 2);
        CHECK(pts[0].mult_f == 1);
        CHECK(pts[0].mult_g == 1);
    }

    SECTION("two transverse intersections are separated") {
        // graph of w^2 - 0.09 crosses the flat disk at w = +-0.3
        const AnalyticDisk g =
            jholo::polynomial_disk({kZero, kOne}, {cplx{-0.09, 0.0}, kZero, kOne});
        auto pts = jholo::intersect_disks(f, g);
        REQUIRE(pts.size() == 2);
        int sum = 0;
        for (const auto& p : pts) {
            CHECK(std::abs(std::abs(p.z) - 0.3) < 1e-6);
            CHECK(std::abs(p.z - p.w) < 1e-9);
            CHECK(p.delta == 1);
            sum += p.delta;
        }
        CHECK(sum == 2);
    }

    SECTION("disjoint disks produce no points") {
        const AnalyticDisk up = jholo::polynomial_disk({kZero, kOne}, {cplx{0.3, 0.0}});
        const AnalyticDisk down = jholo::polynomial_disk({kZero, kOne}, {cplx{-0.3, 0.0}});
        CHECK(jholo::intersect_disks(up, down).empty());
    }
}

TEST_CASE("sphere slice of the flat disk is the Hopf circle") {
    const AnalyticDisk f = flat_disk();
    const double r = 0.25;
    const SphereSlice s = jholo::sphere_slice(f, r);
    CHECK(s.parameter.size() > 100);
    for (std::size_t k = 0; k < s.image.size(); ++k) {
        CHECK(std::abs(jholo::norm(s.image[k]) - r) < 1e-9);
        CHECK(std::abs(std::abs(s.parameter[k]) - r) < 1e-9);
    }
    // the Hopf circle is maximally transverse to the Hopf direction
    CHECK(s.min_contact_angle_deg > 85.0);
    // positively oriented parameter curve
    double area2 = 0.0;
    for (std::size_t k = 0; k < s.parameter.size(); ++k) {
        const cplx a = s.parameter[k];
        const cplx b = s.parameter[(k + 1) % s.parameter.size()];
        area2 += a.real() * b.imag() - b.real() * a.imag();
    }
    CHECK(area2 > 0.0);
    // the polyline closes within one step
    CHECK(std::abs(s.parameter.front() - s.parameter.back()) < 2.0 * 0.01);

    SECTION("input validation") {
        const AnalyticDisk shifted = jholo::polynomial_disk({cplx{0.5, 0.0}, kOne}, {kZero});
        CHECK_THROWS_AS(jholo::sphere_slice(shifted, 0.3), jholo::SchemaError);
        CHECK_THROWS_AS(jholo::sphere_slice(f, -1.0), jholo::SchemaError);
        jholo::SliceOptions bad;
        bad.step = 0.5;
        CHECK_THROWS_AS(jholo::sphere_slice(f, 0.3, bad), jholo::SchemaError);
    }

    SECTION("an image that never reaches the sphere is reported") {
        const AnalyticDisk small = jholo::polynomial_disk({kZero, cplx{0.3, 0.0}}, {kZero});
        CHECK_THROWS_AS(jholo::sphere_slice(small, 0.4), jholo::NumericalError);
    }
}

TEST_CASE("sphere slice of a tangent graph keeps its contact angle") {
    const double r = 0.45;
    const SphereSlice s = jholo::sphere_slice(graph_disk(2), r);
    // |w|^2 + |w|^4 = r^2 puts the parameter curve on an exact circle
    const double rho = std::sqrt(0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * r * r)));
    for (const cplx w : s.parameter) CHECK(std::abs(std::abs(w) - rho) < 1e-6);
    // contact angle of (rho e^{i t}, rho^2 e^{2 i t}) against the Hopf field
    const double rho2 = rho * rho;
    const double expected =
        std::asin((1.0 + 2.0 * rho2) / std::sqrt((1.0 + 4.0 * rho2) * (1.0 + rho2))) * 180.0 /
        jholo::kPi;
    CHECK(std::abs(s.min_contact_angle_deg - expected) < 1.0);
}

TEST_CASE("linking numbers of explicit circles calibrate the conventions") {
    const auto ha = circle_curve(
        [](double th) { return C2{0.3 * std::polar(1.0, th), kZero}; });
    const auto hb = circle_curve(
        [](double th) { return C2{kZero, 0.3 * std::polar(1.0, th)}; });
    std::vector<C2> hb_rev(hb.rbegin(), hb.rend());
    const auto far = circle_curve([](double th) {
        return C2{cplx{0.3, 0.0} + 0.05 * std::polar(1.0, th), cplx{0.2, 0.0}};
    });

    CHECK(jholo::linking_number(ha, hb) == 1);   // the Hopf anchor
    CHECK(jholo::linking_number(hb, ha) == 1);   // symmetry
    CHECK(jholo::linking_number(ha, hb_rev) == -1);
    CHECK(jholo::linking_number(ha, far) == 0);
    CHECK_THROWS_AS(jholo::linking_number({ha[0], ha[1]}, hb), jholo::SchemaError);

    // independent integral oracle agrees, sign included
    CHECK(std::abs(oracle_gauss_linking(ha, hb) - 1.0) < 0.05);
    CHECK(std::abs(oracle_gauss_linking(ha, hb_rev) + 1.0) < 0.05);
    CHECK(std::abs(oracle_gauss_linking(ha, far)) < 0.05);
}

TEST_CASE("boundary linking equals the sum of interior indices") {
    const AnalyticDisk f = flat_disk();
    const std::array<std::pair<int, AnalyticDisk>, 3> pairs = {
        std::pair<int, AnalyticDisk>{1, jholo::polynomial_disk({kZero}, {kZero, kOne})},
        {2, graph_disk(2)},
        {3, graph_disk(3)}};
    for (const double r : {0.25, 0.45}) {
        for (const auto& [expected, g] : pairs) {
            const LinkingReport rep = jholo::linking_report(f, g, r);
            INFO("radius " << r << " expected " << expected);
            CHECK(rep.match);
            CHECK(rep.linking == expected);
            CHECK(rep.delta_sum == expected);
            REQUIRE(rep.intersections.size() == 1);
            CHECK(std::abs(rep.intersections[0].z) < 1e-5);
            CHECK(rep.intersections[0].delta >=
                  rep.intersections[0].mult_f * rep.intersections[0].mult_g);
            // projection-independent cross-check through the integral oracle
            const double gauss = oracle_gauss_linking(rep.slice_f.image, rep.slice_g.image);
            CHECK(std::abs(gauss - rep.linking) < 0.1);
        }
    }
}

TEST_CASE("reports are deterministic") {
    const AnalyticDisk f = flat_disk();
    const AnalyticDisk g = graph_disk(2);
    const LinkingReport a = jholo::linking_report(f, g, 0.25);
    const LinkingReport b = jholo::linking_report(f, g, 0.25);
    CHECK(a.linking == b.linking);
    CHECK(a.delta_sum == b.delta_sum);
    REQUIRE(a.slice_f.parameter.size() == b.slice_f.parameter.size());
    CHECK(a.slice_f.parameter.front() == b.slice_f.parameter.front());
    CHECK(a.intersections.size() == b.intersections.size());
}
