#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "jholo/hyperbolic_geometry.hpp"

using jholo::C2;
using jholo::cplx;
using jholo::MetricSample;
using jholo::RoydenOptions;

namespace {

/// Fourth-order central difference of a complex curve at 0.
cplx richardson_deriv(const std::function<cplx(double)>& f, double h) {
    return (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
}

}  // namespace

TEST_CASE("disk automorphisms swap the base point with the origin") {
    const cplx a{0.4, -0.3};
    jholo::Mobius phi = jholo::mobius(a);
    CHECK(std::abs(phi(cplx{0.0, 0.0}) - a) < 1e-15);
    CHECK(std::abs(phi(a)) < 1e-15);
    // involution
    for (const cplx l : {cplx{0.2, 0.1}, cplx{-0.7, 0.05}, cplx{0.0, 0.9}}) {
        CHECK(std::abs(phi(phi(l)) - l) < 1e-14);
        CHECK(std::abs(phi(l)) < 1.0);
    }
    // derivative against a finite difference
    const cplx l0{0.25, -0.15};
    const cplx fd = richardson_deriv([&](double t) { return phi(l0 + cplx{t, 0.0}); }, 1e-4);
    CHECK(std::abs(phi.deriv(l0) - fd) < 1e-10);

    CHECK_THROWS_AS(jholo::mobius(cplx{1.0, 0.0}), jholo::SchemaError);
    CHECK_THROWS_AS(jholo::mobius(cplx{0.9, 0.9}), jholo::SchemaError);
}

TEST_CASE("exponential cover hits the marked point from its branch point") {
    for (const cplx a : {cplx{0.1, 0.0}, cplx{0.05, 0.02}, cplx{-0.2, 0.1}, cplx{0.0, 0.25}}) {
        const cplx c = jholo::branch_point(a);
        CHECK(std::abs(c) < 1.0);
        CHECK(std::abs(jholo::covering_punctured(c) - a) < 1e-14);
    }
    // the cover lands in the punctured disk
    for (int i = 0; i < 40; ++i) {
        const double t = 2.0 * jholo::kPi * i / 40.0;
        const cplx l = 0.95 * cplx{std::cos(t), std::sin(t)};
        const double r = std::abs(jholo::covering_punctured(l));
        CHECK(r > 0.0);
        CHECK(r < 1.0);
    }
    // derivative against a finite difference
    const cplx l0{-0.3, 0.2};
    const cplx fd =
        richardson_deriv([&](double t) { return jholo::covering_punctured(l0 + cplx{t, 0.0}); },
                         1e-4);
    CHECK(std::abs(jholo::covering_punctured_deriv(l0) - fd) < 1e-10);

    CHECK_THROWS_AS(jholo::branch_point(cplx{0.0, 0.0}), jholo::SchemaError);
    CHECK_THROWS_AS(jholo::branch_point(cplx{1.0, 0.0}), jholo::SchemaError);
}

TEST_CASE("lift derivative factor matches its closed forms") {
    const double e1 = std::exp(-1.0);
    const double e2 = std::exp(-2.0);
    const cplx f1 = jholo::chain_rule_factor(cplx{e1, 0.0});
    const cplx f2 = jholo::chain_rule_factor(cplx{e2, 0.0});
    CHECK(std::abs(f1 - cplx{-std::exp(1.0) / 2.0, 0.0}) < 1e-12 * std::abs(f1));
    CHECK(std::abs(f2 - cplx{-std::exp(2.0) / 4.0, 0.0}) < 1e-12 * std::abs(f2));
}

TEST_CASE("lift derivative factor agrees with a finite-difference lift") {
    // u(z) = a exp(sigma z) has u(0) = a and an explicit lift through the
    // cover: L(z) = log(a) + sigma z, then w = phi_c((1 + L)/(1 - L)).
    const cplx sigma{0.7, 0.3};
    for (const double av : {std::exp(-1.0), std::exp(-2.0)}) {
        const cplx a{av, 0.0};
        const cplx b = jholo::branch_log(a);
        const cplx c = jholo::branch_point(a);
        jholo::Mobius phi = jholo::mobius(c);
        auto lifted = [&](double t) {
            const cplx L = b + sigma * cplx{t, 0.0};
            return phi((1.0 + L) / (1.0 - L));
        };
        CHECK(std::abs(lifted(0.0)) < 1e-14);
        const cplx fd = richardson_deriv(lifted, 1e-3);
        const cplx predicted = jholo::chain_rule_factor(a) * (a * sigma);
        CHECK(std::abs(fd - predicted) < 1e-6 * std::abs(predicted));
    }
}

TEST_CASE("closed-form lower bounds evaluate and validate their domain") {
    const C2 base{cplx{0.5, 0.0}, cplx{0.0, 0.6}};
    const C2 dir{cplx{1.0, 0.0}, cplx{0.0, 2.0}};
    const double b = jholo::lower_bound_bidisk(1.0, 1.0, base, dir);
    CHECK(b == Catch::Approx(std::max(1.0 / 0.75, 2.0 / 0.64)));

    const C2 near_punct{cplx{0.1, 0.0}, cplx{0.0, 0.0}};
    const double p = jholo::lower_bound_punctured(0.5, 1.0, near_punct, dir);
    CHECK(p == Catch::Approx(std::max(0.5 / (0.1 * std::log(10.0)), 2.0)));

    CHECK_THROWS_AS(jholo::lower_bound_bidisk(1.0, 1.0, C2{cplx{1.0, 0.0}, {}}, dir),
                    jholo::SchemaError);
    CHECK_THROWS_AS(jholo::lower_bound_punctured(0.5, 1.0, C2{cplx{0.5, 0.0}, {}}, dir),
                    jholo::SchemaError);
    CHECK_THROWS_AS(jholo::lower_bound_punctured(0.5, 1.0, C2{cplx{0.0, 0.0}, {}}, dir),
                    jholo::SchemaError);
}

TEST_CASE("metric estimate at the standard structure recovers the disk metric") {
    jholo::AlmostComplexStructure std_structure = jholo::standard_structure();
    RoydenOptions opt;
    for (const double a : {0.0, 0.3, 0.5, 0.7}) {
        const C2 base{cplx{a, 0.0}, cplx{0.0, 0.0}};
        const C2 dir{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
        MetricSample s = jholo::royden_estimate(std_structure, base, dir, opt);
        REQUIRE(s.feasible);
        const double truth = 1.0 / (1.0 - a * a);
        CHECK(s.upper >= truth * (1.0 - 1e-9));  // an upper estimate stays above
        CHECK(std::abs(s.upper - truth) <= 0.05 * truth);
        CHECK(s.solves > 0);
    }
}

TEST_CASE("metric estimate is homogeneous in the direction") {
    jholo::AlmostComplexStructure std_structure = jholo::standard_structure();
    const C2 base{cplx{0.0, 0.0}, cplx{0.0, 0.0}};
    MetricSample s1 = jholo::royden_estimate(std_structure, base, C2{cplx{1.0, 0.0}, {}});
    MetricSample s2 = jholo::royden_estimate(std_structure, base, C2{cplx{2.0, 0.0}, {}});
    REQUIRE(s1.feasible);
    REQUIRE(s2.feasible);
    CHECK(std::abs(s2.upper - 2.0 * s1.upper) < 1e-9 * s1.upper);
}

TEST_CASE("metric estimate sees the second factor as the active one") {
    jholo::AlmostComplexStructure std_structure = jholo::standard_structure();
    const C2 base{cplx{0.0, 0.0}, cplx{0.4, 0.0}};
    const C2 dir{cplx{0.0, 0.0}, cplx{0.0, 1.0}};
    MetricSample s = jholo::royden_estimate(std_structure, base, dir);
    REQUIRE(s.feasible);
    const double truth = 1.0 / (1.0 - 0.16);
    CHECK(std::abs(s.upper - truth) <= 0.05 * truth);
}

TEST_CASE("metric estimate stays near the model under a small perturbation") {
    jholo::AlmostComplexStructure perturbed = jholo::reference_perturbation().with_epsilon(0.1);
    const C2 base{cplx{0.3, 0.0}, cplx{0.0, 0.0}};
    const C2 dir{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
    MetricSample s = jholo::royden_estimate(perturbed, base, dir);
    REQUIRE(s.feasible);
    const double model = 1.0 / (1.0 - 0.09);
    CHECK(s.upper > 0.8 * model);
    CHECK(s.upper < 2.0 * model);
}

TEST_CASE("punctured estimate recovers the punctured-disk metric") {
    jholo::AlmostComplexStructure std_structure = jholo::standard_structure();
    const C2 base{cplx{0.1, 0.0}, cplx{0.0, 0.0}};
    const C2 dir{cplx{1.0, 0.0}, cplx{0.0, 0.0}};
    MetricSample s = jholo::royden_estimate_punctured(std_structure, base, dir);
    REQUIRE(s.feasible);
    const double truth = 1.0 / (2.0 * 0.1 * std::log(10.0));
    CHECK(s.upper >= truth * (1.0 - 1e-9));
    CHECK(std::abs(s.upper - truth) <= 0.05 * truth);

    CHECK_THROWS_AS(
        jholo::royden_estimate_punctured(std_structure, base, C2{cplx{0.0, 0.0}, cplx{1.0, 0.0}}),
        jholo::SchemaError);
}

TEST_CASE("metric estimate validates its inputs") {
    jholo::AlmostComplexStructure std_structure = jholo::standard_structure();
    CHECK_THROWS_AS(jholo::royden_estimate(std_structure, C2{}, C2{}), jholo::SchemaError);
    CHECK_THROWS_AS(
        jholo::royden_estimate(std_structure, C2{cplx{1.0, 0.0}, {}}, C2{cplx{1.0, 0.0}, {}}),
        jholo::SchemaError);
}

TEST_CASE("polygonal path length reproduces a logarithmic integral") {
    const int n = 4001;
    std::vector<cplx> pts(n);
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / (n - 1);
        pts[static_cast<std::size_t>(i)] = cplx{0.1 * std::pow(10.0, t), 0.0};
    }
    const double len = jholo::path_length([](cplx z) { return 1.0 / std::abs(z); }, pts);
    CHECK(std::abs(len - std::log(10.0)) < 0.01 * std::log(10.0));

    CHECK_THROWS_AS(jholo::path_length([](cplx) { return 1.0; }, {cplx{0.0, 0.0}}),
                    jholo::SchemaError);
}

TEST_CASE("radial length toward the puncture grows doubly logarithmically") {
    const double k1 = 0.5;
    double previous = 0.0;
    for (const double delta : {1e-3, 1e-6, 1e-9}) {
        jholo::CompletenessReport rep = jholo::completeness_probe(k1, delta);
        CHECK(std::abs(rep.ratio - 1.0) < 0.15);
        CHECK(rep.length > previous);  // unbounded growth: the puncture is infinitely far
        previous = rep.length;
    }
    CHECK_THROWS_AS(jholo::completeness_probe(k1, 0.5), jholo::SchemaError);
    CHECK_THROWS_AS(jholo::completeness_probe(k1, 0.0), jholo::SchemaError);
}

TEST_CASE("calibration is deterministic and lands on the expected constants") {
    jholo::AlmostComplexStructure std_structure = jholo::standard_structure();
    jholo::Calibration c1 = jholo::calibrate_constants(std_structure);
    jholo::Calibration c2 = jholo::calibrate_constants(std_structure);
    CHECK(c1.dataset_hash == c2.dataset_hash);
    CHECK(c1.c1_bidisk == c2.c1_bidisk);
    CHECK(c1.k1_punctured == c2.k1_punctured);
    CHECK(c1.samples == 8);
    CHECK(c1.dataset_hash != 0);

    // At the standard structure the thresholds sit just above the model values
    // 1 and 1/2 (the seed dilation never reaches 1 exactly).
    CHECK(c1.c1_bidisk > 0.98);
    CHECK(c1.c1_bidisk < 1.03);
    CHECK(c1.k1_punctured > 0.48);
    CHECK(c1.k1_punctured < 0.53);
}
