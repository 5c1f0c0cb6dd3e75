#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "jholo/beltrami_solver.hpp"

using jholo::BidiskMap;
using jholo::cplx;
using jholo::DiskGrid;
using jholo::DiskMap;
using jholo::GridFunction;
using jholo::Seed;
using jholo::SolveConfig;

TEST_CASE("zero coefficients return the seed unchanged with zero residual") {
    DiskGrid grid = jholo::build_grid(16);
    Seed seed = jholo::make_seed([](cplx z) { return 0.4 * z * z + 0.1 * z; },
                                 [](cplx z) { return 0.8 * z + 0.1; }, grid);
    DiskMap m = jholo::solve_disk(seed, jholo::zero_field(), cplx{0.0, 0.0});
    CHECK(m.converged);
    CHECK(m.iterations == 1);
    CHECK(m.residual == 0.0);
    for (int i = 0; i < grid.size(); ++i) {
        CHECK(std::abs(m.u[i] - seed.values[i]) == 0.0);
        CHECK(std::abs(m.du[i] - seed.dz[i]) == 0.0);
    }
}

TEST_CASE("constant antilinear coefficient reproduces the affine solution exactly") {
    // dbar(u) = kappa conj(du) with seed z has the closed solution z + kappa conj(z);
    // every step of the pipeline is exact on this data, so machine precision is
    // required, far below the nominal 1e-8.
    DiskGrid grid = jholo::build_grid(32);
    const cplx kappa{0.06, -0.05};
    SolveConfig cfg;
    cfg.cutoff_inner_radius = 1.0;  // the closed solution solves the uncut equation
    DiskMap m = jholo::solve_disk(jholo::identity_seed(grid), jholo::constant_field(cplx{0, 0}, kappa),
                                  cplx{0.0, 0.0}, cfg);
    CHECK(m.converged);
    CHECK(m.iterations <= 3);
    double worst_u = 0.0, worst_du = 0.0;
    for (int i = 0; i < grid.size(); ++i) {
        const cplx z = grid.nodes[i];
        worst_u = std::max(worst_u, std::abs(m.u[i] - (z + kappa * std::conj(z))));
        worst_du = std::max(worst_du, std::abs(m.du[i] - cplx{1.0, 0.0}));
    }
    CHECK(worst_u < 1e-12);
    CHECK(worst_du < 1e-12);
    CHECK(m.residual < 1e-12);
}

TEST_CASE("perturbed-structure solve contracts fast and reports a reproducible residual") {
    DiskGrid grid = jholo::build_grid(24);
    jholo::AlmostComplexStructure s = jholo::reference_perturbation().with_epsilon(0.1);
    jholo::CoefficientField field = jholo::structure_field_a(s);
    Seed seed = jholo::make_seed([](cplx z) { return 0.7 * z; }, [](cplx) { return cplx{0.7, 0.0}; }, grid);
    SolveConfig cfg;

    GridFunction v_param(grid);
    for (int i = 0; i < grid.size(); ++i) v_param[i] = 0.4 * grid.nodes[i] - 0.2;

    DiskMap m = jholo::solve_disk(seed, field, v_param, cfg);
    CHECK(m.converged);
    CHECK(m.iterations <= 30);
    CHECK(m.mu_bound <= 0.1);
    CHECK(m.contraction_factor <= 0.15);
    CHECK(m.residual <= 1e-6);

    // the public instrument reproduces the reported number bit for bit
    CHECK(jholo::residual(m, field, v_param, cfg) == m.residual);

    // the finite-difference instrument confirms the defect is small; its floor
    // is set by stencil error relative to the small right-hand side, so only
    // order-of-magnitude agreement is meaningful
    CHECK(jholo::fd_residual(m.u, v_param, field, cfg) < 0.25);

    // parameter C1 norm: sup .4|z| - .2 plus derivative .4
    CHECK(m.parameter_c1_norm > 0.5);
    CHECK(m.parameter_c1_norm < 1.1);
}

TEST_CASE("origin jet of the seed survives a nontrivial solve exactly") {
    DiskGrid grid = jholo::build_grid(16);
    const cplx a{0.3, 0.1};
    Seed seed = jholo::make_seed([a](cplx z) { return a + 0.5 * z; }, [](cplx) { return cplx{0.5, 0.0}; },
                                 grid);
    jholo::AlmostComplexStructure s = jholo::reference_perturbation().with_epsilon(0.1);
    DiskMap m = jholo::solve_disk(seed, jholo::structure_field_a(s), cplx{0.2, -0.4});
    CHECK(m.residual <= 1e-6);
    CHECK(std::abs(m.origin_value() - a) == 0.0);
    CHECK(std::abs(m.origin_deriv() - cplx{0.5, 0.0}) == 0.0);
    // the off-grid evaluator cancels the correction at the origin algebraically
    CHECK(std::abs(m.value_at(0.0, 1.234) - a) < 1e-13);
}

TEST_CASE("coefficients beyond the configured bound are rejected") {
    DiskGrid grid = jholo::build_grid(12);
    CHECK_THROWS_AS(jholo::solve_disk(jholo::identity_seed(grid),
                                      jholo::constant_field(cplx{0, 0}, cplx{0.25, 0.0}),
                                      cplx{0.0, 0.0}),
                    jholo::OutOfRegimeError);
}

TEST_CASE("a non-contracting field is detected and named") {
    // The phase e^{2 i theta} undoes the angular shift of the derivative
    // transform, so the iteration acts on a single angular mode as 1.3 times a
    // Volterra perturbation of the identity — spectral radius 1.3, genuinely
    // divergent.  The detector must fire rather than iterate blindly.
    DiskGrid grid = jholo::build_grid(12);
    jholo::CoefficientField strong = [](cplx z, cplx, cplx) {
        const cplx phase = z * z / std::norm(z);
        return jholo::BeltramiPair{1.3 * phase, cplx{0.0, 0.0}};
    };
    SolveConfig cfg;
    cfg.mu_bound_limit = 2.0;       // deliberately ill-posed configuration
    cfg.cutoff_inner_radius = 1.0;  // keep the full strength near the boundary
    try {
        jholo::solve_disk(jholo::identity_seed(grid), strong, cplx{0.0, 0.0}, cfg);
        FAIL("expected OutOfRegimeError");
    } catch (const jholo::OutOfRegimeError& e) {
        CHECK(std::string(e.what()).find("not contracting") != std::string::npos);
    }
}

TEST_CASE("cutoff profile is smooth, monotone, and differentiates correctly") {
    jholo::Cutoff cut = jholo::build_cutoff(0.75);
    CHECK(cut(0.3) == 1.0);
    CHECK(cut(0.75) == 1.0);
    CHECK(cut(1.0) == 0.0);
    double prev = 1.0;
    for (double r = 0.76; r < 1.0; r += 0.02) {
        const double v = cut(r);
        CHECK(v < prev);
        prev = v;
    }
    // analytic Wirtinger derivatives against central differences
    const double h = 1e-6;
    for (const cplx z : {cplx{0.85, 0.1}, cplx{0.05, 0.9}}) {
        const auto f = [&](cplx w) { return cut(std::abs(w)); };
        const double fx = (f(z + h) - f(z - h)) / (2 * h);
        const double fy = (f(z + cplx{0, h}) - f(z - cplx{0, h})) / (2 * h);
        const cplx dz_fd{0.5 * fx, -0.5 * fy};
        const cplx dbar_fd{0.5 * fx, 0.5 * fy};
        CHECK(std::abs(cut.dz(z) - dz_fd) < 1e-5);
        CHECK(std::abs(cut.dbar(z) - dbar_fd) < 1e-5);
    }
    // disabled profile is identically one
    jholo::Cutoff none = jholo::build_cutoff(1.0);
    CHECK(none(0.999) == 1.0);
    CHECK_THROWS_AS(jholo::build_cutoff(0.0), jholo::SchemaError);
}

TEST_CASE("warm starts resume converged runs in a single iteration") {
    DiskGrid grid = jholo::build_grid(16);
    jholo::AlmostComplexStructure s = jholo::reference_perturbation().with_epsilon(0.1);
    jholo::CoefficientField field = jholo::structure_field_a(s);
    Seed seed = jholo::make_seed([](cplx z) { return 0.6 * z; }, [](cplx) { return cplx{0.6, 0.0}; }, grid);
    DiskMap cold = jholo::solve_disk(seed, field, cplx{0.1, 0.3});
    CHECK(cold.converged);
    CHECK(cold.iterations > 2);

    GridFunction warm_src = cold.source;
    DiskMap warm = jholo::solve_disk(seed, field, cplx{0.1, 0.3}, {}, &warm_src);
    CHECK(warm.converged);
    CHECK(warm.iterations == 1);
    // the warm run performs one extra contraction step, so it can only improve
    CHECK(warm.residual <= cold.residual + 1e-13);
    CHECK(warm.residual < 1e-9);
}

TEST_CASE("coupled solve at the standard structure finishes in one round") {
    DiskGrid grid = jholo::build_grid(16);
    Seed su = jholo::make_seed([](cplx z) { return 0.5 * z; }, [](cplx) { return cplx{0.5, 0.0}; }, grid);
    Seed sv = jholo::constant_seed(cplx{0.2, 0.1}, grid);
    BidiskMap m = jholo::solve_coupled(su, sv, jholo::standard_structure());
    CHECK(m.converged);
    CHECK(m.outer_iterations == 1);
    CHECK(m.joint_residual == 0.0);
    for (int i = 0; i < grid.size(); ++i) CHECK(std::abs(m.u.u[i] - su.values[i]) == 0.0);
}

TEST_CASE("coupled solve under the perturbation converges with both jets pinned") {
    // The second seed needs a nonzero derivative: a constant map solves its
    // equation identically (all derivatives vanish), so only a moving seed
    // exposes the coupling.
    DiskGrid grid = jholo::build_grid(16);
    const cplx a{0.25, -0.1}, b{-0.3, 0.2};
    Seed su = jholo::make_seed([a](cplx z) { return a + 0.5 * z; }, [](cplx) { return cplx{0.5, 0.0}; },
                               grid);
    Seed sv = jholo::make_seed([b](cplx z) { return b + 0.1 * z; }, [](cplx) { return cplx{0.1, 0.0}; },
                               grid);
    BidiskMap m = jholo::solve_coupled(su, sv, jholo::reference_perturbation().with_epsilon(0.1));
    CHECK(m.converged);
    CHECK(m.joint_residual < 1e-8);
    CHECK(std::abs(m.origin_value().z1 - a) == 0.0);
    CHECK(std::abs(m.origin_value().z2 - b) == 0.0);
    CHECK(m.containment_margin() > 0.0);
    // the second equation genuinely reacted to the first coordinate
    double moved = 0.0;
    for (int i = 0; i < grid.size(); ++i) moved = std::max(moved, std::abs(m.v.u[i] - sv.values[i]));
    CHECK(moved > 1e-6);
}

TEST_CASE("maps escaping the bidisk raise the target violation") {
    DiskGrid grid = jholo::build_grid(12);
    Seed big = jholo::make_seed([](cplx z) { return 1.2 * z; }, [](cplx) { return cplx{1.2, 0.0}; }, grid);
    Seed sv = jholo::constant_seed(cplx{0.0, 0.0}, grid);
    CHECK_THROWS_AS(jholo::solve_coupled(big, sv, jholo::standard_structure()),
                    jholo::OutOfRegimeError);
}
