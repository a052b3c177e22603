#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "chart.hpp"
#include "eigs.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "num.hpp"
#include "spectral.hpp"

using namespace geomq;

namespace {

SpMat tridiag_spd(int n, uint64_t drift_seed) {
    SplitMix64 rng{drift_seed};
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < n; ++i) {
        trips.emplace_back(i, i, 2.0 + rng.uniform(uint64_t(i), 0.0, 1.5));
        if (i + 1 < n) {
            trips.emplace_back(i, i + 1, -1.0);
            trips.emplace_back(i + 1, i, -1.0);
        }
    }
    SpMat A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

Vec random_mass(int n, uint64_t seed) {
    SplitMix64 rng(seed);
    Vec m(n);
    for (int i = 0; i < n; ++i) m[i] = rng.uniform(uint64_t(i), 0.5, 2.0);
    return m;
}

} // namespace

TEST_CASE("dense and iterative eigensolvers agree") {
    int n = 600;
    SpMat A = tridiag_spd(n, 5);
    Vec m = random_mass(n, 6);
    EigPairs dense = lowest_eigenpairs(A, m, 5, 4000);
    EigPairs iter = lowest_eigenpairs(A, m, 5, 10);
    REQUIRE(dense.values.size() == 5);
    REQUIRE(iter.values.size() == 5);
    for (int i = 0; i < 5; ++i)
        CHECK(std::fabs(dense.values[size_t(i)] - iter.values[size_t(i)]) < 1e-9);
    for (int i = 0; i < 5; ++i) {
        Vec v = iter.vectors.col(i);
        CHECK(std::fabs(v.dot(m.asDiagonal() * v) - 1.0) < 1e-8);
        Vec r = A * v - iter.values[size_t(i)] * (m.asDiagonal() * v);
        CHECK(r.norm() < 1e-7);
    }
}

TEST_CASE("iterative solver resolves exact degeneracies") {
    int n = 400;
    SpMat A1 = tridiag_spd(n, 9);
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < A1.outerSize(); ++k)
        for (SpMat::InnerIterator it(A1, k); it; ++it) {
            trips.emplace_back(int(it.row()), int(it.col()), it.value());
            trips.emplace_back(int(it.row()) + n, int(it.col()) + n, it.value());
        }
    SpMat A2(2 * n, 2 * n);
    A2.setFromTriplets(trips.begin(), trips.end());
    Vec m1 = random_mass(n, 10);
    Vec m2(2 * n);
    m2 << m1, m1;
    EigPairs ref = lowest_eigenpairs(A1, m1, 3, 4000);
    EigPairs dup = lowest_eigenpairs(A2, m2, 6, 10);
    REQUIRE(dup.values.size() == 6);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::fabs(dup.values[size_t(2 * i)] - ref.values[size_t(i)]) < 1e-9);
        CHECK(std::fabs(dup.values[size_t(2 * i + 1)] - ref.values[size_t(i)]) < 1e-9);
    }
}

TEST_CASE("matrix-free largest-eigenvalue path") {
    LinearOperator op;
    op.dim = 200;
    op.apply = [](const double* in, double* out) {
        for (int i = 0; i < 200; ++i) out[i] = double(i + 1) * in[i];
    };
    EigPairs top = lanczos_largest(op, 3);
    REQUIRE(top.values.size() == 3);
    CHECK(top.values[0] == doctest::Approx(198.0).epsilon(1e-10));
    CHECK(top.values[1] == doctest::Approx(199.0).epsilon(1e-10));
    CHECK(top.values[2] == doctest::Approx(200.0).epsilon(1e-10));
}

TEST_CASE("asymmetric stiffness is rejected") {
    SpMat A(3, 3);
    std::vector<Eigen::Triplet<double>> trips = {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {0, 1, 0.5}};
    A.setFromTriplets(trips.begin(), trips.end());
    CHECK(max_relative_asymmetry(A) > 1e-3);
    Vec m = Vec::Ones(3);
    CHECK_THROWS_AS(lowest_eigenpairs(A, m, 1, 4000), Error);
}

TEST_CASE("plane curves extracted from charts") {
    PlaneCurve circ = plane_curve_from_chart(make_circle(2.0));
    CHECK(circ.speed(0.3) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(circ.curvature(1.1) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(circ.period == doctest::Approx(2.0 * M_PI));

    PlaneCurve ell = plane_curve_from_chart(make_ellipse(1.0, 0.6));
    CurvatureData d = curvature_forms(make_ellipse(1.0, 0.6), Vec{{0.8}});
    // the plane-curve convention is continuous and outward for these charts;
    // the chart principal sign follows the completed normal
    CHECK(ell.curvature(0.8) > 0.0);
    CHECK(std::fabs(ell.curvature(0.8)) ==
          doctest::Approx(std::fabs(d.principal[0])).epsilon(1e-8));

    PlaneCurve strip = flat_strip(2.0 * M_PI);
    CHECK(strip.speed(0.5) == doctest::Approx(1.0));
    CHECK(strip.curvature(0.5) == doctest::Approx(0.0));
}

TEST_CASE("circle surface spectrum") {
    SpectrumResult with_vq = surface_spectrum(make_circle(1.0), true, 128, 5);
    std::vector<double> expect = {-0.125, 0.375, 0.375, 1.875, 1.875};
    REQUIRE(with_vq.best_subtracted().size() == 5);
    for (size_t i = 0; i < expect.size(); ++i)
        CHECK(std::fabs(with_vq.best_subtracted()[i] - expect[i]) < 5e-6);
    REQUIRE(with_vq.degeneracies.size() >= 2);
    CHECK(with_vq.degeneracies[0].count == 1);
    CHECK(with_vq.degeneracies[1].count == 2);
    CHECK(!with_vq.analytic_path);

    SpectrumResult free_rotor = surface_spectrum(make_circle(1.0), false, 128, 5);
    std::vector<double> rotor = {0.0, 0.5, 0.5, 2.0, 2.0};
    for (size_t i = 0; i < rotor.size(); ++i)
        CHECK(std::fabs(free_rotor.best_subtracted()[i] - rotor[i]) < 5e-6);
}

TEST_CASE("flat torus takes the analytic path") {
    SpectrumResult r = surface_spectrum(make_flat_torus(1.0, 2.0), true, 0, 8);
    CHECK(r.analytic_path);
    REQUIRE(r.eigenvalues.size() == 8);
    CHECK(std::fabs(r.eigenvalues[0] + 0.15625) < 1e-12);
    std::vector<double> expect = {-0.15625, -0.03125, -0.03125, 0.34375,
                                  0.34375, 0.34375, 0.34375, 0.46875};
    for (size_t i = 0; i < expect.size(); ++i)
        CHECK(std::fabs(r.eigenvalues[i] - expect[i]) < 1e-12);
    REQUIRE(r.degeneracies.size() >= 3);
    CHECK(r.degeneracies[0].count == 1);
    CHECK(r.degeneracies[1].count == 2);
    CHECK(r.degeneracies[2].count == 4);
}

TEST_CASE("under-resolved surface request is refused") {
    CHECK_THROWS_AS(surface_spectrum(make_circle(1.0), true, 32, 16), Error);
    try {
        surface_spectrum(make_circle(1.0), true, 32, 16);
    } catch (const Error& e) {
        CHECK(e.status() == Status::GridTooCoarse);
    }
}

TEST_CASE("circle layer reproduces the annulus levels") {
    ThinLayerScenario sc;
    sc.curve = plane_curve_from_chart(make_circle(1.0));
    sc.delta = 0.05;
    sc.n_tangent = 128;
    sc.n_normal = 72;
    sc.num_eigenvalues = 3;
    sc.solver = SolverChoice::Iterative;
    SpectrumResult r = layer_spectrum_curve(sc);
    REQUIRE(r.extrapolated.size() == 3);
    // reference annulus values at delta = 0.05
    CHECK(std::fabs(r.extrapolated[0] - (-0.1251228650)) < 2e-5);
    CHECK(std::fabs(r.extrapolated[1] - 0.3753681614) < 5e-5);
    CHECK(std::fabs(r.extrapolated[2] - 0.3753681614) < 5e-5);
    CHECK(std::fabs(r.eigenvalues[1] - r.eigenvalues[2]) < 1e-6);
    REQUIRE(r.grid.size() == 2);
    CHECK(r.grid[0] == 256);
    CHECK(r.grid[1] == 145);
    CHECK(r.grid_coarse[0] == 128);
    CHECK(r.grid_coarse[1] == 72);
    CHECK(r.grid_error < 0.01);
    CHECK(r.delta == doctest::Approx(0.05));
}

TEST_CASE("flat strip separates into rotor plus wall modes") {
    ThinLayerScenario sc;
    sc.curve = flat_strip(2.0 * M_PI);
    sc.delta = 0.03;
    sc.n_tangent = 96;
    sc.n_normal = 48;
    sc.num_eigenvalues = 5;
    sc.solver = SolverChoice::Iterative;
    SpectrumResult r = layer_spectrum_curve(sc);
    std::vector<double> rotor = {0.0, 0.5, 0.5, 2.0, 2.0};
    REQUIRE(r.extrapolated.size() == 5);
    for (size_t i = 0; i < rotor.size(); ++i)
        CHECK(std::fabs(r.extrapolated[i] - rotor[i]) < 5e-5);
}

TEST_CASE("refinement can be disabled") {
    ThinLayerScenario sc;
    sc.curve = plane_curve_from_chart(make_circle(1.0));
    sc.delta = 0.1;
    sc.n_tangent = 48;
    sc.n_normal = 24;
    sc.num_eigenvalues = 2;
    sc.refine = false;
    SpectrumResult r = layer_spectrum_curve(sc);
    CHECK(r.extrapolated.empty());
    CHECK(&r.best_subtracted() == &r.subtracted);
    REQUIRE(r.grid.size() == 2);
    CHECK(r.grid[0] == 48);
    CHECK(r.grid[1] == 24);
}

TEST_CASE("dense and iterative layer paths agree") {
    ThinLayerScenario sc;
    sc.curve = plane_curve_from_chart(make_circle(1.0));
    sc.delta = 0.1;
    sc.n_tangent = 32;
    sc.n_normal = 16;
    sc.num_eigenvalues = 4;
    sc.refine = false;
    sc.solver = SolverChoice::Dense;
    SpectrumResult dense = layer_spectrum_curve(sc);
    sc.solver = SolverChoice::Iterative;
    SpectrumResult iter = layer_spectrum_curve(sc);
    for (size_t i = 0; i < 4; ++i)
        CHECK(std::fabs(dense.eigenvalues[i] - iter.eigenvalues[i]) < 1e-9);
}

TEST_CASE("ground state grid is normalized and wall-confined") {
    ThinLayerScenario sc;
    sc.curve = plane_curve_from_chart(make_circle(1.0));
    sc.delta = 0.1;
    sc.n_tangent = 64;
    sc.n_normal = 24;
    sc.num_eigenvalues = 1;
    sc.refine = false;
    sc.solver = SolverChoice::Iterative;
    WavefunctionGrid g;
    layer_spectrum_curve(sc, &g);
    CHECK(g.n_tangent == 64);
    CHECK(g.n_normal == 24);
    REQUIRE(g.values.size() == 64 * 24);
    CHECK(std::fabs(g.norm - 1.0) < 1e-10);
    double mid = g.at(10, 12), edge = g.at(10, 0);
    CHECK(mid > 0.0);
    CHECK(mid > edge);
}

TEST_CASE("coarse layer grids are refused for high modes") {
    ThinLayerScenario sc;
    sc.curve = plane_curve_from_chart(make_circle(1.0));
    sc.delta = 0.3;
    sc.n_tangent = 32;
    sc.n_normal = 16;
    sc.num_eigenvalues = 14;
    CHECK_THROWS_AS(layer_spectrum_curve(sc), Error);
    try {
        layer_spectrum_curve(sc);
    } catch (const Error& e) {
        CHECK(e.status() == Status::GridTooCoarse);
    }
}

TEST_CASE("layers past the focal distance are refused") {
    ThinLayerScenario sc;
    sc.curve = plane_curve_from_chart(make_circle(1.0));
    sc.delta = 0.6;
    CHECK_THROWS_AS(layer_spectrum_curve(sc), Error);
    CHECK_THROWS_AS(layer_spectrum_shell(1.0, 1.2, 1, 24), Error);
}

TEST_CASE("spherical shell reproduces the rotor ladder") {
    SpectrumResult r = layer_spectrum_shell(1.0, 0.025, 3, 48);
    REQUIRE(r.eigenvalues.size() == 16);
    // reference shell values at delta = 0.025
    std::vector<double> oracle = {5.010e-7, 1.0002452043, 3.0007350259, 6.0014691513};
    std::vector<int> expected_counts = {1, 3, 5, 7};
    REQUIRE(r.degeneracies.size() == 4);
    size_t off = 0;
    for (size_t l = 0; l < 4; ++l) {
        CHECK(r.degeneracies[l].count == expected_counts[l]);
        CHECK(std::fabs(r.best_subtracted()[off] - oracle[l]) < 1e-4);
        off += size_t(expected_counts[l]);
    }
}

TEST_CASE("sweep recovers the quadratic defect of the circle layer") {
    ThinLayerScenario base;
    base.curve = plane_curve_from_chart(make_circle(1.0));
    base.n_tangent = 48;
    base.n_normal = 96;
    base.num_eigenvalues = 1;
    base.solver = SolverChoice::Iterative;
    SweepReport rep = delta_sweep(base, {0.1, 0.05, 0.025}, {-0.125});
    REQUIRE(rep.levels.size() == 1);
    REQUIRE(rep.spectra.size() == 3);
    const LevelFit& fit = rep.levels[0];
    CHECK(!fit.exact);
    REQUIRE(fit.errors.size() == 3);
    CHECK(fit.errors[2] < 5e-5);
    CHECK(fit.slope > 1.8);
    CHECK(fit.slope < 2.2);
}

TEST_CASE("flat strip sweep shows no curvature defect") {
    ThinLayerScenario base;
    base.curve = flat_strip(2.0 * M_PI);
    base.n_tangent = 48;
    base.n_normal = 96;
    base.num_eigenvalues = 3;
    base.solver = SolverChoice::Iterative;
    SweepReport rep = delta_sweep(base, {0.1, 0.05, 0.025}, {0.0, 0.5, 0.5});
    for (const LevelFit& fit : rep.levels)
        for (double err : fit.errors) CHECK(err < 1e-5);
}

TEST_CASE("transverse factorization defect scales quadratically") {
    ThinLayerScenario sc;
    sc.curve = plane_curve_from_chart(make_circle(1.0));
    sc.n_tangent = 192;
    sc.n_normal = 48;
    sc.num_eigenvalues = 1;
    sc.refine = false;
    sc.solver = SolverChoice::Iterative;
    sc.delta = 0.05;
    FactorizationDefect coarse = factorization_residual(sc);
    sc.delta = 0.025;
    FactorizationDefect fine = factorization_residual(sc);
    CHECK(coarse.psi_defect > 5e-5);
    CHECK(coarse.psi_defect < 1.2e-4);
    CHECK(coarse.chi_defect < 1e-9);
    CHECK(fine.chi_defect < 1e-9);
    double ratio = fine.psi_defect / coarse.psi_defect;
    CHECK(ratio > 0.2);
    CHECK(ratio < 0.3);
    // subtracted ground on the raw grid: -1/8 shifted down by the Dirichlet
    // stencil deficit of the transverse well, about lambda_t (pi/49)^2 / 12
    CHECK(coarse.ground_energy < -0.124);
    CHECK(coarse.ground_energy > -0.35);
}

TEST_CASE("flat strip factorizes exactly") {
    ThinLayerScenario sc;
    sc.curve = flat_strip(2.0 * M_PI);
    sc.delta = 0.05;
    sc.n_tangent = 64;
    sc.n_normal = 24;
    sc.num_eigenvalues = 1;
    sc.refine = false;
    sc.solver = SolverChoice::Iterative;
    FactorizationDefect d = factorization_residual(sc);
    CHECK(d.chi_defect < 1e-12);
    CHECK(d.psi_defect < 1e-12);
}

TEST_CASE("assembled operators are symmetric") {
    Vec mass;
    SpMat L = layer_operator(plane_curve_from_chart(make_circle(1.0)), 0.1, 64, 24, &mass);
    CHECK(max_relative_asymmetry(L) < 1e-12);
    CHECK(mass.minCoeff() > 0.0);
    SpMat S = surface_operator(make_ellipse(1.0, 0.6), true, 128, &mass);
    CHECK(max_relative_asymmetry(S) < 1e-12);
    SpMat R = shell_operator(1.0, 0.05, 2, 48, &mass);
    CHECK(max_relative_asymmetry(R) < 1e-12);
}
