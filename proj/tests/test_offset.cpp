#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "chart.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "num.hpp"
#include "offset.hpp"
#include "potentials.hpp"

using namespace geomq;

namespace {

std::vector<Mat> seeded_forms(uint64_t seed, int m, int codim, double amp, bool diagonal) {
    SplitMix64 rng(seed);
    std::vector<Mat> forms;
    uint64_t ctr = 0;
    for (int a = 0; a < codim; ++a) {
        Mat k = Mat::Zero(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                if (diagonal && i != j) continue;
                double v = rng.uniform(ctr++, -amp, amp);
                k(i, j) = v;
                k(j, i) = v;
            }
        forms.push_back(k);
    }
    return forms;
}

} // namespace

TEST_CASE("area ratio of circle and sphere offsets") {
    Chart circle = make_circle(1.0);
    for (double eps : {0.3, -0.2, 0.05}) {
        double r = area_ratio_exact(circle, Vec{{0.7}}, eps);
        CHECK(r == doctest::Approx(1.0 + eps).epsilon(1e-12));
    }
    Chart sph = make_sphere(1.0, 3);
    double r = area_ratio_exact(sph, Vec{{0.7, 0.3}}, 0.1);
    CHECK(r == doctest::Approx(1.21).epsilon(1e-10));
}

TEST_CASE("analytic and differentiated ratios agree") {
    Chart e = make_ellipse(1.0, 0.6);
    Chart efd = with_fd_derivatives(e);
    Vec u{{0.5}};
    double a = area_ratio_exact(e, u, 0.08);
    double b = area_ratio_exact(efd, u, 0.08);
    // the differentiated path nests finite differences through the offset map
    CHECK(std::fabs(a - b) < 1e-5);
}

TEST_CASE("series coefficients") {
    AreaRatioSeries s = area_ratio_series({1.0, 1.0});
    CHECK(s.c1 == doctest::Approx(2.0));
    CHECK(s.c2 == doctest::Approx(1.0));
    AreaRatioSeries c = area_ratio_series({1.0, 0.5});
    CHECK(c.c1 == doctest::Approx(1.5));
    CHECK(c.c2 == doctest::Approx(0.5));
    AreaRatioSeries flat = area_ratio_series({0.5, 0.0});
    CHECK(flat.c1 == doctest::Approx(0.5));
    CHECK(flat.c2 == doctest::Approx(0.0));
}

TEST_CASE("series remainder vanishes identically for quadratic elements") {
    std::vector<double> grid = {0.04, 0.02, 0.01, 0.005};
    for (const Chart& c : {make_ellipse(1.0, 0.6), make_sphere(1.0, 3), make_cylinder(1.0)}) {
        Vec u = c.m == 1 ? Vec{{0.5}} : Vec{{0.5, 0.6}};
        SeriesOrder so = verify_series_order(c, u, grid);
        CHECK(so.terminated);
        CHECK(so.max_residual <= 1e-12);
        CHECK(std::isnan(so.slope));
    }
}

TEST_CASE("series remainder is third order with three curvatures") {
    Chart p = make_paraboloid_patch({0.9, 0.5, -0.7});
    SeriesOrder so = verify_series_order(p, Vec{{0.0, 0.0, 0.0}}, {0.04, 0.02, 0.01, 0.005});
    CHECK(!so.terminated);
    CHECK(so.slope == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("determinant expansion terminates for one-dimensional diagonal data") {
    std::vector<Mat> forms = seeded_forms(7, 1, 2, 0.9, true);
    DetExpansion d = det_expansion_check(forms, Vec{{0.02, 0.013}});
    CHECK(std::fabs(d.residual) < 1e-15);
}

TEST_CASE("determinant expansion residual is third order on diagonal data") {
    for (uint64_t s = 0; s < 4; ++s) {
        std::vector<Mat> forms = seeded_forms(500 + s, 2 + int(s % 2), 2, 0.9, true);
        std::vector<double> eps = {0.08, 0.04, 0.02, 0.01};
        std::vector<double> res;
        for (double e : eps) {
            Vec ev = Vec::Constant(2, e);
            res.push_back(std::fabs(det_expansion_check(forms, ev).residual));
        }
        bool tiny = true;
        for (double r : res) tiny = tiny && r <= 1e-13;
        if (tiny) continue;
        LineFit fit = fit_loglog(eps, res);
        CHECK(fit.slope >= 2.7);
    }
}

TEST_CASE("off-diagonal data leaves a second-order defect") {
    for (uint64_t s = 0; s < 4; ++s) {
        std::vector<Mat> forms = seeded_forms(900 + s, 3, 2, 0.9, false);
        double e = 0.004;
        Vec ev = Vec::Constant(2, e);
        DetExpansion d = det_expansion_check(forms, ev);
        Mat A = Mat::Zero(3, 3);
        for (size_t al = 0; al < forms.size(); ++al) A += ev[long(al)] * forms[al];
        double off = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j) off += A(i, j) * A(i, j);
        CHECK(std::fabs(d.residual + 4.0 * off) < 0.2 * std::max(4.0 * off, 1e-12));
    }
}

TEST_CASE("offset frame produces a consistent chart") {
    Chart base = make_random_quadric(13);
    Vec u{{0.1, -0.05}};
    OffsetFrame of = make_offset_frame(base, Vec{{0.07}}, u);
    Vec p_off = of.offset_chart.map(u);
    CurvatureData d = curvature_forms(base, u);
    Vec expected = d.ambient + 0.07 * d.normal_frame.col(0);
    CHECK((p_off - expected).norm() < 1e-10);
    double g_off = metric(of.offset_chart, u).determinant();
    double g_base = metric(base, u).determinant();
    double ratio_frame = std::sqrt(g_off / g_base);
    CHECK(std::fabs(ratio_frame - area_ratio_exact(base, u, 0.07)) < 1e-6);
}

TEST_CASE("offsets past the focal distance are rejected") {
    Chart circle = make_circle(1.0);
    CHECK_THROWS_AS(area_ratio_exact(circle, Vec{{0.2}}, -1.0), Error);
    try {
        area_ratio_exact(circle, Vec{{0.2}}, -1.0);
    } catch (const Error& e) {
        CHECK(e.status() == Status::OffsetDegenerate);
    }
}

TEST_CASE("surface-limit replay on the circle") {
    ProkhorovCheck pc = prokhorov_equivalence_check(make_circle(1.0), Vec{{0.3}});
    CHECK(pc.residual < 1e-6);
    CHECK(std::fabs(pc.recovered_vq + 0.125) < 1e-6);
    CHECK(std::fabs(pc.vq_formula + 0.125) < 1e-12);
}

TEST_CASE("surface-limit replay on quadric patches") {
    SplitMix64 rng(1);
    for (int i = 0; i < 5; ++i) {
        Chart c = make_random_quadric(rng.at(uint64_t(2 * i)));
        SplitMix64 prng(rng.at(uint64_t(2 * i + 1)));
        Vec u{{prng.uniform(0, -0.3, 0.3), prng.uniform(1, -0.3, 0.3)}};
        ProkhorovCheck pc = prokhorov_equivalence_check(c, u);
        CHECK(pc.residual < 1e-5);
        CHECK(std::fabs(pc.recovered_vq - pc.vq_formula) < 1e-5);
    }
}

TEST_CASE("numeric potential oracle agrees with the trace form") {
    for (uint64_t s = 0; s < 6; ++s) {
        std::vector<Mat> forms = seeded_forms(123 + s, 2, 3, 0.8, false);
        CHECK(std::fabs(vq_numeric_fd(forms) - vq_general_invariant(forms)) < 1e-6);
    }
}

TEST_CASE("oversized curvature makes the numeric step fail") {
    Mat k = Mat::Constant(1, 1, -1100.0);
    CHECK_THROWS_AS(vq_numeric_fd({k}), Error);
    try {
        vq_numeric_fd({k});
    } catch (const Error& e) {
        CHECK(e.status() == Status::StepFailure);
    }
}
