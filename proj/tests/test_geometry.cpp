#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "chart.hpp"
#include "error.hpp"
#include "geometry.hpp"
#include "num.hpp"

using namespace geomq;

namespace {

Mat rotation3(double a, double b, double c) {
    Mat Rx = Mat::Identity(3, 3), Ry = Mat::Identity(3, 3), Rz = Mat::Identity(3, 3);
    Rx(1, 1) = std::cos(a); Rx(1, 2) = -std::sin(a);
    Rx(2, 1) = std::sin(a); Rx(2, 2) = std::cos(a);
    Ry(0, 0) = std::cos(b); Ry(0, 2) = std::sin(b);
    Ry(2, 0) = -std::sin(b); Ry(2, 2) = std::cos(b);
    Rz(0, 0) = std::cos(c); Rz(0, 1) = -std::sin(c);
    Rz(1, 0) = std::sin(c); Rz(1, 1) = std::cos(c);
    return Rz * Ry * Rx;
}

Chart transformed(const Chart& base, const Mat& R, const Vec& t) {
    Chart c;
    c.m = base.m;
    c.n = base.n;
    c.name = base.name + "_moved";
    c.period = base.period;
    c.map = [base, R, t](const Vec& u) { return Vec(R * base.map(u) + t); };
    return c;
}

Chart reparametrized(const Chart& base) {
    Chart c;
    c.m = base.m;
    c.n = base.n;
    c.name = base.name + "_reparam";
    c.period.assign(size_t(base.m), 0.0);
    c.map = [base](const Vec& v) {
        Vec u(v.size());
        for (int a = 0; a < v.size(); ++a) u[a] = v[a] + 0.1 * std::sin(v[a]) + 0.05 * v[a] * v[a];
        return base.map(u);
    };
    return c;
}

Vec forward_param(const Vec& v) {
    Vec u(v.size());
    for (int a = 0; a < v.size(); ++a) u[a] = v[a] + 0.1 * std::sin(v[a]) + 0.05 * v[a] * v[a];
    return u;
}

} // namespace

TEST_CASE("circle and ellipse curvature") {
    // principal signs are relative to the returned normal; orient against the
    // outward direction before comparing
    Chart circle = make_circle(2.0);
    for (double t : {0.0, 0.7, 2.9}) {
        CurvatureData d = curvature_forms(circle, Vec{{t}});
        REQUIRE(d.principal.size() == 1);
        double s = d.normal_frame.col(0).dot(d.ambient) > 0 ? 1.0 : -1.0;
        CHECK(s * d.principal[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
    Chart ellipse = make_ellipse(1.0, 0.6);
    CurvatureData at0 = curvature_forms(ellipse, Vec{{0.0}});
    double s = at0.normal_frame.col(0).dot(at0.ambient) > 0 ? 1.0 : -1.0;
    // k = a b / (a^2 sin^2 + b^2 cos^2)^{3/2}
    CHECK(s * at0.principal[0] == doctest::Approx(0.6 / std::pow(0.36, 1.5)).epsilon(1e-12));
}

TEST_CASE("sphere and cylinder principal curvatures") {
    CurvatureData sph = curvature_forms(make_sphere(1.0, 3), Vec{{0.7, 0.3}});
    REQUIRE(sph.principal.size() == 2);
    double s = sph.normal_frame.col(0).dot(sph.ambient) > 0 ? 1.0 : -1.0;
    CHECK(s * sph.principal[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s * sph.principal[1] == doctest::Approx(1.0).epsilon(1e-12));

    CurvatureData cyl = curvature_forms(make_cylinder(2.0), Vec{{0.4, -0.8}});
    Vec radial{{cyl.ambient[0], cyl.ambient[1], 0.0}};
    double sc = cyl.normal_frame.col(0).dot(radial) > 0 ? 1.0 : -1.0;
    std::vector<double> ks = {sc * cyl.principal[0], sc * cyl.principal[1]};
    std::sort(ks.begin(), ks.end());
    CHECK(ks[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ks[1] == doctest::Approx(0.5).epsilon(1e-12));

    CurvatureData s3 = curvature_forms(make_sphere(1.0, 4), Vec{{0.9, 0.7, 0.4}});
    REQUIRE(s3.principal.size() == 3);
    double s4 = s3.normal_frame.col(0).dot(s3.ambient) > 0 ? 1.0 : -1.0;
    for (double k : s3.principal) CHECK(s4 * k == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("frames are orthonormal and complementary") {
    SplitMix64 rng(77);
    for (int i = 0; i < 6; ++i) {
        Chart c = make_random_quadric(rng.at(uint64_t(i)));
        Vec u{{rng.uniform(uint64_t(100 + i), -0.3, 0.3), rng.uniform(uint64_t(200 + i), -0.3, 0.3)}};
        CurvatureData d = curvature_forms(c, u);
        Mat T = d.tangent_frame, N = d.normal_frame;
        CHECK((T.transpose() * T - Mat::Identity(2, 2)).norm() < 1e-10);
        CHECK((N.transpose() * N - Mat::Identity(1, 1)).norm() < 1e-10);
        CHECK((T.transpose() * N).norm() < 1e-10);
        for (const Mat& k : d.forms) CHECK((k - k.transpose()).norm() < 1e-12);
    }
}

TEST_CASE("finite-difference derivatives reproduce analytic curvature") {
    Chart sph = make_sphere(1.5, 3);
    Chart fd = with_fd_derivatives(sph);
    CurvatureData a = curvature_forms(sph, Vec{{0.8, 0.5}});
    CurvatureData b = curvature_forms(fd, Vec{{0.8, 0.5}});
    for (int i = 0; i < 2; ++i) CHECK(std::fabs(a.principal[size_t(i)] - b.principal[size_t(i)]) < 1e-7);

    Chart quad = make_random_quadric(11);
    Chart quad_fd = with_fd_derivatives(quad);
    Vec u{{0.12, -0.2}};
    CurvatureData qa = curvature_forms(quad, u);
    CurvatureData qb = curvature_forms(quad_fd, u);
    for (int i = 0; i < 2; ++i) CHECK(std::fabs(qa.principal[size_t(i)] - qb.principal[size_t(i)]) < 1e-7);
}

TEST_CASE("helix carries two normal forms") {
    Chart h = make_helix(1.0, 0.5);
    CurvatureData d = curvature_forms(h, Vec{{0.9}});
    REQUIRE(d.forms.size() == 2);
    double total = 0.0;
    for (const Mat& k : d.forms) total += k(0, 0) * k(0, 0);
    // curvature of the helix: a / (a^2 + b^2)
    CHECK(std::sqrt(total) == doctest::Approx(1.0 / 1.25).epsilon(1e-9));
}

TEST_CASE("normal divergence matches the curvature sum") {
    SplitMix64 rng(3);
    for (int i = 0; i < 5; ++i) {
        Chart c = make_random_quadric(rng.at(uint64_t(i)));
        Vec u{{rng.uniform(uint64_t(50 + i), -0.25, 0.25), rng.uniform(uint64_t(80 + i), -0.25, 0.25)}};
        NormalDivergence d = divergence_of_normal(c, u);
        CHECK(std::fabs(d.sum_principal - d.numeric) < 1e-6);
    }
}

TEST_CASE("nearest point recovers the parameter") {
    Chart c = make_random_quadric(21);
    Vec u{{0.15, -0.1}};
    CurvatureData d = curvature_forms(c, u);
    Vec p = d.ambient + 0.05 * d.normal_frame.col(0);
    Vec u_back = nearest_point_param(c, p, Vec{{0.0, 0.0}});
    CHECK((u_back - u).norm() < 1e-9);
}

TEST_CASE("degenerate charts are rejected") {
    Chart sph = make_sphere(1.0, 3);
    CHECK_THROWS_AS(curvature_forms(sph, Vec{{0.0, 0.3}}), Error);
    try {
        curvature_forms(sph, Vec{{0.0, 0.3}});
    } catch (const Error& e) {
        CHECK(e.status() == Status::DegenerateChart);
    }
}

TEST_CASE("aligned frames flip to match the reference") {
    Chart c = make_random_quadric(5);
    Mat ref = normal_frame(c, Vec{{0.0, 0.0}});
    Mat flipped = -ref;
    Mat aligned = normal_frame_aligned(c, Vec{{0.01, 0.0}}, flipped);
    CHECK((aligned.col(0) + ref.col(0)).norm() < 0.1);
}

TEST_CASE("curvature invariants survive rigid motions") {
    Chart base = make_random_quadric(9);
    Mat R = rotation3(0.4, -1.1, 2.2);
    Vec t{{0.3, -1.7, 0.9}};
    Chart moved = transformed(base, R, t);
    Vec u{{0.1, 0.22}};
    CurvatureData a = curvature_forms(base, u);
    CurvatureData b = curvature_forms(moved, u);
    REQUIRE(a.principal.size() == b.principal.size());
    for (size_t i = 0; i < a.principal.size(); ++i)
        CHECK(std::fabs(std::fabs(a.principal[i]) - std::fabs(b.principal[i])) < 1e-7);
    double tra = a.forms[0].trace(), trb = b.forms[0].trace();
    CHECK(std::fabs(std::fabs(tra) - std::fabs(trb)) < 1e-7);
}

TEST_CASE("curvature invariants survive reparametrization") {
    Chart base = make_random_quadric(31);
    Chart re = reparametrized(base);
    Vec v{{0.18, -0.07}};
    Vec u = forward_param(v);
    CurvatureData a = curvature_forms(base, u);
    CurvatureData b = curvature_forms(re, v);
    for (size_t i = 0; i < a.principal.size(); ++i)
        CHECK(std::fabs(std::fabs(a.principal[i]) - std::fabs(b.principal[i])) < 1e-7);
}

TEST_CASE("frame cross terms are antisymmetric") {
    Chart h = make_helix(1.0, 0.5);
    auto cross = frame_cross_terms(h, Vec{{0.4}});
    REQUIRE(cross.size() == 1);
    CHECK(std::fabs(cross[0](0, 1) + cross[0](1, 0)) < 1e-6);
}
