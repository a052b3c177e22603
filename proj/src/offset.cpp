#include "offset.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "num.hpp"
#include "potentials.hpp"

namespace geomq {

namespace {

Mat sum_scaled_forms(const std::vector<Mat>& forms, const Vec& eps) {
    if (forms.empty()) fail(Status::InvalidArgument, "no curvature forms given");
    if (int(eps.size()) != int(forms.size()))
        fail(Status::InvalidArgument, "one displacement per curvature form required");
    Mat A = Mat::Zero(forms[0].rows(), forms[0].cols());
    for (size_t i = 0; i < forms.size(); ++i) A += eps[i] * forms[i];
    return A;
}

// test function of the surface parameters used by the replay
double chi_fn(const Vec& u) {
    if (u.size() == 1) return std::cos(u[0]);
    double v = 1.0;
    for (int a = 0; a < u.size(); ++a) v *= std::cos((0.8 + 0.15 * a) * u[a] + 0.3 - 0.25 * a);
    return v;
}

// Laplace-Beltrami of f at u by nested flux-form central differences
double laplace_beltrami_fd(const Chart& chart, const Vec& u,
                           const std::function<double(const Vec&)>& f) {
    int m = chart.m;
    auto grad = [&](const Vec& up) {
        Vec g(m);
        for (int b = 0; b < m; ++b) {
            double h = 1e-4 * std::max(1.0, std::fabs(up[b]));
            Vec a = up, c = up;
            a[b] += h;
            c[b] -= h;
            g[b] = (f(a) - f(c)) / (2.0 * h);
        }
        return g;
    };
    auto flux = [&](const Vec& up) {
        Mat g = metric(chart, up);
        double sg = std::sqrt(g.determinant());
        Vec df = grad(up);
        return Vec(sg * g.ldlt().solve(df));
    };
    double out = 0.0;
    for (int a = 0; a < m; ++a) {
        double h = 1e-4 * std::max(1.0, std::fabs(u[a]));
        Vec up = u, um = u;
        up[a] += h;
        um[a] -= h;
        out += (flux(up)[a] - flux(um)[a]) / (2.0 * h);
    }
    Mat g = metric(chart, u);
    return out / std::sqrt(g.determinant());
}

} // namespace

OffsetFrame make_offset_frame(const Chart& base, const Vec& eps, const Vec& u_ref) {
    int codim = base.n - base.m;
    if (int(eps.size()) != codim)
        fail(Status::InvalidArgument, "displacement needs one entry per normal");
    OffsetFrame out;
    out.base_chart = base;
    out.displacement = eps;
    Mat ref = normal_frame(base, u_ref);
    Chart off;
    off.m = base.m;
    off.n = base.n;
    off.name = base.name + "_offset";
    off.period = base.period;
    off.h1_rel = base.h1_rel;
    off.h2_rel = base.h2_rel;
    off.rank_tol = base.rank_tol;
    off.mode = DerivMode::FiniteDifference;
    off.map = [base, eps, ref](const Vec& u) {
        Mat N = normal_frame_aligned(base, u, ref);
        Vec p = base.map(u);
        for (int a = 0; a < eps.size(); ++a) p += eps[a] * N.col(a);
        return p;
    };
    out.offset_chart = off;
    return out;
}

double area_ratio_exact(const Chart& chart, const Vec& u, const Vec& eps) {
    int codim = chart.n - chart.m;
    if (int(eps.size()) != codim)
        fail(Status::InvalidArgument, "displacement needs one entry per normal");
    Mat J = jacobian(chart, u);
    Mat g = J.transpose() * J;
    double det_base = g.determinant();

    if (codim == 1) {
        CurvatureData data = curvature_forms(chart, u);
        for (double k : data.principal)
            if (1.0 + eps[0] * k <= chart.rank_tol)
                fail(Status::OffsetDegenerate, "offset reaches the focal distance");
        if (chart.analytic()) {
            // offset Jacobian through the shape operator: J' = J (I - eps S)
            std::vector<Mat> hess = second_derivatives(chart, u);
            Vec n = data.normal_frame.col(0);
            Mat h = Mat::Zero(chart.m, chart.m);
            for (int i = 0; i < chart.n; ++i) h += n[i] * hess[i];
            Mat S = g.ldlt().solve(h);
            Mat Joff = J * (Mat::Identity(chart.m, chart.m) - eps[0] * S);
            Mat goff = Joff.transpose() * Joff;
            return std::sqrt(goff.determinant() / det_base);
        }
    }

    OffsetFrame frame = make_offset_frame(chart, eps, u);
    Mat Joff;
    try {
        Joff = jacobian(frame.offset_chart, u);
    } catch (const Error& e) {
        if (e.status() == Status::DegenerateChart)
            fail(Status::OffsetDegenerate, "offset surface is not immersed at the requested point");
        throw;
    }
    Mat goff = Joff.transpose() * Joff;
    return std::sqrt(goff.determinant() / det_base);
}

double area_ratio_exact(const Chart& chart, const Vec& u, double eps) {
    if (chart.n - chart.m != 1)
        fail(Status::InvalidArgument, "scalar displacement needs a codimension-1 chart");
    return area_ratio_exact(chart, u, Vec::Constant(1, eps));
}

AreaRatioSeries area_ratio_series(const std::vector<double>& principal) {
    AreaRatioSeries s;
    double sum = 0, sum2 = 0;
    for (double k : principal) {
        sum += k;
        sum2 += k * k;
    }
    s.c1 = sum;
    s.c2 = 0.5 * (sum * sum - sum2);
    return s;
}

SeriesOrder verify_series_order(const Chart& chart, const Vec& u,
                                const std::vector<double>& eps_grid) {
    if (eps_grid.size() < 2) fail(Status::InvalidArgument, "need at least two offsets");
    CurvatureData data = curvature_forms(chart, u);
    AreaRatioSeries series = area_ratio_series(data.principal);
    SeriesOrder out;
    std::vector<double> scale, resid;
    for (double e : eps_grid) {
        double exact = area_ratio_exact(chart, u, e);
        double r = std::fabs(exact - series.at(e));
        out.max_residual = std::max(out.max_residual, r);
        if (r > 0) {
            scale.push_back(e);
            resid.push_back(r);
        }
    }
    out.terminated = out.max_residual <= 1e-12;
    if (out.terminated || scale.size() < 2) {
        out.slope = std::numeric_limits<double>::quiet_NaN();
        out.intercept = std::numeric_limits<double>::quiet_NaN();
    } else {
        LineFit fit = fit_loglog(scale, resid);
        out.slope = fit.slope;
        out.intercept = fit.intercept;
    }
    return out;
}

ProkhorovCheck prokhorov_equivalence_check(const Chart& chart, const Vec& u) {
    if (chart.n - chart.m != 1)
        fail(Status::InvalidArgument, "replay needs a codimension-1 chart");
    ProkhorovCheck out;
    out.chi = chi_fn(u);
    if (std::fabs(out.chi) < 1e-3)
        fail(Status::InvalidArgument, "test function vanishes at the requested point");

    CurvatureData data = curvature_forms(chart, u);
    double div_n = 0.0;
    for (double k : data.principal) div_n += k;
    out.vq_formula = vq_codim1(data.principal);

    // Psi(w) = chi / sqrt(dS'/dS) along the normal coordinate
    auto psi = [&](double w) { return out.chi / std::sqrt(area_ratio_exact(chart, u, w)); };
    auto d1_est = [&](double h) { return (psi(h) - psi(-h)) / (2.0 * h); };
    auto d2_est = [&](double h) { return (psi(h) - 2.0 * psi(0.0) + psi(-h)) / (h * h); };
    double d1 = richardson2(d1_est, 1e-3);
    double d2 = richardson2(d2_est, 1e-3);

    out.lap_chi = laplace_beltrami_fd(chart, u, chi_fn);

    double lhs = d2 + div_n * d1 + out.lap_chi;
    double rhs = out.lap_chi - 2.0 * out.vq_formula * out.chi;
    out.residual = std::fabs(lhs - rhs) / std::fabs(out.chi);
    out.recovered_vq = -(lhs - out.lap_chi) / (2.0 * out.chi);
    return out;
}

DetExpansion det_expansion_check(const std::vector<Mat>& forms, const Vec& eps) {
    Mat A = sum_scaled_forms(forms, eps);
    int m = int(A.rows());
    Mat IA = Mat::Identity(m, m) + A;
    DetExpansion out;
    double d = IA.determinant();
    if (d <= 0) fail(Status::OffsetDegenerate, "I + A is not positive definite");
    out.exact_g = d * d;

    double t1 = 0.0; // 2 sum eps_a tr k^(a)
    for (size_t al = 0; al < forms.size(); ++al) t1 += eps[al] * forms[al].trace();
    t1 *= 2.0;
    double t2 = 0.0; // 2 (sum eps tr k)^2, written as a double alpha-beta sum
    double t3 = 0.0; // -2 sum_a (sum eps k_aa)^2, written as a double alpha-beta sum
    for (size_t al = 0; al < forms.size(); ++al)
        for (size_t be = 0; be < forms.size(); ++be) {
            t2 += 2.0 * eps[al] * eps[be] * forms[al].trace() * forms[be].trace();
            for (int a = 0; a < m; ++a)
                t3 -= 2.0 * eps[al] * eps[be] * forms[al](a, a) * forms[be](a, a);
        }
    double t4 = 3.0 * A.array().square().sum();
    double t5 = -2.0 * A.diagonal().array().square().sum();
    out.series_g = 1.0 + t1 + t2 + t3 + t4 + t5;
    out.residual = out.exact_g - out.series_g;
    return out;
}

double vq_numeric_fd(const std::vector<Mat>& forms) {
    if (forms.empty()) fail(Status::InvalidArgument, "no curvature forms given");
    int m = int(forms[0].rows());
    for (const Mat& k : forms) {
        if (k.rows() != m || k.cols() != m) fail(Status::InvalidArgument, "form size mismatch");
        double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
        if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
            fail(Status::NonSymmetricForm, "curvature form must be symmetric");
    }
    int codim = int(forms.size());
    auto phi = [&](const Vec& eps) {
        Mat A = sum_scaled_forms(forms, eps);
        double d = (Mat::Identity(m, m) + A).determinant();
        if (d <= 0) fail(Status::StepFailure, "step left the positive-definite region");
        return 1.0 / std::sqrt(d);
    };
    const double h0 = 1e-3;
    double sum_d2 = 0.0, sum_d1_sq = 0.0;
    for (int al = 0; al < codim; ++al) {
        auto along = [&](double t) {
            Vec eps = Vec::Zero(codim);
            eps[al] = t;
            return phi(eps);
        };
        auto d1_est = [&](double h) { return (along(h) - along(-h)) / (2.0 * h); };
        auto d2_est = [&](double h) { return (along(h) - 2.0 * along(0.0) + along(-h)) / (h * h); };
        double d1a = d1_est(h0), d1b = d1_est(h0 / 2.0);
        double d2a = d2_est(h0), d2b = d2_est(h0 / 2.0);
        if (std::fabs(d1a - d1b) > 1e-5 || std::fabs(d2a - d2b) > 1e-5)
            fail(Status::StepFailure, "derivative step too coarse for these curvatures");
        double d1 = (4.0 * d1b - d1a) / 3.0;
        double d2 = (4.0 * d2b - d2a) / 3.0;
        sum_d2 += d2;
        sum_d1_sq += d1 * d1;
    }
    return -0.5 * (sum_d2 - 2.0 * sum_d1_sq);
}

} // namespace geomq
