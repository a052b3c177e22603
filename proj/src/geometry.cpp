#include "geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "error.hpp"
#include "num.hpp"

namespace geomq {

namespace {

void check_param(const Chart& chart, const Vec& u) {
    if (int(u.size()) != chart.m) fail(Status::InvalidArgument, "parameter point has wrong dimension");
    if (!chart.map) fail(Status::InvalidArgument, "chart has no map");
}

Mat fd_jacobian(const Chart& chart, const Vec& u) {
    Mat J(chart.n, chart.m);
    for (int a = 0; a < chart.m; ++a) {
        double h = chart.h1_rel * std::max(1.0, std::fabs(u[a]));
        Vec up = u, um = u;
        up[a] += h;
        um[a] -= h;
        J.col(a) = (chart.map(up) - chart.map(um)) / (2.0 * h);
    }
    return J;
}

std::vector<Mat> fd_second(const Chart& chart, const Vec& u) {
    std::vector<Mat> hess(chart.n, Mat::Zero(chart.m, chart.m));
    Vec f0 = chart.map(u);
    for (int a = 0; a < chart.m; ++a) {
        double ha = chart.h2_rel * std::max(1.0, std::fabs(u[a]));
        Vec up = u, um = u;
        up[a] += ha;
        um[a] -= ha;
        Vec daa = (chart.map(up) - 2.0 * f0 + chart.map(um)) / (ha * ha);
        for (int i = 0; i < chart.n; ++i) hess[i](a, a) = daa[i];
        for (int b = a + 1; b < chart.m; ++b) {
            double hb = chart.h2_rel * std::max(1.0, std::fabs(u[b]));
            Vec upp = u, upm = u, ump = u, umm = u;
            upp[a] += ha; upp[b] += hb;
            upm[a] += ha; upm[b] -= hb;
            ump[a] -= ha; ump[b] += hb;
            umm[a] -= ha; umm[b] -= hb;
            Vec dab = (chart.map(upp) - chart.map(upm) - chart.map(ump) + chart.map(umm)) /
                      (4.0 * ha * hb);
            for (int i = 0; i < chart.n; ++i) {
                hess[i](a, b) = dab[i];
                hess[i](b, a) = dab[i];
            }
        }
    }
    return hess;
}

// orthonormal tangent basis consistent with the Cholesky reduction g = L L^T
Mat tangent_basis(const Mat& J, const Eigen::LLT<Mat>& llt) {
    Mat L = llt.matrixL();
    return L.triangularView<Eigen::Lower>().solve(J.transpose()).transpose();
}

} // namespace

Mat jacobian(const Chart& chart, const Vec& u) {
    check_param(chart, u);
    Mat J = chart.analytic() ? chart.d1(u) : fd_jacobian(chart, u);
    Eigen::JacobiSVD<Mat> svd(J);
    if (svd.singularValues().minCoeff() <= chart.rank_tol)
        fail(Status::DegenerateChart, "chart Jacobian is rank deficient at the requested point");
    return J;
}

std::vector<Mat> second_derivatives(const Chart& chart, const Vec& u) {
    check_param(chart, u);
    return chart.analytic() ? chart.d2(u) : fd_second(chart, u);
}

Mat metric(const Chart& chart, const Vec& u) {
    Mat J = jacobian(chart, u);
    return J.transpose() * J;
}

Mat normal_frame(const Chart& chart, const Vec& u) {
    Mat J = jacobian(chart, u);
    int n = chart.n, m = chart.m;
    int codim = n - m;
    Eigen::LLT<Mat> llt(J.transpose() * J);
    if (llt.info() != Eigen::Success) fail(Status::DegenerateChart, "metric not positive definite");
    Mat T = tangent_basis(J, llt);
    Mat N(n, codim);
    int found = 0;
    for (int i = 0; i < n && found < codim; ++i) {
        Vec v = Vec::Zero(n);
        v[i] = 1.0;
        v -= T * (T.transpose() * v);
        if (found > 0) {
            auto Nf = N.leftCols(found);
            v -= Nf * (Nf.transpose() * v);
        }
        double norm = v.norm();
        if (norm <= 1e-6) continue; // near-dependent candidate, skip
        v /= norm;
        // second orthogonalization pass tightens orthonormality to round-off
        v -= T * (T.transpose() * v);
        if (found > 0) {
            auto Nf = N.leftCols(found);
            v -= Nf * (Nf.transpose() * v);
        }
        v.normalize();
        int imax = 0;
        for (int j = 1; j < n; ++j)
            if (std::fabs(v[j]) > std::fabs(v[imax])) imax = j;
        if (v[imax] < 0) v = -v;
        N.col(found++) = v;
    }
    if (found != codim) fail(Status::DegenerateChart, "could not complete the normal frame");
    return N;
}

Mat normal_frame_aligned(const Chart& chart, const Vec& u, const Mat& reference) {
    Mat N = normal_frame(chart, u);
    if (N.cols() != reference.cols() || N.rows() != reference.rows())
        fail(Status::InvalidArgument, "reference frame has wrong shape");
    for (int c = 0; c < N.cols(); ++c) {
        double dot = N.col(c).dot(reference.col(c));
        if (std::fabs(dot) < 0.5)
            fail(Status::FrameDiscontinuity, "normal frame flipped between neighboring points");
        if (dot < 0) N.col(c) = -N.col(c);
    }
    return N;
}

CurvatureData curvature_forms(const Chart& chart, const Vec& u) {
    CurvatureData out;
    out.point = u;
    out.ambient = chart.map(u);
    Mat J = jacobian(chart, u);
    Eigen::LLT<Mat> llt(J.transpose() * J);
    if (llt.info() != Eigen::Success) fail(Status::DegenerateChart, "metric not positive definite");
    Mat L = llt.matrixL();
    out.tangent_frame = tangent_basis(J, llt);
    out.normal_frame = normal_frame(chart, u);
    std::vector<Mat> hess = second_derivatives(chart, u);
    int codim = chart.n - chart.m;
    out.forms.reserve(codim);
    for (int al = 0; al < codim; ++al) {
        Mat h = Mat::Zero(chart.m, chart.m);
        for (int i = 0; i < chart.n; ++i) h += out.normal_frame(i, al) * hess[i];
        // k = -L^{-1} h L^{-T}: offsetting along +n scales length elements by (1 + eps k)
        Mat X = L.triangularView<Eigen::Lower>().solve(h);
        Mat k = -L.triangularView<Eigen::Lower>().solve(X.transpose()).transpose();
        double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
        double asym = (k - k.transpose()).cwiseAbs().maxCoeff() / scale;
        if (asym > 1e-8)
            fail(Status::NonSymmetricForm, "curvature form asymmetry exceeds tolerance");
        out.forms.push_back(0.5 * (k + k.transpose()));
    }
    if (codim == 1) {
        Eigen::SelfAdjointEigenSolver<Mat> es(out.forms[0]);
        Vec ev = es.eigenvalues();
        out.principal.assign(ev.data(), ev.data() + ev.size());
        std::reverse(out.principal.begin(), out.principal.end());
    }
    return out;
}

Vec nearest_point_param(const Chart& chart, const Vec& p, const Vec& u0) {
    Vec u = u0;
    for (int it = 0; it < 60; ++it) {
        Mat J = jacobian(chart, u);
        Vec r = chart.map(u) - p;
        Vec g = J.transpose() * r;
        Mat H = J.transpose() * J;
        Vec du = H.ldlt().solve(g);
        u -= du;
        if (du.norm() < 1e-13 * std::max(1.0, u.norm())) return u;
    }
    return u;
}

NormalDivergence divergence_of_normal(const Chart& chart, const Vec& u) {
    if (chart.n - chart.m != 1)
        fail(Status::InvalidArgument, "divergence of normal needs a codimension-1 chart");
    CurvatureData data = curvature_forms(chart, u);
    NormalDivergence out;
    for (double k : data.principal) out.sum_principal += k;

    Vec p0 = data.ambient;
    Vec n0 = data.normal_frame.col(0);
    double h = 1e-5 * std::max(1.0, p0.cwiseAbs().maxCoeff());
    auto unit_normal_at = [&](const Vec& p) {
        Vec us = nearest_point_param(chart, p, u);
        Mat N = normal_frame(chart, us);
        Vec nv = N.col(0);
        if (nv.dot(n0) < 0) nv = -nv; // keep the field continuous near the base point
        return nv;
    };
    double div = 0.0;
    for (int i = 0; i < chart.n; ++i) {
        Vec pp = p0, pm = p0;
        pp[i] += h;
        pm[i] -= h;
        div += (unit_normal_at(pp)[i] - unit_normal_at(pm)[i]) / (2.0 * h);
    }
    out.numeric = div;
    return out;
}

std::vector<Mat> frame_cross_terms(const Chart& chart, const Vec& u) {
    int codim = chart.n - chart.m;
    if (codim < 2) fail(Status::InvalidArgument, "frame cross terms need codimension >= 2");
    Mat N0 = normal_frame(chart, u);
    std::vector<Mat> out;
    out.reserve(chart.m);
    for (int a = 0; a < chart.m; ++a) {
        double h = chart.h1_rel * std::max(1.0, std::fabs(u[a]));
        Vec up = u, um = u;
        up[a] += h;
        um[a] -= h;
        Mat Np = normal_frame_aligned(chart, up, N0);
        Mat Nm = normal_frame_aligned(chart, um, N0);
        Mat dN = (Np - Nm) / (2.0 * h);
        out.push_back(dN.transpose() * N0); // (beta, alpha) = d_a n^(beta) . n^(alpha)
    }
    return out;
}

} // namespace geomq
