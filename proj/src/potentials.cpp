#include "potentials.hpp"

#include <cmath>

#include "error.hpp"
#include "num.hpp"
#include "offset.hpp"

namespace geomq {

namespace {

void require_symmetric(const Mat& k) {
    if (k.rows() != k.cols()) fail(Status::NonSymmetricForm, "curvature form must be square");
    double scale = std::max(1.0, k.cwiseAbs().maxCoeff());
    if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
        fail(Status::NonSymmetricForm, "curvature form must be symmetric");
}

} // namespace

double vq_codim1(const std::vector<double>& principal) {
    double s = 0, s2 = 0;
    for (double k : principal) {
        s += k;
        s2 += k * k;
    }
    return (s * s - 2.0 * s2) / 8.0;
}

double vq_dacosta_2d(double k1, double k2) { return -(k1 - k2) * (k1 - k2) / 8.0; }

double vq_curve(const std::vector<double>& curvatures) {
    double s2 = 0;
    for (double k : curvatures) s2 += k * k;
    return -s2 / 8.0;
}

double vq_general_paper(const std::vector<Mat>& forms) {
    double total = 0;
    for (const Mat& k : forms) {
        require_symmetric(k);
        double tr = k.trace();
        double sum_sq = k.array().square().sum();
        double diag_sq = k.diagonal().array().square().sum();
        total += tr * tr + 6.0 * sum_sq - 8.0 * diag_sq;
    }
    return total / 8.0;
}

double vq_general_invariant(const std::vector<Mat>& forms) {
    double total = 0;
    for (const Mat& k : forms) {
        require_symmetric(k);
        double tr = k.trace();
        double tr_k2 = (k * k).trace();
        total += tr * tr - 2.0 * tr_k2;
    }
    return total / 8.0;
}

PotentialReport compare_potentials(const std::vector<Mat>& forms) {
    if (forms.empty()) fail(Status::InvalidArgument, "no curvature forms given");
    int m = int(forms[0].rows());
    for (const Mat& k : forms)
        if (k.rows() != m || k.cols() != m)
            fail(Status::InvalidArgument, "curvature forms must share one size");

    PotentialReport rep;
    rep.vq_general_paper = vq_general_paper(forms);
    rep.vq_general_invariant = vq_general_invariant(forms);
    rep.vq_numeric = vq_numeric_fd(forms);
    if (forms.size() == 1) {
        Eigen::SelfAdjointEigenSolver<Mat> es(forms[0]);
        std::vector<double> principal(es.eigenvalues().data(), es.eigenvalues().data() + m);
        rep.vq_codim1 = vq_codim1(principal);
    }
    if (m == 1) {
        std::vector<double> ks;
        for (const Mat& k : forms) ks.push_back(k(0, 0));
        rep.vq_curve = vq_curve(ks);
    }
    rep.basis_sensitive =
        std::fabs(*rep.vq_general_paper - *rep.vq_general_invariant) > 1e-10;

    std::vector<std::pair<std::string, double>> present;
    if (rep.vq_codim1) present.push_back({"vq_codim1", *rep.vq_codim1});
    if (rep.vq_curve) present.push_back({"vq_curve", *rep.vq_curve});
    present.push_back({"vq_general_paper", *rep.vq_general_paper});
    present.push_back({"vq_general_invariant", *rep.vq_general_invariant});
    present.push_back({"vq_numeric", *rep.vq_numeric});
    for (size_t i = 0; i < present.size(); ++i)
        for (size_t j = i + 1; j < present.size(); ++j)
            rep.discrepancies.push_back({present[i].first, present[j].first,
                                         std::fabs(present[i].second - present[j].second)});
    return rep;
}

double stereographic_operator_check(double R,
                                    const std::vector<std::function<double(double, double)>>& fs,
                                    const std::vector<std::array<double, 2>>& points) {
    if (R <= 0) fail(Status::InvalidArgument, "sphere radius must be positive");
    auto F = [R](double x1, double x2) { return 1.0 + (x1 * x1 + x2 * x2) / (4.0 * R * R); };

    // momentum composition: p_i g = -i F d_i (g / F); two applications give
    // p_i^2 g = -F d_i(d_i(g/F)) evaluated here as literally nested central
    // differences (inner step scaled by 0.7 so the composition never collapses
    // into one tight second-difference stencil)
    auto lhs_at = [&](const std::function<double(double, double)>& f, double x1, double x2,
                      double h) {
        auto Ff = [&](double a, double b) { return F(a, b) * f(a, b); };
        double total = 0.0;
        for (int i = 0; i < 2; ++i) {
            auto p_once = [&](const std::function<double(double, double)>& g, double a, double b,
                              double step) {
                double ap = a + (i == 0 ? step : 0), am = a - (i == 0 ? step : 0);
                double bp = b + (i == 1 ? step : 0), bm = b - (i == 1 ? step : 0);
                return F(a, b) * (g(ap, bp) / F(ap, bp) - g(am, bm) / F(am, bm)) / (2.0 * step);
            };
            auto g1 = [&](double a, double b) { return p_once(Ff, a, b, h); };
            total += -p_once(g1, x1, x2, 0.7 * h);
        }
        return F(x1, x2) * 0.5 * total;
    };
    auto rhs_at = [&](const std::function<double(double, double)>& f, double x1, double x2,
                      double h) {
        double lap = (f(x1 + h, x2) - 2.0 * f(x1, x2) + f(x1 - h, x2)) / (h * h) +
                     (f(x1, x2 + h) - 2.0 * f(x1, x2) + f(x1, x2 - h)) / (h * h);
        double Fv = F(x1, x2);
        return -0.5 * Fv * Fv * lap;
    };

    double worst = 0.0;
    const double h1 = 1e-3, h2 = 1e-3;
    for (const auto& p : points) {
        double r = std::hypot(p[0], p[1]);
        double theta = 2.0 * std::atan2(2.0 * R, r); // colatitude from the projection pole
        if (theta < 1e-3)
            fail(Status::PoleProximity, "sample point too close to the projection pole");
        for (const auto& f : fs) {
            double L1 = lhs_at(f, p[0], p[1], h1);
            double L2 = lhs_at(f, p[0], p[1], h1 / 2.0);
            double L = (4.0 * L2 - L1) / 3.0;
            double R1 = rhs_at(f, p[0], p[1], h2);
            double R2 = rhs_at(f, p[0], p[1], h2 / 2.0);
            double rhs = (4.0 * R2 - R1) / 3.0;
            double resid = std::fabs(L - rhs) / std::max(1.0, std::fabs(rhs));
            worst = std::max(worst, resid);
        }
    }
    return worst;
}

} // namespace geomq
