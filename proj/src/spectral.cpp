#include "spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "error.hpp"
#include "geometry.hpp"
#include "num.hpp"
#include "parallel.hpp"
#include "potentials.hpp"

namespace geomq {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

int dense_limit_for(SolverChoice choice, int dim) {
    switch (choice) {
        case SolverChoice::Dense:
            if (dim > 12000) fail(Status::InvalidArgument, "grid too large for the dense solver");
            return dim;
        case SolverChoice::Iterative:
            return 0;
        default:
            return 4000;
    }
}

std::vector<DegeneracyGroup> group_levels(const std::vector<double>& ascending) {
    std::vector<DegeneracyGroup> out;
    int first = 0;
    for (int size : degeneracy_groups(ascending, 1e-6)) {
        out.push_back({first, size});
        first += size;
    }
    return out;
}

// refinement error estimate of the finer solve, relative per eigenvalue
double refinement_error(const std::vector<double>& coarse, const std::vector<double>& fine) {
    double worst = 0.0;
    for (size_t i = 0; i < fine.size(); ++i) {
        double est = std::fabs(fine[i] - coarse[i]) / 3.0;
        worst = std::max(worst, est / std::max(std::fabs(fine[i]), 1e-2));
    }
    return worst;
}

std::vector<double> extrapolate_pair(const std::vector<double>& coarse,
                                     const std::vector<double>& fine) {
    std::vector<double> out(fine.size());
    for (size_t i = 0; i < fine.size(); ++i) out[i] = (4.0 * fine[i] - coarse[i]) / 3.0;
    return out;
}

EigPairs solve_generalized(const SpMat& A, const Vec& mass, int nev, SolverChoice choice) {
    return lowest_eigenpairs(A, mass, nev, dense_limit_for(choice, int(A.rows())));
}

double max_sampled_curvature(const PlaneCurve& curve, int samples) {
    double worst = 0.0;
    for (int i = 0; i < samples; ++i)
        worst = std::max(worst, std::fabs(curve.curvature(curve.period * i / samples)));
    return worst;
}

} // namespace

PlaneCurve plane_curve_from_chart(const Chart& chart) {
    if (chart.m != 1 || chart.n != 2)
        fail(Status::InvalidArgument, "layer solver needs a plane curve chart (m=1, n=2)");
    if (chart.period.empty() || chart.period[0] <= 0.0)
        fail(Status::InvalidArgument, "layer solver needs a closed (periodic) curve");
    PlaneCurve out;
    out.period = chart.period[0];
    out.name = chart.name;
    out.speed = [chart](double t) {
        Vec u(1);
        u[0] = t;
        return jacobian(chart, u).col(0).norm();
    };
    // signed curvature of a counterclockwise curve; the matching continuous
    // normal is (y', -x')/|r'|, so the offset length element is |r'|(1 + w k)
    out.curvature = [chart](double t) {
        Vec u(1);
        u[0] = t;
        Mat J = jacobian(chart, u);
        std::vector<Mat> H = second_derivatives(chart, u);
        double xp = J(0, 0), yp = J(1, 0);
        double xpp = H[0](0, 0), ypp = H[1](0, 0);
        double sp = std::hypot(xp, yp);
        if (sp < chart.rank_tol) fail(Status::DegenerateChart, "curve has a stationary point");
        return (xp * ypp - yp * xpp) / (sp * sp * sp);
    };
    return out;
}

PlaneCurve flat_strip(double length) {
    if (length <= 0.0) fail(Status::InvalidArgument, "strip length must be positive");
    PlaneCurve out;
    out.period = length;
    out.name = "flat_strip";
    out.speed = [](double) { return 1.0; };
    out.curvature = [](double) { return 0.0; };
    return out;
}

SpMat layer_operator(const PlaneCurve& curve, double delta, int n_tangent, int n_normal, Vec* mass) {
    const int nt = n_tangent, nw = n_normal;
    const double du = curve.period / nt;
    const double dw = 2.0 * delta / (nw + 1);

    std::vector<double> speed(nt), speed_mid(nt), curv(nt), curv_mid(nt);
    for (int i = 0; i < nt; ++i) {
        speed[i] = curve.speed(du * i);
        curv[i] = curve.curvature(du * i);
        speed_mid[i] = curve.speed(du * (i + 0.5));
        curv_mid[i] = curve.curvature(du * (i + 0.5));
    }
    auto h_at = [&](double sp, double k, double w) {
        double v = sp * (1.0 + w * k);
        if (v <= 0.0) fail(Status::OffsetDegenerate, "offset metric collapsed inside the layer");
        return v;
    };
    auto w_at = [&](int j) { return -delta + dw * j; }; // j = 1..nw interior
    auto idx = [&](int i, int j) { return i * nw + (j - 1); };

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(size_t(nt) * nw * 5);
    Vec m = Vec::Zero(nt * nw);

    for (int i = 0; i < nt; ++i) {
        int inext = (i + 1) % nt;
        for (int j = 1; j <= nw; ++j) {
            int a = idx(i, j);
            m[a] = h_at(speed[i], curv[i], w_at(j)) * du * dw;

            double wu = (dw / du) / h_at(speed_mid[i], curv_mid[i], w_at(j));
            int b = idx(inext, j);
            trips.emplace_back(a, a, wu);
            trips.emplace_back(b, b, wu);
            trips.emplace_back(a, b, -wu);
            trips.emplace_back(b, a, -wu);

            double ww = (du / dw) * h_at(speed[i], curv[i], w_at(j) + 0.5 * dw);
            if (j < nw) {
                int c = idx(i, j + 1);
                trips.emplace_back(a, a, ww);
                trips.emplace_back(c, c, ww);
                trips.emplace_back(a, c, -ww);
                trips.emplace_back(c, a, -ww);
            } else {
                trips.emplace_back(a, a, ww); // edge into the w = +delta wall
            }
            if (j == 1) {
                double wb = (du / dw) * h_at(speed[i], curv[i], w_at(0) + 0.5 * dw);
                trips.emplace_back(a, a, wb); // edge into the w = -delta wall
            }
        }
    }
    SpMat K(nt * nw, nt * nw);
    K.setFromTriplets(trips.begin(), trips.end());
    K *= 0.5;
    if (mass) *mass = m;
    return K;
}

SpMat surface_operator(const Chart& chart, bool include_vq, int n_grid, Vec* mass) {
    if (chart.m != 1) fail(Status::InvalidArgument, "surface grid needs a curve chart (m=1)");
    if (chart.period.empty() || chart.period[0] <= 0.0)
        fail(Status::InvalidArgument, "surface grid needs a closed (periodic) curve");
    const int n = n_grid;
    const double du = chart.period[0] / n;

    Vec m(n), pot = Vec::Zero(n);
    std::vector<double> speed_mid(n);
    for (int i = 0; i < n; ++i) {
        Vec u(1);
        u[0] = du * i;
        m[i] = jacobian(chart, u).col(0).norm() * du;
        if (include_vq) pot[i] = vq_general_invariant(curvature_forms(chart, u).forms);
        u[0] = du * (i + 0.5);
        speed_mid[i] = jacobian(chart, u).col(0).norm();
    }

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(size_t(n) * 5);
    for (int i = 0; i < n; ++i) {
        int inext = (i + 1) % n;
        double wu = 0.5 / (du * speed_mid[i]);
        trips.emplace_back(i, i, wu);
        trips.emplace_back(inext, inext, wu);
        trips.emplace_back(i, inext, -wu);
        trips.emplace_back(inext, i, -wu);
        if (include_vq) trips.emplace_back(i, i, pot[i] * m[i]);
    }
    SpMat A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    if (mass) *mass = m;
    return A;
}

SpMat shell_operator(double R, double delta, int l, int n_radial, Vec* mass) {
    const int n = n_radial;
    const double dr = 2.0 * delta / (n + 1);
    const double r0 = R - delta;
    auto r_at = [&](double j) { return r0 + dr * j; };

    std::vector<Eigen::Triplet<double>> trips;
    Vec m(n);
    for (int j = 1; j <= n; ++j) {
        int a = j - 1;
        m[a] = r_at(j) * r_at(j) * dr;
        trips.emplace_back(a, a, 0.5 * l * (l + 1) * dr);
        double wlo = 0.5 * r_at(j - 0.5) * r_at(j - 0.5) / dr;
        double whi = 0.5 * r_at(j + 0.5) * r_at(j + 0.5) / dr;
        trips.emplace_back(a, a, wlo + whi);
        if (j < n) {
            trips.emplace_back(a, a + 1, -whi);
            trips.emplace_back(a + 1, a, -whi);
        }
    }
    SpMat A(n, n);
    A.setFromTriplets(trips.begin(), trips.end());
    if (mass) *mass = m;
    return A;
}

SpectrumResult surface_spectrum(const Chart& chart, bool include_vq, int n_grid, int num_eigenvalues) {
    if (num_eigenvalues < 1) fail(Status::InvalidArgument, "need at least one eigenvalue");

    if (chart.name == "flat_torus") {
        double R1 = chart.params.at("R1"), R2 = chart.params.at("R2");
        double vq = include_vq ? -0.125 * (1.0 / (R1 * R1) + 1.0 / (R2 * R2)) : 0.0;
        std::vector<double> vals;
        for (int P = 1; P < 4096; ++P) {
            vals.clear();
            for (int p = -P; p <= P; ++p)
                for (int q = -P; q <= P; ++q)
                    vals.push_back(0.5 * (double(p) * p / (R1 * R1) + double(q) * q / (R2 * R2)) + vq);
            std::sort(vals.begin(), vals.end());
            double boundary = 0.5 * double(P + 1) * (P + 1) *
                                  std::min(1.0 / (R1 * R1), 1.0 / (R2 * R2)) + vq;
            if (int(vals.size()) >= num_eigenvalues && vals[num_eigenvalues - 1] < boundary) break;
        }
        if (int(vals.size()) < num_eigenvalues)
            fail(Status::InvalidArgument, "mode enumeration exhausted");
        vals.resize(num_eigenvalues);
        SpectrumResult out;
        out.eigenvalues = vals;
        out.subtracted = vals;
        out.degeneracies = group_levels(vals);
        out.analytic_path = true;
        return out;
    }

    if (n_grid < 32) fail(Status::InvalidArgument, "surface grid needs at least 32 points");
    if (num_eigenvalues > n_grid / 2) fail(Status::InvalidArgument, "too many eigenvalues for the grid");

    Vec m_c, m_f;
    SpMat A_c = surface_operator(chart, include_vq, n_grid, &m_c);
    SpMat A_f = surface_operator(chart, include_vq, 2 * n_grid, &m_f);
    EigPairs coarse = solve_generalized(A_c, m_c, num_eigenvalues, SolverChoice::Auto);
    EigPairs fine = solve_generalized(A_f, m_f, num_eigenvalues, SolverChoice::Auto);

    SpectrumResult out;
    out.eigenvalues = fine.values;
    out.subtracted = fine.values;
    out.extrapolated = extrapolate_pair(coarse.values, fine.values);
    out.degeneracies = group_levels(out.subtracted);
    out.grid = {2 * n_grid};
    out.grid_coarse = {n_grid};
    out.grid_error = refinement_error(coarse.values, fine.values);
    if (out.grid_error > 0.01)
        fail(Status::GridTooCoarse, "surface grid refinement estimate above 1%");
    return out;
}

SpectrumResult layer_spectrum_curve(const ThinLayerScenario& sc, WavefunctionGrid* ground) {
    if (sc.delta <= 0.0) fail(Status::InvalidArgument, "layer half-width must be positive");
    if (sc.n_normal < 16) fail(Status::InvalidArgument, "layer needs n_normal >= 16");
    if (sc.n_tangent < 32) fail(Status::InvalidArgument, "layer needs n_tangent >= 32");
    if (sc.num_eigenvalues < 1) fail(Status::InvalidArgument, "need at least one eigenvalue");
    if (!sc.curve.speed || !sc.curve.curvature || sc.curve.period <= 0.0)
        fail(Status::InvalidArgument, "layer needs a closed plane curve");
    if (sc.delta * max_sampled_curvature(sc.curve, 4 * sc.n_tangent) >= 0.5)
        fail(Status::OffsetDegenerate, "delta * max curvature must stay below 0.5");

    const double shift = kPi * kPi / (8.0 * sc.delta * sc.delta);
    const int nev = sc.num_eigenvalues;

    auto solve_at = [&](int nt, int nw) {
        Vec mass;
        SpMat A = layer_operator(sc.curve, sc.delta, nt, nw, &mass);
        EigPairs p = solve_generalized(A, mass, nev, sc.solver);
        return std::make_pair(std::move(p), std::move(mass));
    };

    SpectrumResult out;
    out.delta = sc.delta;
    EigPairs fine;
    Vec fine_mass;
    int nt_f = sc.n_tangent, nw_f = sc.n_normal;
    if (sc.refine) {
        nt_f = 2 * sc.n_tangent;
        nw_f = 2 * sc.n_normal + 1;
        auto [coarse, cmass] = solve_at(sc.n_tangent, sc.n_normal);
        auto [f, fmass] = solve_at(nt_f, nw_f);
        fine = std::move(f);
        fine_mass = std::move(fmass);
        out.extrapolated = extrapolate_pair(coarse.values, fine.values);
        for (double& v : out.extrapolated) v -= shift;
        out.grid_coarse = {sc.n_tangent, sc.n_normal};
        out.grid_error = refinement_error(coarse.values, fine.values);
        if (out.grid_error > 0.01)
            fail(Status::GridTooCoarse, "layer grid refinement estimate above 1%");
    } else {
        auto [f, fmass] = solve_at(nt_f, nw_f);
        fine = std::move(f);
        fine_mass = std::move(fmass);
    }
    out.eigenvalues = fine.values;
    out.subtracted = fine.values;
    for (double& v : out.subtracted) v -= shift;
    out.degeneracies = group_levels(out.subtracted);
    out.grid = {nt_f, nw_f};

    if (ground) {
        ground->n_tangent = nt_f;
        ground->n_normal = nw_f;
        ground->delta = sc.delta;
        double du = sc.curve.period / nt_f;
        double dw = 2.0 * sc.delta / (nw_f + 1);
        ground->u.resize(nt_f);
        for (int i = 0; i < nt_f; ++i) ground->u[i] = du * i;
        ground->w.resize(nw_f);
        for (int j = 0; j < nw_f; ++j) ground->w[j] = -sc.delta + dw * (j + 1);
        ground->values = fine.vectors.col(0);
        ground->weights = fine_mass;
        if (ground->values.dot(fine_mass) < 0.0) ground->values = -ground->values;
        ground->norm = std::sqrt(ground->values.dot(fine_mass.asDiagonal() * ground->values));
    }
    return out;
}

SpectrumResult layer_spectrum_shell(double R, double delta, int l_max, int n_radial) {
    if (R <= 0.0) fail(Status::InvalidArgument, "shell radius must be positive");
    if (delta <= 0.0 || delta >= 0.5 * R)
        fail(Status::OffsetDegenerate, "shell half-width must satisfy 0 < delta < R/2");
    if (l_max < 0) fail(Status::InvalidArgument, "l_max must be nonnegative");
    if (n_radial < 16) fail(Status::InvalidArgument, "shell needs n_radial >= 16");

    const double shift = kPi * kPi / (8.0 * delta * delta);
    const int nl = l_max + 1;
    std::vector<double> coarse(nl), fine(nl);
    parallel_for(nl, [&](int l) {
        Vec mc, mf;
        SpMat Ac = shell_operator(R, delta, l, n_radial, &mc);
        SpMat Af = shell_operator(R, delta, l, 2 * n_radial + 1, &mf);
        coarse[l] = solve_generalized(Ac, mc, 1, SolverChoice::Auto).values[0];
        fine[l] = solve_generalized(Af, mf, 1, SolverChoice::Auto).values[0];
    });

    SpectrumResult out;
    out.delta = delta;
    out.grid = {2 * n_radial + 1};
    out.grid_coarse = {n_radial};
    out.grid_error = refinement_error(coarse, fine);
    if (out.grid_error > 0.01)
        fail(Status::GridTooCoarse, "shell grid refinement estimate above 1%");

    std::vector<int> order(nl);
    for (int l = 0; l < nl; ++l) order[l] = l;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fine[a] < fine[b]; });
    std::vector<double> extrap = extrapolate_pair(coarse, fine);
    for (int l : order) {
        for (int copy = 0; copy < 2 * l + 1; ++copy) {
            out.eigenvalues.push_back(fine[l]);
            out.subtracted.push_back(fine[l] - shift);
            out.extrapolated.push_back(extrap[l] - shift);
        }
    }
    out.degeneracies = group_levels(out.subtracted);
    return out;
}

SweepReport delta_sweep(const ThinLayerScenario& base, const std::vector<double>& deltas,
                        const std::vector<double>& surface_values) {
    if (deltas.size() < 3) fail(Status::InvalidArgument, "delta sweep needs at least three widths");
    SweepReport rep;
    rep.deltas = deltas;
    rep.spectra.resize(deltas.size());
    parallel_for(int(deltas.size()), [&](int i) {
        ThinLayerScenario sc = base;
        sc.delta = deltas[size_t(i)];
        rep.spectra[size_t(i)] = layer_spectrum_curve(sc);
    });

    int levels = std::min<int>(base.num_eigenvalues, int(surface_values.size()));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int L = 0; L < levels; ++L) {
        LevelFit fit;
        fit.index = L;
        fit.surface_value = surface_values[size_t(L)];
        bool all_tiny = true;
        for (const auto& spec : rep.spectra) {
            double err = std::fabs(spec.best_subtracted()[size_t(L)] - fit.surface_value);
            fit.errors.push_back(err);
            all_tiny = all_tiny && err <= 1e-10;
        }
        if (all_tiny) {
            fit.exact = true;
            fit.slope = nan;
            fit.intercept = nan;
        } else {
            std::vector<double> xs, ys;
            for (size_t i = 0; i < deltas.size(); ++i)
                if (fit.errors[i] > 0.0) {
                    xs.push_back(deltas[i]);
                    ys.push_back(fit.errors[i]);
                }
            if (xs.size() < 2) {
                fit.slope = nan;
                fit.intercept = nan;
            } else {
                LineFit lf = fit_loglog(xs, ys);
                fit.slope = lf.slope;
                fit.intercept = lf.intercept;
            }
        }
        rep.levels.push_back(std::move(fit));
    }
    return rep;
}

FactorizationDefect factorization_residual(const ThinLayerScenario& scenario) {
    ThinLayerScenario sc = scenario;
    sc.num_eigenvalues = std::max(1, sc.num_eigenvalues);
    WavefunctionGrid g;
    SpectrumResult spec = layer_spectrum_curve(sc, &g);

    const double du = g.u.size() > 1 ? g.u[1] - g.u[0] : sc.curve.period;
    const double dw = g.w[1] - g.w[0];
    std::vector<double> phi(size_t(g.n_normal));
    for (int j = 0; j < g.n_normal; ++j) phi[size_t(j)] = std::cos(kPi * g.w[size_t(j)] / (2.0 * sc.delta));

    double psi_proj = 0.0, psi_norm = 0.0;
    double chi_proj = 0.0, chi_norm = 0.0;
    for (int i = 0; i < g.n_tangent; ++i) {
        double sp = sc.curve.speed(g.u[size_t(i)]);
        double k = sc.curve.curvature(g.u[size_t(i)]);
        double pw = sp * du * dw; // product-measure weight, w-independent
        double num_v = 0.0, den_v = 0.0, num_p = 0.0, den_p = 0.0;
        for (int j = 0; j < g.n_normal; ++j) {
            int a = i * g.n_normal + j;
            double v = g.values[a];
            double wgt = g.weights[a];
            num_v += v * phi[size_t(j)] * wgt;
            den_v += phi[size_t(j)] * phi[size_t(j)] * wgt;
            psi_norm += v * v * wgt;
            double chi = v * std::sqrt(1.0 + g.w[size_t(j)] * k);
            num_p += chi * phi[size_t(j)] * pw;
            den_p += phi[size_t(j)] * phi[size_t(j)] * pw;
            chi_norm += chi * chi * pw;
        }
        psi_proj += num_v * num_v / den_v;
        chi_proj += num_p * num_p / den_p;
    }

    FactorizationDefect out;
    out.psi_defect = 1.0 - psi_proj / psi_norm;
    out.chi_defect = 1.0 - chi_proj / chi_norm;
    out.ground_energy = spec.best_subtracted()[0];
    return out;
}

} // namespace geomq
