#include "eigs.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

#include "error.hpp"
#include "num.hpp"

namespace geomq {

namespace {

Vec seeded_start(int dim, uint64_t stream, const std::vector<Vec>& locked) {
    SplitMix64 rng(0x9b18u * (stream + 1) + 0x42d9c7ffb1c2a44dull);
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.uniform(static_cast<uint64_t>(i)) - 0.5;
    for (const Vec& q : locked) v -= q.dot(v) * q;
    double nrm = v.norm();
    if (nrm < 1e-12 * std::sqrt(static_cast<double>(dim))) return Vec::Zero(dim);
    return v / nrm;
}

void reorthogonalize(Vec& w, const std::vector<Vec>& basis, int count) {
    for (int pass = 0; pass < 2; ++pass)
        for (int j = 0; j < count; ++j) w -= basis[j].dot(w) * basis[j];
}

} // namespace

double max_relative_asymmetry(const SpMat& A) {
    SpMat diff = SpMat(A.transpose()) - A;
    double num = 0.0, den = 1e-300;
    for (int k = 0; k < diff.outerSize(); ++k)
        for (SpMat::InnerIterator it(diff, k); it; ++it) num = std::max(num, std::abs(it.value()));
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it) den = std::max(den, std::abs(it.value()));
    return num / den;
}

EigPairs lanczos_largest(const LinearOperator& op, int nev, double tol) {
    const int dim = op.dim;
    if (dim <= 0 || !op.apply) throw Error(Status::InvalidArgument, "lanczos: empty operator");
    if (nev <= 0 || nev > dim) throw Error(Status::InvalidArgument, "lanczos: bad pair count");

    std::vector<Vec> locked;
    std::vector<double> locked_vals;
    Vec tmp_in(dim), tmp_out(dim);
    auto apply = [&](const Vec& x) {
        tmp_in = x;
        op.apply(tmp_in.data(), tmp_out.data());
        return tmp_out;
    };

    // A Krylov space grown from one vector meets each eigenspace along a
    // single direction, so one pass reports every degenerate level exactly
    // once. Locking what converged and restarting orthogonal to it exposes
    // the remaining copies; the loop only stops once a whole restart finds
    // nothing that still belongs among the kept pairs.
    Vec warm;
    bool have_warm = false;
    bool verified = false;
    const double margin = std::max(1e-8, 10.0 * tol);

    const int max_restarts = 60;
    for (int restart = 0; restart < max_restarts && !verified; ++restart) {
        int need = std::max(1, nev - static_cast<int>(locked.size()));
        Vec v0;
        if (have_warm) {
            v0 = warm;
            for (const Vec& q : locked) v0 -= q.dot(v0) * q;
            double nrm = v0.norm();
            v0 = nrm > 1e-10 ? Vec(v0 / nrm) : seeded_start(dim, static_cast<uint64_t>(restart), locked);
        } else {
            v0 = seeded_start(dim, static_cast<uint64_t>(restart), locked);
        }
        have_warm = false;
        int m_max = std::min(dim - static_cast<int>(locked.size()),
                             std::max(120, 2 * need + 80));
        if (v0.norm() == 0.0 || m_max < 1) {
            verified = static_cast<int>(locked.size()) >= nev;
            break;
        }

        std::vector<Vec> basis;
        basis.reserve(static_cast<size_t>(m_max) + 1);
        basis.push_back(v0);
        std::vector<double> alpha, beta;
        bool breakdown = false;

        // shift-invert semantics: the wanted Ritz values are the ones of
        // largest magnitude, whichever sign
        auto by_magnitude = [](const Eigen::SelfAdjointEigenSolver<Mat>& es, int m) {
            std::vector<int> idx(static_cast<size_t>(m));
            for (int i = 0; i < m; ++i) idx[static_cast<size_t>(i)] = i;
            std::sort(idx.begin(), idx.end(), [&](int a, int b) {
                double ma = std::abs(es.eigenvalues()[a]), mb = std::abs(es.eigenvalues()[b]);
                if (ma != mb) return ma > mb;
                return a < b;
            });
            return idx;
        };

        auto ritz_converged = [&](int m) {
            Mat T = Mat::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                T(i, i) = alpha[static_cast<size_t>(i)];
                if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[static_cast<size_t>(i)];
            }
            Eigen::SelfAdjointEigenSolver<Mat> es(T);
            double tail = (m <= static_cast<int>(beta.size())) ? beta[static_cast<size_t>(m - 1)] : 0.0;
            std::vector<int> idx = by_magnitude(es, m);
            int ok = 0;
            for (int r = 0; r < m && ok < need; ++r) {
                int i = idx[static_cast<size_t>(r)];
                double mu = es.eigenvalues()[i];
                double res = std::abs(tail * es.eigenvectors()(m - 1, i));
                if (res <= tol * std::max(std::abs(mu), 1e-30)) ++ok; else break;
            }
            return std::make_tuple(ok >= need, es);
        };

        Eigen::SelfAdjointEigenSolver<Mat> spectrum;
        int m = 0;
        while (m < m_max) {
            Vec w = apply(basis[static_cast<size_t>(m)]);
            if (m > 0) w -= beta[static_cast<size_t>(m - 1)] * basis[static_cast<size_t>(m - 1)];
            double a = basis[static_cast<size_t>(m)].dot(w);
            alpha.push_back(a);
            w -= a * basis[static_cast<size_t>(m)];
            reorthogonalize(w, basis, m + 1);
            reorthogonalize(w, locked, static_cast<int>(locked.size()));
            double b = w.norm();
            ++m;
            if (b < 1e-13) { breakdown = true; break; }
            beta.push_back(b);
            basis.push_back(w / b);

            if (m >= std::min(2 * need + 4, m_max) && (m % 8 == 0 || m == m_max)) {
                auto [done, es] = ritz_converged(m);
                spectrum = es;
                if (done) break;
            }
        }
        if (breakdown || spectrum.eigenvalues().size() != m) {
            auto [done, es] = ritz_converged(m);
            (void)done;
            spectrum = es;
        }

        auto assemble = [&](int i) {
            Vec x = Vec::Zero(dim);
            for (int j = 0; j < m; ++j) x += spectrum.eigenvectors()(j, i) * basis[static_cast<size_t>(j)];
            reorthogonalize(x, locked, static_cast<int>(locked.size()));
            return x;
        };

        auto kept_floor = [&]() {
            std::vector<double> mags;
            mags.reserve(locked_vals.size());
            for (double v : locked_vals) mags.push_back(std::abs(v));
            std::nth_element(mags.begin(), mags.begin() + (nev - 1), mags.end(),
                             std::greater<double>());
            return mags[static_cast<size_t>(nev - 1)];
        };

        double tail = (static_cast<int>(beta.size()) >= m) ? beta[static_cast<size_t>(m - 1)] : 0.0;
        std::vector<int> idx = by_magnitude(spectrum, m);
        size_t before = locked.size();
        for (int r = 0; r < m; ++r) {
            int i = idx[static_cast<size_t>(r)];
            double mu = spectrum.eigenvalues()[i];
            double res = std::abs(tail * spectrum.eigenvectors()(m - 1, i));
            if (!(res <= tol * std::max(std::abs(mu), 1e-30)) && !breakdown) {
                Vec x = assemble(i);
                double nrm = x.norm();
                if (nrm > 1e-10 && std::isfinite(mu)) {
                    warm = x / nrm;
                    have_warm = true;
                }
                break;
            }
            if (static_cast<int>(locked.size()) >= nev &&
                std::abs(mu) <= kept_floor() * (1.0 + margin)) {
                // only a pass that locked nothing can certify completeness:
                // this Krylov space met each eigenspace of the complement it
                // started from along one direction, so partners of anything
                // locked mid-pass stay invisible to it
                if (locked.size() == before) verified = true;
                break;
            }
            Vec x = assemble(i);
            double nrm = x.norm();
            if (nrm < 1e-8 || !std::isfinite(mu)) continue;
            locked.push_back(x / nrm);
            locked_vals.push_back(mu);
        }
        if (locked.size() > before) have_warm = false;
    }

    if (!verified || static_cast<int>(locked.size()) < nev)
        throw Error(Status::InternalError, "lanczos: failed to converge requested pairs");

    std::vector<int> order(locked.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double ma = std::abs(locked_vals[static_cast<size_t>(a)]);
        double mb = std::abs(locked_vals[static_cast<size_t>(b)]);
        if (ma != mb) return ma > mb;
        return a < b;
    });
    order.resize(static_cast<size_t>(nev));
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return locked_vals[static_cast<size_t>(a)] < locked_vals[static_cast<size_t>(b)]; });

    EigPairs out;
    out.vectors.resize(dim, nev);
    for (int i = 0; i < nev; ++i) {
        out.values.push_back(locked_vals[static_cast<size_t>(order[static_cast<size_t>(i)])]);
        out.vectors.col(i) = locked[static_cast<size_t>(order[static_cast<size_t>(i)])];
    }
    return out;
}

EigPairs lowest_eigenpairs(const SpMat& A, const Vec& mdiag, int nev, int dense_limit) {
    const int dim = static_cast<int>(A.rows());
    if (dim != A.cols() || dim != mdiag.size())
        throw Error(Status::InvalidArgument, "eigensolver: dimension mismatch");
    if (nev <= 0 || nev > dim) throw Error(Status::InvalidArgument, "eigensolver: bad pair count");
    if (mdiag.minCoeff() <= 0.0) throw Error(Status::InvalidArgument, "eigensolver: mass must be positive");
    if (max_relative_asymmetry(A) > 1e-12)
        throw Error(Status::NonSymmetricForm, "eigensolver: stiffness not symmetric");

    if (dim <= dense_limit) {
        Mat Ad = Mat(A);
        Mat Md = mdiag.asDiagonal();
        Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Ad, Md);
        if (es.info() != Eigen::Success)
            throw Error(Status::InternalError, "eigensolver: dense solve failed");
        EigPairs out;
        out.vectors.resize(dim, nev);
        for (int i = 0; i < nev; ++i) {
            out.values.push_back(es.eigenvalues()[i]);
            out.vectors.col(i) = es.eigenvectors().col(i);
        }
        return out;
    }

    // Congruence with the diagonal mass keeps the problem symmetric. The
    // shift sits below the whole spectrum (Gershgorin bound), so inversion
    // maps the low end onto the dominant end with every image positive.
    Vec dinv_sqrt = mdiag.cwiseSqrt().cwiseInverse();
    SpMat B = dinv_sqrt.asDiagonal() * A * dinv_sqrt.asDiagonal();
    SpMat Bc = SpMat(0.5 * (B + SpMat(B.transpose())));

    double bound = 0.0;
    for (int k = 0; k < Bc.outerSize(); ++k) {
        double diag = 0.0, off = 0.0;
        for (SpMat::InnerIterator it(Bc, k); it; ++it) {
            if (it.row() == it.col()) diag = it.value();
            else off += std::abs(it.value());
        }
        bound = std::min(bound, diag - off);
    }
    double margin = std::max(1e-6, 1e-6 * std::abs(bound));

    SpMat ident(dim, dim);
    ident.setIdentity();
    Eigen::SimplicialLDLT<SpMat> factor;
    double sigma = 0.0;
    bool factored = false;
    for (double nudge : {0.0, 1.0, 3.14159}) {
        sigma = bound - margin - nudge;
        factor.compute(SpMat(Bc - sigma * ident));
        if (factor.info() == Eigen::Success) {
            Vec probe = Vec::Ones(dim);
            Vec sol = factor.solve(probe);
            if (sol.allFinite()) {
                factored = true;
                break;
            }
        }
    }
    if (!factored) throw Error(Status::InternalError, "eigensolver: factorization failed");

    LinearOperator op;
    op.dim = dim;
    op.apply = [&](const double* in, double* out) {
        Eigen::Map<const Vec> x(in, dim);
        Eigen::Map<Vec> y(out, dim);
        y = factor.solve(x);
    };

    EigPairs inv = lanczos_largest(op, nev);
    EigPairs out;
    out.vectors.resize(dim, nev);
    std::vector<int> order(static_cast<size_t>(nev));
    for (int i = 0; i < nev; ++i) order[static_cast<size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return sigma + 1.0 / inv.values[static_cast<size_t>(a)] <
               sigma + 1.0 / inv.values[static_cast<size_t>(b)];
    });
    for (int i = 0; i < nev; ++i) {
        int j = order[static_cast<size_t>(i)];
        if (inv.values[static_cast<size_t>(j)] == 0.0)
            throw Error(Status::InternalError, "eigensolver: singular shift");
        out.values.push_back(sigma + 1.0 / inv.values[static_cast<size_t>(j)]);
        out.vectors.col(i) = dinv_sqrt.asDiagonal() * inv.vectors.col(j);
        double nrm = std::sqrt(out.vectors.col(i).dot(mdiag.asDiagonal() * out.vectors.col(i)));
        out.vectors.col(i) /= nrm;
    }
    return out;
}

} // namespace geomq
