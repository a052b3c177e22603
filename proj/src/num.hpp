#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include "error.hpp"

namespace geomq {

// Counter-based generator: stream position i is a pure function of (seed, i),
// so sequences are reproducible across platforms and evaluation orders.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : seed_(seed) {}

    uint64_t at(uint64_t i) const {
        uint64_t z = seed_ + (i + 1) * 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double uniform(uint64_t i) const { return double(at(i) >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(uint64_t i, double lo, double hi) const { return lo + (hi - lo) * uniform(i); }

private:
    uint64_t seed_;
};

struct Fd {
    static constexpr double first_rel_step = 1e-6;
    static constexpr double second_rel_step = 1e-4;

    static double step1(double u) { return first_rel_step * std::max(1.0, std::fabs(u)); }
    static double step2(double u) { return second_rel_step * std::max(1.0, std::fabs(u)); }
};

inline double central1(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double central2(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

// one Richardson level for an O(h^2) estimator
inline double richardson2(const std::function<double(double)>& estimate, double h) {
    double a = estimate(h);
    double b = estimate(h / 2.0);
    return (4.0 * b - a) / 3.0;
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

// least-squares line through (x_i, y_i)
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        fail(Status::InvalidArgument, "line fit needs at least two points");
    double n = double(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double denom = n * sxx - sx * sx;
    if (std::fabs(denom) < 1e-300) fail(Status::InvalidArgument, "degenerate line fit");
    LineFit out;
    out.slope = (n * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / n;
    return out;
}

// log-log slope of |residual| vs scale; pairs with nonpositive residual are rejected
inline LineFit fit_loglog(const std::vector<double>& scale, const std::vector<double>& resid) {
    std::vector<double> lx, ly;
    lx.reserve(scale.size());
    ly.reserve(resid.size());
    for (size_t i = 0; i < scale.size(); ++i) {
        if (!(scale[i] > 0.0) || !(resid[i] > 0.0))
            fail(Status::InvalidArgument, "log-log fit needs positive data");
        lx.push_back(std::log(scale[i]));
        ly.push_back(std::log(resid[i]));
    }
    return fit_line(lx, ly);
}

// group ascending values whose relative spread stays within tol; returns group sizes
inline std::vector<int> degeneracy_groups(const std::vector<double>& ascending, double rel_tol) {
    std::vector<int> groups;
    size_t i = 0;
    while (i < ascending.size()) {
        size_t j = i + 1;
        while (j < ascending.size()) {
            double scale = std::max({1.0, std::fabs(ascending[i]), std::fabs(ascending[j])});
            if (std::fabs(ascending[j] - ascending[i]) > rel_tol * scale) break;
            ++j;
        }
        groups.push_back(int(j - i));
        i = j;
    }
    return groups;
}

} // namespace geomq
