#include "chart.hpp"

#include <cmath>
#include <set>

#include "error.hpp"
#include "num.hpp"

namespace geomq {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double get_param(const std::map<std::string, double>& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

void reject_unknown(const std::map<std::string, double>& p, const std::set<std::string>& known,
                    const std::string& chart) {
    for (const auto& [k, v] : p)
        if (!known.count(k)) fail(Status::ConfigError, "unknown parameter '" + k + "' for chart " + chart);
}

} // namespace

Chart make_circle(double R) {
    if (R <= 0) fail(Status::ConfigError, "circle needs R > 0");
    Chart c;
    c.m = 1;
    c.n = 2;
    c.name = "circle";
    c.params = {{"R", R}};
    c.period = {kTwoPi};
    c.map = [R](const Vec& u) { return Vec{{R * std::cos(u[0]), R * std::sin(u[0])}}; };
    c.d1 = [R](const Vec& u) {
        Mat J(2, 1);
        J << -R * std::sin(u[0]), R * std::cos(u[0]);
        return J;
    };
    c.d2 = [R](const Vec& u) {
        std::vector<Mat> h(2, Mat::Zero(1, 1));
        h[0](0, 0) = -R * std::cos(u[0]);
        h[1](0, 0) = -R * std::sin(u[0]);
        return h;
    };
    c.mode = DerivMode::Analytic;
    return c;
}

Chart make_ellipse(double a, double b) {
    if (a <= 0 || b <= 0) fail(Status::ConfigError, "ellipse needs a, b > 0");
    Chart c;
    c.m = 1;
    c.n = 2;
    c.name = "ellipse";
    c.params = {{"a", a}, {"b", b}};
    c.period = {kTwoPi};
    c.map = [a, b](const Vec& u) { return Vec{{a * std::cos(u[0]), b * std::sin(u[0])}}; };
    c.d1 = [a, b](const Vec& u) {
        Mat J(2, 1);
        J << -a * std::sin(u[0]), b * std::cos(u[0]);
        return J;
    };
    c.d2 = [a, b](const Vec& u) {
        std::vector<Mat> h(2, Mat::Zero(1, 1));
        h[0](0, 0) = -a * std::cos(u[0]);
        h[1](0, 0) = -b * std::sin(u[0]);
        return h;
    };
    c.mode = DerivMode::Analytic;
    return c;
}

Chart make_cylinder(double R) {
    if (R <= 0) fail(Status::ConfigError, "cylinder needs R > 0");
    Chart c;
    c.m = 2;
    c.n = 3;
    c.name = "cylinder";
    c.params = {{"R", R}};
    c.period = {kTwoPi, 0.0};
    c.map = [R](const Vec& u) { return Vec{{R * std::cos(u[0]), R * std::sin(u[0]), u[1]}}; };
    c.d1 = [R](const Vec& u) {
        Mat J(3, 2);
        J << -R * std::sin(u[0]), 0, R * std::cos(u[0]), 0, 0, 1;
        return J;
    };
    c.d2 = [R](const Vec& u) {
        std::vector<Mat> h(3, Mat::Zero(2, 2));
        h[0](0, 0) = -R * std::cos(u[0]);
        h[1](0, 0) = -R * std::sin(u[0]);
        return h;
    };
    c.mode = DerivMode::Analytic;
    return c;
}

// S^{n-1} in R^n with nested angles: x_k = R (prod_{j<k} sin u_j) cos u_k for k < n,
// x_n = R prod_{j<n} sin u_j. The last angle is 2*pi periodic.
Chart make_sphere(double R, int ambient_dim) {
    if (R <= 0) fail(Status::ConfigError, "sphere needs R > 0");
    if (ambient_dim < 2) fail(Status::ConfigError, "sphere needs ambient dimension >= 2");
    int n = ambient_dim;
    int m = n - 1;
    // factor table: coordinate k (0-based) is R * prod of sin(u_j), j < min(k, m-1),
    // times cos(u_k) when k < m.
    auto factors = [n, m](int k) {
        std::vector<std::pair<int, bool>> f; // (axis, is_sin)
        int lim = std::min(k, m);
        for (int j = 0; j < lim; ++j) f.push_back({j, true});
        if (k < m) f.push_back({k, false});
        return f;
    };
    auto prod_val = [R](const Vec& u, const std::vector<std::pair<int, bool>>& f,
                        int d_axis_a, int d_axis_b) {
        // product with optional first/second differentiation along single axes;
        // each axis appears in at most one factor
        double out = R;
        bool found_a = (d_axis_a < 0), found_b = (d_axis_b < 0);
        for (auto [axis, is_sin] : f) {
            int dcount = (axis == d_axis_a ? 1 : 0) + (axis == d_axis_b ? 1 : 0);
            if (axis == d_axis_a) found_a = true;
            if (axis == d_axis_b) found_b = true;
            double s = std::sin(u[axis]), cgrid = std::cos(u[axis]);
            double base = is_sin ? s : cgrid;
            double der = is_sin ? cgrid : -s;
            double val = (dcount == 0) ? base : (dcount == 1 ? der : -base);
            out *= val;
        }
        return (found_a && found_b) ? out : 0.0;
    };
    Chart c;
    c.m = m;
    c.n = n;
    c.name = "sphere";
    c.params = {{"R", R}, {"n", static_cast<double>(ambient_dim)}};
    c.period.assign(m, 0.0);
    c.period[m - 1] = kTwoPi;
    c.map = [n, factors, prod_val](const Vec& u) {
        Vec x(n);
        for (int k = 0; k < n; ++k) x[k] = prod_val(u, factors(k), -1, -1);
        return x;
    };
    c.d1 = [n, m, factors, prod_val](const Vec& u) {
        Mat J(n, m);
        for (int k = 0; k < n; ++k)
            for (int a = 0; a < m; ++a) J(k, a) = prod_val(u, factors(k), a, -1);
        return J;
    };
    c.d2 = [n, m, factors, prod_val](const Vec& u) {
        std::vector<Mat> h(n, Mat::Zero(m, m));
        for (int k = 0; k < n; ++k)
            for (int a = 0; a < m; ++a)
                for (int b = a; b < m; ++b) {
                    double v = prod_val(u, factors(k), a, b);
                    h[k](a, b) = v;
                    h[k](b, a) = v;
                }
        return h;
    };
    c.mode = DerivMode::Analytic;
    return c;
}

Chart make_helix(double a, double b) {
    if (a <= 0) fail(Status::ConfigError, "helix needs a > 0");
    Chart c;
    c.m = 1;
    c.n = 3;
    c.name = "curve_helix";
    c.params = {{"a", a}, {"b", b}};
    c.period = {0.0};
    c.map = [a, b](const Vec& u) { return Vec{{a * std::cos(u[0]), a * std::sin(u[0]), b * u[0]}}; };
    c.d1 = [a, b](const Vec& u) {
        Mat J(3, 1);
        J << -a * std::sin(u[0]), a * std::cos(u[0]), b;
        return J;
    };
    c.d2 = [a](const Vec& u) {
        std::vector<Mat> h(3, Mat::Zero(1, 1));
        h[0](0, 0) = -a * std::cos(u[0]);
        h[1](0, 0) = -a * std::sin(u[0]);
        return h;
    };
    c.mode = DerivMode::Analytic;
    return c;
}

Chart make_flat_torus(double R1, double R2) {
    if (R1 <= 0 || R2 <= 0) fail(Status::ConfigError, "flat torus needs R1, R2 > 0");
    Chart c;
    c.m = 2;
    c.n = 4;
    c.name = "flat_torus";
    c.params = {{"R1", R1}, {"R2", R2}};
    c.period = {kTwoPi, kTwoPi};
    c.map = [R1, R2](const Vec& u) {
        return Vec{{R1 * std::cos(u[0]), R1 * std::sin(u[0]), R2 * std::cos(u[1]), R2 * std::sin(u[1])}};
    };
    c.d1 = [R1, R2](const Vec& u) {
        Mat J = Mat::Zero(4, 2);
        J(0, 0) = -R1 * std::sin(u[0]);
        J(1, 0) = R1 * std::cos(u[0]);
        J(2, 1) = -R2 * std::sin(u[1]);
        J(3, 1) = R2 * std::cos(u[1]);
        return J;
    };
    c.d2 = [R1, R2](const Vec& u) {
        std::vector<Mat> h(4, Mat::Zero(2, 2));
        h[0](0, 0) = -R1 * std::cos(u[0]);
        h[1](0, 0) = -R1 * std::sin(u[0]);
        h[2](1, 1) = -R2 * std::cos(u[1]);
        h[3](1, 1) = -R2 * std::sin(u[1]);
        return h;
    };
    c.mode = DerivMode::Analytic;
    return c;
}

// Graph z = -(1/2) sum k_a u_a^2, so the principal curvatures at the origin equal
// the given list along the +z normal.
Chart make_paraboloid_patch(const std::vector<double>& ks) {
    if (ks.empty()) fail(Status::ConfigError, "paraboloid patch needs at least one curvature");
    int m = int(ks.size());
    Chart c;
    c.m = m;
    c.n = m + 1;
    c.name = "paraboloid_patch";
    for (int a = 0; a < m; ++a) c.params["k" + std::to_string(a + 1)] = ks[size_t(a)];
    c.period.assign(m, 0.0);
    c.map = [ks, m](const Vec& u) {
        Vec x(m + 1);
        double z = 0;
        for (int a = 0; a < m; ++a) {
            x[a] = u[a];
            z += ks[a] * u[a] * u[a];
        }
        x[m] = -0.5 * z;
        return x;
    };
    c.d1 = [ks, m](const Vec& u) {
        Mat J = Mat::Zero(m + 1, m);
        for (int a = 0; a < m; ++a) {
            J(a, a) = 1.0;
            J(m, a) = -ks[a] * u[a];
        }
        return J;
    };
    c.d2 = [ks, m](const Vec&) {
        std::vector<Mat> h(m + 1, Mat::Zero(m, m));
        for (int a = 0; a < m; ++a) h[m](a, a) = -ks[a];
        return h;
    };
    c.mode = DerivMode::Analytic;
    return c;
}

// Seeded graph z = (1/2) u^T K u + cubic(u) with |eig K| <= 1.8 and small cubic
// coefficients, so curvatures near the origin stay within |k| <= 2.
Chart make_random_quadric(uint64_t seed) {
    SplitMix64 rng(seed);
    double k1 = rng.uniform(0, -1.8, 1.8);
    double k2 = rng.uniform(1, -1.8, 1.8);
    double th = rng.uniform(2, 0.0, kTwoPi / 2.0);
    double ct = std::cos(th), st = std::sin(th);
    // K = Rot(th) diag(k1,k2) Rot(th)^T
    double kxx = ct * ct * k1 + st * st * k2;
    double kyy = st * st * k1 + ct * ct * k2;
    double kxy = ct * st * (k1 - k2);
    double c30 = rng.uniform(3, -0.25, 0.25);
    double c21 = rng.uniform(4, -0.25, 0.25);
    double c12 = rng.uniform(5, -0.25, 0.25);
    double c03 = rng.uniform(6, -0.25, 0.25);
    Chart c;
    c.m = 2;
    c.n = 3;
    c.name = "random_quadric";
    c.params = {{"seed", static_cast<double>(seed)}};
    c.period = {0.0, 0.0};
    c.map = [=](const Vec& u) {
        double x = u[0], y = u[1];
        double z = 0.5 * (kxx * x * x + 2 * kxy * x * y + kyy * y * y) + c30 * x * x * x +
                   c21 * x * x * y + c12 * x * y * y + c03 * y * y * y;
        return Vec{{x, y, z}};
    };
    c.d1 = [=](const Vec& u) {
        double x = u[0], y = u[1];
        Mat J(3, 2);
        J << 1, 0, 0, 1, kxx * x + kxy * y + 3 * c30 * x * x + 2 * c21 * x * y + c12 * y * y,
            kxy * x + kyy * y + c21 * x * x + 2 * c12 * x * y + 3 * c03 * y * y;
        return J;
    };
    c.d2 = [=](const Vec& u) {
        double x = u[0], y = u[1];
        std::vector<Mat> h(3, Mat::Zero(2, 2));
        h[2](0, 0) = kxx + 6 * c30 * x + 2 * c21 * y;
        h[2](0, 1) = h[2](1, 0) = kxy + 2 * c21 * x + 2 * c12 * y;
        h[2](1, 1) = kyy + 2 * c12 * x + 6 * c03 * y;
        return h;
    };
    c.mode = DerivMode::Analytic;
    return c;
}

Chart make_chart(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "circle") {
        reject_unknown(params, {"R"}, name);
        return make_circle(get_param(params, "R", 1.0));
    }
    if (name == "ellipse") {
        reject_unknown(params, {"a", "b"}, name);
        return make_ellipse(get_param(params, "a", 1.0), get_param(params, "b", 1.0));
    }
    if (name == "cylinder") {
        reject_unknown(params, {"R"}, name);
        return make_cylinder(get_param(params, "R", 1.0));
    }
    if (name == "sphere") {
        reject_unknown(params, {"R", "n"}, name);
        double nd = get_param(params, "n", 3.0);
        int n = int(nd);
        if (double(n) != nd) fail(Status::ConfigError, "sphere dimension must be an integer");
        return make_sphere(get_param(params, "R", 1.0), n);
    }
    if (name == "curve_helix") {
        reject_unknown(params, {"a", "b"}, name);
        return make_helix(get_param(params, "a", 1.0), get_param(params, "b", 1.0));
    }
    if (name == "flat_torus") {
        reject_unknown(params, {"R1", "R2"}, name);
        return make_flat_torus(get_param(params, "R1", 1.0), get_param(params, "R2", 1.0));
    }
    if (name == "paraboloid_patch") {
        reject_unknown(params, {"k1", "k2", "k3", "k4", "k5", "k6", "k7", "k8", "k9"}, name);
        std::vector<double> ks;
        for (int i = 1; i <= 9; ++i) {
            auto it = params.find("k" + std::to_string(i));
            if (it == params.end()) break;
            ks.push_back(it->second);
        }
        if (ks.empty()) fail(Status::ConfigError, "paraboloid_patch needs k1[,k2,...]");
        return make_paraboloid_patch(ks);
    }
    if (name == "random_quadric") {
        reject_unknown(params, {"seed"}, name);
        double sd = get_param(params, "seed", 0.0);
        if (sd < 0 || double(uint64_t(sd)) != sd)
            fail(Status::ConfigError, "random_quadric seed must be a nonnegative integer");
        return make_random_quadric(uint64_t(sd));
    }
    fail(Status::UnknownChart, "unknown chart '" + name + "'");
}

Chart parse_chart_spec(const std::string& spec) {
    std::string name = spec;
    std::map<std::string, double> params;
    auto colon = spec.find(':');
    if (colon != std::string::npos) {
        name = spec.substr(0, colon);
        std::string rest = spec.substr(colon + 1);
        size_t pos = 0;
        while (pos < rest.size()) {
            size_t comma = rest.find(',', pos);
            std::string item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0)
                fail(Status::ConfigError, "chart parameter '" + item + "' is not key=value");
            std::string key = item.substr(0, eq);
            std::string val = item.substr(eq + 1);
            try {
                size_t used = 0;
                double x = std::stod(val, &used);
                if (used != val.size()) throw std::invalid_argument(val);
                params[key] = x;
            } catch (const std::exception&) {
                fail(Status::ConfigError, "chart parameter '" + key + "' has non-numeric value '" + val + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    if (name.empty()) fail(Status::ConfigError, "empty chart name");
    return make_chart(name, params);
}

Chart with_fd_derivatives(const Chart& chart) {
    Chart c = chart;
    c.d1 = nullptr;
    c.d2 = nullptr;
    c.mode = DerivMode::FiniteDifference;
    return c;
}

} // namespace geomq
