#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace geomq {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class DerivMode { Analytic, FiniteDifference };

// Parametric embedding of an m-dimensional surface in R^n.
// Analytic charts carry first/second derivative callbacks; otherwise central
// differences with relative steps h1_rel / h2_rel are used.
struct Chart {
    int m = 0;
    int n = 0;
    std::function<Vec(const Vec&)> map;
    std::function<Mat(const Vec&)> d1;                   // n x m Jacobian
    std::function<std::vector<Mat>(const Vec&)> d2;      // per ambient coord, m x m Hessian
    DerivMode mode = DerivMode::FiniteDifference;
    std::vector<double> period;                          // per parameter, 0 = aperiodic
    double h1_rel = 1e-6;
    double h2_rel = 1e-4;
    double rank_tol = 1e-8;
    std::string name;
    std::map<std::string, double> params;                // constructor arguments, for reporting

    bool analytic() const { return mode == DerivMode::Analytic && d1 && d2; }
};

// Same geometry with derivative callbacks dropped, forcing the finite
// difference path everywhere.
Chart with_fd_derivatives(const Chart& chart);

// Registry charts: circle(R), ellipse(a,b), cylinder(R), sphere(R,n),
// curve_helix(a,b), flat_torus(R1,R2), paraboloid_patch(k1..k9), random_quadric(seed).
Chart make_chart(const std::string& name, const std::map<std::string, double>& params);

// "name:key=value,key=value" (parameters optional)
Chart parse_chart_spec(const std::string& spec);

Chart make_circle(double R);
Chart make_ellipse(double a, double b);
Chart make_cylinder(double R);
Chart make_sphere(double R, int ambient_dim);
Chart make_helix(double a, double b);
Chart make_flat_torus(double R1, double R2);
Chart make_paraboloid_patch(const std::vector<double>& ks);
Chart make_random_quadric(uint64_t seed);

} // namespace geomq
