#pragma once

#include <vector>

#include "chart.hpp"
#include "geometry.hpp"

namespace geomq {

// Surface displaced by eps_alpha along each unit normal; signs of the moving
// frame are aligned to the frame at u_ref so the offset map stays smooth.
struct OffsetFrame {
    Chart base_chart;
    Vec displacement;
    Chart offset_chart; // finite-difference mode
};

OffsetFrame make_offset_frame(const Chart& base, const Vec& eps, const Vec& u_ref);

// sqrt(det g_offset / det g_base): exact area-element ratio of the offset.
// Analytic codim-1 charts use the shape-operator Jacobian of the offset map;
// everything else differentiates the offset map directly.
double area_ratio_exact(const Chart& chart, const Vec& u, const Vec& eps);
double area_ratio_exact(const Chart& chart, const Vec& u, double eps); // codim-1

struct AreaRatioSeries {
    double c0 = 1.0;
    double c1 = 0.0; // sum k_a
    double c2 = 0.0; // ((sum k)^2 - sum k^2)/2
    double at(double eps) const { return c0 + c1 * eps + c2 * eps * eps; }
};

AreaRatioSeries area_ratio_series(const std::vector<double>& principal);

struct SeriesOrder {
    double slope = 0.0;       // log-log remainder slope; NaN when terminated
    double intercept = 0.0;
    double max_residual = 0.0;
    bool terminated = false;  // every remainder at round-off (<= 1e-12)
};

SeriesOrder verify_series_order(const Chart& chart, const Vec& u, const std::vector<double>& eps_grid);

struct ProkhorovCheck {
    double residual = 0.0;      // |ambient Laplacian replay - surface identity| / |chi|
    double recovered_vq = 0.0;  // potential read back from the replay
    double vq_formula = 0.0;    // closed-form value at the same point
    double chi = 0.0;
    double lap_chi = 0.0;
};

// Replays the surface-limit identity: Psi = chi / sqrt(area ratio) along the
// normal, ambient Laplacian in adapted form (d_n^2 + div n d_n + Lap_LB)
// evaluated at the surface against Lap_LB chi - 2 Vq chi.
ProkhorovCheck prokhorov_equivalence_check(const Chart& chart, const Vec& u);

struct DetExpansion {
    double exact_g = 1.0;   // det(I + A)^2
    double series_g = 1.0;  // printed second-order expansion
    double residual = 0.0;  // exact - series
};

DetExpansion det_expansion_check(const std::vector<Mat>& forms, const Vec& eps);

// Differentiates g^{-1/4} = det(I + sum eps_a k^(a))^{-1/2} in eps at 0
// (central step 1e-3, one Richardson level) and assembles
// -(1/2)(sum_a d2_a - 2 sum_a d1_a^2). Independent oracle for the trace form.
double vq_numeric_fd(const std::vector<Mat>& forms);

} // namespace geomq
