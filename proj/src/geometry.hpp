#pragma once

#include <vector>

#include "chart.hpp"

namespace geomq {

struct CurvatureData {
    Vec point;                    // parameter values
    Vec ambient;                  // embedded point
    Mat tangent_frame;            // n x m, orthonormal columns
    Mat normal_frame;             // n x (n-m), orthonormal columns
    std::vector<Mat> forms;       // one symmetric m x m matrix per normal
    std::vector<double> principal; // codim-1 only: eigenvalues, descending
};

struct NormalDivergence {
    double sum_principal = 0.0;   // sum of principal curvatures
    double numeric = 0.0;         // divergence of the projected unit-normal field
};

Mat jacobian(const Chart& chart, const Vec& u);
std::vector<Mat> second_derivatives(const Chart& chart, const Vec& u);
Mat metric(const Chart& chart, const Vec& u);

// Deterministic orthonormal normal frame: Gram-Schmidt of the ambient basis
// against the tangent space, each vector sign-fixed so its largest-magnitude
// component is positive.
Mat normal_frame(const Chart& chart, const Vec& u);

// Same frame with column signs flipped to match a reference frame; rejects
// frames that cannot be aligned (|cos angle| < 0.5 for some column).
Mat normal_frame_aligned(const Chart& chart, const Vec& u, const Mat& reference);

CurvatureData curvature_forms(const Chart& chart, const Vec& u);

// parameter of the surface point nearest to ambient point p (Gauss-Newton from u0)
Vec nearest_point_param(const Chart& chart, const Vec& p, const Vec& u0);

NormalDivergence divergence_of_normal(const Chart& chart, const Vec& u);

// cross[a](beta, alpha) = (d_a n^(beta)) . n^(alpha)
std::vector<Mat> frame_cross_terms(const Chart& chart, const Vec& u);

} // namespace geomq
