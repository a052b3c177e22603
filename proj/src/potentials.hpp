#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chart.hpp"

namespace geomq {

// All potentials use hbar = 1, mass = 1; report consumers may rescale by hbar^2.

// codim-1: (1/8)((sum k)^2 - 2 sum k^2)
double vq_codim1(const std::vector<double>& principal);

// 2D surface in R^3: -(k1 - k2)^2 / 8
double vq_dacosta_2d(double k1, double k2);

// curve in R^n: -(1/8) sum_alpha k_alpha^2
double vq_curve(const std::vector<double>& curvatures);

// general-codimension formula evaluated verbatim in the given basis:
// (1/8) sum_alpha [ (sum_a k_aa)^2 + 6 sum_ab k_ab^2 - 8 sum_a k_aa^2 ]
double vq_general_paper(const std::vector<Mat>& forms);

// basis-invariant trace form: (1/8) sum_alpha [ (tr k)^2 - 2 tr(k^2) ]
double vq_general_invariant(const std::vector<Mat>& forms);

struct PotentialReport {
    std::optional<double> vq_codim1;
    std::optional<double> vq_curve;
    std::optional<double> vq_general_paper;
    std::optional<double> vq_general_invariant;
    std::optional<double> vq_numeric;
    bool basis_sensitive = false; // |paper - invariant| > 1e-10
    std::vector<std::tuple<std::string, std::string, double>> discrepancies;
};

// evaluates every applicable closed form plus the eps-differentiation oracle
PotentialReport compare_potentials(const std::vector<Mat>& forms);

// Conjugated-momentum form of the sphere operator in stereographic coordinates
// versus the conformal Laplacian -(1/2) F^2 (d11 + d22), F = 1 + |x|^2/(4R^2).
// Both sides are evaluated by finite differences; returns the max relative
// deviation over the given functions and points.
double stereographic_operator_check(double R,
                                    const std::vector<std::function<double(double, double)>>& fs,
                                    const std::vector<std::array<double, 2>>& points);

} // namespace geomq
