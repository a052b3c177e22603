#pragma once

#include <functional>
#include <string>
#include <vector>

#include "chart.hpp"
#include "eigs.hpp"

namespace geomq {

// Plane curve given by parameter speed |r'(u)|, signed curvature, and period.
// The sign convention matches a counterclockwise curve with outward normal:
// the offset length element is |r'|(1 + w k) for offsets w along the normal.
struct PlaneCurve {
    std::function<double(double)> speed;
    std::function<double(double)> curvature;
    double period = 0.0;
    std::string name;
};

PlaneCurve plane_curve_from_chart(const Chart& chart);

// Straight segment of the given length with periodic identification.
PlaneCurve flat_strip(double length);

enum class SolverChoice { Auto, Dense, Iterative };

struct ThinLayerScenario {
    PlaneCurve curve;
    double delta = 0.05;
    int n_tangent = 192;
    int n_normal = 48;
    int num_eigenvalues = 6;
    SolverChoice solver = SolverChoice::Auto;
    // companion solve on the (2*n_tangent, 2*n_normal+1) grid: supplies the
    // refinement error estimate and an extrapolated eigenvalue list
    bool refine = true;
};

struct DegeneracyGroup {
    int first = 0;
    int count = 1;
};

struct SpectrumResult {
    std::vector<double> eigenvalues;          // ascending, finest grid solved
    std::vector<double> subtracted;           // minus pi^2/(8 delta^2) where applicable
    std::vector<double> extrapolated;         // refinement pair estimate of subtracted; empty without refine
    std::vector<DegeneracyGroup> degeneracies;
    double delta = 0.0;
    std::vector<int> grid;                    // finest resolutions used
    std::vector<int> grid_coarse;             // base resolutions when refined
    double grid_error = 0.0;                  // worst refinement error estimate / value scale
    bool analytic_path = false;

    const std::vector<double>& best_subtracted() const {
        return extrapolated.empty() ? subtracted : extrapolated;
    }
};

struct WavefunctionGrid {
    int n_tangent = 0;
    int n_normal = 0;             // interior transverse nodes
    double delta = 0.0;
    std::vector<double> u;        // tangent nodes
    std::vector<double> w;        // transverse nodes
    Vec values;                   // node (i,j) at i*n_normal + j
    Vec weights;                  // volume weights, same layout
    double norm = 0.0;

    double at(int i, int j) const { return values[i * n_normal + j]; }
};

// Surface Hamiltonian -(1/2) Lap_LB + V_q on a closed parametric curve,
// discretized on a periodic grid with metric weights. The flat torus takes
// the analytic mode-sum path instead of a grid.
SpectrumResult surface_spectrum(const Chart& chart, bool include_vq, int n_grid, int num_eigenvalues);

// Dirichlet layer around a plane curve in adapted coordinates (u, w):
// -(1/2) (1/h) [d_u (1/h d_u) + d_w (h d_w)], h = |r'| (1 + w k), walls at w = +-delta.
SpectrumResult layer_spectrum_curve(const ThinLayerScenario& scenario,
                                    WavefunctionGrid* ground = nullptr);

// Spherical shell R-delta < r < R+delta: per angular mode l, the radial
// Dirichlet problem; levels carry degeneracy 2l+1.
SpectrumResult layer_spectrum_shell(double R, double delta, int l_max, int n_radial);

struct LevelFit {
    int index = 0;
    double surface_value = 0.0;
    std::vector<double> errors;   // |subtracted(delta) - surface_value| per delta
    double slope = 0.0;
    double intercept = 0.0;       // log-log fit intercept
    bool exact = false;           // all errors at roundoff level, no fit
};

struct SweepReport {
    std::vector<double> deltas;
    std::vector<LevelFit> levels;
    std::vector<SpectrumResult> spectra;
};

// Solves the layer at each delta (same grids) and fits the subtracted
// eigenvalue errors against the provided surface reference values.
SweepReport delta_sweep(const ThinLayerScenario& base, const std::vector<double>& deltas,
                        const std::vector<double>& surface_values);

struct FactorizationDefect {
    // 1 - (projection norm)^2 of chi = Psi * sqrt(dS'/dS) onto the
    // cos(pi w / 2 delta) transverse mode under the product measure
    double chi_defect = 0.0;
    // same projection of the raw ground state under the volume measure
    double psi_defect = 0.0;
    double ground_energy = 0.0;
};

FactorizationDefect factorization_residual(const ThinLayerScenario& scenario);

// Assembled stiffness operators (including potential terms) with their
// diagonal mass vectors; the spectrum functions solve A x = lambda M x.
SpMat layer_operator(const PlaneCurve& curve, double delta, int n_tangent, int n_normal, Vec* mass);
SpMat surface_operator(const Chart& chart, bool include_vq, int n_grid, Vec* mass);
SpMat shell_operator(double R, double delta, int l, int n_radial, Vec* mass);

} // namespace geomq
