#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ibfilm/simulation.hpp"

namespace ibfilm {

/// ||a - b||_p on a common grid.
double temporal_error(const Field& a, const Field& b, double p);
/// Lagrangian ||Xa - Xb||_p with weight d0^D.
double temporal_error(std::span<const Point> a, std::span<const Point> b, double p, double d0, int dim);

/// ||coarse - R fine||_p with R the full-weighting restriction to the coarse grid.
double spatial_error(const Field& coarse, const Field& fine, double p);

/// log2(E_k / E_{k+1}); empty when the ratio is undefined.
struct Rate {
    std::optional<double> value;
    std::string str() const;
};
std::vector<Rate> convergence_rates(const std::vector<double>& errors);

/// Least-squares slope of log2(E) against log2(1/h).
double fitted_order(const std::vector<double>& h, const std::vector<double>& errors);

struct RunResult {
    Field u;
    std::vector<Point> X;
    RunSummary summary;
    bool valid = false;  ///< completed and stable
};
RunResult run_to_end(const Scenario& s);

enum class StudyKind { Temporal, Spatial };

struct RefinementReport {
    StudyKind kind = StudyKind::Temporal;
    std::vector<double> ladder;     ///< dt or h per rung
    std::vector<bool> valid;        ///< per rung
    std::vector<std::string> notes;
    /// Errors between rungs k and k+1 for u and X in the 2- and inf-norms.
    std::vector<double> u2, uinf, x2, xinf;
    std::vector<Rate> r_u2, r_uinf, r_x2, r_xinf;
    std::string fingerprint;
    double seconds = 0.0;
};

/// Runs every rung to the common final time and compares adjacent rungs.
/// Errors involving an invalid rung are NaN and rates through them are
/// indeterminate.
RefinementReport run_refinement_study(StudyKind kind, const Scenario& base, const std::vector<double>& ladder);

/// Table with one row per adjacent pair plus the rates, and a log2 plot-data file.
void write_report(const RefinementReport& r, const std::string& csv_path, const std::string& plot_path);
std::string format_report(const RefinementReport& r);

struct StabilityCell {
    double h = 0.0, dt = 0.0, F_max = 0.0;  ///< F_max in newtons
    bool stable = true;
    double ke_ratio = 0.0;
    std::string failure;
};
struct StabilityResult {
    std::vector<StabilityCell> cells;
    /// Threshold estimates of dt <= C1 h and dt <= C2 / F_max; empty if no
    /// unstable cell bounds them.
    std::optional<double> C1, C2;
};
StabilityResult stability_sweep(const Scenario& base, const std::vector<double>& hs, const std::vector<double>& dts,
                                const std::vector<double>& F_maxes);
/// Boundary between the largest stable and the smallest unstable value of
/// `x`, as their geometric mean; empty if nothing is unstable.
std::optional<double> stability_threshold(const std::vector<double>& x, const std::vector<bool>& stable);

struct LaminarReport {
    int dim = 2;
    double h = 0.0;
    long steps = 0;
    double error = 0.0;       ///< max-norm error against the exact profile
    double divergence = 0.0;  ///< max interior divergence at the end
    double change = 0.0;      ///< max-norm change in the last step
    bool converged = false;
    double seconds = 0.0;
};
/// 2D: start from `fraction` of the laminar profile and stop once the error
/// drops below `target`. 3D: start from the profile and stop once a step
/// changes u by less than `target`.
LaminarReport laminar_check(const Scenario& s, double fraction, long max_steps, double target);
/// Scenario for laminar checks: no biofilm, the standard channel or a duct
/// of length one in 3D.
Scenario laminar_scenario(int dim, double h, double dt = 1e-4);

struct DeltaRow {
    double h = 0.0;
    double unity1 = 0.0, mom1 = 0.0, unity2 = 0.0, mom2 = 0.0;
};
/// Kernel errors on `count` log-spaced h in [h_min, h_max].
std::vector<DeltaRow> delta_metrics(double omega, double h_min, double h_max, int count);
/// Rows at h = omega / z for every integer z with h in [h_min, h_max].
std::vector<DeltaRow> delta_metrics_exact(double omega, double h_min, double h_max);
void write_delta_csv(const std::string& path, const std::vector<DeltaRow>& rows);

}  // namespace ibfilm
