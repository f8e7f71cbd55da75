#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibfilm/grid.hpp"

namespace ibfilm {

// ---------------------------------------------------------------------------
// Box shapes. Each axis is either vertex-centred (nodes 0..n, boundary nodes
// stored and either fixed or reflected) or cell-centred (cells 1..n plus two
// boundary slots 0 and n+1 that hold Dirichlet face values).
// ---------------------------------------------------------------------------

enum class AxisLayout { Vertex, Cell };
enum class SideBC { Dirichlet, Neumann };

struct AxisSpec {
    AxisLayout layout = AxisLayout::Vertex;
    int n = 0;  ///< intervals (vertex) or cells (cell)
    SideBC lo = SideBC::Dirichlet;
    SideBC hi = SideBC::Dirichlet;
};

class BoxShape {
public:
    BoxShape() = default;
    BoxShape(int dim, std::array<AxisSpec, 3> axes, double spacing);

    int dim() const { return dim_; }
    double spacing() const { return spacing_; }
    const AxisSpec& axis(int a) const { return axes_[a]; }
    int count(int a) const { return count_[a]; }
    std::ptrdiff_t stride(int a) const { return stride_[a]; }
    std::size_t size() const { return size_; }
    std::size_t index(int i, int j = 0, int k = 0) const {
        return static_cast<std::size_t>(i + j * stride_[1] + k * stride_[2]);
    }
    std::array<int, 3> coords(std::size_t idx) const;

    /// True if the storage slot along axis a at position i holds an unknown.
    bool unknown_along(int a, int i) const;
    bool unknown(const std::array<int, 3>& c) const;
    std::size_t unknown_count() const;

    bool can_coarsen() const;
    BoxShape coarsen() const;

    /// Index along axis a after reflecting across Neumann vertex boundaries.
    int reflect(int a, int i) const;

private:
    int dim_ = 0;
    double spacing_ = 0.0;
    std::array<AxisSpec, 3> axes_{};
    std::array<int, 3> count_{1, 1, 1};
    std::array<std::ptrdiff_t, 3> stride_{1, 0, 0};
    std::size_t size_ = 0;
};

/// Box shape of the vertex lattice underlying a Grid, with Dirichlet sides
/// except where `neumann[axis][side]` is set.
BoxShape vertex_shape(const Grid& g, const std::array<std::array<bool, 2>, 3>& neumann);

// Intergrid transfers on box shapes (all components share the shape).
void restrict_residual(const BoxShape& fine, const BoxShape& coarse, std::span<const double> rf, std::span<double> rc);
void prolong_add(const BoxShape& coarse, const BoxShape& fine, std::span<const double> ec, std::span<double> uf);
/// Full weighting on interior coarse nodes, injection on boundary slots.
void restrict_coefficient(const BoxShape& fine, const BoxShape& coarse, std::span<const double> cf,
                          std::span<double> cc);

// Intergrid transfers on Grid fields (vertex lattice, boundary injected).
Grid coarsen_grid(const Grid& fine);
Field restrict_full_weighting(const Field& fine);
Field interpolate_linear(const Field& coarse, const Grid& fine);

// ---------------------------------------------------------------------------
// Level operators.
// ---------------------------------------------------------------------------

class LevelOperator {
public:
    virtual ~LevelOperator() = default;
    virtual const BoxShape& shape() const = 0;
    virtual int components() const = 0;
    /// Red-black Gauss-Seidel; each sweep is a red pass then a black pass.
    virtual void relax(std::span<double> u, std::span<const double> f, int sweeps) const = 0;
    /// r = f - A u on unknowns, zero on fixed slots.
    virtual void residual(std::span<const double> u, std::span<const double> f, std::span<double> r) const = 0;
    /// Rediscretized operator on the next coarser shape; gamma scales the
    /// diffusion coefficient where the operator supports it.
    virtual std::unique_ptr<LevelOperator> coarsen(double gamma) const = 0;
};

/// Compressed per-unknown stencil: A u = diag u - sum coef u[nbr].
struct Stencil {
    std::vector<std::size_t> node;   ///< storage index of each unknown, reds first
    std::size_t nred = 0;
    int width = 0;                   ///< neighbours per unknown
    std::vector<std::size_t> nbr;
    std::vector<double> coef;
    std::vector<double> diag;
};

/// Coefficients of shift*u - div(a grad u) on a box shape. face[a][idx] is the
/// coefficient between slot idx and idx + e_a.
struct ScalarCoefficients {
    std::vector<double> shift;
    std::array<std::vector<double>, 3> face;
};

class ScalarOperator final : public LevelOperator {
public:
    ScalarOperator(const BoxShape& shape, ScalarCoefficients coeffs);

    const BoxShape& shape() const override { return shape_; }
    int components() const override { return 1; }
    void relax(std::span<double> u, std::span<const double> f, int sweeps) const override;
    void residual(std::span<const double> u, std::span<const double> f, std::span<double> r) const override;
    std::unique_ptr<LevelOperator> coarsen(double gamma) const override;

    const ScalarCoefficients& coefficients() const { return coeffs_; }
    const Stencil& stencil() const { return st_; }

private:
    BoxShape shape_;
    ScalarCoefficients coeffs_;
    Stencil st_;
};

// ---------------------------------------------------------------------------
// Solver.
// ---------------------------------------------------------------------------

struct MultigridOptions {
    int levels = 6;
    int nu1 = 2;
    int nu2 = 2;
    int coarse_sweeps = 50;
    double tol = 1e-9;
    int max_cycles = 200;
    int min_cycles = 0;
    /// When positive, residuals are measured relative to this norm instead
    /// of the right-hand side.
    double reference = 0.0;
    /// Level l uses gamma[l-1] times the restricted fine coefficient. The factors
    /// do not compound across levels; missing entries repeat the last one, and
    /// an empty table means 1.
    std::vector<double> gamma;
    bool throw_on_failure = true;
};

struct SolveStats {
    int v_cycles = 0;
    double work_units = 0.0;
    double initial_residual = 0.0;  ///< relative
    double final_residual = 0.0;    ///< relative
    std::vector<double> history;    ///< relative residual before/after each cycle
    int levels = 0;
    bool converged = false;
    bool stagnated = false;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, SolveStats stats) : std::runtime_error(what), stats_(std::move(stats)) {}
    const SolveStats& stats() const { return stats_; }

private:
    SolveStats stats_;
};

/// Raised when the residual stops decreasing above the requested tolerance.
class SolverStagnation : public SolverError {
public:
    using SolverError::SolverError;
};

class Multigrid {
public:
    Multigrid(std::unique_ptr<LevelOperator> finest, const MultigridOptions& opt);

    int levels() const { return static_cast<int>(ops_.size()); }
    const LevelOperator& op(int level) const { return *ops_[level]; }
    const MultigridOptions& options() const { return opt_; }

    /// Solve A u = f in place; Dirichlet slots of u carry boundary data.
    SolveStats solve(std::span<double> u, std::span<const double> f) const;

    // Pieces used by composite solvers.
    /// Max-norm of f - A u0 where u0 is u with its unknowns zeroed.
    double reference_norm(std::span<const double> u, std::span<const double> f) const;
    double residual_norm(std::span<const double> u, std::span<const double> f) const;
    /// One V-cycle; returns the work spent in finest-sweep units of this hierarchy.
    double cycle(std::span<double> u, std::span<const double> f) const;

private:
    void vcycle(int level, std::span<double> u, std::span<const double> f, double& work) const;

    MultigridOptions opt_;
    std::vector<std::unique_ptr<LevelOperator>> ops_;
    mutable std::vector<std::vector<double>> u_, f_, r_;
};

/// Shared stopping logic: drives `cycle` until the relative residual meets tol.
class ConvergenceMonitor {
public:
    ConvergenceMonitor(const MultigridOptions& opt, double reference, double initial_residual, int levels);
    bool done() const;
    void record(double residual_norm, double work);
    SolveStats finish() const;

private:
    const MultigridOptions& opt_;
    double ref_;
    SolveStats st_;
    double best_ = 0.0;
    int since_best_ = 0;
};

double max_abs(std::span<const double> v);

}  // namespace ibfilm
