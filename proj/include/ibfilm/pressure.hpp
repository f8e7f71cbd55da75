#pragma once

#include <memory>
#include <vector>

#include "ibfilm/grid.hpp"
#include "ibfilm/multigrid.hpp"

namespace ibfilm {

/// Pressure gradient used by the projection at velocity node c: wide central
/// difference, except one-sided towards the outflow face along the flow axis
/// on the outflow plane.
double pressure_gradient(const Field& p, int k, const std::array<int, 3>& c);

/// -D0 . ((M / rho) G phi) evaluated directly on the fine grid at the
/// pressure unknowns (zero elsewhere). M is zero where the velocity is
/// prescribed, so those nodes are never corrected.
Field projection_operator(const Field& phi, const Field& rho);

/// Solver for -D0 . ((M / rho) G phi) = b. The wide stencil splits into 2^D
/// independent sublattices (one per index parity), each a compact
/// variable-coefficient problem on spacing 2h with its own multigrid
/// hierarchy; they are cycled in lockstep against a global residual.
class PressureSolver {
public:
    PressureSolver(const Grid& g, const MultigridOptions& opt);

    /// Rebuilds the operators for a new density field.
    void set_density(const Field& rho);

    /// phi carries the initial guess and, on prescribed nodes, the boundary
    /// data. rhs is read at the pressure unknowns. A positive `reference`
    /// replaces the right-hand-side norm in the relative residual.
    SolveStats solve(Field& phi, const Field& rhs, double reference = 0.0) const;

    int levels() const;
    std::size_t unknowns() const { return unknowns_; }
    const Grid& grid() const { return grid_; }

private:
    struct Sublattice {
        std::array<int, 3> parity{0, 0, 0};
        BoxShape shape;
        std::vector<std::size_t> fine;  // fine index whose value lives in each slot
        std::vector<char> unknown;
        std::size_t unknowns = 0;
        std::unique_ptr<Multigrid> mg;
        mutable std::vector<double> u, f;
    };

    Grid grid_;
    MultigridOptions opt_;
    std::vector<Sublattice> subs_;
    std::size_t unknowns_ = 0;
    bool throw_ = true;
};

}  // namespace ibfilm
