#pragma once

#include <memory>

#include "ibfilm/boundary.hpp"
#include "ibfilm/multigrid.hpp"
#include "ibfilm/operators.hpp"
#include "ibfilm/pressure.hpp"
#include "ibfilm/scenario.hpp"

namespace ibfilm {

struct StepStats {
    SolveStats momentum;
    SolveStats pressure;
    double divergence = 0.0;      ///< max interior |D0 . u| after the correction
    double velocity_max = 0.0;    ///< max |u| after the correction
    double kinetic_energy = 0.0;  ///< ||u||_2^2
};

/// Central difference along k, taken one node inside on faces normal to k.
double boundary_gradient(const Field& p, int k, const std::array<int, 3>& c);

/// Projection-method Navier-Stokes solver on a channel or duct.
class FlowSolver {
public:
    explicit FlowSolver(const Scenario& s);

    const Scenario& scenario() const { return s_; }
    const Grid& grid() const { return grid_; }
    const BoundaryData& boundary() const { return bc_; }
    bool coupled() const { return coupled_; }

    /// Laminar velocity scaled by `fraction` with boundary values applied,
    /// laminar pressure, rho = 1, mu = mu_out.
    FlowState initial_state(double fraction) const;

    /// Implicit momentum predictor. f is the spread force density (may be
    /// empty for no forcing). Records the result in st.u_pred.
    Field momentum_predict(FlowState& st, const Field& f, SolveStats* stats = nullptr) const;

    /// Right-hand side -(sigma / (eps dt)) D0 . u~ at the pressure unknowns.
    Field pressure_rhs(const Field& u_tilde) const;

    /// Solves for the pressure update (incremental projection) or the new
    /// pressure (standard projection), corrects u~ in place and updates st.p.
    SolveStats project(Field& u_tilde, FlowState& st) const;

    /// u <- u - (eps dt / (sigma rho)) M G q.
    void velocity_correct(Field& u, const Field& q, const Field& rho) const;

    /// predict, project, correct; advances time. st.rho and st.mu are the
    /// step-n coefficients.
    StepStats step(FlowState& st, const Field& f) const;

    /// Max over interior nodes of the wide-stencil divergence.
    double divergence_norm(const Field& u) const;
    /// ||u||_2^2 of the laminar profile.
    double laminar_kinetic_energy() const { return laminar_ke_; }

private:
    MultigridOptions options(bool momentum) const;
    void refresh_pressure(const Field& rho) const;
    void refresh_momentum(const Field& rho, const Field& mu) const;

    Scenario s_;
    Grid grid_;
    BoundaryData bc_;
    bool coupled_;
    BoxShape mshape_;
    double laminar_ke_ = 0.0;
    mutable std::unique_ptr<PressureSolver> psolver_;
    mutable std::unique_ptr<Multigrid> msolver_;
    mutable std::vector<double> rho_cache_, mrho_cache_, mmu_cache_;
};

}  // namespace ibfilm
