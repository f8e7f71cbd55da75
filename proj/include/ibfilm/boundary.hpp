#pragma once

#include "ibfilm/grid.hpp"
#include "ibfilm/scenario.hpp"

namespace ibfilm {

/// u1(y) = kappa / (2 mu) (y^2 - 2 a y) on 0 <= y <= 2a.
double laminar_profile_2d(double y, double a, double kappa, double mu);

/// Truncated square-duct series on [0, a]^2 over odd n, m <= n_max.
double laminar_profile_3d(double x, double y, double a, double kappa, double mu, int n_max = 199);

struct FlowState {
    Field u, p, rho, mu;
    Field u_pred;  ///< last intermediate velocity, the predictor's initial guess
    double t = 0.0;
    long step = 0;
};

/// Exact laminar velocity at every node, scaled by `fraction`.
Field laminar_velocity(const Grid& g, const Scenario& s, double fraction = 1.0, int n_max = 199);
/// Laminar pressure p* = 1 + kappa* x_flow.
Field laminar_pressure(const Grid& g, const Scenario& s);

/// Boundary data shared by all steps: laminar inflow velocity and laminar
/// pressure values for the Dirichlet pressure faces.
struct BoundaryData {
    Field u_in;
    Field p_lam;
};
BoundaryData make_boundary_data(const Grid& g, const Scenario& s);

/// True where the velocity is prescribed (inflow face and walls).
bool velocity_fixed(const Grid& g, const std::array<int, 3>& c);
/// True where the pressure is prescribed (every face except the bottom wall,
/// bottom-wall nodes shared with another face included).
bool pressure_fixed(const Grid& g, const std::array<int, 3>& c);

/// Velocity: laminar inflow, zero on walls, outflow plane copied from its
/// upstream neighbour. Pressure: laminar values on Dirichlet faces, bottom
/// wall copied from the row above.
void apply_boundary_conditions(FlowState& st, const BoundaryData& bc);
/// Only the Dirichlet velocity values.
void apply_velocity_dirichlet(Field& u, const BoundaryData& bc);

}  // namespace ibfilm
