#pragma once

#include <span>
#include <vector>

#include "ibfilm/delta_kernels.hpp"
#include "ibfilm/grid.hpp"

namespace ibfilm {

struct CouplingConfig {
    double omega = 0.02;          ///< spreading support scale
    Kernel kernel = Kernel::Phi1;
    double d0 = 0.0;              ///< Lagrangian volume element edge
    double rho_b = 0.0;           ///< extra density over the fluid (nondimensional)
    double mu_max = 1.0;          ///< peak viscosity (nondimensional)
    double mu_out = 1.0;          ///< ambient viscosity (nondimensional)
};

/// f(x) = sum_s F(s) delta_omega(x - X(s)); no renormalisation at walls.
Field spread_force(std::span<const Point> X, std::span<const Point> F, const Grid& g, const CouplingConfig& cfg);

/// rho(x) = 1 + sum_s rho_b delta_omega(x - X(s)) d0^D.
Field spread_density(std::span<const Point> X, const Grid& g, const CouplingConfig& cfg);

/// U(s) = sum_x u(x) delta_h(x - X(s)) h^D. Where the stencil is cut by the
/// domain boundary the weights are renormalised by their partial sum.
std::vector<Point> interpolate_velocity(const Field& u, std::span<const Point> X, Kernel kernel);

/// mu(x) = max_s [(2 omega)^D (mu_max - mu_out) delta_omega(x - X(s)) + mu_out].
Field viscosity_field(std::span<const Point> X, const Grid& g, const CouplingConfig& cfg);

/// gamma times the full-weighting restriction of mu.
Field coarse_viscosity(const Field& mu_fine, double gamma);

}  // namespace ibfilm
