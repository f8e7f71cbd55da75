#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ibfilm/delta_kernels.hpp"
#include "ibfilm/geometry.hpp"

namespace ibfilm {

/// Dimensional inputs, SI units.
struct PhysicalParams {
    double tube_radius = 25e-6;
    double tube_length = 150e-6;      ///< domain length along the flow
    double fluid_viscosity = 1e-3;
    double fluid_density = 998.0;
    double max_inflow_speed = 1e-3;
    double biofilm_extra_density = 0.0;
    double biofilm_max_viscosity = 1e-3;
    double F_max = 5e-6;
    double cell_radius = 1e-6;        ///< spreading support omega
    double connection_distance = 2.8e-6;
    double d0 = 1.59e-6;              ///< target node spacing
};

struct ScalingParams {
    double L = 50e-6;
    double u0 = 1e-3;
    double T = 1.0;
    double p_ref = 0.8144;            ///< p0 - pL
    double rho0 = 998.0;
    double mu0 = 1e-3;
    double f0 = 1.0;
};

/// Dimensionless groups and derived quantities.
struct Nondimensional {
    double sigma = 0.0;
    double euler = 0.0;
    double reynolds = 0.0;
    double omega = 0.0;
    double mu_max = 1.0;
    double mu_out = 1.0;
    double rho_b = 0.0;
    double force_prefactor = 0.0;     ///< L f0 / (rho0 u0^2)
    double F_max = 0.0;               ///< F_max / (f0 L^D)
    double d_c = 0.0;
    double d0 = 0.0;
    double u_max = 0.0;
};

/// sigma = L/(T u0), eps = p_ref/(rho0 u0^2), Re = rho0 L u0/mu0 and the
/// scaled material parameters. Throws on nonpositive scales.
Nondimensional nondimensionalize(const PhysicalParams& phys, const ScalingParams& scale, int dim);
/// Inverse of nondimensionalize for the scaled physical quantities.
PhysicalParams redimensionalize(const Nondimensional& nd, const ScalingParams& scale, int dim,
                                const PhysicalParams& base);

enum class Projection { Incremental, Standard };
enum class ViscousForm { Auto, Coupled, Uncoupled };

struct SolverSettings {
    double tol = 1e-9;
    int levels = 6;
    int nu1 = 2;
    int nu2 = 2;
    int max_cycles = 200;
    int coarse_sweeps = 50;
    std::vector<double> gamma;        ///< empty: default rule
    Projection projection = Projection::Standard;
    ViscousForm viscous_form = ViscousForm::Auto;
    double ke_factor = 3.0;
    double C1 = 1.0;                  ///< advisory dt <= C1 h
    double C2 = 1e-6;                 ///< advisory dt <= C2 / F_max (F_max in N)
};

struct Scenario {
    int dim = 2;
    PhysicalParams phys;
    ScalingParams scale;
    bool p_ref_given = false;
    std::optional<double> sigma_override, euler_override, reynolds_override;
    Nondimensional nd;
    std::array<double, 3> extent{0, 0, 0};
    double h = 1.0 / 128;
    double dt = 1e-4;
    double t_end = 0.01;
    int output_every = 0;             ///< 0: only the final snapshot
    double break_factor = 2.0;
    Kernel kernel = Kernel::Phi1;
    std::string geometry = "mushroom";  ///< "mushroom", "none", or a cell CSV path
    std::uint64_t seed = 1;
    MushroomSpec mushroom;
    std::optional<double> biofilm_volume;  ///< m^D
    double init_fraction = 1.0;       ///< initial velocity as a fraction of the laminar profile
    SolverSettings solver;
    std::vector<std::string> warnings;

    /// Nondimensional half-height (2D) or side length (3D) of the duct.
    double duct_size() const;
    /// Laminar pressure slope in p* per unit nondimensional length.
    double kappa() const;
    /// Pressure slope in the units of the laminar profile formulas:
    /// u'' = kappa_flow / mu with mu the nondimensional viscosity.
    double kappa_flow() const { return nd.euler * nd.reynolds * kappa(); }
    /// Coarse-level gamma actually used for level l >= 1.
    std::vector<double> gamma_table() const;
    std::string fingerprint() const;
};

/// Reads and validates an INI-style scenario file. Unknown keys are rejected.
Scenario load_scenario(const std::string& path);
/// Parses scenario text (same format) for tests and presets.
Scenario parse_scenario(const std::string& text, const std::string& origin = "<string>");
/// Recomputes derived quantities after a field was changed programmatically.
void finalize_scenario(Scenario& s);

/// Accepts plain numbers and fractions such as "1/128".
double parse_number(const std::string& text, const std::string& key);

/// Sum appearing in the centre value of the square-duct series.
double duct_center_factor(int n_max = 399);

}  // namespace ibfilm
