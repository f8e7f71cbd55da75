#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ibfilm/grid.hpp"
#include "ibfilm/springs.hpp"

namespace ibfilm {

struct CellCloud {
    int dim = 2;
    std::vector<Point> points;  ///< nondimensional coordinates
    std::string source;
};

/// Reads a CSV with header `x,y` or `x,y,z` in microns and scales by 1/L.
/// `extent` is the nondimensional domain size; points must lie strictly inside.
CellCloud load_cells(const std::string& path, int dim, double L, const std::array<double, 3>& extent);

/// Writes the cloud back in microns with a header row.
void save_cells(const std::string& path, const CellCloud& cloud, double L);

/// Stalk-and-cap silhouette in microns, measured from the attachment point
/// on the bottom wall. In 3D the profile is revolved about the vertical axis.
struct MushroomSpec {
    double foot_width = 4.0;
    double foot_height = 1.5;
    double waist_width = 2.0;
    double stalk_top = 4.5;     ///< height where the cap starts
    double cap_width = 8.0;
    double height = 8.5;        ///< total height
    double jitter = 0.3;        ///< fraction of d0
    double center_flow = 1.5;   ///< nondimensional axis position along the flow direction
    double center_span = 0.5;   ///< 3D only, axis position along x
};

/// True if the silhouette contains the point (r = horizontal distance from
/// the axis, y = height above the wall), both in microns.
bool mushroom_contains(const MushroomSpec& m, double r, double y);

/// Jittered square/cubic lattice fill of the silhouette with spacing d0_um.
/// The bottom lattice row is flagged as the attachment layer (returned via base).
CellCloud generate_mushroom(std::uint64_t seed, int dim, const MushroomSpec& m, double d0_um, double L,
                            const std::array<double, 3>& extent, std::vector<bool>* base = nullptr);

struct ConnectivityStats {
    std::size_t coincident_pairs = 0;
    std::size_t isolated_nodes = 0;
};

/// Spring between every pair closer than d_c (and not coincident), rest
/// length the initial distance and K = F_max / rest. Uses cell lists.
Biofilm build_connectivity(const CellCloud& cloud, double d_c, double F_max, double break_factor = 2.0,
                           ConnectivityStats* stats = nullptr);
/// Same result by exhaustive pair check.
Biofilm build_connectivity_bruteforce(const CellCloud& cloud, double d_c, double F_max, double break_factor = 2.0);

/// (volume / eta)^(1/D).
double compute_d0(std::size_t eta, double volume, int dim);

/// Number of grid nodes within `radius` of some cloud point, times h^D.
double estimate_volume(const CellCloud& cloud, const Grid& g, double radius);

/// Mean distance from each point to its nearest neighbour.
double mean_nearest_neighbor(const CellCloud& cloud);

}  // namespace ibfilm
