#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ibfilm/grid.hpp"

namespace ibfilm {

struct Spring {
    int s = 0;  ///< s < k
    int k = 0;
    double rest = 0.0;
    double K = 0.0;  ///< stiffness, K * rest = F_max
    bool alive = true;
};

struct Biofilm {
    int dim = 2;
    std::vector<Point> X;
    std::vector<Spring> springs;
    double d0 = 0.0;
    double F_max = 0.0;
    double break_factor = 2.0;
    /// Nodes in the attachment layer; components without any of them are fragments.
    std::vector<bool> base;

    std::size_t size() const { return X.size(); }
    std::size_t alive_springs() const;
};

/// Total elastic force per node from the alive springs. Each node's
/// contributions are summed by pairwise reduction in spring order.
/// Throws "degenerate spring" on a zero-length alive spring.
std::vector<Point> compute_forces(const Biofilm& b, std::span<const Point> X);

/// Kills every alive spring stretched beyond break_factor times its rest
/// length (strictly). Returns the number broken by this call.
std::size_t apply_breaking(Biofilm& b, std::span<const Point> X);

/// X + (dt / sigma) U.
std::vector<Point> advect_nodes(std::span<const Point> X, std::span<const Point> U, double dt, double sigma);

/// Index of the first node outside the closed domain box, or -1.
long first_outside(std::span<const Point> X, const Grid& g);

/// Sum of the node forces.
Point net_force(std::span<const Point> F, int dim);

struct Fragment {
    std::vector<int> nodes;
    Point centroid{0.0, 0.0, 0.0};
};

/// Connected components of the alive-spring graph that contain no base node.
std::vector<Fragment> fragments(const Biofilm& b, std::span<const Point> X);

}  // namespace ibfilm
