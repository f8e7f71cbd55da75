#include "ibfilm/boundary.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ibfilm {

double laminar_profile_2d(double y, double a, double kappa, double mu) {
    return kappa / (2.0 * mu) * (y * y - 2.0 * a * y);
}

double laminar_profile_3d(double x, double y, double a, double kappa, double mu, int n_max) {
    if (n_max < 1) throw std::invalid_argument("laminar_profile_3d: n_max must be at least 1");
    const double pi = std::numbers::pi;
    double sum = 0.0;
    for (int n = 1; n <= n_max; n += 2) {
        const double sx = std::sin(n * pi * x / a);
        for (int m = 1; m <= n_max; m += 2)
            sum += sx * std::sin(m * pi * y / a) /
                   (static_cast<double>(n) * m * (static_cast<double>(n) * n + static_cast<double>(m) * m));
    }
    return -16.0 * kappa * a * a / (mu * std::pow(pi, 4)) * sum;
}

Field laminar_velocity(const Grid& g, const Scenario& s, double fraction, int n_max) {
    Field u(g, g.dim());
    const double kf = s.kappa_flow(), mu = s.nd.mu_out, a = s.duct_size();
    if (g.dim() == 2) {
        for (int j = 0; j < g.points(1); ++j) {
            const double v = fraction * laminar_profile_2d(g.coord(j), a, kf, mu);
            for (int i = 0; i < g.points(0); ++i) u(0, g.index(i, j)) = v;
        }
        return u;
    }
    // The profile only depends on the cross-section and has its symmetries.
    const int nx = g.points(0), ny = g.points(1);
    std::vector<double> cache(static_cast<std::size_t>(nx) * ny, -1.0);
    auto value = [&](int i, int j) {
        if (i == 0 || j == 0 || i == nx - 1 || j == ny - 1) return 0.0;
        const int ii = std::min(i, nx - 1 - i), jj = std::min(j, ny - 1 - j);
        const int lo = std::min(ii, jj), hi = std::max(ii, jj);
        double& c = cache[static_cast<std::size_t>(hi) * nx + lo];
        if (c < 0.0) c = laminar_profile_3d(g.coord(lo), g.coord(hi), a, kf, mu, n_max);
        return c;
    };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double v = fraction * value(i, j);
            for (int k = 0; k < g.points(2); ++k) u(2, g.index(i, j, k)) = v;
        }
    return u;
}

Field laminar_pressure(const Grid& g, const Scenario& s) {
    Field p(g, 1);
    const int fa = g.flow_axis();
    const double kappa = s.kappa();
    for (std::size_t i = 0; i < g.size(); ++i) p(0, i) = 1.0 + kappa * g.coord(g.coords(i)[fa]);
    return p;
}

BoundaryData make_boundary_data(const Grid& g, const Scenario& s) {
    return {laminar_velocity(g, s), laminar_pressure(g, s)};
}

bool velocity_fixed(const Grid& g, const std::array<int, 3>& c) {
    for (int a = 0; a < g.dim(); ++a) {
        if (c[a] == 0 && g.face(a, 0) != BoundaryKind::Outflow) return true;
        if (c[a] == g.intervals(a) && g.face(a, 1) != BoundaryKind::Outflow) return true;
    }
    return false;
}

bool pressure_fixed(const Grid& g, const std::array<int, 3>& c) {
    for (int a = 0; a < g.dim(); ++a) {
        if (c[a] == 0 && g.face(a, 0) != BoundaryKind::WallBottom) return true;
        if (c[a] == g.intervals(a) && g.face(a, 1) != BoundaryKind::WallBottom) return true;
    }
    return false;
}

void apply_velocity_dirichlet(Field& u, const BoundaryData& bc) {
    const Grid& g = u.grid();
    const int fa = g.flow_axis();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto c = g.coords(i);
        if (!velocity_fixed(g, c)) continue;
        bool wall = false;
        for (int a = 0; a < g.dim(); ++a)
            if (a != fa && (c[a] == 0 || c[a] == g.intervals(a))) wall = true;
        for (int k = 0; k < g.dim(); ++k) u(k, i) = wall ? 0.0 : bc.u_in(k, i);
    }
}

void apply_boundary_conditions(FlowState& st, const BoundaryData& bc) {
    const Grid& g = st.u.grid();
    const int fa = g.flow_axis();
    const int N = g.intervals(fa);
    apply_velocity_dirichlet(st.u, bc);
    // Discrete Neumann outflow: copy the upstream plane.
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto c = g.coords(i);
        if (c[fa] != N || velocity_fixed(g, c)) continue;
        c[fa] = N - 1;
        const std::size_t up = g.index(c[0], c[1], c[2]);
        for (int k = 0; k < g.dim(); ++k) st.u(k, i) = st.u(k, up);
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        auto c = g.coords(i);
        if (pressure_fixed(g, c)) {
            st.p(0, i) = bc.p_lam(0, i);
        } else if (c[1] == 0) {
            c[1] = 1;
            st.p(0, i) = st.p(0, g.index(c[0], c[1], c[2]));
        }
    }
}

}  // namespace ibfilm
