#include "ibfilm/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ibfilm/multigrid.hpp"

namespace ibfilm {

namespace {

// 1D weights phi((x_j - X)/scale)/scale for the lattice points j in the
// kernel support, clipped to [0, n].
struct AxisWeights {
    int first = 0;
    int count = 0;
    double w[64];
    bool clipped = false;
};

AxisWeights axis_weights(Kernel k, double X, double scale, double h, int n) {
    AxisWeights a;
    const double reach = kKernelSupport * scale;
    int lo = static_cast<int>(std::ceil((X - reach) / h));
    int hi = static_cast<int>(std::floor((X + reach) / h));
    if (hi - lo + 1 > 64) throw std::invalid_argument("kernel support spans too many grid points (omega/h too large)");
    if (lo < 0) {
        lo = 0;
        a.clipped = true;
    }
    if (hi > n) {
        hi = n;
        a.clipped = true;
    }
    a.first = lo;
    for (int j = lo; j <= hi; ++j) a.w[a.count++] = phi(k, (j * h - X) / scale) / scale;
    return a;
}

template <class Fn>
void for_support(const Grid& g, const Point& X, double scale, Kernel k, Fn&& fn) {
    std::array<AxisWeights, 3> ax;
    for (int a = 0; a < 3; ++a) {
        if (a < g.dim()) {
            ax[a] = axis_weights(k, X[a], scale, g.h(), g.intervals(a));
        } else {
            ax[a].first = 0;
            ax[a].count = 1;
            ax[a].w[0] = 1.0;
        }
    }
    for (int kk = 0; kk < ax[2].count; ++kk)
        for (int jj = 0; jj < ax[1].count; ++jj) {
            const double wjk = ax[1].w[jj] * ax[2].w[kk];
            if (wjk == 0.0) continue;
            for (int ii = 0; ii < ax[0].count; ++ii) {
                const double w = ax[0].w[ii] * wjk;
                if (w == 0.0) continue;
                fn(g.index(ax[0].first + ii, ax[1].first + jj, ax[2].first + kk), w);
            }
        }
}

}  // namespace

Field spread_force(std::span<const Point> X, std::span<const Point> F, const Grid& g, const CouplingConfig& cfg) {
    if (X.size() != F.size()) throw std::invalid_argument("spread_force: position/force count mismatch");
    Field f(g, g.dim());
    for (std::size_t s = 0; s < X.size(); ++s)
        for_support(g, X[s], cfg.omega, cfg.kernel, [&](std::size_t idx, double w) {
            for (int c = 0; c < g.dim(); ++c) f(c, idx) += F[s][c] * w;
        });
    return f;
}

Field spread_density(std::span<const Point> X, const Grid& g, const CouplingConfig& cfg) {
    if (cfg.rho_b < 0.0) throw std::invalid_argument("biofilm extra density must be non-negative");
    Field rho(g, 1, 1.0);
    if (cfg.rho_b == 0.0) return rho;
    const double m = cfg.rho_b * std::pow(cfg.d0, g.dim());
    for (const Point& x : X)
        for_support(g, x, cfg.omega, cfg.kernel, [&](std::size_t idx, double w) { rho(0, idx) += m * w; });
    return rho;
}

std::vector<Point> interpolate_velocity(const Field& u, std::span<const Point> X, Kernel kernel) {
    const Grid& g = u.grid();
    const double hD = std::pow(g.h(), g.dim());
    std::vector<Point> U(X.size(), Point{0.0, 0.0, 0.0});
    for (std::size_t s = 0; s < X.size(); ++s) {
        bool clipped = false;
        for (int a = 0; a < g.dim(); ++a) {
            const double reach = kKernelSupport * g.h();
            if (X[s][a] - reach < 0.0 || X[s][a] + reach > g.extent(a)) clipped = true;
        }
        double wsum = 0.0;
        Point acc{0.0, 0.0, 0.0};
        for_support(g, X[s], g.h(), kernel, [&](std::size_t idx, double w) {
            const double wh = w * hD;
            wsum += wh;
            for (int c = 0; c < g.dim(); ++c) acc[c] += u(c, idx) * wh;
        });
        if (clipped && wsum > 0.0)
            for (int c = 0; c < g.dim(); ++c) acc[c] /= wsum;
        U[s] = acc;
    }
    return U;
}

Field viscosity_field(std::span<const Point> X, const Grid& g, const CouplingConfig& cfg) {
    if (!(cfg.mu_out > 0.0) || cfg.mu_max < cfg.mu_out)
        throw std::invalid_argument("viscosity bounds must satisfy mu_max >= mu_out > 0");
    Field mu(g, 1, cfg.mu_out);
    const double amp = std::pow(2.0 * cfg.omega, g.dim()) * (cfg.mu_max - cfg.mu_out);
    if (amp == 0.0) return mu;
    for (const Point& x : X)
        for_support(g, x, cfg.omega, cfg.kernel, [&](std::size_t idx, double w) {
            mu(0, idx) = std::max(mu(0, idx), amp * w + cfg.mu_out);
        });
    return mu;
}

Field coarse_viscosity(const Field& mu_fine, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
    Field c = restrict_full_weighting(mu_fine);
    for (double& v : c.data()) v *= gamma;
    return c;
}

}  // namespace ibfilm
