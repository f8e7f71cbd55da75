#include <doctest.h>

#include <cmath>
#include <random>

#include "ibfilm/coupling.hpp"
#include "ibfilm/multigrid.hpp"

using namespace ibfilm;

namespace {

CouplingConfig config(double omega) {
    CouplingConfig c;
    c.omega = omega;
    c.kernel = Kernel::Phi1;
    c.d0 = omega;
    c.rho_b = 1.0;
    c.mu_max = 500.0;
    c.mu_out = 1.0;
    return c;
}

double field_sum(const Field& f, int comp, double weight) {
    double s = 0.0;
    for (double v : f.comp(comp)) s += v * weight;
    return s;
}

const Grid g2(2, {1.0, 1.0, 0.0}, 1.0 / 100);

}  // namespace

TEST_CASE("spread_force") {
    const CouplingConfig cfg = config(1.0 / 50);
    const std::vector<Point> X{{0.5, 0.5, 0.0}};
    const Field f = spread_force(X, std::vector<Point>{{1.0, 0.0, 0.0}}, g2, cfg);
    // phi1(0) = 1/2 per axis and a 1/omega scale per axis.
    CHECK(f(0, g2.index(50, 50)) == doctest::Approx(625.0).epsilon(1e-12));
    CHECK(f(1, g2.index(50, 50)) == 0.0);
    // Support is 2 omega = 4h: nothing at 4h, something at 3h.
    CHECK(f(0, g2.index(54, 50)) == 0.0);
    CHECK(f(0, g2.index(53, 50)) > 0.0);

    CHECK(grid_pnorm(spread_force(X, std::vector<Point>{{0.0, 0.0, 0.0}}, g2, cfg), INFINITY) == 0.0);

    // Three collinear nodes with forces summing to zero.
    const std::vector<Point> Y{{0.40, 0.503, 0.0}, {0.4171, 0.503, 0.0}, {0.4342, 0.503, 0.0}};
    const std::vector<Point> F{{5.0, 1.0, 0.0}, {-8.0, -2.5, 0.0}, {3.0, 1.5, 0.0}};
    const Field fy = spread_force(Y, F, g2, cfg);
    const double h2 = g2.h() * g2.h();
    const double bound = Y.size() * 8.0 * 2.0 * epsilon_unity(Kernel::Phi1, cfg.omega, g2.h()) + 1e-12;
    CHECK(std::abs(field_sum(fy, 0, h2)) <= bound);
    CHECK(std::abs(field_sum(fy, 1, h2)) <= bound);
}

TEST_CASE("force spreading conservation is bounded by the unity error") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> pos(0.3, 0.7), force(-1.0, 1.0);
    for (Kernel k : {Kernel::Phi1, Kernel::Phi2})
        for (double omega : {1.0 / 50, 1.0 / 73}) {
            CouplingConfig cfg = config(omega);
            cfg.kernel = k;
            std::vector<Point> X, F;
            double fmax = 0.0;
            Point total{0, 0, 0};
            for (int s = 0; s < 20; ++s) {
                X.push_back({pos(rng), pos(rng), 0.0});
                F.push_back({force(rng), force(rng), 0.0});
                fmax = std::max(fmax, std::hypot(F.back()[0], F.back()[1]));
                for (int a = 0; a < 2; ++a) total[a] += F.back()[a];
            }
            const Field f = spread_force(X, F, g2, cfg);
            // The 2D unity error of a tensor product is at most (1 + e)^2 - 1.
            const double e1 = epsilon_unity(k, omega, g2.h());
            const double bound = X.size() * fmax * ((1 + e1) * (1 + e1) - 1) + 1e-12;
            for (int a = 0; a < 2; ++a) CHECK(std::abs(field_sum(f, a, g2.h() * g2.h()) - total[a]) <= bound);
        }
}

TEST_CASE("spread_density") {
    CouplingConfig cfg = config(1.0 / 50);
    const std::vector<Point> X{{0.5, 0.5, 0.0}};
    const Field rho = spread_density(X, g2, cfg);
    CHECK(rho(0, g2.index(50, 50)) == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(rho(0, g2.index(10, 10)) == 1.0);
    for (double v : rho.comp(0)) REQUIRE(v >= 1.0);

    cfg.rho_b = 0.0;
    for (double v : spread_density(X, g2, cfg).comp(0)) REQUIRE(v == 1.0);

    // Total added mass is rho_b d0^D per node on a commensurate lattice.
    cfg.rho_b = 2.0;
    cfg.d0 = 0.013;
    const std::vector<Point> Y{{0.31, 0.47, 0.0}, {0.6, 0.52, 0.0}};
    const Field r2 = spread_density(Y, g2, cfg);
    double mass = 0.0;
    for (double v : r2.comp(0)) mass += (v - 1.0) * g2.h() * g2.h();
    CHECK(mass == doctest::Approx(2 * 2.0 * 0.013 * 0.013).epsilon(1e-10));
}

TEST_CASE("viscosity_field") {
    CouplingConfig cfg = config(1.0 / 50);
    const std::vector<Point> X{{0.5, 0.5, 0.0}};
    const Field mu = viscosity_field(X, g2, cfg);
    CHECK(mu(0, g2.index(50, 50)) == doctest::Approx(500.0).epsilon(1e-12));
    CHECK(mu(0, g2.index(5, 5)) == 1.0);
    for (double v : mu.comp(0)) REQUIRE(v >= 1.0);

    // Two nearby nodes combine by max, so the peak is not exceeded.
    const std::vector<Point> two{{0.5, 0.5, 0.0}, {0.51, 0.5, 0.0}};
    const Field m2 = viscosity_field(two, g2, cfg);
    double peak = 0.0;
    for (double v : m2.comp(0)) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(500.0).epsilon(1e-12));
    const std::size_t mid = g2.index(50, 50);
    const double single_a = mu(0, mid);
    CHECK(m2(0, mid) == doctest::Approx(single_a));

    cfg.mu_max = cfg.mu_out = 3.0;
    for (double v : viscosity_field(two, g2, cfg).comp(0)) REQUIRE(v == 3.0);

    // 3D peak calibration: (2 omega)^3 (1/(2 omega))^3 = 1.
    const Grid g3(3, {0.4, 0.4, 0.4}, 1.0 / 40);
    CouplingConfig c3 = config(1.0 / 20);
    const Field m3 = viscosity_field(std::vector<Point>{{0.2, 0.2, 0.2}}, g3, c3);
    CHECK(m3(0, g3.index(8, 8, 8)) == doctest::Approx(500.0).epsilon(1e-12));
}

TEST_CASE("interpolate_velocity") {
    const Grid g = Grid::channel(2, {3.0, 1.0, 0.0}, 1.0 / 16);
    Field u(g, 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        u(0, i) = 1.5;
        u(1, i) = -0.25;
    }
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> px(0.0, 3.0), py(0.0, 1.0);
    std::vector<Point> X;
    for (int s = 0; s < 50; ++s) X.push_back({px(rng), py(rng), 0.0});
    X.push_back({0.0, 0.0, 0.0});  // corner: truncated and renormalised
    for (const Point& U : interpolate_velocity(u, X, Kernel::Phi1)) {
        CHECK(U[0] == doctest::Approx(1.5).epsilon(1e-13));
        CHECK(U[1] == doctest::Approx(-0.25).epsilon(1e-13));
    }
    for (const Point& U : interpolate_velocity(u, X, Kernel::Phi2)) {
        CHECK(U[0] == doctest::Approx(1.5).epsilon(1e-12));
    }

    // Linear field, nodes on and off lattice points away from the walls.
    Field l(g, 2);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto c = g.coords(i);
        l(0, i) = 2.0 * g.coord(c[0]) - g.coord(c[1]);
        l(1, i) = 0.5 + g.coord(c[1]);
    }
    const std::vector<Point> Y{{1.0, 0.5, 0.0}, {1.0 + 3.0 / 16, 0.25, 0.0}, {2.03, 0.61, 0.0}};
    const auto U = interpolate_velocity(l, Y, Kernel::Phi1);
    for (std::size_t s = 0; s < Y.size(); ++s) {
        CHECK(U[s][0] == doctest::Approx(2.0 * Y[s][0] - Y[s][1]).epsilon(1e-13));
        CHECK(U[s][1] == doctest::Approx(0.5 + Y[s][1]).epsilon(1e-13));
    }

    for (const Point& Z : interpolate_velocity(Field(g, 2), X, Kernel::Phi1)) CHECK(Z[0] == 0.0);
}

TEST_CASE("coarse_viscosity") {
    const Grid g(2, {1.0, 1.0, 0.0}, 1.0 / 16);
    const Field c1 = coarse_viscosity(Field(g, 1, 3.0), 1.0);
    for (double v : c1.comp(0)) REQUIRE(v == doctest::Approx(3.0));
    const Field c2 = coarse_viscosity(Field(g, 1, 2.0), 0.85);
    for (double v : c2.comp(0)) REQUIRE(v == doctest::Approx(1.7));
    CHECK(c2.grid().points(0) == 9);
    CHECK_THROWS(coarse_viscosity(Field(g, 1, 2.0), 0.0));
    CHECK_THROWS(coarse_viscosity(Field(g, 1, 2.0), 1.5));

    // Equal to gamma times the full-weighting restriction.
    const CouplingConfig cfg = config(1.0 / 8);
    const Field mu = viscosity_field(std::vector<Point>{{0.52, 0.47, 0.0}}, g, cfg);
    const Field r = restrict_full_weighting(mu), c = coarse_viscosity(mu, 0.7);
    for (std::size_t i = 0; i < r.size(); ++i) REQUIRE(c(0, i) == doctest::Approx(0.7 * r(0, i)));
}
