#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

#include "ibfilm/grid.hpp"

using namespace ibfilm;

namespace {

using Fn = std::function<double(double, double, double)>;

Field sample(const Grid& g, const std::vector<Fn>& fs) {
    Field f(g, static_cast<int>(fs.size()));
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto c = g.coords(idx);
        for (std::size_t k = 0; k < fs.size(); ++k)
            f(static_cast<int>(k), idx) = fs[k](g.coord(c[0]), g.coord(c[1]), g.coord(c[2]));
    }
    return f;
}

Field random_field(const Grid& g, int comps, unsigned seed, bool zero_boundary = false) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Field f(g, comps);
    for (int k = 0; k < comps; ++k)
        for (std::size_t i = 0; i < g.size(); ++i)
            f(k, i) = zero_boundary && g.on_boundary(g.coords(i)) ? 0.0 : u(rng);
    return f;
}

// Largest |f - expected| over active nodes.
double max_active_error(const Field& f, const Fn& expected) {
    const Grid& g = f.grid();
    double e = 0.0;
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const auto c = g.coords(idx);
        if (!g.active(c)) continue;
        e = std::max(e, std::abs(f(0, idx) - expected(g.coord(c[0]), g.coord(c[1]), g.coord(c[2]))));
    }
    return e;
}

double dot(const Field& a, const Field& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) s += a.data()[i] * b.data()[i];
    return s;
}

const Grid unit2(2, {1.0, 1.0, 0.0}, 1.0 / 16);

}  // namespace

TEST_CASE("grid shape and validation") {
    const Grid g(2, {3.0, 1.0, 0.0}, 1.0 / 8);
    CHECK(g.points(0) == 25);
    CHECK(g.points(1) == 9);
    CHECK(g.points(2) == 1);
    CHECK(g.size() == 225u);
    CHECK(g.index(3, 2) == 3u + 2u * 25u);
    CHECK(g.coords(g.index(7, 4))[0] == 7);
    CHECK_THROWS(Grid(2, {1.0, 1.0, 0.0}, 0.3));   // not a multiple of h
    CHECK_THROWS(Grid(2, {1.0, 1.0, 0.0}, 0.5));   // fewer than 5 points
    const Grid c = Grid::channel(3, {1.0, 1.0, 3.0}, 0.25);
    CHECK(c.flow_axis() == 2);
    CHECK(c.face(2, 0) == BoundaryKind::Inflow);
    CHECK(c.face(2, 1) == BoundaryKind::Outflow);
    CHECK(c.face(1, 0) == BoundaryKind::WallBottom);
}

TEST_CASE("laplacian") {
    CHECK(grid_pnorm(laplacian(Field(unit2, 1, 3.7)), INFINITY) == 0.0);

    const Field q = sample(unit2, {[](double x, double y, double) { return x * x + y * y; }});
    CHECK(max_active_error(laplacian(q), [](double, double, double) { return 4.0; }) < 1e-10);

    const Grid g(2, {1.0, 1.0, 0.0}, 1.0 / 64);
    const double pi = std::numbers::pi;
    const Field s = sample(g, {[&](double x, double, double) { return std::sin(pi * x); }});
    const double e = max_active_error(laplacian(s), [&](double x, double, double) { return -pi * pi * std::sin(pi * x); });
    CHECK(e < 0.01 * pi * pi);
    // Truncation error of the 3-point stencil is h^2 pi^4 / 12 at the peak.
    CHECK(e == doctest::Approx(pi * pi * pi * pi / (12.0 * 64 * 64)).epsilon(0.02));

    // Zero on the non-active boundary nodes.
    CHECK(laplacian(q)(0, unit2.index(0, 5)) == 0.0);
}

TEST_CASE("central difference") {
    CHECK(grid_pnorm(central_diff(Field(unit2, 1, -2.0), 0), INFINITY) == 0.0);
    const Field l = sample(unit2, {[](double x, double, double) { return 3.0 * x; }});
    CHECK(max_active_error(central_diff(l, 0), [](double, double, double) { return 3.0; }) < 1e-12);
    CHECK(max_active_error(central_diff(l, 1), [](double, double, double) { return 0.0; }) == 0.0);

    const Grid g(2, {1.0, 1.0, 0.0}, 1.0 / 128);
    const Field cube = sample(g, {[](double x, double, double) { return x * x * x; }});
    const double d = central_diff(cube, 0)(0, g.index(64, 10));
    // (f(x+h) - f(x-h)) / 2h = 3x^2 + h^2 for a cubic.
    CHECK(std::abs(d - 0.75) < 1e-4);
    CHECK(d == doctest::Approx(0.75 + 1.0 / (128.0 * 128.0)).epsilon(1e-12));
}

TEST_CASE("div_a_grad") {
    const Field f = random_field(unit2, 1, 7);
    const Field one(unit2, 1, 1.0);
    const Field lap = laplacian(f), dag = div_a_grad(one, f);
    double e = 0.0;
    for (std::size_t i = 0; i < unit2.size(); ++i) e = std::max(e, std::abs(lap(0, i) - dag(0, i)));
    CHECK(e < 1e-14 * 256 * 8);

    const Field x2 = sample(unit2, {[](double x, double, double) { return x * x; }});
    CHECK(max_active_error(div_a_grad(Field(unit2, 1, 2.0), x2), [](double, double, double) { return 4.0; }) < 1e-10);

    // a = 1 + x, f = x: the flux (1 + x_face) * 1 differences to exactly 1.
    const Field a = sample(unit2, {[](double x, double, double) { return 1.0 + x; }});
    const Field x1 = sample(unit2, {[](double x, double, double) { return x; }});
    CHECK(max_active_error(div_a_grad(a, x1), [](double, double, double) { return 1.0; }) < 1e-13 * 256);

    CHECK_THROWS_AS(div_a_grad(Field(unit2, 1, 0.0), f), std::invalid_argument);
    Field neg(unit2, 1, 1.0);
    neg(0, 17) = -1.0;
    CHECK_THROWS_AS(div_a_grad(neg, f), std::invalid_argument);
}

TEST_CASE("div_a_partialT") {
    const Field c = sample(unit2, {[](double, double, double) { return 2.0; }, [](double, double, double) { return -1.0; }});
    const Field a = sample(unit2, {[](double x, double y, double) { return 1.0 + x * y; }});
    CHECK(grid_pnorm(div_a_partialT(a, c, 0), INFINITY) == 0.0);
    CHECK(grid_pnorm(div_a_partialT(a, c, 1), INFINITY) == 0.0);
    CHECK_THROWS_AS(div_a_partialT(Field(unit2, 1, -1.0), c, 0), std::invalid_argument);

    // Divergence-free u = (x^2, -2xy): the transpose term vanishes, so the
    // combined viscous term reduces to the Laplacian of each component.
    const Field u = sample(unit2, {[](double x, double, double) { return x * x; },
                                   [](double x, double y, double) { return -2.0 * x * y; }});
    CHECK(grid_pnorm_active(divergence(u), INFINITY) < 1e-11);
    const Field one(unit2, 1, 1.0);
    for (int k = 0; k < 2; ++k) {
        const Field combined = div_a_grad(one, u, k);
        const Field t = div_a_partialT(one, u, k);
        const Field lap = laplacian(u, k);
        double e = 0.0;
        for (std::size_t i = 0; i < unit2.size(); ++i) e = std::max(e, std::abs(combined(0, i) + t(0, i) - lap(0, i)));
        CHECK(e < 1e-10);
    }

    // Linear in a constant coefficient.
    const Field r = random_field(unit2, 2, 11);
    const Field t1 = div_a_partialT(one, r, 0), t3 = div_a_partialT(Field(unit2, 1, 3.0), r, 0);
    for (std::size_t i = 0; i < unit2.size(); ++i) REQUIRE(t3(0, i) == doctest::Approx(3.0 * t1(0, i)).epsilon(1e-12));
}

TEST_CASE("operators are linear") {
    const Grid g(3, {1.0, 1.0, 1.0}, 1.0 / 8);
    const Field f = random_field(g, 3, 1), h = random_field(g, 3, 2);
    const Field a = sample(g, {[](double x, double y, double z) { return 1.0 + x + 0.5 * y * z; }});
    const double alpha = 0.7, beta = -1.3;
    Field comb(g, 3);
    for (std::size_t i = 0; i < comb.data().size(); ++i) comb.data()[i] = alpha * f.data()[i] + beta * h.data()[i];
    const std::vector<std::function<Field(const Field&)>> ops{
        [](const Field& v) { return laplacian(v, 1); },
        [](const Field& v) { return central_diff(v, 2, 0); },
        [&](const Field& v) { return div_a_grad(a, v, 2); },
        [&](const Field& v) { return div_a_partialT(a, v, 1); },
        [](const Field& v) { return divergence(v); },
    };
    for (const auto& op : ops) {
        const Field l = op(comb), rf = op(f), rh = op(h);
        double e = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            e = std::max(e, std::abs(l(0, i) - alpha * rf(0, i) - beta * rh(0, i)));
            scale = std::max(scale, std::abs(l(0, i)));
        }
        CHECK(e <= 1e-13 * std::max(1.0, scale));
    }
}

TEST_CASE("div_a_grad is symmetric negative semidefinite") {
    const Grid g(2, {1.0, 1.0, 0.0}, 1.0 / 32);
    const Field a = sample(g, {[](double x, double y, double) { return 1.0 + std::sin(3 * x) * std::sin(3 * x) + y; }});
    for (unsigned seed = 0; seed < 5; ++seed) {
        const Field f = random_field(g, 1, 100 + seed, true), h = random_field(g, 1, 200 + seed, true);
        const double fh = dot(f, div_a_grad(a, h)), hf = dot(div_a_grad(a, f), h);
        CHECK(std::abs(fh - hf) <= 1e-10 * std::abs(fh) + 1e-10);
        CHECK(dot(f, div_a_grad(a, f)) < 0.0);
    }
}

TEST_CASE("stencils converge at second order") {
    const double pi = std::numbers::pi;
    auto errs = [&](int n) {
        const Grid g(2, {1.0, 1.0, 0.0}, 1.0 / n);
        const Field f = sample(g, {[&](double x, double y, double) { return std::sin(pi * x) * std::cos(pi * y); }});
        const Field a = sample(g, {[](double x, double y, double) { return 2.0 + x * y; }});
        // d/dx((2 + xy) pi cos(pi x) cos(pi y)) + d/dy(-(2 + xy) pi sin(pi x) sin(pi y))
        const Fn dag = [&](double x, double y, double) {
            const double s = std::sin(pi * x), c = std::cos(pi * x), sy = std::sin(pi * y), cy = std::cos(pi * y);
            return y * pi * c * cy - (2 + x * y) * pi * pi * s * cy - x * pi * s * sy - (2 + x * y) * pi * pi * s * cy;
        };
        return std::array<double, 3>{
            max_active_error(laplacian(f), [&](double x, double y, double) {
                return -2 * pi * pi * std::sin(pi * x) * std::cos(pi * y);
            }),
            max_active_error(central_diff(f, 0), [&](double x, double y, double) {
                return pi * std::cos(pi * x) * std::cos(pi * y);
            }),
            max_active_error(div_a_grad(a, f), dag)};
    };
    const auto c = errs(16), f = errs(32);
    for (int k = 0; k < 3; ++k) CHECK(std::log2(c[k] / f[k]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("norms") {
    for (double h : {1.0 / 4, 1.0 / 16, 1.0 / 64}) {
        const Grid g(2, {1.0, 1.0, 0.0}, h);
        const Field e = sample(g, {[](double, double, double) { return 1.0; }, [](double, double, double) { return 0.0; }});
        CHECK(grid_pnorm(e, 2.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(grid_pnorm(e, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(grid_pnorm(e, INFINITY) == 1.0);
    }
    Field spike(unit2, 1);
    spike(0, unit2.index(3, 9)) = -2.5;
    CHECK(grid_pnorm(spike, INFINITY) == 2.5);
    // Interior node: weight h^2.
    CHECK(grid_pnorm(spike, 2.0) == doctest::Approx(2.5 / 16));

    const std::vector<Point> X{{3.0, 4.0, 0.0}};
    CHECK(lagrangian_pnorm(X, INFINITY, 1.0, 2) == 5.0);
    CHECK(lagrangian_pnorm(X, 2.0, 0.5, 2) == doctest::Approx(5.0 * 0.5));
    CHECK(lagrangian_pnorm(X, 1.0, 0.5, 3) == doctest::Approx(5.0 * 0.125));
    CHECK_THROWS(grid_pnorm(spike, 3.0));
}
