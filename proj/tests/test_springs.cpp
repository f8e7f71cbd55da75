#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "ibfilm/springs.hpp"

using namespace ibfilm;

namespace {

Biofilm pair(double rest, double K) {
    Biofilm b;
    b.X = {{0.0, 0.0, 0.0}, {rest, 0.0, 0.0}};
    b.springs = {{0, 1, rest, K, true}};
    b.F_max = K * rest;
    return b;
}

}  // namespace

TEST_CASE("spring forces") {
    Biofilm b = pair(1.0, 2.0);
    auto F = compute_forces(b, b.X);
    CHECK(F[0] == Point{0.0, 0.0, 0.0});
    CHECK(F[1] == Point{0.0, 0.0, 0.0});

    // r = 1, d = 1.5, K = 2: tension 1 pulling the nodes together.
    std::vector<Point> X{{0.0, 0.0, 0.0}, {1.5, 0.0, 0.0}};
    F = compute_forces(b, X);
    CHECK(F[0][0] == doctest::Approx(1.0));
    CHECK(F[1][0] == doctest::Approx(-1.0));
    CHECK(F[0][1] == 0.0);

    // Compressed along a diagonal: push apart along the separation.
    X = {{0.0, 0.0, 0.0}, {0.3, 0.4, 0.0}};
    F = compute_forces(b, X);
    CHECK(F[0][0] == doctest::Approx(-2.0 * 0.5 * 0.6));
    CHECK(F[0][1] == doctest::Approx(-2.0 * 0.5 * 0.8));
    CHECK(F[1][1] == doctest::Approx(-F[0][1]));

    // Symmetric stretch of a chain leaves the middle node unloaded.
    Biofilm c;
    c.X = {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {2.0, 0.0, 0.0}};
    c.springs = {{0, 1, 1.0, 1.0, true}, {1, 2, 1.0, 1.0, true}};
    const std::vector<Point> Y{{-0.5, 0.0, 0.0}, {1.0, 0.0, 0.0}, {2.5, 0.0, 0.0}};
    F = compute_forces(c, Y);
    CHECK(std::abs(F[1][0]) < 1e-15);
    CHECK(F[0][0] == doctest::Approx(0.5));

    // Dead springs are ignored.
    c.springs[0].alive = false;
    F = compute_forces(c, Y);
    CHECK(F[0][0] == 0.0);

    const std::vector<Point> same{{0.2, 0.2, 0.0}, {0.2, 0.2, 0.0}};
    CHECK_THROWS_WITH_AS(compute_forces(b, same), doctest::Contains("degenerate spring"), std::runtime_error);
}

TEST_CASE("net force vanishes on random networks") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int dim : {2, 3}) {
        Biofilm b;
        b.dim = dim;
        for (int i = 0; i < 200; ++i) b.X.push_back({u(rng), u(rng), dim == 3 ? u(rng) : 0.0});
        for (int i = 0; i < 200; ++i)
            for (int j = i + 1; j < 200; ++j) {
                double d2 = 0.0;
                for (int a = 0; a < dim; ++a) d2 += (b.X[i][a] - b.X[j][a]) * (b.X[i][a] - b.X[j][a]);
                if (d2 < 0.04) b.springs.push_back({i, j, 0.7 * std::sqrt(d2), 200.0 / (0.7 * std::sqrt(d2)), true});
            }
        const auto F = compute_forces(b, b.X);
        double total = 0.0;
        for (const Point& f : F) total += std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
        const Point net = net_force(F, dim);
        const double n = std::sqrt(net[0] * net[0] + net[1] * net[1] + net[2] * net[2]);
        CHECK(n <= 1e-12 * total);
    }
}

TEST_CASE("breaking") {
    Biofilm b = pair(1.0, 3.0);
    CHECK(b.springs[0].K * b.springs[0].rest == doctest::Approx(b.F_max));
    std::vector<Point> X{{0.0, 0.0, 0.0}, {2.0, 0.0, 0.0}};
    CHECK(apply_breaking(b, X) == 0u);  // exactly 2r keeps the spring
    CHECK(b.alive_springs() == 1u);
    CHECK(apply_breaking(b, b.X) == 0u);
    X[1][0] = 2.01;
    CHECK(apply_breaking(b, X) == 1u);
    CHECK(b.alive_springs() == 0u);
    CHECK(compute_forces(b, X)[0][0] == 0.0);
    // Permanent: relaxing back does not revive it.
    CHECK(apply_breaking(b, b.X) == 0u);
    CHECK_FALSE(b.springs[0].alive);

    Biofilm c = pair(1.0, 1.0);
    c.break_factor = 3.0;
    X[1][0] = 2.5;
    CHECK(apply_breaking(c, X) == 0u);
}

TEST_CASE("advection") {
    const std::vector<Point> X{{0.1, 0.2, 0.0}, {0.5, 0.5, 0.0}};
    const std::vector<Point> zero(2, Point{0, 0, 0});
    CHECK(advect_nodes(X, zero, 0.1, 0.05) == X);
    const std::vector<Point> U(2, Point{1.0, 0.0, 0.0});
    const auto Y = advect_nodes(X, U, 0.1, 1.0);
    CHECK(Y[0][0] == doctest::Approx(0.2));
    CHECK(Y[0][1] == 0.2);
    const auto half = advect_nodes(advect_nodes(X, U, 0.05, 0.5), U, 0.05, 0.5);
    const auto full = advect_nodes(X, U, 0.1, 0.5);
    for (int s = 0; s < 2; ++s) CHECK(std::abs(half[s][0] - full[s][0]) <= 1e-15);
    CHECK_THROWS(advect_nodes(X, std::vector<Point>(1), 0.1, 1.0));

    const Grid g(2, {3.0, 1.0, 0.0}, 0.25);
    CHECK(first_outside(X, g) == -1);
    const std::vector<Point> out{{0.1, 0.2, 0.0}, {3.0, 1.0, 0.0}, {3.01, 0.5, 0.0}};
    CHECK(first_outside(out, g) == 2);
}

TEST_CASE("fragments") {
    Biofilm b;
    b.X = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {5, 1, 0}};
    b.springs = {{0, 1, 1, 1, true}, {1, 2, 1, 1, true}, {2, 3, 1, 1, true}};
    b.base = {true, false, false, false, false};
    auto fr = fragments(b, b.X);
    REQUIRE(fr.size() == 1u);  // the isolated node
    CHECK(fr[0].nodes == std::vector<int>{4});
    b.springs[1].alive = false;
    fr = fragments(b, b.X);
    REQUIRE(fr.size() == 2u);
    const Fragment& chain = fr[0].nodes.size() == 2 ? fr[0] : fr[1];
    CHECK(chain.centroid[0] == doctest::Approx(2.5));
}
