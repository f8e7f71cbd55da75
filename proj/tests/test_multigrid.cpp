#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ibfilm/coupling.hpp"
#include "ibfilm/multigrid.hpp"
#include "ibfilm/operators.hpp"

using namespace ibfilm;

namespace {

BoxShape box(int dim, int n, AxisLayout layout = AxisLayout::Vertex, SideBC lo = SideBC::Dirichlet,
             SideBC hi = SideBC::Dirichlet) {
    std::array<AxisSpec, 3> ax{};
    for (int a = 0; a < dim; ++a) ax[a] = {layout, n, lo, hi};
    return BoxShape(dim, ax, 1.0 / n);
}

std::unique_ptr<ScalarOperator> poisson(const BoxShape& s) {
    ScalarCoefficients c;
    for (int a = 0; a < s.dim(); ++a) c.face[a].assign(s.size(), 1.0);
    return std::make_unique<ScalarOperator>(s, std::move(c));
}

// -div(a grad u) with a = jump outside a centred square, 1 inside.
std::unique_ptr<ScalarOperator> jump_operator(const BoxShape& s, double jump) {
    ScalarCoefficients c;
    for (int a = 0; a < s.dim(); ++a) {
        c.face[a].assign(s.size(), 1.0);
        for (std::size_t i = 0; i < s.size(); ++i) {
            const auto p = s.coords(i);
            const double x = p[0] * s.spacing(), y = p[1] * s.spacing();
            if (std::abs(x - 0.5) < 0.2 && std::abs(y - 0.5) < 0.2) c.face[a][i] = jump;
        }
    }
    return std::make_unique<ScalarOperator>(s, std::move(c));
}

std::vector<double> smooth_rhs(const BoxShape& s) {
    const double pi = std::numbers::pi;
    std::vector<double> f(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = s.coords(i);
        if (!s.unknown(c)) continue;
        double v = 1.0;
        for (int a = 0; a < s.dim(); ++a) v *= std::sin(pi * c[a] * s.spacing());
        f[i] = v + 0.3;
    }
    return f;
}

std::vector<double> random_unknowns(const BoxShape& s, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.unknown(s.coords(i))) v[i] = u(rng);
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

MultigridOptions opts(int levels, double tol = 1e-9) {
    MultigridOptions o;
    o.levels = levels;
    o.tol = tol;
    return o;
}

}  // namespace

TEST_CASE("full-weighting restriction") {
    const Grid g(2, {1.0, 1.0, 0.0}, 1.0 / 16);
    Field c(g, 1, 2.5), l(g, 1);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto p = g.coords(i);
        l(0, i) = 1.0 + 2.0 * g.coord(p[0]) - 3.0 * g.coord(p[1]);
    }
    const Field rc = restrict_full_weighting(c), rl = restrict_full_weighting(l);
    CHECK(rc.grid().points(0) == 9);
    for (std::size_t i = 0; i < rc.size(); ++i) {
        const auto p = rc.grid().coords(i);
        REQUIRE(rc(0, i) == doctest::Approx(2.5).epsilon(1e-15));
        REQUIRE(rl(0, i) == doctest::Approx(1.0 + 2.0 * p[0] / 8.0 - 3.0 * p[1] / 8.0).epsilon(1e-14));
    }

    // 1D spike next to a coarse point: [1 2 1]/4 puts 1/4 on each neighbour.
    const Grid g1(1, {1.0, 0.0, 0.0}, 1.0 / 8);
    Field s(g1, 1);
    s(0, 3) = 1.0;
    const Field rs = restrict_full_weighting(s);
    CHECK(rs(0, 1) == 0.25);
    CHECK(rs(0, 2) == 0.25);
    CHECK(rs(0, 3) == 0.0);

    // Boundary points are injected.
    Field b(g1, 1);
    b(0, 0) = 7.0;
    b(0, 1) = 100.0;
    CHECK(restrict_full_weighting(b)(0, 0) == 7.0);

    CHECK_THROWS_AS(restrict_full_weighting(Field(Grid(2, {1.0, 1.0, 0.0}, 1.0 / 5), 1)), std::invalid_argument);
}

TEST_CASE("linear interpolation reproduces linears") {
    const Grid fine(3, {1.0, 1.0, 1.0}, 1.0 / 8);
    const Grid coarse = coarsen_grid(fine);
    Field l(coarse, 2);
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const auto p = coarse.coords(i);
        l(0, i) = 4.0;
        l(1, i) = coarse.coord(p[0]) - 2.0 * coarse.coord(p[1]) + 0.5 * coarse.coord(p[2]);
    }
    const Field f = interpolate_linear(l, fine);
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const auto p = fine.coords(i);
        REQUIRE(f(0, i) == doctest::Approx(4.0).epsilon(1e-15));
        REQUIRE(f(1, i) == doctest::Approx(fine.coord(p[0]) - 2.0 * fine.coord(p[1]) + 0.5 * fine.coord(p[2])));
    }
}

TEST_CASE("prolongation is 2^D times the adjoint of restriction") {
    for (int dim = 1; dim <= 3; ++dim) {
        const BoxShape f = box(dim, 8), c = f.coarsen();
        const std::vector<double> uc = random_unknowns(c, 1), vf = random_unknowns(f, 2);
        std::vector<double> pu(f.size(), 0.0), rv(c.size(), 0.0);
        prolong_add(c, f, uc, pu);
        restrict_residual(f, c, vf, rv);
        CHECK(dot(pu, vf) == doctest::Approx(std::pow(2.0, dim) * dot(uc, rv)).epsilon(1e-12));
    }
}

TEST_CASE("red-black Gauss-Seidel") {
    SUBCASE("exact solution is a fixed point") {
        const BoxShape s = box(2, 16);
        const auto op = poisson(s);
        const std::vector<double> u = random_unknowns(s, 3);
        std::vector<double> f(s.size(), 0.0), r(s.size());
        op->residual(u, f, r);
        for (double& x : r) x = -x;  // f = A u
        std::vector<double> v = u;
        op->relax(v, r, 3);
        double e = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) e = std::max(e, std::abs(v[i] - u[i]));
        CHECK(e < 1e-13);
    }
    SUBCASE("energy decreases every sweep") {
        // Gauss-Seidel on an SPD system lowers E(u) = u.Au / 2 - f.u = -u.(f + r) / 2.
        for (int dim : {1, 2}) {
            const BoxShape s = box(dim, 64);
            const auto op = poisson(s);
            const std::vector<double> f = random_unknowns(s, 4);
            std::vector<double> u(s.size(), 0.0), r(s.size());
            auto energy = [&] {
                op->residual(u, f, r);
                double e = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i) e -= 0.5 * u[i] * (f[i] + r[i]);
                return e;
            };
            double last = energy();
            for (int k = 0; k < 5; ++k) {
                op->relax(u, f, 1);
                const double e = energy();
                CHECK(e < last);
                last = e;
            }
        }
    }
    SUBCASE("high-frequency error is damped by more than 2 per sweep") {
        // Power iteration on the error propagator restricted to the
        // oscillatory subspace (removing what a coarse grid represents).
        const BoxShape s = box(2, 32), c = s.coarsen();
        const auto op = poisson(s);
        const std::vector<double> zero(s.size(), 0.0);
        auto oscillatory = [&](std::vector<double> e) {
            std::vector<double> rc(c.size(), 0.0), back(s.size(), 0.0);
            restrict_residual(s, c, e, rc);
            prolong_add(c, s, rc, back);
            for (std::size_t i = 0; i < e.size(); ++i) e[i] -= back[i];
            return e;
        };
        std::vector<double> e = oscillatory(random_unknowns(s, 5));
        double factor = 0.0;
        for (int it = 0; it < 20; ++it) {
            const double before = std::sqrt(dot(e, e));
            for (double& x : e) x /= before;
            op->relax(e, zero, 1);
            e = oscillatory(e);
            factor = std::sqrt(dot(e, e));
        }
        CHECK(factor < 0.5);
    }
}

TEST_CASE("cell-centred Dirichlet Poisson is second order") {
    const double pi = std::numbers::pi;
    auto error = [&](int n) {
        std::array<AxisSpec, 3> ax{};
        ax[0] = {AxisLayout::Cell, n, SideBC::Dirichlet, SideBC::Dirichlet};
        const BoxShape s(1, ax, 1.0 / n);
        Multigrid mg(poisson(s), opts(4, 1e-12));
        std::vector<double> u(s.size(), 0.0), f(s.size(), 0.0);
        for (int j = 1; j <= n; ++j) f[j] = pi * pi * std::sin(pi * (j - 0.5) / n);
        mg.solve(u, f);
        double e = 0.0;
        for (int j = 1; j <= n; ++j) e = std::max(e, std::abs(u[j] - std::sin(pi * (j - 0.5) / n)));
        return e;
    };
    CHECK(std::log2(error(32) / error(64)) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("V-cycle solver") {
    SUBCASE("zero data stays zero") {
        const BoxShape s = box(2, 32);
        Multigrid mg(poisson(s), opts(4));
        std::vector<double> u(s.size(), 0.0), f(s.size(), 0.0);
        const SolveStats st = mg.solve(u, f);
        CHECK(max_abs(u) == 0.0);
        CHECK(st.converged);
    }
    SUBCASE("each V-cycle reduces the residual tenfold at h = 1/128") {
        const BoxShape s = box(2, 128);
        Multigrid mg(poisson(s), opts(6));
        std::vector<double> u(s.size(), 0.0);
        const std::vector<double> f = smooth_rhs(s);
        const SolveStats st = mg.solve(u, f);
        CHECK(st.converged);
        CHECK(st.levels == 6);
        // Max-norm factors vary from cycle to cycle; their geometric mean is the asymptotic rate.
        const std::size_t n = st.history.size() - 1;
        for (std::size_t k = 1; k <= n; ++k) CHECK(st.history[k] <= 0.15 * st.history[k - 1]);
        CHECK(std::pow(st.history[n] / st.history[0], 1.0 / n) <= 0.1);
        CHECK(st.work_units >= st.v_cycles * 4.0);
    }
    SUBCASE("cycle count is nearly independent of h") {
        std::vector<int> cycles;
        for (int n : {32, 64, 128}) {
            const BoxShape s = box(2, n);
            Multigrid mg(poisson(s), opts(6));
            std::vector<double> u(s.size(), 0.0);
            cycles.push_back(mg.solve(u, smooth_rhs(s)).v_cycles);
        }
        const auto [lo, hi] = std::minmax_element(cycles.begin(), cycles.end());
        CHECK(*hi < 2 * *lo);
    }
    SUBCASE("more levels never cost more work") {
        const BoxShape s = box(2, 32);
        double last = INFINITY;
        for (int levels = 1; levels <= 4; ++levels) {
            MultigridOptions o = opts(levels);
            o.max_cycles = 100000;
            Multigrid mg(poisson(s), o);
            std::vector<double> u(s.size(), 0.0);
            const SolveStats st = mg.solve(u, smooth_rhs(s));
            CHECK(st.work_units <= last);
            last = st.work_units;
        }
    }
}

TEST_CASE("work units on a two-level hierarchy") {
    const BoxShape s = box(2, 8);
    MultigridOptions o = opts(2);
    o.nu1 = 2;
    o.nu2 = 1;
    o.coarse_sweeps = 20;
    Multigrid mg(poisson(s), o);
    REQUIRE(mg.levels() == 2);
    std::vector<double> u(s.size(), 0.0);
    const SolveStats st = mg.solve(u, smooth_rhs(s));
    // Fine level: 3 sweeps at cost 1. Coarse level: 20 sweeps at cost 1/4.
    CHECK(st.work_units == doctest::Approx(st.v_cycles * (3.0 + 20.0 / 4.0)));
    CHECK(st.history.size() == static_cast<std::size_t>(st.v_cycles) + 1);
}

TEST_CASE("stopping rules") {
    const BoxShape s = box(2, 64);
    const std::vector<double> f = smooth_rhs(s);
    SUBCASE("max_cycles = 0 returns the initial residual") {
        MultigridOptions o = opts(4);
        o.max_cycles = 0;
        Multigrid mg(poisson(s), o);
        std::vector<double> u(s.size(), 0.0);
        const SolveStats st = mg.solve(u, f);
        CHECK(st.v_cycles == 0);
        CHECK(st.work_units == 0.0);
        CHECK(st.initial_residual == doctest::Approx(1.0));
        CHECK_FALSE(st.converged);
        CHECK(max_abs(u) == 0.0);
    }
    SUBCASE("an unreachable tolerance reports stagnation") {
        Multigrid mg(poisson(s), opts(6, 1e-15));
        std::vector<double> u(s.size(), 0.0);
        CHECK_THROWS_AS(mg.solve(u, f), SolverStagnation);
        try {
            std::vector<double> v(s.size(), 0.0);
            mg.solve(v, f);
        } catch (const SolverStagnation& e) {
            CHECK(e.stats().stagnated);
            CHECK(e.stats().final_residual < 1e-9);
            CHECK(std::string(e.what()).find("stagnated") != std::string::npos);
        }
    }
    SUBCASE("non-convergence within max_cycles is an error") {
        MultigridOptions o = opts(1);
        o.max_cycles = 3;
        Multigrid mg(poisson(s), o);
        std::vector<double> u(s.size(), 0.0);
        CHECK_THROWS_AS(mg.solve(u, f), SolverError);
        o.throw_on_failure = false;
        Multigrid quiet(poisson(s), o);
        std::fill(u.begin(), u.end(), 0.0);
        CHECK_FALSE(quiet.solve(u, f).converged);
    }
}

TEST_CASE("coarse-grid coefficient scaling") {
    const BoxShape s = box(2, 16);
    const auto op = jump_operator(s, 500.0);
    const auto c1 = op->coarsen(1.0), c2 = op->coarsen(0.5);
    const auto& a1 = dynamic_cast<const ScalarOperator&>(*c1).coefficients();
    const auto& a2 = dynamic_cast<const ScalarOperator&>(*c2).coefficients();
    for (std::size_t i = 0; i < a1.face[0].size(); ++i) REQUIRE(a2.face[0][i] == doctest::Approx(0.5 * a1.face[0][i]));

    MultigridOptions bad = opts(3);
    bad.gamma = {1.2};
    CHECK_THROWS_AS(Multigrid(jump_operator(s, 500.0), bad), std::invalid_argument);

    // Momentum operator with a 500:1 viscosity bump spread from a node cluster:
    // gamma = 1 converges, and some gamma in [0.7, 0.9] needs no more cycles.
    const Grid g = Grid::channel(2, {3.0, 1.0, 0.0}, 1.0 / 32);
    std::vector<Point> X;
    for (double x = 1.3; x < 1.7; x += 0.03)
        for (double y = 0.01; y < 0.35; y += 0.03) X.push_back({x, y, 0.0});
    CouplingConfig cc;
    cc.omega = 1.0 / 50;
    cc.kernel = Kernel::Phi1;
    cc.d0 = 0.03;
    cc.rho_b = 0.0;
    cc.mu_max = 500.0;
    cc.mu_out = 1.0;
    const Field mu = viscosity_field(X, g, cc);
    std::array<std::array<bool, 2>, 3> neumann{};
    neumann[0][1] = true;
    const BoxShape vs = vertex_shape(g, neumann);
    std::vector<double> a(g.size()), shift(g.size(), 500.0);
    for (std::size_t i = 0; i < g.size(); ++i) a[i] = mu(0, i) / 0.05;
    std::vector<double> rhs(2 * vs.size(), 0.0);
    for (std::size_t i = 0; i < vs.size(); ++i)
        if (vs.unknown(vs.coords(i))) rhs[i] = 1.0 + std::sin(3.0 * vs.coords(i)[0] * g.h());
    for (bool coupled : {false, true}) {
        auto cycles = [&](double gamma) {
            MultigridOptions o = opts(6, 1e-9);
            o.gamma.assign(5, gamma);
            o.max_cycles = 300;
            Multigrid mg(std::make_unique<ViscousOperator>(vs, a, shift, coupled), o);
            std::vector<double> u(rhs.size(), 0.0);
            try {
                return mg.solve(u, rhs).v_cycles;
            } catch (const SolverError&) {
                return o.max_cycles + 1;  // diverged or stagnated
            }
        };
        const int at_one = cycles(1.0);
        int best = at_one;
        for (double gm : {0.7, 0.8, 0.85, 0.9}) best = std::min(best, cycles(gm));
        CHECK(at_one < 300);
        CHECK(best <= at_one);
    }
}
