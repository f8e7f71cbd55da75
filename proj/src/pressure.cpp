#include "ibfilm/pressure.hpp"

#include <algorithm>
#include <stdexcept>

#include "ibfilm/boundary.hpp"

namespace ibfilm {

double pressure_gradient(const Field& p, int k, const std::array<int, 3>& c) {
    const Grid& g = p.grid();
    const auto v = p.comp(0);
    std::array<int, 3> a = c, b = c;
    if (k == g.flow_axis() && c[k] == g.intervals(k)) {
        a[k] = c[k] - 1;
        return (v[g.index(c[0], c[1], c[2])] - v[g.index(a[0], a[1], a[2])]) / g.h();
    }
    a[k] += 1;
    b[k] -= 1;
    return (v[g.index(a[0], a[1], a[2])] - v[g.index(b[0], b[1], b[2])]) / (2.0 * g.h());
}

Field projection_operator(const Field& phi, const Field& rho) {
    const Grid& g = phi.grid();
    Field out(g, 1);
    auto flux = [&](int a, std::array<int, 3> x) {
        // Mirror across the bottom wall: the flux is odd in y.
        double sign = 1.0;
        if (x[a] < 0) {
            x[a] = -x[a];
            sign = -1.0;
        }
        if (velocity_fixed(g, x)) return 0.0;
        return sign * pressure_gradient(phi, a, x) / rho(0, g.index(x[0], x[1], x[2]));
    };
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto c = g.coords(i);
        if (pressure_fixed(g, c)) continue;
        double s = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            auto xp = c, xm = c;
            xp[a] += 1;
            xm[a] -= 1;
            s += (flux(a, xp) - flux(a, xm)) / (2.0 * g.h());
        }
        out(0, i) = -s;
    }
    return out;
}

namespace {

// Fine coordinate of slot C along an axis of a sublattice.
int fine_coord(const AxisSpec& ax, int C, int N) {
    if (ax.layout == AxisLayout::Vertex) return 2 * C;
    if (C == 0) return 0;
    if (C == ax.n + 1) return N;
    return 2 * C - 1;
}

}  // namespace

PressureSolver::PressureSolver(const Grid& g, const MultigridOptions& opt) : grid_(g), opt_(opt) {
    const int D = g.dim();
    if (g.flow_axis() < 0) throw std::invalid_argument("pressure solver needs a channel grid");
    for (int a = 0; a < D; ++a)
        if (g.intervals(a) % 2 != 0) throw std::invalid_argument("pressure solver needs even interval counts");
    throw_ = opt.throw_on_failure && opt.max_cycles > 0;
    opt_.throw_on_failure = false;
    const int nsub = 1 << D;
    for (int m = 0; m < nsub; ++m) {
        Sublattice s;
        std::array<AxisSpec, 3> ax{};
        for (int a = 0; a < D; ++a) {
            s.parity[a] = (m >> a) & 1;
            ax[a].n = g.intervals(a) / 2;
            for (int side = 0; side < 2; ++side) {
                const BoundaryKind f = g.face(a, side);
                SideBC bc;
                if (s.parity[a] == 0) {
                    ax[a].layout = AxisLayout::Vertex;
                    bc = f == BoundaryKind::WallBottom ? SideBC::Neumann : SideBC::Dirichlet;
                } else {
                    ax[a].layout = AxisLayout::Cell;
                    bc = f == BoundaryKind::Outflow ? SideBC::Dirichlet : SideBC::Neumann;
                }
                (side == 0 ? ax[a].lo : ax[a].hi) = bc;
            }
        }
        s.shape = BoxShape(D, ax, 2.0 * g.h());
        s.fine.resize(s.shape.size());
        s.unknown.resize(s.shape.size());
        for (std::size_t i = 0; i < s.shape.size(); ++i) {
            const auto C = s.shape.coords(i);
            std::array<int, 3> f{0, 0, 0};
            for (int a = 0; a < D; ++a) f[a] = fine_coord(ax[a], C[a], g.intervals(a));
            s.fine[i] = g.index(f[0], f[1], f[2]);
            s.unknown[i] = s.shape.unknown(C) ? 1 : 0;
            s.unknowns += s.unknown[i];
        }
        s.u.assign(s.shape.size(), 0.0);
        s.f.assign(s.shape.size(), 0.0);
        unknowns_ += s.unknowns;
        subs_.push_back(std::move(s));
    }
    set_density(Field(g, 1, 1.0));
}

void PressureSolver::set_density(const Field& rho) {
    const Grid& g = grid_;
    const int D = g.dim();
    for (Sublattice& s : subs_) {
        ScalarCoefficients co;
        for (int a = 0; a < D; ++a) co.face[a].assign(s.shape.size(), 0.0);
        for (std::size_t i = 0; i < s.shape.size(); ++i) {
            const auto C = s.shape.coords(i);
            std::array<int, 3> base{0, 0, 0};
            for (int b = 0; b < D; ++b) {
                const AxisSpec& ax = s.shape.axis(b);
                base[b] = ax.layout == AxisLayout::Vertex ? 2 * C[b] : 2 * C[b] - 1;
            }
            for (int a = 0; a < D; ++a) {
                if (C[a] >= s.shape.count(a) - 1) continue;
                bool skip = false;
                for (int b = 0; b < D; ++b)
                    if (b != a && s.shape.axis(b).layout == AxisLayout::Cell &&
                        (C[b] == 0 || C[b] == s.shape.axis(b).n + 1))
                        skip = true;
                if (skip) continue;
                std::array<int, 3> mid = base;
                mid[a] = base[a] + 1;
                if (velocity_fixed(g, mid)) continue;
                co.face[a][i] = 1.0 / rho(0, g.index(mid[0], mid[1], mid[2]));
            }
        }
        s.mg = std::make_unique<Multigrid>(std::make_unique<ScalarOperator>(s.shape, std::move(co)), opt_);
    }
}

int PressureSolver::levels() const {
    int l = 0;
    for (const Sublattice& s : subs_) l = std::max(l, s.mg->levels());
    return l;
}

SolveStats PressureSolver::solve(Field& phi, const Field& rhs, double reference) const {
    double ref = 0.0, r0 = 0.0;
    for (const Sublattice& s : subs_) {
        for (std::size_t i = 0; i < s.shape.size(); ++i) {
            s.u[i] = phi(0, s.fine[i]);
            s.f[i] = s.unknown[i] ? rhs(0, s.fine[i]) : 0.0;
        }
        ref = std::max(ref, s.mg->reference_norm(s.u, s.f));
        r0 = std::max(r0, s.mg->residual_norm(s.u, s.f));
    }
    MultigridOptions opt = opt_;
    if (reference > 0.0) opt.reference = reference;
    ConvergenceMonitor mon(opt, ref, r0, levels());
    while (!mon.done()) {
        double work = 0.0, r = 0.0;
        for (const Sublattice& s : subs_) {
            work += s.mg->cycle(s.u, s.f) * static_cast<double>(s.unknowns) / static_cast<double>(unknowns_);
            r = std::max(r, s.mg->residual_norm(s.u, s.f));
        }
        mon.record(r, work);
    }
    for (const Sublattice& s : subs_)
        for (std::size_t i = 0; i < s.shape.size(); ++i)
            if (s.unknown[i]) phi(0, s.fine[i]) = s.u[i];
    SolveStats st = mon.finish();
    if (!st.converged && throw_) {
        const std::string msg = "pressure solve " + std::string(st.stagnated ? "stagnated" : "did not converge") +
                                " after " + std::to_string(st.v_cycles) + " V-cycles, relative residual " +
                                std::to_string(st.final_residual);
        if (st.stagnated) throw SolverStagnation(msg, st);
        throw SolverError(msg, st);
    }
    return st;
}

}  // namespace ibfilm
