#include "ibfilm/springs.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace ibfilm {

std::size_t Biofilm::alive_springs() const {
    std::size_t n = 0;
    for (const Spring& sp : springs) n += sp.alive ? 1 : 0;
    return n;
}

namespace {

double pairwise_sum(const double* v, std::size_t n) {
    if (n == 0) return 0.0;
    if (n == 1) return v[0];
    const std::size_t m = n / 2;
    return pairwise_sum(v, m) + pairwise_sum(v + m, n - m);
}

}  // namespace

std::vector<Point> compute_forces(const Biofilm& b, std::span<const Point> X) {
    const std::size_t n = X.size();
    // Contributions per node in CSR form, in spring order.
    std::vector<std::size_t> start(n + 1, 0);
    for (const Spring& sp : b.springs)
        if (sp.alive) {
            ++start[sp.s + 1];
            ++start[sp.k + 1];
        }
    std::partial_sum(start.begin(), start.end(), start.begin());
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    std::array<std::vector<double>, 3> contrib;
    for (auto& c : contrib) c.assign(start[n], 0.0);
    for (const Spring& sp : b.springs) {
        if (!sp.alive) continue;
        Point d{0.0, 0.0, 0.0};
        double len2 = 0.0;
        for (int a = 0; a < b.dim; ++a) {
            d[a] = X[sp.k][a] - X[sp.s][a];
            len2 += d[a] * d[a];
        }
        const double len = std::sqrt(len2);
        if (!(len > 0.0))
            throw std::runtime_error("degenerate spring between nodes " + std::to_string(sp.s) + " and " +
                                     std::to_string(sp.k));
        const double T = sp.K * (len - sp.rest);
        const std::size_t is = fill[sp.s]++, ik = fill[sp.k]++;
        for (int a = 0; a < b.dim; ++a) {
            const double f = T * d[a] / len;
            contrib[a][is] = f;    // pulls s towards k under tension
            contrib[a][ik] = -f;
        }
    }
    std::vector<Point> F(n, Point{0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i)
        for (int a = 0; a < b.dim; ++a) F[i][a] = pairwise_sum(contrib[a].data() + start[i], start[i + 1] - start[i]);
    return F;
}

std::size_t apply_breaking(Biofilm& b, std::span<const Point> X) {
    std::size_t broken = 0;
    for (Spring& sp : b.springs) {
        if (!sp.alive) continue;
        double len2 = 0.0;
        for (int a = 0; a < b.dim; ++a) {
            const double d = X[sp.k][a] - X[sp.s][a];
            len2 += d * d;
        }
        if (std::sqrt(len2) > b.break_factor * sp.rest) {
            sp.alive = false;
            ++broken;
        }
    }
    return broken;
}

std::vector<Point> advect_nodes(std::span<const Point> X, std::span<const Point> U, double dt, double sigma) {
    if (!(dt > 0.0)) throw std::invalid_argument("advect_nodes: dt must be positive");
    if (X.size() != U.size()) throw std::invalid_argument("advect_nodes: size mismatch");
    std::vector<Point> out(X.begin(), X.end());
    const double c = dt / sigma;
    for (std::size_t i = 0; i < out.size(); ++i)
        for (int a = 0; a < 3; ++a) out[i][a] += c * U[i][a];
    return out;
}

long first_outside(std::span<const Point> X, const Grid& g) {
    for (std::size_t i = 0; i < X.size(); ++i)
        for (int a = 0; a < g.dim(); ++a)
            if (!(X[i][a] >= 0.0 && X[i][a] <= g.extent(a))) return static_cast<long>(i);
    return -1;
}

Point net_force(std::span<const Point> F, int dim) {
    Point s{0.0, 0.0, 0.0};
    for (const Point& f : F)
        for (int a = 0; a < dim; ++a) s[a] += f[a];
    return s;
}

std::vector<Fragment> fragments(const Biofilm& b, std::span<const Point> X) {
    const int n = static_cast<int>(X.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[v] != v) v = parent[v] = parent[parent[v]];
        return v;
    };
    for (const Spring& sp : b.springs)
        if (sp.alive) parent[find(sp.s)] = find(sp.k);
    std::vector<int> root_of(n);
    std::vector<bool> anchored(n, false);
    for (int i = 0; i < n; ++i) {
        root_of[i] = find(i);
        if (i < static_cast<int>(b.base.size()) && b.base[i]) anchored[root_of[i]] = true;
    }
    std::vector<int> slot(n, -1);
    std::vector<Fragment> out;
    for (int i = 0; i < n; ++i) {
        const int r = root_of[i];
        if (anchored[r]) continue;
        if (slot[r] < 0) {
            slot[r] = static_cast<int>(out.size());
            out.emplace_back();
        }
        out[slot[r]].nodes.push_back(i);
    }
    for (Fragment& f : out) {
        for (int i : f.nodes)
            for (int a = 0; a < 3; ++a) f.centroid[a] += X[i][a];
        for (int a = 0; a < 3; ++a) f.centroid[a] /= static_cast<double>(f.nodes.size());
    }
    return out;
}

}  // namespace ibfilm
