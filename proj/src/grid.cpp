#include "ibfilm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ibfilm {

std::string boundary_kind_name(BoundaryKind k) {
    switch (k) {
        case BoundaryKind::Inflow: return "inflow";
        case BoundaryKind::Outflow: return "outflow";
        case BoundaryKind::WallTop: return "wall-top";
        case BoundaryKind::WallBottom: return "wall-bottom";
        case BoundaryKind::WallSide: return "wall-side";
    }
    return "?";
}

Grid::Grid(int dim, std::array<double, 3> extent, double h) : dim_(dim), h_(h), extent_(extent) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid dimension must be 1, 2 or 3");
    if (!(h > 0.0)) throw std::invalid_argument("mesh width h must be positive");
    for (int a = 0; a < dim; ++a) {
        const double ratio = extent[a] / h;
        const double r = std::round(ratio);
        if (!(extent[a] > 0.0) || std::abs(ratio - r) > 1e-9 * std::max(1.0, ratio))
            throw std::invalid_argument("domain extent along axis " + std::to_string(a) +
                                        " is not an integer multiple of h");
        n_[a] = static_cast<int>(r);
        if (n_[a] + 1 < 5) throw std::invalid_argument("grid needs at least 5 points per axis");
    }
    for (int a = dim; a < 3; ++a) extent_[a] = 0.0;
    stride_ = {1, points(0), static_cast<std::ptrdiff_t>(points(0)) * points(1)};
    size_ = static_cast<std::size_t>(points(0)) * points(1) * points(2);
    for (auto& f : faces_) f = {BoundaryKind::WallSide, BoundaryKind::WallSide};
}

Grid Grid::channel(int dim, std::array<double, 3> extent, double h) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("channel grids are 2D or 3D");
    Grid g(dim, extent, h);
    const int flow = dim == 2 ? 0 : 2;
    g.faces_[flow] = {BoundaryKind::Inflow, BoundaryKind::Outflow};
    g.faces_[1] = {BoundaryKind::WallBottom, BoundaryKind::WallTop};
    if (dim == 3) g.faces_[0] = {BoundaryKind::WallSide, BoundaryKind::WallSide};
    return g;
}

std::array<int, 3> Grid::coords(std::size_t idx) const {
    std::array<int, 3> c{0, 0, 0};
    c[0] = static_cast<int>(idx % static_cast<std::size_t>(points(0)));
    const std::size_t rest = idx / static_cast<std::size_t>(points(0));
    c[1] = static_cast<int>(rest % static_cast<std::size_t>(points(1)));
    c[2] = static_cast<int>(rest / static_cast<std::size_t>(points(1)));
    return c;
}

int Grid::flow_axis() const {
    for (int a = 0; a < dim_; ++a)
        if (faces_[a][0] == BoundaryKind::Inflow) return a;
    return -1;
}

bool Grid::on_boundary(const std::array<int, 3>& c) const {
    for (int a = 0; a < dim_; ++a)
        if (c[a] == 0 || c[a] == n_[a]) return true;
    return false;
}

bool Grid::active(const std::array<int, 3>& c) const {
    for (int a = 0; a < dim_; ++a) {
        if (c[a] == 0 && !mirrored(a, 0)) return false;
        if (c[a] == n_[a] && !mirrored(a, 1)) return false;
    }
    return true;
}

std::size_t Grid::neighbor(const std::array<int, 3>& c, int axis, int dir) const {
    std::array<int, 3> d = c;
    d[axis] += dir;
    if (d[axis] < 0) d[axis] = 1;
    if (d[axis] > n_[axis]) d[axis] = n_[axis] - 1;
    return index(d[0], d[1], d[2]);
}

bool Grid::same_shape(const Grid& o) const {
    if (dim_ != o.dim_) return false;
    for (int a = 0; a < 3; ++a)
        if (n_[a] != o.n_[a]) return false;
    return std::abs(h_ - o.h_) <= 1e-12 * h_;
}

Field::Field(const Grid& g, int components, double value)
    : grid_(g), ncomp_(components), data_(g.size() * static_cast<std::size_t>(components), value) {
    if (components < 1) throw std::invalid_argument("field needs at least one component");
}

void Field::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

namespace {

template <class Fn>
void for_active(const Grid& g, Fn&& fn) {
    for (int k = 0; k < g.points(2); ++k)
        for (int j = 0; j < g.points(1); ++j)
            for (int i = 0; i < g.points(0); ++i) {
                const std::array<int, 3> c{i, j, k};
                if (g.active(c)) fn(g.index(i, j, k), c);
            }
}

}  // namespace

Field laplacian(const Field& f, int comp) {
    const Grid& g = f.grid();
    Field out(g, 1);
    const auto v = f.comp(comp);
    const double ih2 = 1.0 / (g.h() * g.h());
    for_active(g, [&](std::size_t idx, const std::array<int, 3>& c) {
        double s = 0.0;
        for (int a = 0; a < g.dim(); ++a) s += v[g.neighbor(c, a, 1)] + v[g.neighbor(c, a, -1)] - 2.0 * v[idx];
        out(0, idx) = s * ih2;
    });
    return out;
}

Field central_diff(const Field& f, int axis, int comp) {
    const Grid& g = f.grid();
    Field out(g, 1);
    const auto v = f.comp(comp);
    const double i2h = 0.5 / g.h();
    for_active(g, [&](std::size_t idx, const std::array<int, 3>& c) {
        out(0, idx) = (v[g.neighbor(c, axis, 1)] - v[g.neighbor(c, axis, -1)]) * i2h;
    });
    return out;
}

void check_positive(const Field& a, const char* what) {
    for (double x : a.comp(0))
        if (!(x > 0.0)) throw std::invalid_argument(std::string(what) + ": coefficient must be positive");
}

Field div_a_grad(const Field& a, const Field& f, int comp) {
    check_positive(a, "div_a_grad");
    const Grid& g = f.grid();
    Field out(g, 1);
    const auto v = f.comp(comp);
    const auto av = a.comp(0);
    const double ih2 = 1.0 / (g.h() * g.h());
    for_active(g, [&](std::size_t idx, const std::array<int, 3>& c) {
        double s = 0.0;
        for (int ax = 0; ax < g.dim(); ++ax) {
            const std::size_t p = g.neighbor(c, ax, 1), m = g.neighbor(c, ax, -1);
            s += 0.5 * (av[p] + av[idx]) * (v[p] - v[idx]) - 0.5 * (av[m] + av[idx]) * (v[idx] - v[m]);
        }
        out(0, idx) = s * ih2;
    });
    return out;
}

Field div_a_partialT(const Field& a, const Field& u, int k) {
    check_positive(a, "div_a_partialT");
    const Grid& g = u.grid();
    Field out(g, 1);
    const auto av = a.comp(0);
    const double h = g.h();
    for_active(g, [&](std::size_t idx, const std::array<int, 3>& c) {
        double s = 0.0;
        const auto uk = u.comp(k);
        {
            const std::size_t p = g.neighbor(c, k, 1), m = g.neighbor(c, k, -1);
            s += (0.5 * (av[p] + av[idx]) * (uk[p] - uk[idx]) - 0.5 * (av[m] + av[idx]) * (uk[idx] - uk[m])) / (h * h);
        }
        for (int i = 0; i < g.dim(); ++i) {
            if (i == k) continue;
            const auto ui = u.comp(i);
            std::array<int, 3> cp = g.coords(g.neighbor(c, i, 1));
            std::array<int, 3> cm = g.coords(g.neighbor(c, i, -1));
            const std::size_t ip = g.index(cp[0], cp[1], cp[2]), im = g.index(cm[0], cm[1], cm[2]);
            const double dp = (ui[g.neighbor(cp, k, 1)] - ui[g.neighbor(cp, k, -1)]) / (2.0 * h);
            const double dm = (ui[g.neighbor(cm, k, 1)] - ui[g.neighbor(cm, k, -1)]) / (2.0 * h);
            s += (av[ip] * dp - av[im] * dm) / (2.0 * h);
        }
        out(0, idx) = s;
    });
    return out;
}

Field divergence(const Field& u) {
    const Grid& g = u.grid();
    Field out(g, 1);
    for (int a = 0; a < g.dim(); ++a) {
        const Field d = central_diff(u, a, a);
        for (std::size_t i = 0; i < g.size(); ++i) out(0, i) += d(0, i);
    }
    return out;
}

namespace {

double pnorm_impl(const Field& f, double p, bool active_only) {
    const Grid& g = f.grid();
    const double w = std::pow(g.h(), g.dim());
    double acc = 0.0;
    const bool inf = std::isinf(p);
    if (!inf && p != 1.0 && p != 2.0) throw std::invalid_argument("norm order must be 1, 2 or inf");
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const std::array<int, 3> c = g.coords(idx);
        if (active_only && !g.active(c)) continue;
        double wn = w;
        for (int a = 0; a < g.dim(); ++a)
            if (c[a] == 0 || c[a] == g.intervals(a)) wn *= 0.5;
        double m2 = 0.0;
        for (int k = 0; k < f.components(); ++k) m2 += f(k, idx) * f(k, idx);
        const double m = std::sqrt(m2);
        if (inf)
            acc = std::max(acc, m);
        else if (p == 1.0)
            acc += m * wn;
        else
            acc += m2 * wn;
    }
    return (inf || p == 1.0) ? acc : std::sqrt(acc);
}

}  // namespace

double grid_pnorm(const Field& f, double p) { return pnorm_impl(f, p, false); }
double grid_pnorm_active(const Field& f, double p) { return pnorm_impl(f, p, true); }

double lagrangian_pnorm(std::span<const Point> X, double p, double d0, int dim) {
    const bool inf = std::isinf(p);
    if (!inf && p != 1.0 && p != 2.0) throw std::invalid_argument("norm order must be 1, 2 or inf");
    const double w = std::pow(d0, dim);
    double acc = 0.0;
    for (const Point& x : X) {
        double m2 = 0.0;
        for (int a = 0; a < dim; ++a) m2 += x[a] * x[a];
        const double m = std::sqrt(m2);
        if (inf)
            acc = std::max(acc, m);
        else if (p == 1.0)
            acc += m * w;
        else
            acc += m2 * w;
    }
    return (inf || p == 1.0) ? acc : std::sqrt(acc);
}

}  // namespace ibfilm
