#include "ibfilm/multigrid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace ibfilm {

// ---------------------------------------------------------------------------
// BoxShape
// ---------------------------------------------------------------------------

BoxShape::BoxShape(int dim, std::array<AxisSpec, 3> axes, double spacing)
    : dim_(dim), spacing_(spacing), axes_(axes) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("box dimension must be 1, 2 or 3");
    if (!(spacing > 0.0)) throw std::invalid_argument("box spacing must be positive");
    for (int a = 0; a < 3; ++a) {
        if (a >= dim) {
            count_[a] = 1;
            continue;
        }
        if (axes[a].n < 1) throw std::invalid_argument("box axis needs at least one interval");
        count_[a] = axes[a].layout == AxisLayout::Vertex ? axes[a].n + 1 : axes[a].n + 2;
    }
    stride_ = {1, count_[0], static_cast<std::ptrdiff_t>(count_[0]) * count_[1]};
    size_ = static_cast<std::size_t>(count_[0]) * count_[1] * count_[2];
}

std::array<int, 3> BoxShape::coords(std::size_t idx) const {
    std::array<int, 3> c{0, 0, 0};
    c[0] = static_cast<int>(idx % static_cast<std::size_t>(count_[0]));
    const std::size_t rest = idx / static_cast<std::size_t>(count_[0]);
    c[1] = static_cast<int>(rest % static_cast<std::size_t>(count_[1]));
    c[2] = static_cast<int>(rest / static_cast<std::size_t>(count_[1]));
    return c;
}

bool BoxShape::unknown_along(int a, int i) const {
    if (a >= dim_) return true;
    const AxisSpec& s = axes_[a];
    if (s.layout == AxisLayout::Cell) return i >= 1 && i <= s.n;
    if (i > 0 && i < s.n) return true;
    if (i == 0) return s.lo == SideBC::Neumann;
    if (i == s.n) return s.hi == SideBC::Neumann;
    return false;
}

bool BoxShape::unknown(const std::array<int, 3>& c) const {
    for (int a = 0; a < dim_; ++a)
        if (!unknown_along(a, c[a])) return false;
    return true;
}

std::size_t BoxShape::unknown_count() const {
    std::size_t n = 0;
    for (std::size_t i = 0; i < size_; ++i)
        if (unknown(coords(i))) ++n;
    return n;
}

bool BoxShape::can_coarsen() const {
    for (int a = 0; a < dim_; ++a)
        if (axes_[a].n % 2 != 0 || axes_[a].n / 2 < 2) return false;
    return true;
}

BoxShape BoxShape::coarsen() const {
    if (!can_coarsen()) throw std::invalid_argument("box shape is not divisible for coarsening");
    std::array<AxisSpec, 3> ax = axes_;
    for (int a = 0; a < dim_; ++a) ax[a].n /= 2;
    return BoxShape(dim_, ax, 2.0 * spacing_);
}

int BoxShape::reflect(int a, int i) const {
    const int n = axes_[a].n;
    if (i < 0) return -i;
    if (i > n) return 2 * n - i;
    return i;
}

BoxShape vertex_shape(const Grid& g, const std::array<std::array<bool, 2>, 3>& neumann) {
    std::array<AxisSpec, 3> ax{};
    for (int a = 0; a < g.dim(); ++a) {
        ax[a].layout = AxisLayout::Vertex;
        ax[a].n = g.intervals(a);
        ax[a].lo = neumann[a][0] ? SideBC::Neumann : SideBC::Dirichlet;
        ax[a].hi = neumann[a][1] ? SideBC::Neumann : SideBC::Dirichlet;
    }
    return BoxShape(g.dim(), ax, g.h());
}

// ---------------------------------------------------------------------------
// Separable transfers
// ---------------------------------------------------------------------------

namespace {

std::array<int, 3> counts_of(const BoxShape& s) { return {s.count(0), s.count(1), s.count(2)}; }

/// Applies a 1D line kernel along `axis`, mapping an array of extents `din`
/// to one of extents `dout` (only the `axis` extent differs).
template <class Kernel>
void along_axis(const std::vector<double>& in, const std::array<int, 3>& din, std::vector<double>& out,
                const std::array<int, 3>& dout, int axis, Kernel&& kernel) {
    out.assign(static_cast<std::size_t>(dout[0]) * dout[1] * dout[2], 0.0);
    const std::array<std::ptrdiff_t, 3> sin{1, din[0], static_cast<std::ptrdiff_t>(din[0]) * din[1]};
    const std::array<std::ptrdiff_t, 3> sout{1, dout[0], static_cast<std::ptrdiff_t>(dout[0]) * dout[1]};
    int o1 = (axis + 1) % 3, o2 = (axis + 2) % 3;
    for (int b = 0; b < din[o2]; ++b)
        for (int a = 0; a < din[o1]; ++a) {
            const double* pin = in.data() + a * sin[o1] + b * sin[o2];
            double* pout = out.data() + a * sout[o1] + b * sout[o2];
            kernel(pin, sin[axis], pout, sout[axis]);
        }
}

}  // namespace

void restrict_residual(const BoxShape& fine, const BoxShape& coarse, std::span<const double> rf,
                       std::span<double> rc) {
    std::vector<double> cur(rf.begin(), rf.end()), next;
    std::array<int, 3> dims = counts_of(fine);
    for (int a = 0; a < fine.dim(); ++a) {
        std::array<int, 3> dn = dims;
        dn[a] = coarse.count(a);
        const AxisSpec& sf = fine.axis(a);
        const AxisSpec& sc = coarse.axis(a);
        along_axis(cur, dims, next, dn, a, [&](const double* in, std::ptrdiff_t si, double* out, std::ptrdiff_t so) {
            if (sf.layout == AxisLayout::Vertex) {
                const int nc = sc.n;
                for (int I = 1; I < nc; ++I)
                    out[I * so] = 0.25 * in[(2 * I - 1) * si] + 0.5 * in[2 * I * si] + 0.25 * in[(2 * I + 1) * si];
                out[0] = sf.lo == SideBC::Neumann ? 0.5 * (in[0] + in[si]) : 0.0;
                const int nf = sf.n;
                out[nc * so] = sf.hi == SideBC::Neumann ? 0.5 * (in[nf * si] + in[(nf - 1) * si]) : 0.0;
            } else {
                for (int J = 1; J <= sc.n; ++J) out[J * so] = 0.5 * (in[(2 * J - 1) * si] + in[2 * J * si]);
                out[0] = 0.0;
                out[(sc.n + 1) * so] = 0.0;
            }
        });
        cur.swap(next);
        dims = dn;
    }
    std::copy(cur.begin(), cur.end(), rc.begin());
}

void prolong_add(const BoxShape& coarse, const BoxShape& fine, std::span<const double> ec, std::span<double> uf) {
    std::vector<double> cur(ec.begin(), ec.end()), next;
    std::array<int, 3> dims = counts_of(coarse);
    for (int a = 0; a < fine.dim(); ++a) {
        std::array<int, 3> dn = dims;
        dn[a] = fine.count(a);
        const AxisSpec& sc = coarse.axis(a);
        along_axis(cur, dims, next, dn, a, [&](const double* in, std::ptrdiff_t si, double* out, std::ptrdiff_t so) {
            if (sc.layout == AxisLayout::Vertex) {
                for (int I = 0; I < sc.n; ++I) {
                    out[2 * I * so] = in[I * si];
                    out[(2 * I + 1) * so] = 0.5 * (in[I * si] + in[(I + 1) * si]);
                }
                out[2 * sc.n * so] = in[sc.n * si];
            } else {
                const int n = sc.n;
                for (int J = 1; J <= n; ++J) {
                    const double c = in[J * si];
                    const double lo = J > 1 ? in[(J - 1) * si] : (sc.lo == SideBC::Neumann ? c : -c);
                    const double hi = J < n ? in[(J + 1) * si] : (sc.hi == SideBC::Neumann ? c : -c);
                    out[(2 * J - 1) * so] = 0.75 * c + 0.25 * lo;
                    out[2 * J * so] = 0.75 * c + 0.25 * hi;
                }
            }
        });
        cur.swap(next);
        dims = dn;
    }
    for (std::size_t i = 0; i < fine.size(); ++i)
        if (fine.unknown(fine.coords(i))) uf[i] += cur[i];
}

namespace {

bool boundary_slot(const BoxShape& s, const std::array<int, 3>& c) {
    for (int a = 0; a < s.dim(); ++a) {
        if (c[a] == 0 || c[a] == s.count(a) - 1) return true;
    }
    return false;
}

int injection_index(const BoxShape& fine, const BoxShape& coarse, int a, int C) {
    if (a >= fine.dim()) return 0;
    if (coarse.axis(a).layout == AxisLayout::Vertex) return 2 * C;
    if (C == 0) return 0;
    if (C == coarse.axis(a).n + 1) return fine.axis(a).n + 1;
    return 2 * C;
}

}  // namespace

void restrict_coefficient(const BoxShape& fine, const BoxShape& coarse, std::span<const double> cf,
                          std::span<double> cc) {
    std::vector<double> cur(cf.begin(), cf.end()), next;
    std::array<int, 3> dims = counts_of(fine);
    for (int a = 0; a < fine.dim(); ++a) {
        std::array<int, 3> dn = dims;
        dn[a] = coarse.count(a);
        const AxisSpec& sf = fine.axis(a);
        const AxisSpec& sc = coarse.axis(a);
        along_axis(cur, dims, next, dn, a, [&](const double* in, std::ptrdiff_t si, double* out, std::ptrdiff_t so) {
            if (sf.layout == AxisLayout::Vertex) {
                for (int I = 1; I < sc.n; ++I)
                    out[I * so] = 0.25 * in[(2 * I - 1) * si] + 0.5 * in[2 * I * si] + 0.25 * in[(2 * I + 1) * si];
                out[0] = in[0];
                out[sc.n * so] = in[sf.n * si];
            } else {
                for (int J = 1; J <= sc.n; ++J) out[J * so] = 0.5 * (in[(2 * J - 1) * si] + in[2 * J * si]);
                out[0] = in[0];
                out[(sc.n + 1) * so] = in[(sf.n + 1) * si];
            }
        });
        cur.swap(next);
        dims = dn;
    }
    std::copy(cur.begin(), cur.end(), cc.begin());
    // Boundary slots take the coincident fine value.
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const auto c = coarse.coords(i);
        if (!boundary_slot(coarse, c)) continue;
        const std::size_t fi = fine.index(injection_index(fine, coarse, 0, c[0]), injection_index(fine, coarse, 1, c[1]),
                                          injection_index(fine, coarse, 2, c[2]));
        cc[i] = cf[fi];
    }
}

Grid coarsen_grid(const Grid& fine) {
    for (int a = 0; a < fine.dim(); ++a)
        if (fine.intervals(a) % 2 != 0) throw std::invalid_argument("grid is not divisible for coarsening");
    Grid g(fine.dim(), {fine.extent(0), fine.extent(1), fine.extent(2)}, 2.0 * fine.h());
    for (int a = 0; a < fine.dim(); ++a)
        for (int s = 0; s < 2; ++s) g.set_face(a, s, fine.face(a, s));
    return g;
}

Field restrict_full_weighting(const Field& fine) {
    const Grid& gf = fine.grid();
    const Grid gc = coarsen_grid(gf);
    Field out(gc, fine.components());
    const int D = gf.dim();
    for (std::size_t ic = 0; ic < gc.size(); ++ic) {
        const auto C = gc.coords(ic);
        const std::size_t centre = gf.index(2 * C[0], 2 * C[1], 2 * C[2]);
        if (gc.on_boundary(C)) {
            for (int c = 0; c < fine.components(); ++c) out(c, ic) = fine(c, centre);
            continue;
        }
        for (int c = 0; c < fine.components(); ++c) {
            double s = 0.0;
            for (int dk = (D > 2 ? -1 : 0); dk <= (D > 2 ? 1 : 0); ++dk)
                for (int dj = (D > 1 ? -1 : 0); dj <= (D > 1 ? 1 : 0); ++dj)
                    for (int di = -1; di <= 1; ++di) {
                        const double w = (di == 0 ? 0.5 : 0.25) * (D > 1 ? (dj == 0 ? 0.5 : 0.25) : 1.0) *
                                         (D > 2 ? (dk == 0 ? 0.5 : 0.25) : 1.0);
                        s += w * fine(c, gf.index(2 * C[0] + di, 2 * C[1] + dj, 2 * C[2] + dk));
                    }
            out(c, ic) = s;
        }
    }
    return out;
}

Field interpolate_linear(const Field& coarse, const Grid& fine) {
    const Grid& gc = coarse.grid();
    for (int a = 0; a < fine.dim(); ++a)
        if (fine.intervals(a) != 2 * gc.intervals(a)) throw std::invalid_argument("interpolate_linear: grid mismatch");
    Field out(fine, coarse.components());
    for (std::size_t i = 0; i < fine.size(); ++i) {
        const auto c = fine.coords(i);
        std::array<std::array<int, 2>, 3> idx{};
        std::array<std::array<double, 2>, 3> w{};
        std::array<int, 3> cnt{1, 1, 1};
        for (int a = 0; a < 3; ++a) {
            if (a < fine.dim() && c[a] % 2 == 1) {
                idx[a] = {(c[a] - 1) / 2, (c[a] + 1) / 2};
                w[a] = {0.5, 0.5};
                cnt[a] = 2;
            } else {
                idx[a] = {c[a] / 2, 0};
                w[a] = {1.0, 0.0};
            }
        }
        for (int comp = 0; comp < coarse.components(); ++comp) {
            double s = 0.0;
            for (int k = 0; k < cnt[2]; ++k)
                for (int j = 0; j < cnt[1]; ++j)
                    for (int ii = 0; ii < cnt[0]; ++ii)
                        s += w[0][ii] * w[1][j] * w[2][k] * coarse(comp, gc.index(idx[0][ii], idx[1][j], idx[2][k]));
            out(comp, i) = s;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// ScalarOperator
// ---------------------------------------------------------------------------

namespace {

Stencil build_scalar_stencil(const BoxShape& s, const ScalarCoefficients& co) {
    Stencil st;
    const int D = s.dim();
    st.width = 2 * D;
    const double ih2 = 1.0 / (s.spacing() * s.spacing());
    std::vector<std::size_t> black;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = s.coords(i);
        if (!s.unknown(c)) continue;
        if ((c[0] + c[1] + c[2]) % 2 == 0)
            st.node.push_back(i);
        else
            black.push_back(i);
    }
    st.nred = st.node.size();
    st.node.insert(st.node.end(), black.begin(), black.end());
    const std::size_t nu = st.node.size();
    st.nbr.assign(nu * st.width, 0);
    st.coef.assign(nu * st.width, 0.0);
    st.diag.assign(nu, 0.0);
    for (std::size_t q = 0; q < nu; ++q) {
        const std::size_t i = st.node[q];
        const auto c = s.coords(i);
        double diag = co.shift.empty() ? 0.0 : co.shift[i];
        for (int a = 0; a < D; ++a) {
            const AxisSpec& ax = s.axis(a);
            const std::ptrdiff_t sa = s.stride(a);
            for (int side = 0; side < 2; ++side) {
                const int dir = side == 0 ? -1 : 1;
                const std::size_t slot = q * st.width + 2 * a + side;
                st.nbr[slot] = i;
                const int ni = c[a] + dir;
                if (ax.layout == AxisLayout::Vertex) {
                    double w;
                    std::size_t nb;
                    if (ni < 0 || ni > ax.n) {
                        // Reflect: the missing face mirrors the one on the other side.
                        nb = i - dir * sa;
                        w = dir < 0 ? co.face[a][i] : co.face[a][i - sa];
                    } else {
                        nb = i + dir * sa;
                        w = dir < 0 ? co.face[a][i - sa] : co.face[a][i];
                    }
                    st.nbr[slot] = nb;
                    st.coef[slot] = w * ih2;
                    diag += w * ih2;
                } else {
                    const std::size_t nb = i + dir * sa;
                    const double w = dir < 0 ? co.face[a][i - sa] : co.face[a][i];
                    if (ni == 0 || ni == ax.n + 1) {
                        const SideBC bc = ni == 0 ? ax.lo : ax.hi;
                        if (bc == SideBC::Dirichlet) {
                            st.nbr[slot] = nb;
                            st.coef[slot] = 2.0 * w * ih2;
                            diag += 2.0 * w * ih2;
                        }
                    } else {
                        st.nbr[slot] = nb;
                        st.coef[slot] = w * ih2;
                        diag += w * ih2;
                    }
                }
            }
        }
        st.diag[q] = diag;
    }
    return st;
}

struct TransverseWeights {
    std::array<int, 3> idx{};
    std::array<double, 3> w{};
    int n = 0;
};

TransverseWeights transverse(const BoxShape& fine, const BoxShape& coarse, int b, int C) {
    TransverseWeights t;
    if (b >= fine.dim()) {
        t.idx[0] = 0;
        t.w[0] = 1.0;
        t.n = 1;
        return t;
    }
    if (coarse.axis(b).layout == AxisLayout::Vertex) {
        const int f = 2 * C;
        double tot = 0.0;
        for (int d = -1; d <= 1; ++d) {
            const int fi = f + d;
            if (fi < 0 || fi > fine.axis(b).n) continue;
            t.idx[t.n] = fi;
            t.w[t.n] = d == 0 ? 0.5 : 0.25;
            tot += t.w[t.n];
            ++t.n;
        }
        for (int m = 0; m < t.n; ++m) t.w[m] /= tot;
    } else {
        const int nc = coarse.axis(b).n;
        if (C == 0) {
            t.idx[0] = 0;
            t.w[0] = 1.0;
            t.n = 1;
        } else if (C == nc + 1) {
            t.idx[0] = fine.axis(b).n + 1;
            t.w[0] = 1.0;
            t.n = 1;
        } else {
            t.idx[0] = 2 * C - 1;
            t.idx[1] = 2 * C;
            t.w[0] = t.w[1] = 0.5;
            t.n = 2;
        }
    }
    return t;
}

}  // namespace

ScalarOperator::ScalarOperator(const BoxShape& shape, ScalarCoefficients coeffs)
    : shape_(shape), coeffs_(std::move(coeffs)) {
    for (int a = 0; a < shape_.dim(); ++a)
        if (coeffs_.face[a].size() != shape_.size()) throw std::invalid_argument("face coefficient size mismatch");
    if (!coeffs_.shift.empty() && coeffs_.shift.size() != shape_.size())
        throw std::invalid_argument("shift coefficient size mismatch");
    st_ = build_scalar_stencil(shape_, coeffs_);
}

void ScalarOperator::relax(std::span<double> u, std::span<const double> f, int sweeps) const {
    const int w = st_.width;
    const std::size_t nu = st_.node.size();
    for (int s = 0; s < sweeps; ++s) {
        for (int pass = 0; pass < 2; ++pass) {
            const std::size_t b = pass == 0 ? 0 : st_.nred, e = pass == 0 ? st_.nred : nu;
            for (std::size_t q = b; q < e; ++q) {
                const std::size_t i = st_.node[q];
                double acc = f[i];
                const std::size_t* nb = &st_.nbr[q * w];
                const double* cf = &st_.coef[q * w];
                for (int m = 0; m < w; ++m) acc += cf[m] * u[nb[m]];
                u[i] = acc / st_.diag[q];
            }
        }
    }
}

void ScalarOperator::residual(std::span<const double> u, std::span<const double> f, std::span<double> r) const {
    std::fill(r.begin(), r.end(), 0.0);
    const int w = st_.width;
    for (std::size_t q = 0; q < st_.node.size(); ++q) {
        const std::size_t i = st_.node[q];
        double au = st_.diag[q] * u[i];
        for (int m = 0; m < w; ++m) au -= st_.coef[q * w + m] * u[st_.nbr[q * w + m]];
        r[i] = f[i] - au;
    }
}

std::unique_ptr<LevelOperator> ScalarOperator::coarsen(double gamma) const {
    const BoxShape cs = shape_.coarsen();
    ScalarCoefficients cc;
    if (!coeffs_.shift.empty()) {
        cc.shift.assign(cs.size(), 0.0);
        restrict_coefficient(shape_, cs, coeffs_.shift, cc.shift);
    }
    const int D = shape_.dim();
    for (int a = 0; a < D; ++a) {
        cc.face[a].assign(cs.size(), 0.0);
        const auto& ff = coeffs_.face[a];
        for (std::size_t ic = 0; ic < cs.size(); ++ic) {
            const auto C = cs.coords(ic);
            if (C[a] >= cs.count(a) - 1) continue;
            const bool vertex = cs.axis(a).layout == AxisLayout::Vertex;
            std::array<TransverseWeights, 3> tw{};
            for (int b = 0; b < 3; ++b)
                if (b != a) tw[b] = transverse(shape_, cs, b, C[b]);
            double val = 0.0;
            const int o1 = (a + 1) % 3, o2 = (a + 2) % 3;
            for (int m2 = 0; m2 < tw[o2].n; ++m2)
                for (int m1 = 0; m1 < tw[o1].n; ++m1) {
                    std::array<int, 3> fc{};
                    fc[o1] = tw[o1].idx[m1];
                    fc[o2] = tw[o2].idx[m2];
                    double v;
                    if (vertex) {
                        fc[a] = 2 * C[a];
                        const double f1 = ff[shape_.index(fc[0], fc[1], fc[2])];
                        fc[a] = 2 * C[a] + 1;
                        const double f2 = ff[shape_.index(fc[0], fc[1], fc[2])];
                        v = (f1 > 0.0 && f2 > 0.0) ? 2.0 * f1 * f2 / (f1 + f2) : 0.0;
                    } else {
                        fc[a] = 2 * C[a];
                        v = ff[shape_.index(fc[0], fc[1], fc[2])];
                    }
                    val += tw[o1].w[m1] * tw[o2].w[m2] * v;
                }
            cc.face[a][ic] = gamma * val;
        }
    }
    return std::make_unique<ScalarOperator>(cs, std::move(cc));
}

// ---------------------------------------------------------------------------
// Multigrid driver
// ---------------------------------------------------------------------------

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Multigrid::Multigrid(std::unique_ptr<LevelOperator> finest, const MultigridOptions& opt) : opt_(opt) {
    if (opt.levels < 1) throw std::invalid_argument("multigrid needs at least one level");
    if (!(opt.tol > 0.0)) throw std::invalid_argument("multigrid tolerance must be positive");
    ops_.push_back(std::move(finest));
    // Level l carries gamma_l times the plain restriction of the fine coefficient. coarsen() scales the
    // coefficient linearly, so the ratio to the previous level's factor keeps the scalings from compounding.
    double prev = 1.0;
    while (static_cast<int>(ops_.size()) < opt.levels && ops_.back()->shape().can_coarsen()) {
        const std::size_t l = ops_.size();
        const double g = opt.gamma.empty() ? 1.0 : opt.gamma[std::min(l - 1, opt.gamma.size() - 1)];
        if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("coarse-grid scaling gamma must lie in (0, 1]");
        ops_.push_back(ops_.back()->coarsen(g / prev));
        prev = g;
    }
    for (const auto& op : ops_) {
        const std::size_t n = op->shape().size() * static_cast<std::size_t>(op->components());
        u_.emplace_back(n, 0.0);
        f_.emplace_back(n, 0.0);
        r_.emplace_back(n, 0.0);
    }
}

void Multigrid::vcycle(int level, std::span<double> u, std::span<const double> f, double& work) const {
    const LevelOperator& op = *ops_[level];
    const double cost = std::pow(2.0, -static_cast<double>(op.shape().dim() * level));
    if (level + 1 == levels()) {
        op.relax(u, f, opt_.coarse_sweeps);
        work += opt_.coarse_sweeps * cost;
        return;
    }
    op.relax(u, f, opt_.nu1);
    work += opt_.nu1 * cost;
    std::span<double> r(r_[level]);
    op.residual(u, f, r);
    const LevelOperator& cop = *ops_[level + 1];
    const std::size_t nf = op.shape().size(), nc = cop.shape().size();
    std::span<double> fc(f_[level + 1]), uc(u_[level + 1]);
    for (int c = 0; c < op.components(); ++c)
        restrict_residual(op.shape(), cop.shape(), r.subspan(c * nf, nf), fc.subspan(c * nc, nc));
    std::fill(uc.begin(), uc.end(), 0.0);
    vcycle(level + 1, uc, fc, work);
    for (int c = 0; c < op.components(); ++c)
        prolong_add(cop.shape(), op.shape(), uc.subspan(c * nc, nc), u.subspan(c * nf, nf));
    op.relax(u, f, opt_.nu2);
    work += opt_.nu2 * cost;
}

double Multigrid::reference_norm(std::span<const double> u, std::span<const double> f) const {
    const LevelOperator& op = *ops_[0];
    const BoxShape& s = op.shape();
    std::vector<double> u0(u.begin(), u.end());
    for (int c = 0; c < op.components(); ++c)
        for (std::size_t i = 0; i < s.size(); ++i)
            if (s.unknown(s.coords(i))) u0[c * s.size() + i] = 0.0;
    std::vector<double> r(u.size());
    op.residual(u0, f, r);
    return max_abs(r);
}

double Multigrid::residual_norm(std::span<const double> u, std::span<const double> f) const {
    std::span<double> r(r_[0]);
    ops_[0]->residual(u, f, r);
    return max_abs(r);
}

double Multigrid::cycle(std::span<double> u, std::span<const double> f) const {
    double work = 0.0;
    vcycle(0, u, f, work);
    return work;
}

namespace {

std::string describe_failure(const SolveStats& st, const char* what) {
    std::ostringstream os;
    os << what << " after " << st.v_cycles << " V-cycles; relative residual history:";
    const std::size_t first = st.history.size() > 12 ? st.history.size() - 12 : 0;
    if (first > 0) os << " ...";
    for (std::size_t i = first; i < st.history.size(); ++i) os << ' ' << st.history[i];
    return os.str();
}

}  // namespace

SolveStats Multigrid::solve(std::span<double> u, std::span<const double> f) const {
    ConvergenceMonitor mon(opt_, reference_norm(u, f), residual_norm(u, f), levels());
    while (!mon.done()) {
        const double w = cycle(u, f);
        mon.record(residual_norm(u, f), w);
    }
    SolveStats st = mon.finish();
    if (!st.converged && opt_.throw_on_failure && opt_.max_cycles > 0) {
        if (st.stagnated) throw SolverStagnation(describe_failure(st, "multigrid stagnated"), st);
        throw SolverError(describe_failure(st, "multigrid did not reach tolerance"), st);
    }
    return st;
}

ConvergenceMonitor::ConvergenceMonitor(const MultigridOptions& opt, double reference, double initial_residual,
                                       int levels)
    : opt_(opt), ref_(opt.reference > 0.0 ? opt.reference : reference) {
    const double rel = ref_ > 0.0 ? initial_residual / ref_ : initial_residual;
    st_.initial_residual = rel;
    st_.final_residual = rel;
    st_.history.push_back(rel);
    st_.levels = levels;
    best_ = std::numeric_limits<double>::infinity();
}

bool ConvergenceMonitor::done() const {
    if (st_.v_cycles >= opt_.max_cycles) return true;
    if (st_.final_residual <= opt_.tol && st_.v_cycles >= opt_.min_cycles) return true;
    return st_.stagnated;
}

void ConvergenceMonitor::record(double residual_norm, double work) {
    const double rel = ref_ > 0.0 ? residual_norm / ref_ : residual_norm;
    ++st_.v_cycles;
    st_.work_units += work;
    st_.final_residual = rel;
    st_.history.push_back(rel);
    if (rel < 0.999 * best_) {
        best_ = rel;
        since_best_ = 0;
    } else if (++since_best_ >= 8 && rel > opt_.tol) {
        st_.stagnated = true;
    }
}

SolveStats ConvergenceMonitor::finish() const {
    SolveStats st = st_;
    st.converged = st.final_residual <= opt_.tol;
    return st;
}

}  // namespace ibfilm
