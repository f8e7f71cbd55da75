#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ibfilm {

enum class BoundaryKind { Inflow, Outflow, WallTop, WallBottom, WallSide };

std::string boundary_kind_name(BoundaryKind k);

/// Uniform colocated lattice on [0, extent_0] x ... with nodes at i*h.
/// Linear index: x varies fastest, then y, then z.
class Grid {
public:
    Grid() = default;
    /// All faces are classified as side walls.
    Grid(int dim, std::array<double, 3> extent, double h);

    /// Channel (2D) or square duct (3D): flow along x in 2D and along z in 3D,
    /// inflow at the low end, outflow at the high end, bottom wall at y = 0.
    static Grid channel(int dim, std::array<double, 3> extent, double h);

    int dim() const { return dim_; }
    double h() const { return h_; }
    double extent(int axis) const { return extent_[axis]; }
    int intervals(int axis) const { return axis < dim_ ? n_[axis] : 0; }
    int points(int axis) const { return axis < dim_ ? n_[axis] + 1 : 1; }
    std::size_t size() const { return size_; }
    std::ptrdiff_t stride(int axis) const { return stride_[axis]; }

    std::size_t index(int i, int j = 0, int k = 0) const {
        return static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * stride_[1] +
               static_cast<std::size_t>(k) * stride_[2];
    }
    std::array<int, 3> coords(std::size_t idx) const;
    double coord(int i) const { return static_cast<double>(i) * h_; }

    BoundaryKind face(int axis, int side) const { return faces_[axis][side]; }
    void set_face(int axis, int side, BoundaryKind kind) { faces_[axis][side] = kind; }
    /// Axis whose low face is the inflow, or -1.
    int flow_axis() const;

    /// Faces where operators are also evaluated on the boundary nodes by
    /// reflecting the missing neighbour (Neumann faces).
    bool mirrored(int axis, int side) const { return faces_[axis][side] == BoundaryKind::Outflow; }

    bool on_boundary(const std::array<int, 3>& c) const;
    /// Node where difference operators are evaluated: not on a boundary,
    /// or only on mirrored faces.
    bool active(const std::array<int, 3>& c) const;

    /// Neighbour index one step along `axis` in direction `dir` (+1/-1),
    /// reflected across mirrored faces. Caller guarantees validity.
    std::size_t neighbor(const std::array<int, 3>& c, int axis, int dir) const;

    bool same_shape(const Grid& o) const;

private:
    int dim_ = 0;
    double h_ = 0.0;
    std::array<double, 3> extent_{0, 0, 0};
    std::array<int, 3> n_{0, 0, 0};
    std::array<std::ptrdiff_t, 3> stride_{1, 0, 0};
    std::size_t size_ = 0;
    std::array<std::array<BoundaryKind, 2>, 3> faces_{};
};

/// Scalar or vector grid function; one contiguous block per component.
class Field {
public:
    Field() = default;
    Field(const Grid& g, int components, double value = 0.0);

    const Grid& grid() const { return grid_; }
    int components() const { return ncomp_; }
    std::size_t size() const { return grid_.size(); }

    std::span<double> comp(int c) { return {data_.data() + c * grid_.size(), grid_.size()}; }
    std::span<const double> comp(int c) const { return {data_.data() + c * grid_.size(), grid_.size()}; }
    double& operator()(int c, std::size_t idx) { return data_[c * grid_.size() + idx]; }
    double operator()(int c, std::size_t idx) const { return data_[c * grid_.size() + idx]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }
    void fill(double v);

private:
    Grid grid_;
    int ncomp_ = 0;
    std::vector<double> data_;
};

// Difference operators. Results are zero on nodes that are not active.

/// (2D+1)-point Laplacian.
Field laplacian(const Field& f, int comp = 0);
/// Wide central difference (f(x+h e) - f(x-h e)) / 2h.
Field central_diff(const Field& f, int axis, int comp = 0);
/// Flux form with face coefficients from arithmetic means of nodal a.
Field div_a_grad(const Field& a, const Field& f, int comp = 0);
/// D0 . (a D0_k u): face-averaged a on the k-k term, wide differences with
/// nodal a on the off-diagonal terms.
Field div_a_partialT(const Field& a, const Field& u, int k);
/// Wide-stencil divergence of a vector field.
Field divergence(const Field& u);

/// (sum |w|^p h^D)^(1/p) with pointwise Euclidean magnitude and trapezoid
/// weights (half per boundary axis); p = inf gives max.
double grid_pnorm(const Field& f, double p);
/// Same, restricted to active nodes only.
double grid_pnorm_active(const Field& f, double p);

using Point = std::array<double, 3>;

/// Lagrangian p-norm with weight d0^D.
double lagrangian_pnorm(std::span<const Point> X, double p, double d0, int dim);

void check_positive(const Field& a, const char* what);

}  // namespace ibfilm
