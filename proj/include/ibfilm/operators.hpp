#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "ibfilm/multigrid.hpp"

namespace ibfilm {

/// Implicit momentum operator on a vertex box shape, one block per velocity
/// component:
///   (A u)_k = shift u_k - D0.(a grad u_k) - D0.(a D0_k u)      (coupled)
///   (A u)_k = shift u_k - D0.(a grad u_k)                       (uncoupled)
/// `a` is the nodal diffusion coefficient (viscosity over Re) and faces use
/// arithmetic means. Neumann vertex sides are mirrored.
class ViscousOperator final : public LevelOperator {
public:
    ViscousOperator(const BoxShape& shape, std::vector<double> a, std::vector<double> shift, bool coupled);

    const BoxShape& shape() const override { return shape_; }
    int components() const override { return shape_.dim(); }
    /// Point-block red-black Gauss-Seidel: all components updated per point.
    void relax(std::span<double> u, std::span<const double> f, int sweeps) const override;
    void residual(std::span<const double> u, std::span<const double> f, std::span<double> r) const override;
    std::unique_ptr<LevelOperator> coarsen(double gamma) const override;

    /// out = A u on unknowns, zero on fixed slots.
    void apply(std::span<const double> u, std::span<double> out) const;

    bool coupled() const { return coupled_; }
    const std::vector<double>& diffusion() const { return a_; }
    const std::vector<double>& shift() const { return shift_; }

private:
    // Off-diagonal part (sum of coef*neighbour) and diagonal of row (q, k).
    double offdiag(std::span<const double> u, std::size_t q, int k) const;
    double diagonal(std::size_t q, int k) const;

    BoxShape shape_;
    std::vector<double> a_, shift_;
    bool coupled_;
    std::vector<std::size_t> node_;        // reds first
    std::size_t nred_ = 0;
    std::vector<std::int64_t> off_;        // per unknown: (minus, plus) offsets per axis, reflected
};

}  // namespace ibfilm
