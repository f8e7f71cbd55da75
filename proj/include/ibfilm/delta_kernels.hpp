#pragma once

#include <span>
#include <string_view>

namespace ibfilm {

/// One-dimensional kernel shape used in the regularized delta.
enum class Kernel { Phi1, Phi2 };

Kernel parse_kernel(std::string_view name);
std::string_view kernel_name(Kernel k);

/// Half-width of the kernel support in units of the scale.
inline constexpr double kKernelSupport = 2.0;

/// Peskin's 4-point kernel.
double phi1(double r);
/// Cosine kernel (1/4)(1 + cos(pi r / 2)) on |r| <= 2.
double phi2(double r);
double phi(Kernel k, double r);

/// Tensor-product delta: scale^-D * prod_i phi(x_i / scale).
/// Throws if scale <= 0.
double delta_tilde(Kernel k, std::span<const double> x, double scale);

struct KernelErrors {
    double unity = 0.0;   ///< max_X |sum delta h - 1|
    double moment = 0.0;  ///< max_X |sum (x - X) delta h|
};

/// 1D lattice-sum errors of the omega-scaled kernel on a lattice of spacing h,
/// maximized over X in [0, h] sampled at `samples` interior points plus endpoints.
KernelErrors kernel_errors(Kernel k, double omega, double h, int samples = 1024);

double epsilon_unity(Kernel k, double omega, double h);
double epsilon_mom(Kernel k, double omega, double h);

}  // namespace ibfilm
