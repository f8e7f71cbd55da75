#include "ibfilm/delta_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ibfilm {

Kernel parse_kernel(std::string_view name) {
    if (name == "phi1") return Kernel::Phi1;
    if (name == "phi2") return Kernel::Phi2;
    throw std::invalid_argument("unknown kernel '" + std::string(name) + "' (expected phi1 or phi2)");
}

std::string_view kernel_name(Kernel k) { return k == Kernel::Phi1 ? "phi1" : "phi2"; }

double phi1(double r) {
    const double a = std::abs(r);
    if (a <= 1.0) return 0.125 * (3.0 - 2.0 * a + std::sqrt(1.0 + 4.0 * a - 4.0 * a * a));
    if (a <= 2.0) {
        // The radicand vanishes at a = 2; clamp rounding noise.
        const double rad = std::max(0.0, -7.0 + 12.0 * a - 4.0 * a * a);
        return 0.125 * (5.0 - 2.0 * a - std::sqrt(rad));
    }
    return 0.0;
}

double phi2(double r) {
    const double a = std::abs(r);
    if (a <= 2.0) return 0.25 * (1.0 + std::cos(0.5 * std::numbers::pi * a));
    return 0.0;
}

double phi(Kernel k, double r) { return k == Kernel::Phi1 ? phi1(r) : phi2(r); }

double delta_tilde(Kernel k, std::span<const double> x, double scale) {
    if (!(scale > 0.0)) throw std::invalid_argument("delta scale must be positive");
    double v = 1.0;
    for (double xi : x) {
        const double r = xi / scale;
        if (std::abs(r) >= kKernelSupport) return 0.0;
        v *= phi(k, r) / scale;
    }
    return v;
}

KernelErrors kernel_errors(Kernel k, double omega, double h, int samples) {
    if (!(h > 0.0) || !(omega > 0.0)) throw std::invalid_argument("kernel_errors: omega and h must be positive");
    KernelErrors e;
    const int reach = static_cast<int>(std::ceil(kKernelSupport * omega / h)) + 2;
    for (int s = 0; s <= samples + 1; ++s) {
        const double X = h * static_cast<double>(s) / static_cast<double>(samples + 1);
        double sum = 0.0, mom = 0.0;
        for (int j = -reach; j <= reach + 1; ++j) {
            const double d = static_cast<double>(j) * h - X;
            const double w = phi(k, d / omega) / omega * h;
            sum += w;
            mom += d * w;
        }
        e.unity = std::max(e.unity, std::abs(sum - 1.0));
        e.moment = std::max(e.moment, std::abs(mom));
    }
    return e;
}

double epsilon_unity(Kernel k, double omega, double h) { return kernel_errors(k, omega, h).unity; }
double epsilon_mom(Kernel k, double omega, double h) { return kernel_errors(k, omega, h).moment; }

}  // namespace ibfilm
