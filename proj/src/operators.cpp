#include "ibfilm/operators.hpp"

#include <stdexcept>

namespace ibfilm {

ViscousOperator::ViscousOperator(const BoxShape& shape, std::vector<double> a, std::vector<double> shift, bool coupled)
    : shape_(shape), a_(std::move(a)), shift_(std::move(shift)), coupled_(coupled) {
    if (a_.size() != shape_.size() || shift_.size() != shape_.size())
        throw std::invalid_argument("viscous operator coefficient size mismatch");
    std::vector<std::size_t> black;
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        const auto c = shape_.coords(i);
        if (!shape_.unknown(c)) continue;
        ((c[0] + c[1] + c[2]) % 2 == 0 ? node_ : black).push_back(i);
    }
    nred_ = node_.size();
    node_.insert(node_.end(), black.begin(), black.end());
    const int D = shape_.dim();
    off_.resize(node_.size() * 2 * D);
    for (std::size_t q = 0; q < node_.size(); ++q) {
        const auto c = shape_.coords(node_[q]);
        for (int ax = 0; ax < D; ++ax) {
            const std::int64_t s = shape_.stride(ax);
            const int n = shape_.axis(ax).n;
            off_[q * 2 * D + 2 * ax] = c[ax] > 0 ? -s : s;
            off_[q * 2 * D + 2 * ax + 1] = c[ax] < n ? s : -s;
        }
    }
}

double ViscousOperator::diagonal(std::size_t q, int k) const {
    const int D = shape_.dim();
    const std::size_t i = node_[q];
    const double ih2 = 1.0 / (shape_.spacing() * shape_.spacing());
    const std::int64_t* o = &off_[q * 2 * D];
    double d = shift_[i];
    for (int ax = 0; ax < D; ++ax) {
        const double m = (coupled_ && ax == k) ? 2.0 : 1.0;
        const double wm = 0.5 * (a_[i] + a_[i + o[2 * ax]]);
        const double wp = 0.5 * (a_[i] + a_[i + o[2 * ax + 1]]);
        d += m * (wm + wp) * ih2;
    }
    return d;
}

double ViscousOperator::offdiag(std::span<const double> u, std::size_t q, int k) const {
    const int D = shape_.dim();
    const std::size_t n = shape_.size();
    const std::size_t i = node_[q];
    const double ih2 = 1.0 / (shape_.spacing() * shape_.spacing());
    const std::int64_t* o = &off_[q * 2 * D];
    const double* uk = u.data() + k * n;
    double s = 0.0;
    for (int ax = 0; ax < D; ++ax) {
        const double m = (coupled_ && ax == k) ? 2.0 : 1.0;
        const std::size_t im = i + o[2 * ax], ip = i + o[2 * ax + 1];
        s += m * (0.5 * (a_[i] + a_[im]) * uk[im] + 0.5 * (a_[i] + a_[ip]) * uk[ip]) * ih2;
    }
    if (coupled_) {
        const std::int64_t km = o[2 * k], kp = o[2 * k + 1];
        for (int ax = 0; ax < D; ++ax) {
            if (ax == k) continue;
            const double* ua = u.data() + ax * n;
            const std::size_t im = i + o[2 * ax], ip = i + o[2 * ax + 1];
            s += 0.25 * ih2 * (a_[ip] * (ua[ip + kp] - ua[ip + km]) - a_[im] * (ua[im + kp] - ua[im + km]));
        }
    }
    return s;
}

void ViscousOperator::relax(std::span<double> u, std::span<const double> f, int sweeps) const {
    const int D = shape_.dim();
    const std::size_t n = shape_.size();
    for (int s = 0; s < sweeps; ++s)
        for (int pass = 0; pass < 2; ++pass) {
            const std::size_t b = pass == 0 ? 0 : nred_, e = pass == 0 ? nred_ : node_.size();
            for (std::size_t q = b; q < e; ++q) {
                const std::size_t i = node_[q];
                for (int k = 0; k < D; ++k) u[k * n + i] = (f[k * n + i] + offdiag(u, q, k)) / diagonal(q, k);
            }
        }
}

void ViscousOperator::apply(std::span<const double> u, std::span<double> out) const {
    const std::size_t n = shape_.size();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t q = 0; q < node_.size(); ++q) {
        const std::size_t i = node_[q];
        for (int k = 0; k < shape_.dim(); ++k)
            out[k * n + i] = diagonal(q, k) * u[k * n + i] - offdiag(u, q, k);
    }
}

void ViscousOperator::residual(std::span<const double> u, std::span<const double> f, std::span<double> r) const {
    const std::size_t n = shape_.size();
    std::fill(r.begin(), r.end(), 0.0);
    for (std::size_t q = 0; q < node_.size(); ++q) {
        const std::size_t i = node_[q];
        for (int k = 0; k < shape_.dim(); ++k)
            r[k * n + i] = f[k * n + i] - (diagonal(q, k) * u[k * n + i] - offdiag(u, q, k));
    }
}

std::unique_ptr<LevelOperator> ViscousOperator::coarsen(double gamma) const {
    const BoxShape cs = shape_.coarsen();
    std::vector<double> a(cs.size()), c0(cs.size());
    restrict_coefficient(shape_, cs, a_, a);
    restrict_coefficient(shape_, cs, shift_, c0);
    for (double& x : a) x *= gamma;
    return std::make_unique<ViscousOperator>(cs, std::move(a), std::move(c0), coupled_);
}

}  // namespace ibfilm
