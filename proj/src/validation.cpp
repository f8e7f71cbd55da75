#include "ibfilm/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ibfilm/delta_kernels.hpp"
#include "ibfilm/multigrid.hpp"

namespace ibfilm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Field difference(const Field& a, const Field& b) {
    if (!a.grid().same_shape(b.grid()) || a.components() != b.components())
        throw std::invalid_argument("error norm: fields have different shapes");
    Field d = a;
    for (std::size_t i = 0; i < d.data().size(); ++i) d.data()[i] -= b.data()[i];
    return d;
}

}  // namespace

double temporal_error(const Field& a, const Field& b, double p) { return grid_pnorm(difference(a, b), p); }

double temporal_error(std::span<const Point> a, std::span<const Point> b, double p, double d0, int dim) {
    if (a.size() != b.size()) throw std::invalid_argument("error norm: node counts differ");
    std::vector<Point> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int k = 0; k < 3; ++k) d[i][k] = a[i][k] - b[i][k];
    return lagrangian_pnorm(d, p, d0, dim);
}

double spatial_error(const Field& coarse, const Field& fine, double p) {
    const Grid& gc = coarse.grid();
    const Grid& gf = fine.grid();
    if (gc.dim() != gf.dim() || std::abs(gc.h() - 2.0 * gf.h()) > 1e-12 * gc.h())
        throw std::invalid_argument("spatial error: fine grid must have half the mesh width");
    for (int a = 0; a < gc.dim(); ++a)
        if (gf.intervals(a) != 2 * gc.intervals(a)) throw std::invalid_argument("spatial error: extents differ");
    if (coarse.components() != fine.components()) throw std::invalid_argument("spatial error: component mismatch");
    const Field r = restrict_full_weighting(fine);
    Field d = coarse;
    for (std::size_t i = 0; i < d.data().size(); ++i) d.data()[i] -= r.data()[i];
    return grid_pnorm(d, p);
}

std::string Rate::str() const {
    if (!value) return "indeterminate";
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << *value;
    return os.str();
}

std::vector<Rate> convergence_rates(const std::vector<double>& e) {
    std::vector<Rate> out;
    for (std::size_t k = 0; k + 1 < e.size(); ++k) {
        Rate r;
        if (std::isfinite(e[k]) && std::isfinite(e[k + 1]) && e[k] > 0.0 && e[k + 1] > 0.0)
            r.value = std::log2(e[k] / e[k + 1]);
        out.push_back(r);
    }
    return out;
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& e) {
    if (h.size() != e.size() || h.size() < 2) throw std::invalid_argument("fitted_order: need two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double x = std::log2(1.0 / h[i]), y = std::log2(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RunResult run_to_end(const Scenario& s) {
    Simulation sim(s);
    RunResult r;
    r.summary = sim.run();
    r.valid = r.summary.completed && r.summary.stable;
    r.u = sim.state().u;
    r.X = sim.biofilm().X;
    return r;
}

RefinementReport run_refinement_study(StudyKind kind, const Scenario& base, const std::vector<double>& ladder) {
    if (ladder.size() < 3) throw std::invalid_argument("refinement study needs at least three rungs");
    const auto t0 = std::chrono::steady_clock::now();
    RefinementReport rep;
    rep.kind = kind;
    rep.ladder = ladder;
    rep.fingerprint = base.fingerprint();
    std::vector<RunResult> runs;
    for (double v : ladder) {
        Scenario s = base;
        (kind == StudyKind::Temporal ? s.dt : s.h) = v;
        finalize_scenario(s);
        runs.push_back(run_to_end(s));
        rep.valid.push_back(runs.back().valid);
        rep.notes.push_back(runs.back().summary.failure);
    }
    const double d0 = Simulation(base).biofilm().d0;
    for (std::size_t k = 0; k + 1 < runs.size(); ++k) {
        const RunResult& a = runs[k];
        const RunResult& b = runs[k + 1];
        if (!a.valid || !b.valid) {
            for (auto* v : {&rep.u2, &rep.uinf, &rep.x2, &rep.xinf}) v->push_back(kNaN);
            continue;
        }
        if (kind == StudyKind::Temporal) {
            rep.u2.push_back(temporal_error(a.u, b.u, 2.0));
            rep.uinf.push_back(temporal_error(a.u, b.u, INFINITY));
        } else {
            rep.u2.push_back(spatial_error(a.u, b.u, 2.0));
            rep.uinf.push_back(spatial_error(a.u, b.u, INFINITY));
        }
        rep.x2.push_back(temporal_error(a.X, b.X, 2.0, d0, base.dim));
        rep.xinf.push_back(temporal_error(a.X, b.X, INFINITY, d0, base.dim));
    }
    rep.r_u2 = convergence_rates(rep.u2);
    rep.r_uinf = convergence_rates(rep.uinf);
    rep.r_x2 = convergence_rates(rep.x2);
    rep.r_xinf = convergence_rates(rep.xinf);
    rep.seconds = elapsed(t0);
    return rep;
}

void write_report(const RefinementReport& r, const std::string& csv_path, const std::string& plot_path) {
    const char* var = r.kind == StudyKind::Temporal ? "dt" : "h";
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot write " + csv_path);
    out << "# fingerprint " << r.fingerprint << '\n';
    out << var << ",valid,E2_u,Einf_u,E2_X,Einf_X,r2_u,rinf_u,r2_X,rinf_X\n" << std::setprecision(10);
    for (std::size_t k = 0; k + 1 < r.ladder.size(); ++k) {
        out << r.ladder[k] << ',' << (r.valid[k] && r.valid[k + 1] ? 1 : 0) << ',' << r.u2[k] << ',' << r.uinf[k]
            << ',' << r.x2[k] << ',' << r.xinf[k];
        if (k < r.r_u2.size())
            out << ',' << r.r_u2[k].str() << ',' << r.r_uinf[k].str() << ',' << r.r_x2[k].str() << ','
                << r.r_xinf[k].str();
        else
            out << ",,,,";
        out << '\n';
    }
    std::ofstream plot(plot_path);
    if (!plot) throw std::runtime_error("cannot write " + plot_path);
    plot << "log2_" << var << ",log2_E2_u,log2_Einf_u,log2_E2_X,log2_Einf_X\n" << std::setprecision(10);
    for (std::size_t k = 0; k + 1 < r.ladder.size(); ++k)
        plot << std::log2(r.ladder[k]) << ',' << std::log2(r.u2[k]) << ',' << std::log2(r.uinf[k]) << ','
             << std::log2(r.x2[k]) << ',' << std::log2(r.xinf[k]) << '\n';
}

std::string format_report(const RefinementReport& r) {
    std::ostringstream os;
    const char* var = r.kind == StudyKind::Temporal ? "dt" : "h";
    os << (r.kind == StudyKind::Temporal ? "temporal" : "spatial") << " refinement, scenario " << r.fingerprint
       << ", " << std::fixed << std::setprecision(1) << r.seconds << " s\n";
    os << std::scientific << std::setprecision(3);
    for (std::size_t k = 0; k < r.ladder.size(); ++k)
        if (!r.valid[k]) os << "  rung " << var << "=" << r.ladder[k] << " invalid: " << r.notes[k] << '\n';
    os << "  " << std::setw(10) << var << std::setw(12) << "E2(u)" << std::setw(12) << "Einf(u)" << std::setw(12)
       << "E2(X)" << std::setw(12) << "Einf(X)" << '\n';
    for (std::size_t k = 0; k + 1 < r.ladder.size(); ++k)
        os << "  " << std::setw(10) << r.ladder[k] << std::setw(12) << r.u2[k] << std::setw(12) << r.uinf[k]
           << std::setw(12) << r.x2[k] << std::setw(12) << r.xinf[k] << '\n';
    for (std::size_t k = 0; k < r.r_u2.size(); ++k)
        os << "  rates " << k + 1 << ": r2(u)=" << r.r_u2[k].str() << " rinf(u)=" << r.r_uinf[k].str()
           << " r2(X)=" << r.r_x2[k].str() << " rinf(X)=" << r.r_xinf[k].str() << '\n';
    return os.str();
}

std::optional<double> stability_threshold(const std::vector<double>& x, const std::vector<bool>& stable) {
    double lo = -INFINITY, hi = INFINITY;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!stable[i]) hi = std::min(hi, x[i]);
    if (!std::isfinite(hi)) return std::nullopt;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (stable[i] && x[i] < hi) lo = std::max(lo, x[i]);
    if (!std::isfinite(lo)) return hi;
    return std::sqrt(lo * hi);
}

StabilityResult stability_sweep(const Scenario& base, const std::vector<double>& hs, const std::vector<double>& dts,
                                const std::vector<double>& F_maxes) {
    StabilityResult res;
    for (double h : hs)
        for (double dt : dts)
            for (double F : F_maxes) {
                Scenario s = base;
                s.h = h;
                s.dt = dt;
                s.phys.F_max = F;
                finalize_scenario(s);
                StabilityCell c{h, dt, F, true, 0.0, {}};
                try {
                    Simulation sim(s);
                    const RunSummary r = sim.run();
                    c.stable = r.stable;
                    c.ke_ratio = r.monitors.max_ke_ratio;
                    c.failure = r.failure;
                } catch (const std::exception& e) {
                    c.stable = false;
                    c.failure = e.what();
                }
                res.cells.push_back(c);
            }
    // C1 from the weakest springs, C2 from the finest grid.
    const double fmin = *std::min_element(F_maxes.begin(), F_maxes.end());
    const double hmin = *std::min_element(hs.begin(), hs.end());
    std::vector<double> x1, x2;
    std::vector<bool> s1, s2;
    for (const StabilityCell& c : res.cells) {
        if (c.F_max == fmin) {
            x1.push_back(c.dt / c.h);
            s1.push_back(c.stable);
        }
        if (c.h == hmin) {
            x2.push_back(c.dt * c.F_max);
            s2.push_back(c.stable);
        }
    }
    res.C1 = stability_threshold(x1, s1);
    res.C2 = stability_threshold(x2, s2);
    return res;
}

Scenario laminar_scenario(int dim, double h, double dt) {
    std::ostringstream os;
    os << std::setprecision(17) << "[grid]\ndim = " << dim << "\nh = " << h
       << "\n[fluid]\ntube_radius = 25e-6\nviscosity = 1e-3\ndensity = 998\nmax_inflow_speed = 1e-3\n"
          "L = 50e-6\nu0 = 1e-3\nT = 1\nrho0 = 998\nmu0 = 1e-3\nf0 = 1\n"
       << (dim == 3 ? "length = 50e-6\n" : "") << "[biofilm]\nF_max = 5e-7\ngeometry = none\n"
       << "[schedule]\ndt = " << dt << "\nt_end = 1\n";
    return parse_scenario(os.str(), "<laminar>");
}

LaminarReport laminar_check(const Scenario& s, double fraction, long max_steps, double target) {
    const auto t0 = std::chrono::steady_clock::now();
    Scenario sc = s;
    sc.geometry = "none";
    sc.init_fraction = fraction;
    FlowSolver fs(sc);
    FlowState st = fs.initial_state(fraction);
    const Field& exact = fs.boundary().u_in;
    const Field none;
    LaminarReport rep;
    rep.dim = sc.dim;
    rep.h = sc.h;
    for (long n = 1; n <= max_steps; ++n) {
        const Field prev = st.u;
        const StepStats ss = fs.step(st, none);
        rep.steps = n;
        rep.error = temporal_error(st.u, exact, INFINITY);
        rep.change = temporal_error(st.u, prev, INFINITY);
        rep.divergence = ss.divergence;
        if (!std::isfinite(rep.error)) break;
        const double measure = sc.dim == 2 ? rep.error : rep.change;
        if (measure <= target) {
            rep.converged = true;
            break;
        }
    }
    rep.seconds = elapsed(t0);
    return rep;
}

std::vector<DeltaRow> delta_metrics(double omega, double h_min, double h_max, int count) {
    if (!(h_min > 0.0 && h_max >= h_min) || count < 1) throw std::invalid_argument("delta_metrics: bad range");
    std::vector<DeltaRow> rows;
    for (int i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        const double h = std::exp(std::log(h_max) + t * (std::log(h_min) - std::log(h_max)));
        const KernelErrors e1 = kernel_errors(Kernel::Phi1, omega, h);
        const KernelErrors e2 = kernel_errors(Kernel::Phi2, omega, h);
        rows.push_back({h, e1.unity, e1.moment, e2.unity, e2.moment});
    }
    return rows;
}

std::vector<DeltaRow> delta_metrics_exact(double omega, double h_min, double h_max) {
    std::vector<DeltaRow> rows;
    const int zmin = std::max(1, static_cast<int>(std::ceil(omega / h_max - 1e-9)));
    const int zmax = static_cast<int>(std::floor(omega / h_min + 1e-9));
    for (int z = zmin; z <= zmax; ++z) {
        const double h = omega / z;
        const KernelErrors e1 = kernel_errors(Kernel::Phi1, omega, h);
        const KernelErrors e2 = kernel_errors(Kernel::Phi2, omega, h);
        rows.push_back({h, e1.unity, e1.moment, e2.unity, e2.moment});
    }
    return rows;
}

void write_delta_csv(const std::string& path, const std::vector<DeltaRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "h,eps_unity_phi1,eps_mom_phi1,eps_unity_phi2,eps_mom_phi2\n" << std::setprecision(12);
    for (const DeltaRow& r : rows)
        out << r.h << ',' << r.unity1 << ',' << r.mom1 << ',' << r.unity2 << ',' << r.mom2 << '\n';
}

}  // namespace ibfilm
