#include "ibfilm/simulation.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "ibfilm/geometry.hpp"
#include "ibfilm/io.hpp"

namespace ibfilm {

Biofilm make_biofilm(const Scenario& s) {
    if (s.geometry == "none") {
        Biofilm b;
        b.dim = s.dim;
        b.d0 = s.nd.d0;
        b.F_max = s.nd.F_max;
        b.break_factor = s.break_factor;
        return b;
    }
    CellCloud cloud;
    std::vector<bool> base;
    if (s.geometry == "mushroom") {
        cloud = generate_mushroom(s.seed, s.dim, s.mushroom, s.phys.d0 * 1e6, s.scale.L, s.extent, &base);
    } else {
        cloud = load_cells(s.geometry, s.dim, s.scale.L, s.extent);
        double ymin = std::numeric_limits<double>::infinity();
        for (const Point& p : cloud.points) ymin = std::min(ymin, p[1]);
        for (const Point& p : cloud.points) base.push_back(p[1] <= ymin + 0.5 * s.nd.d0);
    }
    Biofilm b = build_connectivity(cloud, s.nd.d_c, s.nd.F_max, s.break_factor);
    b.base = std::move(base);
    b.d0 = s.biofilm_volume ? compute_d0(b.size(), *s.biofilm_volume / std::pow(s.scale.L, s.dim), s.dim) : s.nd.d0;
    return b;
}

CouplingConfig coupling_config(const Scenario& s, const Biofilm& b) {
    CouplingConfig c;
    c.omega = s.nd.omega;
    c.kernel = s.kernel;
    c.d0 = b.d0;
    c.rho_b = s.nd.rho_b;
    c.mu_max = s.nd.mu_max;
    c.mu_out = s.nd.mu_out;
    return c;
}

Simulation::Simulation(const Scenario& s) : Simulation(s, make_biofilm(s)) {}

Simulation::Simulation(const Scenario& s, Biofilm b)
    : flow_(s), st_(flow_.initial_state(s.init_fraction)), bf_(std::move(b)), cfg_(coupling_config(s, bf_)) {
    sum_.springs = bf_.springs.size();
    if (bf_.size() == 0) return;
    if (first_outside(bf_.X, flow_.grid()) >= 0) throw std::invalid_argument("biofilm node outside the domain");
    const int fa = flow_.grid().flow_axis();
    x_max0_ = -std::numeric_limits<double>::infinity();
    for (const Point& p : bf_.X) x_max0_ = std::max(x_max0_, p[fa]);
    loose0_.assign(bf_.size(), false);
    for (const Fragment& fr : fragments(bf_, bf_.X))
        for (int i : fr.nodes) loose0_[i] = true;
    update_coupling();
}

long Simulation::total_steps() const {
    const Scenario& s = scenario();
    return std::max(1L, std::lround(s.t_end / s.dt));
}

void Simulation::update_coupling() {
    const Grid& g = flow_.grid();
    F_ = compute_forces(bf_, bf_.X);
    double total = 0.0;
    for (const Point& f : F_) total += std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
    const Point net = net_force(F_, bf_.dim);
    const double n = std::sqrt(net[0] * net[0] + net[1] * net[1] + net[2] * net[2]);
    if (total > 0.0) sum_.monitors.max_net_force = std::max(sum_.monitors.max_net_force, n / total);
    f_ = spread_force(bf_.X, F_, g, cfg_);
    st_.rho = spread_density(bf_.X, g, cfg_);
    st_.mu = viscosity_field(bf_.X, g, cfg_);
}

void Simulation::check_detachment() {
    const int fa = flow_.grid().flow_axis();
    std::size_t count = 0;
    for (const Fragment& fr : fragments(bf_, bf_.X)) {
        bool fresh = false;
        for (int i : fr.nodes) fresh = fresh || !loose0_[i];
        if (!fresh) continue;
        ++count;
        if (fr.centroid[fa] > x_max0_ && !sum_.detached) {
            sum_.detached = true;
            sum_.detach_time = st_.t;
        }
    }
    sum_.fragments = count;
}

StepStats Simulation::step() {
    const Scenario& s = scenario();
    StepStats ss = flow_.step(st_, f_);
    Monitors& m = sum_.monitors;
    m.momentum_cycles += ss.momentum.v_cycles;
    m.pressure_cycles += ss.pressure.v_cycles;
    m.max_momentum_cycles = std::max(m.max_momentum_cycles, ss.momentum.v_cycles);
    m.max_pressure_cycles = std::max(m.max_pressure_cycles, ss.pressure.v_cycles);
    m.work_units += ss.momentum.work_units + ss.pressure.work_units;
    if (!std::isfinite(ss.velocity_max) || !std::isfinite(ss.kinetic_energy))
        throw SimulationAborted("velocity is not finite at step " + std::to_string(st_.step));
    const double ratio = ss.divergence / (s.solver.tol * std::max(ss.velocity_max, 1e-300));
    m.max_divergence_ratio = std::max(m.max_divergence_ratio, ratio);
    if (ratio > 100.0) ++m.divergence_violations;
    const double ke = ss.kinetic_energy / flow_.laminar_kinetic_energy();
    m.max_ke_ratio = std::max(m.max_ke_ratio, ke);
    if (ke > s.solver.ke_factor) sum_.stable = false;

    if (bf_.size() > 0) {
        const std::vector<Point> U = interpolate_velocity(st_.u, bf_.X, s.kernel);
        bf_.X = advect_nodes(bf_.X, U, s.dt, s.nd.sigma);
        const long out = first_outside(bf_.X, flow_.grid());
        if (out >= 0) {
            const Point& p = bf_.X[out];
            throw SimulationAborted("node " + std::to_string(out) + " left the domain at step " +
                                    std::to_string(st_.step) + " (t = " + std::to_string(st_.t) + ", position " +
                                    std::to_string(p[0]) + ", " + std::to_string(p[1]) + ", " +
                                    std::to_string(p[2]) + ")");
        }
        const std::size_t nb = apply_breaking(bf_, bf_.X);
        if (nb > 0) {
            sum_.broken += nb;
            if (!sum_.first_break_time) sum_.first_break_time = st_.t;
        }
        if (sum_.broken > 0) check_detachment();
        update_coupling();
    }
    sum_.steps = st_.step;
    sum_.t = st_.t;
    return ss;
}

RunSummary Simulation::run(const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const Scenario& s = scenario();
    const long n = opt.max_steps >= 0 ? std::min(opt.max_steps, total_steps()) : total_steps();
    const int every = opt.snapshot_every >= 0 ? opt.snapshot_every : s.output_every;
    std::ofstream nodes;
    auto snapshot = [&](bool final_state) {
        if (opt.out_dir.empty()) return;
        if (bf_.size() > 0) write_nodes(nodes, st_.step, st_.t, bf_);
        if (final_state || every > 0) {
            const std::string tag = final_state ? "final" : std::to_string(st_.step);
            write_field_binary(opt.out_dir + "/u_" + tag + ".bin", st_.u);
            write_field_binary(opt.out_dir + "/p_" + tag + ".bin", st_.p);
            write_field_binary(opt.out_dir + "/rho_" + tag + ".bin", st_.rho);
            write_field_binary(opt.out_dir + "/mu_" + tag + ".bin", st_.mu);
        }
    };
    if (!opt.out_dir.empty()) {
        ensure_directory(opt.out_dir);
        nodes.open(opt.out_dir + "/nodes.csv");
        if (!nodes) throw std::runtime_error("cannot write " + opt.out_dir + "/nodes.csv");
        write_nodes_header(nodes, s.dim);
        if (bf_.size() > 0) write_nodes(nodes, st_.step, st_.t, bf_);
    }
    try {
        while (st_.step < n) {
            const StepStats ss = step();
            if (opt.observer) opt.observer(*this, ss);
            if (every > 0 && st_.step % every == 0 && st_.step < n) snapshot(false);
            if (!sum_.stable && opt.stop_on_unstable) {
                sum_.failure = "kinetic energy exceeded " + std::to_string(s.solver.ke_factor) +
                               " times the laminar value";
                break;
            }
            if (opt.stop_on_detach && sum_.detached) break;
            if (opt.stop_on_first_break && sum_.first_break_time) break;
        }
        sum_.completed = st_.step >= n;
    } catch (const SimulationAborted& e) {
        sum_.failure = e.what();
        sum_.stable = false;
    } catch (const SolverError& e) {
        sum_.failure = e.what();
        sum_.stable = false;
    }
    if (!opt.out_dir.empty()) {
        snapshot(true);
        sum_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_json(opt.out_dir + "/manifest.json", {{"scenario", scenario_json(s)}, {"summary", to_json(sum_)}});
    }
    sum_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return sum_;
}

}  // namespace ibfilm
