#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ibfilm/coupling.hpp"
#include "ibfilm/flow.hpp"
#include "ibfilm/springs.hpp"

namespace ibfilm {

/// Raised when a run cannot continue: a node left the domain or a field
/// stopped being finite.
class SimulationAborted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Biofilm described by the scenario: empty for geometry "none", the
/// synthetic mushroom, or a cell CSV. For CSV input the attachment layer is
/// every node within half a spacing of the lowest one.
Biofilm make_biofilm(const Scenario& s);

CouplingConfig coupling_config(const Scenario& s, const Biofilm& b);

struct Monitors {
    double max_divergence_ratio = 0.0;  ///< max over steps of div / (tol |u|_inf)
    double max_net_force = 0.0;         ///< max over steps of |sum F| / sum |F|
    double max_ke_ratio = 0.0;          ///< max over steps of |u|_2^2 / laminar value
    long divergence_violations = 0;     ///< steps with div > 100 tol |u|_inf
    long momentum_cycles = 0;
    long pressure_cycles = 0;
    int max_momentum_cycles = 0;
    int max_pressure_cycles = 0;
    double work_units = 0.0;
};

struct RunSummary {
    long steps = 0;
    double t = 0.0;
    bool stable = true;
    bool completed = false;
    std::string failure;
    std::optional<double> first_break_time;
    std::size_t springs = 0;
    std::size_t broken = 0;
    std::size_t fragments = 0;
    bool detached = false;
    std::optional<double> detach_time;
    Monitors monitors;
    double seconds = 0.0;
};

struct RunOptions {
    std::string out_dir;            ///< empty: no files
    int snapshot_every = -1;        ///< -1: use the scenario schedule
    bool stop_on_detach = false;
    bool stop_on_unstable = true;
    bool stop_on_first_break = false;
    long max_steps = -1;            ///< -1: run to t_end
    std::function<void(const class Simulation&, const StepStats&)> observer;
};

/// Full fluid-structure time stepping for one scenario.
class Simulation {
public:
    explicit Simulation(const Scenario& s);
    Simulation(const Scenario& s, Biofilm b);

    /// One step: flow step, node update at the new velocity, breaking,
    /// forces and the spread fields for the next step.
    StepStats step();
    /// Steps until t_end (or an option stops the run). Solver failures and
    /// aborts are recorded in the summary rather than thrown.
    RunSummary run(const RunOptions& opt = {});

    long total_steps() const;
    const Scenario& scenario() const { return flow_.scenario(); }
    const FlowSolver& flow() const { return flow_; }
    const FlowState& state() const { return st_; }
    const Biofilm& biofilm() const { return bf_; }
    const std::vector<Point>& forces() const { return F_; }
    const RunSummary& summary() const { return sum_; }
    /// Largest initial node coordinate along the flow axis.
    double initial_extent() const { return x_max0_; }

private:
    void update_coupling();
    void check_detachment();

    FlowSolver flow_;
    FlowState st_;
    Biofilm bf_;
    CouplingConfig cfg_;
    std::vector<Point> F_;
    Field f_;
    std::vector<bool> loose0_;  // nodes not anchored before any spring broke
    double x_max0_ = 0.0;
    RunSummary sum_;
};

}  // namespace ibfilm
