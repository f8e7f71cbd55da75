#include "ibfilm/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "ibfilm/geometry.hpp"
#include "ibfilm/io.hpp"
#include "ibfilm/validation.hpp"

namespace ibfilm {

namespace {

const char* kUsage =
    "usage: ibfilm <subcommand> [options]\n"
    "\n"
    "subcommands:\n"
    "  run                 time-step a scenario and write snapshots\n"
    "  converge-time       temporal refinement study (dt ladder)\n"
    "  converge-space      spatial refinement study (h ladder)\n"
    "  laminar-check       no-biofilm channel or duct against the exact profile\n"
    "  delta-metrics       unity and first-moment errors of both kernels\n"
    "  generate-geometry   write the synthetic mushroom as a cell CSV\n"
    "\n"
    "run 'ibfilm <subcommand> --help' for the options of a subcommand.\n";

struct Overrides {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    int levels = 0, nu1 = -1, nu2 = -1;
    double tol = 0.0;
    std::vector<std::string> gamma;
};

void add_overrides(CLI::App* app, Overrides& o, bool config_required = true) {
    auto* c = app->add_option("--config", o.config, "scenario file");
    if (config_required) c->required();
    app->add_option("--out", o.out, "output directory");
    app->add_option("--seed", o.seed, "geometry seed");
    app->add_option("--levels", o.levels, "multigrid levels");
    app->add_option("--tol", o.tol, "relative residual tolerance");
    app->add_option("--nu1", o.nu1, "pre-smoothing sweeps");
    app->add_option("--nu2", o.nu2, "post-smoothing sweeps");
    app->add_option("--gamma", o.gamma, "coarse viscosity scaling per level")->delimiter(',');
}

Scenario load(const Overrides& o) {
    Scenario s = load_scenario(o.config);
    if (o.seed) s.seed = o.seed;
    if (o.levels > 0) s.solver.levels = o.levels;
    if (o.tol > 0.0) s.solver.tol = o.tol;
    if (o.nu1 >= 0) s.solver.nu1 = o.nu1;
    if (o.nu2 >= 0) s.solver.nu2 = o.nu2;
    if (!o.gamma.empty()) {
        s.solver.gamma.clear();
        for (const auto& g : o.gamma) s.solver.gamma.push_back(parse_number(g, "gamma"));
    }
    finalize_scenario(s);
    for (const auto& w : s.warnings) std::cerr << "warning: " << w << '\n';
    return s;
}

std::vector<double> parse_list(const std::vector<std::string>& items, const char* key) {
    std::vector<double> v;
    for (const auto& s : items) v.push_back(parse_number(s, key));
    return v;
}

int cmd_run(const Overrides& o) {
    const Scenario s = load(o);
    Simulation sim(s);
    std::cout << "scenario " << s.fingerprint() << ": " << sim.biofilm().size() << " nodes, "
              << sim.biofilm().springs.size() << " springs, " << sim.total_steps() << " steps\n";
    RunOptions opt;
    opt.out_dir = o.out;
    const RunSummary r = sim.run(opt);
    std::cout << to_json(r).dump(2) << '\n';
    if (!r.failure.empty()) {
        std::cerr << "run failed: " << r.failure << '\n';
        return 1;
    }
    return 0;
}

int cmd_converge(StudyKind kind, const Overrides& o, const std::vector<std::string>& ladder_text) {
    const Scenario s = load(o);
    std::vector<double> ladder = parse_list(ladder_text, "ladder");
    if (ladder.empty()) {
        const double v = kind == StudyKind::Temporal ? s.dt : s.h;
        ladder = {v, v / 2, v / 4, v / 8};
        if (kind == StudyKind::Spatial) ladder.pop_back();
    }
    const RefinementReport r = run_refinement_study(kind, s, ladder);
    ensure_directory(o.out);
    const std::string stem = o.out + (kind == StudyKind::Temporal ? "/temporal" : "/spatial");
    write_report(r, stem + ".csv", stem + "_log2.csv");
    std::cout << format_report(r);
    for (bool v : r.valid)
        if (!v) return 1;
    return 0;
}

int cmd_laminar(int dim, const std::vector<std::string>& hs, double dt, long steps, double fraction, double target,
                const std::string& out) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("--dim must be 2 or 3");
    const std::vector<double> h = parse_list(hs, "h");
    if (fraction < 0.0) fraction = dim == 2 ? 0.5 : 1.0;
    if (target <= 0.0) target = dim == 2 ? 1e-12 : 1e-11;
    if (steps <= 0) steps = dim == 2 ? 300 : 400;
    std::vector<double> errs;
    bool ok = true;
    std::ostringstream csv;
    csv << "dim,h,steps,error,divergence,change,converged,seconds\n" << std::setprecision(10);
    for (double hv : h) {
        const LaminarReport r = laminar_check(laminar_scenario(dim, hv, dt), fraction, steps, target);
        std::printf("dim=%d h=%g steps=%ld max-error=%.3e divergence=%.3e last-change=%.3e %s (%.1f s)\n", dim, hv,
                    r.steps, r.error, r.divergence, r.change, r.converged ? "converged" : "NOT converged",
                    r.seconds);
        csv << dim << ',' << hv << ',' << r.steps << ',' << r.error << ',' << r.divergence << ',' << r.change << ','
            << r.converged << ',' << r.seconds << '\n';
        errs.push_back(r.error);
        ok = ok && r.converged;
    }
    if (h.size() >= 2) std::printf("fitted order %.3f\n", fitted_order(h, errs));
    if (!out.empty()) {
        ensure_directory(out);
        std::ofstream f(out + "/laminar_check.csv");
        f << csv.str();
    }
    return ok ? 0 : 1;
}

int cmd_delta(const std::string& omega_t, const std::string& hmin_t, const std::string& hmax_t, int count,
              const std::string& out) {
    const double omega = parse_number(omega_t, "omega");
    const double hmin = parse_number(hmin_t, "h-min"), hmax = parse_number(hmax_t, "h-max");
    const auto rows = delta_metrics(omega, hmin, hmax, count);
    const auto exact = delta_metrics_exact(omega, hmin, hmax);
    ensure_directory(out);
    write_delta_csv(out + "/delta_metrics.csv", rows);
    write_delta_csv(out + "/delta_metrics_commensurate.csv", exact);
    double worst = 0.0;
    for (const DeltaRow& r : exact) worst = std::max({worst, r.unity1, r.mom1});
    std::vector<double> h, u2, m2;
    for (const DeltaRow& r : rows) {
        h.push_back(r.h);
        u2.push_back(r.unity2);
        m2.push_back(r.mom2);
    }
    std::printf("%zu sampled h, %zu commensurate h = omega/z\n", rows.size(), exact.size());
    std::printf("phi1 at h = omega/z: max error %.3e\n", worst);
    if (rows.size() >= 2)
        std::printf("phi2 fitted order: unity %.3f, first moment %.3f\n", fitted_order(h, u2), fitted_order(h, m2));
    std::printf("wrote %s/delta_metrics.csv\n", out.c_str());
    return 0;
}

int cmd_geometry(const Overrides& o) {
    const Scenario s = load(o);
    if (s.geometry != "mushroom") throw std::invalid_argument("generate-geometry needs geometry = mushroom");
    std::vector<bool> base;
    const CellCloud c = generate_mushroom(s.seed, s.dim, s.mushroom, s.phys.d0 * 1e6, s.scale.L, s.extent, &base);
    const Biofilm b = build_connectivity(c, s.nd.d_c, s.nd.F_max, s.break_factor);
    const std::string path = o.out.size() > 4 && o.out.substr(o.out.size() - 4) == ".csv" ? o.out : o.out + "/cells.csv";
    if (path != o.out) ensure_directory(o.out);
    save_cells(path, c, s.scale.L);
    std::printf("%zu cells, %zu springs, mean nearest-neighbour spacing %.3f um; wrote %s\n", c.points.size(),
                b.springs.size(), mean_nearest_neighbor(c) * s.scale.L * 1e6, path.c_str());
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    static const std::set<std::string> known{"run",           "converge-time", "converge-space",   "laminar-check",
                                             "delta-metrics", "generate-geometry", "-h", "--help"};
    if (argc < 2 || !known.count(argv[1])) {
        if (argc >= 2) std::cerr << "unknown subcommand '" << argv[1] << "'\n\n";
        std::cerr << kUsage;
        return 2;
    }
    CLI::App app{"Immersed-boundary biofilm flow simulator", "ibfilm"};
    app.require_subcommand(1);

    Overrides run_o, time_o, space_o, geo_o;
    std::vector<std::string> time_ladder, space_ladder;
    auto* run = app.add_subcommand("run", "time-step a scenario and write snapshots");
    add_overrides(run, run_o);
    auto* ct = app.add_subcommand("converge-time", "temporal refinement study");
    add_overrides(ct, time_o);
    ct->add_option("--ladder", time_ladder, "time steps, coarsest first")->delimiter(',');
    auto* cs = app.add_subcommand("converge-space", "spatial refinement study");
    add_overrides(cs, space_o);
    cs->add_option("--ladder", space_ladder, "mesh widths, coarsest first")->delimiter(',');

    int dim = 2;
    std::vector<std::string> hs{"1/128"};
    std::string dt_t = "1e-4", lam_out;
    long steps = 0;
    double fraction = -1.0, target = 0.0;
    auto* lam = app.add_subcommand("laminar-check", "no-biofilm flow against the exact profile");
    lam->set_help_flag("--help", "print this help message and exit");  // frees -h for the mesh width
    lam->add_option("--dim", dim, "2 or 3");
    lam->add_option("--h", hs, "mesh widths (several give a fitted order)")->delimiter(',');
    lam->add_option("--dt", dt_t, "time step");
    lam->add_option("--steps", steps, "step limit (default 300 in 2D, 400 in 3D)");
    lam->add_option("--fraction", fraction, "initial fraction of the profile (default 0.5 in 2D, 1 in 3D)");
    lam->add_option("--target", target, "2D error / 3D step-change target");
    lam->add_option("--out", lam_out, "directory for laminar_check.csv");

    std::string omega_t = "1/100", hmin_t = "1/1024", hmax_t = "1/100", delta_out = ".";
    int count = 200;
    auto* dm = app.add_subcommand("delta-metrics", "kernel unity and first-moment errors");
    dm->add_option("--omega", omega_t, "support scale");
    dm->add_option("--h-min", hmin_t, "smallest mesh width");
    dm->add_option("--h-max", hmax_t, "largest mesh width");
    dm->add_option("--count", count, "log-spaced samples");
    dm->add_option("--out", delta_out, "output directory");

    auto* gg = app.add_subcommand("generate-geometry", "write the synthetic mushroom cell CSV");
    add_overrides(gg, geo_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        if (*run) return cmd_run(run_o);
        if (*ct) return cmd_converge(StudyKind::Temporal, time_o, time_ladder);
        if (*cs) return cmd_converge(StudyKind::Spatial, space_o, space_ladder);
        if (*lam) return cmd_laminar(dim, hs, parse_number(dt_t, "dt"), steps, fraction, target, lam_out);
        if (*dm) return cmd_delta(omega_t, hmin_t, hmax_t, count, delta_out);
        if (*gg) return cmd_geometry(geo_o);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cerr << kUsage;
    return 2;
}

}  // namespace ibfilm
