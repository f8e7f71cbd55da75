#include "ibfilm/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <stdexcept>

#include "ibfilm/scenario.hpp"
#include "ibfilm/simulation.hpp"

namespace ibfilm {

namespace {

template <typename T>
void put(std::ostream& out, T v) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    out.write(b, sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::string& path) {
    char b[sizeof(T)];
    if (!in.read(b, sizeof(T))) throw std::runtime_error(path + ": truncated field file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

}  // namespace

std::vector<int> alive_degree(const Biofilm& b) {
    std::vector<int> deg(b.size(), 0);
    for (const Spring& s : b.springs)
        if (s.alive) {
            ++deg[s.s];
            ++deg[s.k];
        }
    return deg;
}

void write_nodes_header(std::ostream& out, int dim) {
    out << "step,time,node,x,y" << (dim == 3 ? ",z" : "") << ",alive_springs\n";
}

void write_nodes(std::ostream& out, long step, double t, const Biofilm& b) {
    const auto deg = alive_degree(b);
    out << std::setprecision(17);
    for (std::size_t i = 0; i < b.size(); ++i) {
        out << step << ',' << t << ',' << i;
        for (int a = 0; a < b.dim; ++a) out << ',' << b.X[i][a];
        out << ',' << deg[i] << '\n';
    }
}

void write_field_csv(const std::string& path, const Field& f) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    const Grid& g = f.grid();
    out << "i,j" << (g.dim() == 3 ? ",k" : "");
    for (int c = 0; c < f.components(); ++c) out << ",v" << c;
    out << '\n' << std::setprecision(17);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto c = g.coords(i);
        for (int a = 0; a < g.dim(); ++a) out << (a ? "," : "") << c[a];
        for (int k = 0; k < f.components(); ++k) out << ',' << f(k, i);
        out << '\n';
    }
}

void write_field_binary(const std::string& path, const Field& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    const Grid& g = f.grid();
    out.write("IBFD", 4);
    put<std::int32_t>(out, g.dim());
    put<std::int32_t>(out, f.components());
    for (int a = 0; a < 3; ++a) put<std::int32_t>(out, g.points(a));
    put<double>(out, g.h());
    for (int a = 0; a < 3; ++a) put<double>(out, a < g.dim() ? g.extent(a) : 0.0);
    for (double v : f.data()) put<double>(out, v);
    if (!out) throw std::runtime_error("write failed for " + path);
}

Field read_field_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "IBFD", 4) != 0)
        throw std::runtime_error(path + ": not a field file");
    const int dim = get<std::int32_t>(in, path);
    const int comps = get<std::int32_t>(in, path);
    std::array<int, 3> pts{};
    for (int a = 0; a < 3; ++a) pts[a] = get<std::int32_t>(in, path);
    const double h = get<double>(in, path);
    std::array<double, 3> ext{};
    for (int a = 0; a < 3; ++a) ext[a] = get<double>(in, path);
    if ((dim != 2 && dim != 3) || comps < 1 || !(h > 0.0)) throw std::runtime_error(path + ": bad header");
    Grid g(dim, ext, h);
    for (int a = 0; a < dim; ++a)
        if (g.points(a) != pts[a]) throw std::runtime_error(path + ": header counts do not match extent / h");
    Field f(g, comps);
    for (double& v : f.data()) v = get<double>(in, path);
    return f;
}

nlohmann::json to_json(const SolveStats& s, bool history) {
    nlohmann::json j{{"v_cycles", s.v_cycles},
                     {"work_units", s.work_units},
                     {"initial_residual", s.initial_residual},
                     {"final_residual", s.final_residual},
                     {"levels", s.levels},
                     {"converged", s.converged},
                     {"stagnated", s.stagnated}};
    if (history) j["history"] = s.history;
    return j;
}

nlohmann::json to_json(const RunSummary& s) {
    const Monitors& m = s.monitors;
    return {{"steps", s.steps},
            {"t", s.t},
            {"stable", s.stable},
            {"completed", s.completed},
            {"failure", s.failure},
            {"first_break_time", optional_json(s.first_break_time)},
            {"springs", s.springs},
            {"broken", s.broken},
            {"fragments", s.fragments},
            {"detached", s.detached},
            {"detach_time", optional_json(s.detach_time)},
            {"seconds", s.seconds},
            {"monitors",
             {{"max_divergence_ratio", m.max_divergence_ratio},
              {"divergence_violations", m.divergence_violations},
              {"max_net_force", m.max_net_force},
              {"max_ke_ratio", m.max_ke_ratio},
              {"momentum_cycles", m.momentum_cycles},
              {"pressure_cycles", m.pressure_cycles},
              {"max_momentum_cycles", m.max_momentum_cycles},
              {"max_pressure_cycles", m.max_pressure_cycles},
              {"work_units", m.work_units}}}};
}

nlohmann::json scenario_json(const Scenario& s) {
    const Nondimensional& n = s.nd;
    return {{"fingerprint", s.fingerprint()},
            {"dim", s.dim},
            {"h", s.h},
            {"dt", s.dt},
            {"t_end", s.t_end},
            {"extent", s.extent},
            {"seed", s.seed},
            {"geometry", s.geometry},
            {"kernel", std::string(kernel_name(s.kernel))},
            {"sigma", n.sigma},
            {"euler", n.euler},
            {"reynolds", n.reynolds},
            {"omega", n.omega},
            {"mu_max", n.mu_max},
            {"mu_out", n.mu_out},
            {"rho_b", n.rho_b},
            {"F_max", n.F_max},
            {"force_prefactor", n.force_prefactor},
            {"d_c", n.d_c},
            {"d0", n.d0},
            {"tol", s.solver.tol},
            {"levels", s.solver.levels},
            {"nu1", s.solver.nu1},
            {"nu2", s.solver.nu2},
            {"gamma", s.gamma_table()},
            {"projection", s.solver.projection == Projection::Standard ? "standard" : "incremental"},
            {"warnings", s.warnings}};
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

void ensure_directory(const std::string& path) {
    if (path.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

}  // namespace ibfilm
