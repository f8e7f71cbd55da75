#include "ibfilm/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace ibfilm {

namespace pt = boost::property_tree;

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
}

}  // namespace

Nondimensional nondimensionalize(const PhysicalParams& p, const ScalingParams& s, int dim) {
    require_positive(s.L, "L");
    require_positive(s.u0, "u0");
    require_positive(s.T, "T");
    require_positive(s.p_ref, "pressure_difference");
    require_positive(s.rho0, "rho0");
    require_positive(s.mu0, "mu0");
    require_positive(s.f0, "f0");
    if (dim != 2 && dim != 3) throw std::invalid_argument("dim must be 2 or 3");
    Nondimensional nd;
    nd.sigma = s.L / (s.T * s.u0);
    nd.euler = s.p_ref / (s.rho0 * s.u0 * s.u0);
    nd.reynolds = s.rho0 * s.L * s.u0 / s.mu0;
    nd.omega = p.cell_radius / s.L;
    nd.mu_max = p.biofilm_max_viscosity / s.mu0;
    nd.mu_out = p.fluid_viscosity / s.mu0;
    nd.rho_b = p.biofilm_extra_density / s.rho0;
    nd.force_prefactor = s.L * s.f0 / (s.rho0 * s.u0 * s.u0);
    nd.F_max = p.F_max / (s.f0 * std::pow(s.L, dim));
    nd.d_c = p.connection_distance / s.L;
    nd.d0 = p.d0 / s.L;
    nd.u_max = p.max_inflow_speed / s.u0;
    return nd;
}

PhysicalParams redimensionalize(const Nondimensional& nd, const ScalingParams& s, int dim, const PhysicalParams& base) {
    PhysicalParams p = base;
    p.cell_radius = nd.omega * s.L;
    p.biofilm_max_viscosity = nd.mu_max * s.mu0;
    p.fluid_viscosity = nd.mu_out * s.mu0;
    p.biofilm_extra_density = nd.rho_b * s.rho0;
    p.F_max = nd.F_max * s.f0 * std::pow(s.L, dim);
    p.connection_distance = nd.d_c * s.L;
    p.d0 = nd.d0 * s.L;
    p.max_inflow_speed = nd.u_max * s.u0;
    return p;
}

double duct_center_factor(int n_max) {
    double sum = 0.0;
    for (int n = 1; n <= n_max; n += 2)
        for (int m = 1; m <= n_max; m += 2) {
            const double sn = (n / 2) % 2 == 0 ? 1.0 : -1.0;  // sin(n pi / 2) for odd n
            const double sm = (m / 2) % 2 == 0 ? 1.0 : -1.0;
            sum += sn * sm / (static_cast<double>(n) * m * (static_cast<double>(n) * n + static_cast<double>(m) * m));
        }
    return 16.0 / std::pow(std::numbers::pi, 4) * sum;
}

namespace {

// Physical pressure slope (Pa/m) that produces the requested centre speed.
double kappa_physical(const Scenario& s) {
    const double mu = s.phys.fluid_viscosity, u = s.phys.max_inflow_speed;
    if (s.dim == 2) return -2.0 * mu * u / (s.phys.tube_radius * s.phys.tube_radius);
    const double A = 2.0 * s.phys.tube_radius;
    return -mu * u / (A * A * duct_center_factor());
}

}  // namespace

double Scenario::duct_size() const {
    return dim == 2 ? phys.tube_radius / scale.L : 2.0 * phys.tube_radius / scale.L;
}

double Scenario::kappa() const { return kappa_physical(*this) * scale.L / scale.p_ref; }

std::vector<double> Scenario::gamma_table() const {
    const int n = std::max(0, solver.levels - 1);
    std::vector<double> g(n, nd.mu_max / nd.mu_out > 50.0 ? 0.85 : 1.0);
    for (int i = 0; i < n && i < static_cast<int>(solver.gamma.size()); ++i) g[i] = solver.gamma[i];
    if (!solver.gamma.empty())
        for (int i = static_cast<int>(solver.gamma.size()); i < n; ++i) g[i] = solver.gamma.back();
    return g;
}

std::string Scenario::fingerprint() const {
    std::ostringstream os;
    os << std::setprecision(17) << dim << ' ' << h << ' ' << dt << ' ' << t_end << ' ' << nd.sigma << ' ' << nd.euler
       << ' ' << nd.reynolds << ' ' << nd.omega << ' ' << nd.mu_max << ' ' << nd.mu_out << ' ' << nd.rho_b << ' '
       << nd.F_max << ' ' << nd.force_prefactor << ' ' << nd.d_c << ' ' << nd.d0 << ' ' << nd.u_max << ' '
       << extent[0] << ' ' << extent[1] << ' ' << extent[2] << ' ' << geometry << ' ' << seed << ' '
       << kernel_name(kernel) << ' ' << break_factor << ' ' << init_fraction << ' ' << solver.tol << ' '
       << solver.levels << ' ' << solver.nu1 << ' ' << solver.nu2 << ' ' << static_cast<int>(solver.projection);
    for (double g : gamma_table()) os << ' ' << g;
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << std::hash<std::string>{}(os.str());
    return hex.str();
}

double parse_number(const std::string& text, const std::string& key) {
    auto conv = [&](const std::string& t) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("key " + key + ": '" + text + "' is not a number");
        }
        while (used < t.size() && std::isspace(static_cast<unsigned char>(t[used]))) ++used;
        if (used != t.size()) throw std::invalid_argument("key " + key + ": '" + text + "' is not a number");
        return v;
    };
    const auto slash = text.find('/');
    double v;
    if (slash == std::string::npos) {
        v = conv(text);
    } else {
        const double den = conv(text.substr(slash + 1));
        if (den == 0.0) throw std::invalid_argument("key " + key + ": division by zero in '" + text + "'");
        v = conv(text.substr(0, slash)) / den;
    }
    if (!std::isfinite(v)) throw std::invalid_argument("key " + key + ": value is not finite");
    return v;
}

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"fluid",
         {"tube_radius", "length", "viscosity", "density", "max_inflow_speed", "pressure_difference", "L", "u0", "T",
          "rho0", "mu0", "f0", "sigma", "euler", "reynolds", "init_fraction"}},
        {"biofilm",
         {"geometry", "seed", "extra_density", "max_viscosity", "F_max", "cell_radius", "connection_distance", "d0",
          "break_factor", "kernel", "volume", "center", "center_span", "foot_width", "foot_height", "waist_width",
          "stalk_top", "cap_width", "height", "jitter"}},
        {"grid", {"dim", "h"}},
        {"schedule", {"dt", "t_end", "output_every"}},
        {"solver",
         {"tol", "levels", "nu1", "nu2", "max_cycles", "coarse_sweeps", "gamma", "projection", "viscous_form",
          "ke_factor", "C1", "C2"}},
    };
    return s;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> raw(const std::string& sec, const std::string& key) const {
        const auto s = tree_.get_child_optional(sec);
        if (!s) return std::nullopt;
        const auto v = s->get_optional<std::string>(key);
        if (!v) return std::nullopt;
        return *v;
    }
    double number(const std::string& sec, const std::string& key) const {
        const auto v = raw(sec, key);
        if (!v) throw std::invalid_argument("missing key " + key);
        return parse_number(*v, key);
    }
    double number(const std::string& sec, const std::string& key, double def) const {
        const auto v = raw(sec, key);
        return v ? parse_number(*v, key) : def;
    }
    std::optional<double> maybe(const std::string& sec, const std::string& key) const {
        const auto v = raw(sec, key);
        if (!v) return std::nullopt;
        return parse_number(*v, key);
    }
    int integer(const std::string& sec, const std::string& key, std::optional<int> def = std::nullopt) const {
        const auto v = raw(sec, key);
        if (!v) {
            if (def) return *def;
            throw std::invalid_argument("missing key " + key);
        }
        const double d = parse_number(*v, key);
        if (d != std::floor(d) || std::abs(d) > 1e9) throw std::invalid_argument("key " + key + " must be an integer");
        return static_cast<int>(d);
    }
    std::string text(const std::string& sec, const std::string& key, const std::string& def) const {
        const auto v = raw(sec, key);
        return v ? *v : def;
    }

private:
    const pt::ptree& tree_;
};

}  // namespace

void finalize_scenario(Scenario& s) {
    if (s.dim != 2 && s.dim != 3) throw std::invalid_argument("key dim must be 2 or 3");
    require_positive(s.phys.tube_radius, "tube_radius");
    require_positive(s.phys.tube_length, "length");
    require_positive(s.phys.fluid_viscosity, "viscosity");
    require_positive(s.phys.fluid_density, "density");
    require_positive(s.phys.max_inflow_speed, "max_inflow_speed");
    require_positive(s.phys.F_max, "F_max");
    require_positive(s.phys.cell_radius, "cell_radius");
    require_positive(s.phys.connection_distance, "connection_distance");
    require_positive(s.phys.d0, "d0");
    if (s.phys.biofilm_extra_density < 0.0) throw std::invalid_argument("extra_density must be non-negative");
    if (s.phys.biofilm_max_viscosity < s.phys.fluid_viscosity)
        throw std::invalid_argument("max_viscosity must be at least the fluid viscosity");
    require_positive(s.h, "h");
    require_positive(s.dt, "dt");
    require_positive(s.t_end, "t_end");
    if (!(s.break_factor > 1.0)) throw std::invalid_argument("break_factor must exceed 1");
    if (!(s.solver.tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (s.solver.levels < 1 || s.solver.levels > 12) throw std::invalid_argument("levels must be in 1..12");
    if (s.solver.nu1 < 0 || s.solver.nu2 < 0 || s.solver.nu1 + s.solver.nu2 < 1)
        throw std::invalid_argument("nu1 + nu2 must be at least 1");
    if (s.solver.max_cycles < 1) throw std::invalid_argument("max_cycles must be positive");
    for (double g : s.solver.gamma)
        if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("gamma entries must lie in (0, 1]");
    if (!(s.init_fraction >= 0.0)) throw std::invalid_argument("init_fraction must be non-negative");

    if (!s.p_ref_given) {
        // Pressure drop over the domain implied by the requested centre speed.
        const double mu = s.phys.fluid_viscosity, u = s.phys.max_inflow_speed, R = s.phys.tube_radius;
        const double kp = s.dim == 2 ? -2.0 * mu * u / (R * R) : -mu * u / (4.0 * R * R * duct_center_factor());
        s.scale.p_ref = std::abs(kp) * s.phys.tube_length;
    }
    s.nd = nondimensionalize(s.phys, s.scale, s.dim);
    if (s.sigma_override) s.nd.sigma = *s.sigma_override;
    if (s.euler_override) s.nd.euler = *s.euler_override;
    if (s.reynolds_override) s.nd.reynolds = *s.reynolds_override;
    require_positive(s.nd.sigma, "sigma");
    require_positive(s.nd.euler, "euler");
    require_positive(s.nd.reynolds, "reynolds");

    const double w = 2.0 * s.phys.tube_radius / s.scale.L;
    const double len = s.phys.tube_length / s.scale.L;
    if (s.dim == 2)
        s.extent = {len, w, 0.0};
    else
        s.extent = {w, w, len};
    for (int a = 0; a < s.dim; ++a) {
        const double r = s.extent[a] / s.h;
        if (std::abs(r - std::round(r)) > 1e-9 * std::max(1.0, r))
            throw std::invalid_argument("key h: domain extent is not an integer multiple of h");
        if (static_cast<long>(std::round(r)) % 2 != 0)
            throw std::invalid_argument("key h: grid interval counts must be even");
    }

    s.warnings.clear();
    if (s.nd.omega < s.h) s.warnings.push_back("omega < h: forces are spread over fewer than two mesh widths");
    if (s.dt > s.solver.C1 * s.h) s.warnings.push_back("dt exceeds the advisory bound C1*h");
    if (s.dt > s.solver.C2 / s.phys.F_max) s.warnings.push_back("dt exceeds the advisory bound C2/F_max");
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(origin + ": parse error: " + e.message() + " (line " + std::to_string(e.line()) +
                                    ")");
    }
    for (const auto& [sec, body] : tree) {
        const auto it = schema().find(sec);
        if (it == schema().end()) {
            if (body.empty()) throw std::invalid_argument(origin + ": key " + sec + " outside of any section");
            throw std::invalid_argument(origin + ": unknown section [" + sec + "]");
        }
        for (const auto& [key, v] : body) {
            (void)v;
            if (!it->second.count(key)) throw std::invalid_argument(origin + ": unknown key " + key + " in [" + sec + "]");
        }
    }
    const Reader r(tree);
    Scenario s;
    try {
        s.dim = r.integer("grid", "dim");
        s.h = r.number("grid", "h");

        s.phys.tube_radius = r.number("fluid", "tube_radius");
        s.phys.fluid_viscosity = r.number("fluid", "viscosity");
        s.phys.fluid_density = r.number("fluid", "density");
        s.phys.max_inflow_speed = r.number("fluid", "max_inflow_speed");
        s.scale.L = r.number("fluid", "L");
        s.scale.u0 = r.number("fluid", "u0");
        s.scale.T = r.number("fluid", "T");
        s.scale.rho0 = r.number("fluid", "rho0");
        s.scale.mu0 = r.number("fluid", "mu0");
        s.scale.f0 = r.number("fluid", "f0");
        s.phys.tube_length = r.number("fluid", "length", 3.0 * s.scale.L);
        if (auto p = r.maybe("fluid", "pressure_difference")) {
            s.scale.p_ref = *p;
            s.p_ref_given = true;
        }
        s.sigma_override = r.maybe("fluid", "sigma");
        s.euler_override = r.maybe("fluid", "euler");
        s.reynolds_override = r.maybe("fluid", "reynolds");
        s.init_fraction = r.number("fluid", "init_fraction", 1.0);

        s.phys.F_max = r.number("biofilm", "F_max");
        s.geometry = r.text("biofilm", "geometry", "mushroom");
        s.seed = static_cast<std::uint64_t>(r.number("biofilm", "seed", 1.0));
        s.phys.biofilm_extra_density = r.number("biofilm", "extra_density", 0.0);
        s.phys.biofilm_max_viscosity = r.number("biofilm", "max_viscosity", s.phys.fluid_viscosity);
        s.phys.cell_radius = r.number("biofilm", "cell_radius", 1e-6);
        s.phys.connection_distance = r.number("biofilm", "connection_distance", 2.8e-6);
        s.phys.d0 = r.number("biofilm", "d0", 1.59e-6);
        s.break_factor = r.number("biofilm", "break_factor", 2.0);
        s.kernel = parse_kernel(r.text("biofilm", "kernel", "phi1"));
        s.biofilm_volume = r.maybe("biofilm", "volume");
        MushroomSpec& m = s.mushroom;
        m.center_flow = r.number("biofilm", "center", 0.5 * s.phys.tube_length / s.scale.L);
        m.center_span = r.number("biofilm", "center_span", s.phys.tube_radius / s.scale.L);
        m.foot_width = r.number("biofilm", "foot_width", m.foot_width);
        m.foot_height = r.number("biofilm", "foot_height", m.foot_height);
        m.waist_width = r.number("biofilm", "waist_width", m.waist_width);
        m.stalk_top = r.number("biofilm", "stalk_top", m.stalk_top);
        m.cap_width = r.number("biofilm", "cap_width", m.cap_width);
        m.height = r.number("biofilm", "height", m.height);
        m.jitter = r.number("biofilm", "jitter", m.jitter);

        s.dt = r.number("schedule", "dt");
        s.t_end = r.number("schedule", "t_end");
        s.output_every = r.integer("schedule", "output_every", 0);

        SolverSettings& so = s.solver;
        so.tol = r.number("solver", "tol", so.tol);
        so.levels = r.integer("solver", "levels", so.levels);
        so.nu1 = r.integer("solver", "nu1", so.nu1);
        so.nu2 = r.integer("solver", "nu2", so.nu2);
        so.max_cycles = r.integer("solver", "max_cycles", so.max_cycles);
        so.coarse_sweeps = r.integer("solver", "coarse_sweeps", so.coarse_sweeps);
        so.ke_factor = r.number("solver", "ke_factor", so.ke_factor);
        so.C1 = r.number("solver", "C1", so.C1);
        so.C2 = r.number("solver", "C2", so.C2);
        if (auto g = r.raw("solver", "gamma")) {
            std::stringstream ss(*g);
            std::string item;
            while (std::getline(ss, item, ',')) so.gamma.push_back(parse_number(item, "gamma"));
        }
        const std::string proj = r.text("solver", "projection", "standard");
        if (proj == "incremental")
            so.projection = Projection::Incremental;
        else if (proj == "standard")
            so.projection = Projection::Standard;
        else
            throw std::invalid_argument("key projection must be incremental or standard");
        const std::string vf = r.text("solver", "viscous_form", "auto");
        if (vf == "auto")
            so.viscous_form = ViscousForm::Auto;
        else if (vf == "coupled")
            so.viscous_form = ViscousForm::Coupled;
        else if (vf == "uncoupled")
            so.viscous_form = ViscousForm::Uncoupled;
        else
            throw std::invalid_argument("key viscous_form must be auto, coupled or uncoupled");

        finalize_scenario(s);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(origin + ": " + e.what());
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scenario file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

}  // namespace ibfilm
