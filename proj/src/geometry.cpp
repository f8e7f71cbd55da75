#include "ibfilm/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ibfilm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

}  // namespace

CellCloud load_cells(const std::string& path, int dim, double L, const std::array<double, 3>& extent) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open cell file " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    const auto header = split_csv(line);
    const int cols = static_cast<int>(header.size());
    const bool ok2 = cols == 2 && header[0] == "x" && header[1] == "y";
    const bool ok3 = cols == 3 && header[0] == "x" && header[1] == "y" && header[2] == "z";
    if (!ok2 && !ok3) throw std::runtime_error(path + ": header must be x,y or x,y,z");
    if (cols != dim) throw std::runtime_error(path + ": dimension mismatch (file has " + std::to_string(cols) +
                                              " columns, scenario is " + std::to_string(dim) + "D)");
    CellCloud cloud;
    cloud.dim = dim;
    cloud.source = path;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto f = split_csv(line);
        if (static_cast<int>(f.size()) != cols)
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + " has the wrong number of fields");
        Point p{0.0, 0.0, 0.0};
        for (int a = 0; a < cols; ++a) {
            double v = 0.0;
            const auto r = std::from_chars(f[a].data(), f[a].data() + f[a].size(), v);
            if (r.ec != std::errc() || r.ptr != f[a].data() + f[a].size() || !std::isfinite(v))
                throw std::runtime_error(path + ": line " + std::to_string(line_no) + " has a non-numeric field '" + f[a] +
                                         "'");
            p[a] = v * 1e-6 / L;
            if (!(p[a] > 0.0 && p[a] < extent[a]))
                throw std::runtime_error(path + ": line " + std::to_string(line_no) + " lies outside the domain");
        }
        cloud.points.push_back(p);
    }
    if (cloud.points.empty()) throw std::runtime_error(path + ": empty file (no cell rows)");
    return cloud;
}

void save_cells(const std::string& path, const CellCloud& cloud, double L) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << (cloud.dim == 3 ? "x,y,z\n" : "x,y\n") << std::setprecision(17);
    for (const Point& p : cloud.points) {
        for (int a = 0; a < cloud.dim; ++a) out << (a ? "," : "") << p[a] * L * 1e6;
        out << '\n';
    }
}

bool mushroom_contains(const MushroomSpec& m, double r, double y) {
    r = std::abs(r);
    if (y < 0.0 || y > m.height) return false;
    if (y <= m.foot_height) return r <= 0.5 * m.foot_width;
    if (y <= m.stalk_top) return r <= 0.5 * m.waist_width;
    const double a = 0.5 * m.cap_width, b = m.height - m.stalk_top;
    const double t = (y - m.stalk_top) / b;
    return (r / a) * (r / a) + t * t <= 1.0;
}

CellCloud generate_mushroom(std::uint64_t seed, int dim, const MushroomSpec& m, double d0_um, double L,
                            const std::array<double, 3>& extent, std::vector<bool>* base) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("mushroom generator supports 2D and 3D");
    if (!(d0_um > 0.0)) throw std::invalid_argument("d0 target must be positive");
    if (!(m.waist_width > 0.0 && m.foot_width > 0.0 && m.cap_width > 0.0 && m.foot_height > 0.0 &&
          m.stalk_top >= m.foot_height && m.height > m.stalk_top))
        throw std::invalid_argument("mushroom silhouette dimensions are inconsistent");
    const double um = 1e-6 / L;  // microns to nondimensional
    const double half = 0.5 * std::max({m.cap_width, m.foot_width, m.waist_width}) * um;
    const int flow = dim == 2 ? 0 : 2;
    if (m.center_flow - half <= 0.0 || m.center_flow + half >= extent[flow] || m.height * um >= extent[1])
        throw std::invalid_argument("mushroom does not fit in the domain");
    if (dim == 3 && (m.center_span - half <= 0.0 || m.center_span + half >= extent[0]))
        throw std::invalid_argument("mushroom does not fit in the domain");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> jit(-m.jitter * d0_um, m.jitter * d0_um);
    const int nr = static_cast<int>(std::ceil(0.5 * std::max({m.cap_width, m.foot_width}) / d0_um)) + 1;
    const int ny = static_cast<int>(std::ceil(m.height / d0_um)) + 1;
    CellCloud cloud;
    cloud.dim = dim;
    cloud.source = "mushroom(seed=" + std::to_string(seed) + ")";
    if (base) base->clear();
    const int nz = dim == 3 ? nr : 0;
    for (int j = 0; j < ny; ++j) {
        const double y = (j + 0.5) * d0_um;
        for (int kk = -nz; kk < std::max(nz, 1); ++kk) {
            const double zoff = dim == 3 ? (kk + 0.5) * d0_um : 0.0;
            for (int i = -nr; i < nr; ++i) {
                const double xoff = (i + 0.5) * d0_um;
                const double r = std::hypot(xoff, zoff);
                if (!mushroom_contains(m, r, y)) continue;
                // Draws happen only for accepted sites so the sequence is stable.
                Point p{0.0, 0.0, 0.0};
                const double jx = jit(rng), jy = jit(rng), jz = dim == 3 ? jit(rng) : 0.0;
                const double py = std::max(y + jy, 0.25 * d0_um);
                if (dim == 2) {
                    p = {m.center_flow + (xoff + jx) * um, py * um, 0.0};
                } else {
                    p = {m.center_span + (xoff + jx) * um, py * um, m.center_flow + (zoff + jz) * um};
                }
                cloud.points.push_back(p);
                if (base) base->push_back(j == 0);
            }
        }
    }
    if (cloud.points.empty()) throw std::invalid_argument("mushroom silhouette contains no lattice sites");
    return cloud;
}

namespace {

double dist(const Point& a, const Point& b, int dim) {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

Biofilm make_biofilm(const CellCloud& cloud, double F_max, double break_factor) {
    if (!(F_max > 0.0)) throw std::invalid_argument("F_max must be positive");
    Biofilm b;
    b.dim = cloud.dim;
    b.X = cloud.points;
    b.F_max = F_max;
    b.break_factor = break_factor;
    b.base.assign(cloud.points.size(), false);
    return b;
}

void add_spring(Biofilm& b, int s, int k, double d, double F_max) {
    Spring sp;
    sp.s = std::min(s, k);
    sp.k = std::max(s, k);
    sp.rest = d;
    sp.K = F_max / d;
    b.springs.push_back(sp);
}

void sort_springs(Biofilm& b) {
    std::sort(b.springs.begin(), b.springs.end(),
              [](const Spring& x, const Spring& y) { return x.s != y.s ? x.s < y.s : x.k < y.k; });
}

}  // namespace

Biofilm build_connectivity(const CellCloud& cloud, double d_c, double F_max, double break_factor,
                           ConnectivityStats* stats) {
    if (!(d_c > 0.0)) throw std::invalid_argument("connection distance must be positive");
    Biofilm b = make_biofilm(cloud, F_max, break_factor);
    const int n = static_cast<int>(cloud.points.size());
    const int D = cloud.dim;
    std::map<std::array<long, 3>, std::vector<int>> cells;
    auto key = [&](const Point& p) {
        std::array<long, 3> k{0, 0, 0};
        for (int a = 0; a < D; ++a) k[a] = static_cast<long>(std::floor(p[a] / d_c));
        return k;
    };
    for (int i = 0; i < n; ++i) cells[key(cloud.points[i])].push_back(i);
    ConnectivityStats st;
    std::vector<int> degree(n, 0);
    for (int i = 0; i < n; ++i) {
        const auto k = key(cloud.points[i]);
        const int r2 = D > 2 ? 1 : 0;
        for (int dz = -r2; dz <= r2; ++dz)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const auto it = cells.find({k[0] + dx, k[1] + dy, k[2] + dz});
                    if (it == cells.end()) continue;
                    for (int j : it->second) {
                        if (j <= i) continue;
                        const double d = dist(cloud.points[i], cloud.points[j], D);
                        if (d == 0.0) {
                            ++st.coincident_pairs;
                            continue;
                        }
                        if (d < d_c) {
                            add_spring(b, i, j, d, F_max);
                            ++degree[i];
                            ++degree[j];
                        }
                    }
                }
    }
    sort_springs(b);
    for (int v : degree) st.isolated_nodes += v == 0 ? 1 : 0;
    if (stats) *stats = st;
    return b;
}

Biofilm build_connectivity_bruteforce(const CellCloud& cloud, double d_c, double F_max, double break_factor) {
    if (!(d_c > 0.0)) throw std::invalid_argument("connection distance must be positive");
    Biofilm b = make_biofilm(cloud, F_max, break_factor);
    const int n = static_cast<int>(cloud.points.size());
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double d = dist(cloud.points[i], cloud.points[j], cloud.dim);
            if (d > 0.0 && d < d_c) add_spring(b, i, j, d, F_max);
        }
    return b;
}

double compute_d0(std::size_t eta, double volume, int dim) {
    if (eta < 1) throw std::invalid_argument("compute_d0 needs at least one node");
    if (!(volume > 0.0)) throw std::invalid_argument("compute_d0: biofilm volume must be positive");
    return std::pow(volume / static_cast<double>(eta), 1.0 / dim);
}

double estimate_volume(const CellCloud& cloud, const Grid& g, double radius) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto c = g.coords(i);
        Point x{g.coord(c[0]), g.coord(c[1]), g.coord(c[2])};
        for (const Point& p : cloud.points)
            if (dist(x, p, g.dim()) <= radius) {
                ++count;
                break;
            }
    }
    return static_cast<double>(count) * std::pow(g.h(), g.dim());
}

double mean_nearest_neighbor(const CellCloud& cloud) {
    const std::size_t n = cloud.points.size();
    if (n < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) best = std::min(best, dist(cloud.points[i], cloud.points[j], cloud.dim));
        acc += best;
    }
    return acc / static_cast<double>(n);
}

}  // namespace ibfilm
