#include "qforge/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qforge {

LatticeKind lattice_kind_from_string(const std::string& name) {
    if (name == "chain") return LatticeKind::chain;
    if (name == "square") return LatticeKind::square;
    if (name == "triangular") return LatticeKind::triangular;
    if (name == "honeycomb") return LatticeKind::honeycomb;
    if (name == "kagome") return LatticeKind::kagome;
    if (name == "custom") return LatticeKind::custom;
    throw std::invalid_argument("unknown lattice kind: " + name);
}

int Lattice::site_index(const std::string& id) const {
    for (std::size_t i = 0; i < sites.size(); ++i) {
        if (sites[i].id == id) return static_cast<int>(i);
    }
    return -1;
}

double Lattice::distance(int i, int j) const {
    Eigen::Vector2d d = sites[i].coord - sites[j].coord;
    if (periodic_spans.empty()) return d.norm();
    double best = std::numeric_limits<double>::infinity();
    // enumerate image shifts in {-1,0,1} per periodic span
    const int ns = static_cast<int>(periodic_spans.size());
    int total = 1;
    for (int k = 0; k < ns; ++k) total *= 3;
    for (int code = 0; code < total; ++code) {
        Eigen::Vector2d shifted = d;
        int c = code;
        for (int k = 0; k < ns; ++k) {
            int m = c % 3 - 1;
            c /= 3;
            shifted += static_cast<double>(m) * periodic_spans[k];
        }
        best = std::min(best, shifted.norm());
    }
    return best;
}

namespace {

struct Basis {
    Eigen::Vector2d a1, a2;
    std::vector<Eigen::Vector2d> offsets;
    bool one_dimensional = false;
};

Basis basis_for(LatticeKind kind, double a) {
    const double s3 = std::sqrt(3.0);
    Basis b;
    b.a1 = {a, 0.0};
    b.a2 = {0.5 * a, 0.5 * s3 * a};
    switch (kind) {
        case LatticeKind::chain:
            b.offsets = {{0.0, 0.0}};
            b.one_dimensional = true;
            break;
        case LatticeKind::square:
            b.a2 = {0.0, a};
            b.offsets = {{0.0, 0.0}};
            break;
        case LatticeKind::triangular:
            b.offsets = {{0.0, 0.0}};
            break;
        case LatticeKind::honeycomb:
            b.offsets = {{0.0, 0.0}, {0.0, a / s3}};
            break;
        case LatticeKind::kagome:
            b.offsets = {{0.0, 0.0}, 0.5 * b.a1, 0.5 * b.a2};
            break;
        default:
            throw std::invalid_argument("build_lattice: unknown kind");
    }
    return b;
}

// recompute edges_by_order from coordinates; shells binned with relative
// tolerance 1e-6
void rebuild_edges(Lattice& l, int neighbor_order) {
    l.edges_by_order.clear();
    const int n = static_cast<int>(l.sites.size());
    if (n < 2 || neighbor_order < 1) return;

    struct Pair {
        double d;
        int i, j;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            pairs.push_back({l.distance(i, j), i, j});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.d != b.d) return a.d < b.d;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    int order = 0;
    double shell = -1.0;
    for (const Pair& p : pairs) {
        if (p.d <= 0.0) continue;
        if (shell < 0.0 || p.d > shell * (1.0 + 1e-6)) {
            ++order;
            shell = p.d;
        }
        if (order > neighbor_order) break;
        l.edges_by_order[order].push_back({p.i, p.j});
    }
}

}  // namespace

Lattice build_lattice(LatticeKind kind, const std::vector<int>& size,
                      const std::vector<bool>& pbc, double lattice_constant,
                      int neighbor_order) {
    require(kind != LatticeKind::custom, "build_lattice: custom lattices come from remove_sites");
    require(lattice_constant > 0.0, "build_lattice: lattice_constant must be > 0");
    for (int s : size) require(s >= 1, "build_lattice: size entries must be >= 1");

    Basis b = basis_for(kind, lattice_constant);
    const int ndim = b.one_dimensional ? 1 : 2;
    require(static_cast<int>(size.size()) == ndim, "build_lattice: wrong size rank");
    require(static_cast<int>(pbc.size()) == ndim, "build_lattice: wrong pbc rank");
    for (int k = 0; k < ndim; ++k) {
        if (pbc[k]) {
            require(size[k] >= 3, "build_lattice: periodic dimension needs extent >= 3");
        }
    }

    Lattice l;
    l.kind = kind;
    l.lattice_constant = lattice_constant;

    const int nx = size[0];
    const int ny = b.one_dimensional ? 1 : size[1];
    for (int y = 0; y < ny; ++y) {
        for (int x = 0; x < nx; ++x) {
            for (std::size_t bi = 0; bi < b.offsets.size(); ++bi) {
                Eigen::Vector2d r = static_cast<double>(x) * b.a1 +
                                    static_cast<double>(y) * b.a2 + b.offsets[bi];
                std::ostringstream id;
                if (b.one_dimensional) {
                    id << x << ":" << bi;
                } else {
                    id << x << "," << y << ":" << bi;
                }
                l.sites.push_back({id.str(), r});
            }
        }
    }

    if (pbc[0]) l.periodic_spans.push_back(static_cast<double>(nx) * b.a1);
    if (ndim == 2 && pbc[1]) l.periodic_spans.push_back(static_cast<double>(ny) * b.a2);

    rebuild_edges(l, neighbor_order);
    return l;
}

Lattice remove_sites(const Lattice& l, const std::vector<std::string>& ids,
                     int neighbor_order) {
    std::set<int> doomed;
    for (const std::string& id : ids) {
        int idx = l.site_index(id);
        require(idx >= 0, "remove_sites: unknown site identifier");
        doomed.insert(idx);
    }
    Lattice out;
    out.kind = LatticeKind::custom;
    out.lattice_constant = l.lattice_constant;
    out.periodic_spans = l.periodic_spans;
    for (std::size_t i = 0; i < l.sites.size(); ++i) {
        if (!doomed.count(static_cast<int>(i))) out.sites.push_back(l.sites[i]);
    }
    rebuild_edges(out, neighbor_order);
    return out;
}

Eigen::MatrixXd pair_distances(const Lattice& l) {
    require(l.sites.size() >= 2, "pair_distances: need at least 2 sites");
    const int n = static_cast<int>(l.sites.size());
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            d(i, j) = d(j, i) = l.distance(i, j);
        }
    }
    return d;
}

std::string Lattice::to_json() const {
    nlohmann::json j;
    j["kind"] = static_cast<int>(kind);
    j["lattice_constant"] = lattice_constant;
    j["sites"] = nlohmann::json::array();
    for (const auto& s : sites) {
        j["sites"].push_back({{"id", s.id}, {"x", s.coord[0]}, {"y", s.coord[1]}});
    }
    j["edges"] = nlohmann::json::object();
    for (const auto& [order, list] : edges_by_order) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [i, jdx] : list) arr.push_back({i, jdx});
        j["edges"][std::to_string(order)] = arr;
    }
    return j.dump();
}

}  // namespace qforge
