#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qforge/common.hpp"

namespace qforge {

enum class LatticeKind { chain, square, triangular, honeycomb, kagome, custom };

LatticeKind lattice_kind_from_string(const std::string& name);

struct LatticeSite {
    std::string id;     // "(cell):basis" identifier
    Eigen::Vector2d coord;  // in absolute units (lattice_constant applied)
};

// Immutable lattice geometry with neighbor shells resolved by distance.
//
// Bravais/basis conventions (lattice constant a):
//   chain:      sites at (i*a, 0)
//   square:     a1=(a,0), a2=(0,a)
//   triangular: a1=(a,0), a2=(a/2, a*sqrt(3)/2)
//   honeycomb:  triangular Bravais, basis {(0,0), (0, a/sqrt(3))}
//   kagome:     triangular Bravais, basis {(0,0), a1/2, a2/2}
struct Lattice {
    LatticeKind kind = LatticeKind::custom;
    double lattice_constant = 1.0;
    std::vector<LatticeSite> sites;
    // order (1 = nearest) -> unordered site-index pairs (i < j)
    std::map<int, std::vector<std::pair<int, int>>> edges_by_order;
    // periodic translation vectors; empty for fully open boundaries
    std::vector<Eigen::Vector2d> periodic_spans;

    std::size_t num_sites() const { return sites.size(); }
    int site_index(const std::string& id) const;  // -1 if absent

    // minimum-image distance between two sites
    double distance(int i, int j) const;

    std::string to_json() const;
};

Lattice build_lattice(LatticeKind kind, const std::vector<int>& size,
                      const std::vector<bool>& pbc, double lattice_constant = 1.0,
                      int neighbor_order = 1);

// Returns a custom lattice with the named sites and their incident edges
// removed; neighbor shells are recomputed globally over the surviving sites.
Lattice remove_sites(const Lattice& l, const std::vector<std::string>& ids,
                     int neighbor_order = 1);

Eigen::MatrixXd pair_distances(const Lattice& l);

}  // namespace qforge
