#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/common.hpp"
#include "qforge/pauli.hpp"

namespace qforge {

// Dense row-major tensor with one index label per axis.
struct Tensor {
    int id = 0;
    std::vector<std::string> labels;
    std::vector<std::int64_t> shape;
    std::vector<cplx> data;

    std::int64_t size() const;
};

// Labels attach to at most two axes network-wide; single-attachment labels
// are the open edges of the network.
struct TensorNetwork {
    std::vector<Tensor> tensors;
    std::vector<std::string> open_edges;

    void validate() const;
    std::map<std::string, std::int64_t> label_sizes() const;
    // stable digest over ids, shapes, and labels; path files embed it
    std::uint64_t signature() const;
};

// <psi| P |psi> as a closed network: ket initial tensors, gate tensors, one
// observable tensor per site, conjugated bra layer.
TensorNetwork capture_expectation_network(const Circuit& c,
                                          const std::vector<int>& obs_codes);

struct PathOptions {
    std::int64_t target_size = std::int64_t(1) << 28;  // max elements per intermediate
    int max_repeats = 8;
    std::uint64_t seed = 0;
};

// Binary plan: nodes 0..n_leaves-1 are the network tensors in order; node
// n_leaves+i combines nodes[i].first and nodes[i].second.
struct ContractionTree {
    int n_leaves = 0;
    std::vector<std::pair<int, int>> nodes;
    std::vector<std::string> sliced;
    double flops = 0.0;  // complex multiply-adds, summed over pairwise steps
    std::int64_t largest_intermediate = 0;
    std::uint64_t signature = 0;
};

// Greedy pairwise search with randomized restarts, then iterative slicing:
// while an intermediate exceeds target_size, slice the label occurring in the
// most oversized intermediates (ties: larger size, then lexicographic).
ContractionTree find_path(const TensorNetwork& net, const PathOptions& options = {});

struct ContractStats {
    std::int64_t max_intermediate = 0;  // elements, largest materialized
    std::int64_t slice_count = 0;
};

// Executes the tree once per assignment of the sliced labels and accumulates
// in ascending assignment order, so results match any worker count bit for
// bit and the unsliced value within 1e-12.
Tensor contract(const TensorNetwork& net, const ContractionTree& tree, int workers = 1,
                ContractStats* stats = nullptr);

void save_path(const ContractionTree& tree, const std::string& path);
ContractionTree load_path(const std::string& path);

// contracts all shared labels between a and b (utility, also used by tests)
Tensor tensordot(const Tensor& a, const Tensor& b, double* flops = nullptr);

}  // namespace qforge
