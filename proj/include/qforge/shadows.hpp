#pragma once

#include <string>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/common.hpp"
#include "qforge/pauli.hpp"
#include "qforge/rng.hpp"

namespace qforge {

// Randomized Pauli-basis measurement records. Codes: 1 = X, 2 = Y, 3 = Z.
struct ShadowDataset {
    int n = 0;
    std::vector<std::vector<int>> bases;     // M x n
    std::vector<std::vector<int>> outcomes;  // M x n, bits

    std::size_t size() const { return bases.size(); }
    void validate() const;
};

std::vector<std::vector<int>> random_bases(std::size_t m, int n, RngStream& rng);

// One computational-basis sample per row after rotating psi into the row's
// basis (X: H, Y: H S^dag, Z: identity). Row i uses the i-th split stream,
// so results do not depend on the worker count.
ShadowDataset shadow_snapshots(const StateVector& psi,
                               const std::vector<std::vector<int>>& bases,
                               RngStream& rng, int workers = 1);

// Median of n_batches batch means of the single-snapshot estimator
//   prod_{i in support} 3 (1 - 2 outcome_i)  when every basis matches,
//   0 otherwise. Unbiased for n_batches = 1.
double estimate_pauli(const ShadowDataset& ds, const std::vector<int>& obs_codes,
                      int n_batches = 1);

// CSV interchange: header line "n,M", then one "basis-codes;outcome-bits"
// line per snapshot.
void save_dataset(const ShadowDataset& ds, const std::string& path);
ShadowDataset load_dataset(const std::string& path);

}  // namespace qforge
