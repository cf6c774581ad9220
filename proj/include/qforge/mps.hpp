#pragma once

#include <optional>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/common.hpp"

namespace qforge {

struct TruncationPolicy {
    std::optional<int> max_singular_values;
    std::optional<double> max_truncation_err;
};

// Site tensor with shape (left bond, physical, right bond), row-major.
struct MPSTensor {
    int l = 1, d = 2, r = 1;
    std::vector<cplx> data;

    cplx& at(int a, int s, int b) { return data[(static_cast<std::size_t>(a) * d + s) * r + b]; }
    cplx at(int a, int s, int b) const {
        return data[(static_cast<std::size_t>(a) * d + s) * r + b];
    }
};

// Matrix-product-state circuit engine. Two-site gates split with truncated
// SVD under the policy (stricter of the two limits when both are set); the
// state is renormalized after every split and the dropped squared weight
// accumulates in discarded_weight.
class MPSState {
public:
    MPSState(int n, TruncationPolicy policy = {}, int d = 2);

    int num_sites() const { return n_; }
    double discarded_weight() const { return discarded_; }
    int max_bond() const;

    void apply_gate(const ComplexMatrix& u, const std::vector<int>& wires);
    void apply_instruction(const GateInstruction& instr);
    void run_circuit(const Circuit& c);

    // exact sandwich contraction with the listed local operators
    cplx expectation_local(const std::vector<std::pair<int, ComplexMatrix>>& ops) const;

    StateVector to_statevector(std::size_t memory_guard_log2 = 24) const;

    double global_norm() const;

private:
    void apply_two_site(const ComplexMatrix& u, int k);  // wires (k, k+1)

    int n_;
    int d_;
    TruncationPolicy policy_;
    std::vector<MPSTensor> tensors_;
    double discarded_ = 0.0;
};

}  // namespace qforge
