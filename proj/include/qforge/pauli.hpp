#pragma once

#include <string>
#include <vector>

#include "qforge/common.hpp"
#include "qforge/lattice.hpp"
#include "qforge/sparse.hpp"

namespace qforge {

// Pauli codes: 0=I, 1=X, 2=Y, 3=Z.
struct PauliTerm {
    cplx weight;
    std::vector<int> codes;  // length n
};

// Weighted sum of Pauli strings; the universal Hamiltonian/observable IR.
// Site 0 is the most significant bit of basis indices, everywhere.
struct PauliSum {
    int n = 0;
    std::vector<PauliTerm> terms;

    void add(cplx weight, const std::vector<int>& codes);
    // convenience: add a term with the given code on the listed sites, I elsewhere
    void add_word(cplx weight, const std::vector<std::pair<int, int>>& site_codes);

    std::string to_json() const;
    static PauliSum from_json(const std::string& text);
};

// Lowers a PauliSum to a canonical sparse matrix of dimension 2^n.
// Row blocks are processed in parallel with a deterministic merge.
SparseCOO pauli_sum_to_coo(const PauliSum& h, int n_guard = 26, std::size_t workers = 1);

// Dense Kronecker-product lowering (oracle-friendly; n small).
ComplexMatrix pauli_sum_to_dense(const PauliSum& h);

// Model builders over order-1 lattice edges.
PauliSum tfim_terms(const Lattice& l, double g);
PauliSum heisenberg_terms(const Lattice& l, double jx, double jy, double jz);

// Rydberg chain/array: omega/2 X drive, -delta n detuning, c6/r^6 n-n tails.
// cutoff_radius <= 0 means all pairs.
PauliSum rydberg_terms(const Lattice& l, double omega, double delta, double c6,
                       double cutoff_radius = 0.0);

// ---- qudits ----

struct QuditFactor {
    int site;
    ComplexMatrix op;  // d x d
};

struct QuditTerm {
    cplx weight;
    std::vector<QuditFactor> factors;  // distinct sites
};

struct QuditOperatorSum {
    int n = 0;
    int d = 2;
    std::vector<QuditTerm> terms;
};

ComplexMatrix clock_z(int d);   // diag(1, w, ..., w^{d-1}), w = exp(2 pi i / d)
ComplexMatrix shift_x(int d);   // X|j> = |j+1 mod d>

// Open-chain clock model: -J (Z_i Z_{i+1}^dag + h.c.) - h (X_i + X_i^dag).
QuditOperatorSum clock_model(int n, int d, double j, double h);

ComplexMatrix qudit_sum_to_dense(const QuditOperatorSum& h);

}  // namespace qforge
