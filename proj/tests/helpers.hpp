#pragma once

// Shared independent oracles for the test suite. Everything here is built
// from first principles (Kronecker products, dense linear algebra) so the
// library's optimized paths are checked against straightforward math.

#include <vector>

#include <Eigen/Dense>

#include "qforge/common.hpp"
#include "qforge/pauli.hpp"
#include "qforge/rng.hpp"

namespace oracle {

using qforge::cplx;
using qforge::ComplexMatrix;
using qforge::ComplexVector;

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

inline const ComplexMatrix& pauli(int code) {
    static const ComplexMatrix mats[4] = {
        ComplexMatrix::Identity(2, 2),
        (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished(),
        (ComplexMatrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
        (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished()};
    return mats[code];
}

// site 0 = most significant bit, matching the engine convention
inline ComplexMatrix pauli_word(const std::vector<int>& codes) {
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int code : codes) out = kron(out, pauli(code));
    return out;
}

inline ComplexMatrix pauli_sum_dense(const qforge::PauliSum& h) {
    const Eigen::Index dim = Eigen::Index(1) << h.n;
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (const auto& term : h.terms) out += term.weight * pauli_word(term.codes);
    return out;
}

inline qforge::PauliSum random_pauli_sum(int n, int terms, qforge::RngStream& rng,
                                         bool real_weights = true) {
    qforge::PauliSum h;
    h.n = n;
    for (int t = 0; t < terms; ++t) {
        std::vector<int> codes(n);
        for (int q = 0; q < n; ++q) codes[q] = static_cast<int>(rng.uniform_below(4));
        cplx w = real_weights ? cplx(rng.normal(), 0.0) : cplx(rng.normal(), rng.normal());
        h.add(w, codes);
    }
    return h;
}

// lifts a local operator on `wires` (wires[0] most significant) to n qubits
inline ComplexMatrix lift(const ComplexMatrix& op, const std::vector<int>& wires, int n) {
    const Eigen::Index dim = Eigen::Index(1) << n;
    const int w = static_cast<int>(wires.size());
    const Eigen::Index ldim = Eigen::Index(1) << w;
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (Eigen::Index row = 0; row < dim; ++row) {
        Eigen::Index lrow = 0;
        for (int k = 0; k < w; ++k) lrow = (lrow << 1) | ((row >> (n - 1 - wires[k])) & 1);
        for (Eigen::Index lcol = 0; lcol < ldim; ++lcol) {
            if (op(lrow, lcol) == cplx(0.0)) continue;
            Eigen::Index col = row;
            for (int k = 0; k < w; ++k) {
                Eigen::Index bit = (lcol >> (w - 1 - k)) & 1;
                Eigen::Index pos = n - 1 - wires[k];
                col = (col & ~(Eigen::Index(1) << pos)) | (bit << pos);
            }
            out(col, row) += op(lcol, lrow);
        }
    }
    return out;
}

// ---- Fock-space fermion oracle (Jordan-Wigner matrices, site 0 = msb) ----

// annihilation operator for mode i on the 2^L occupation basis
inline ComplexMatrix fock_annihilate(int i, int L) {
    ComplexMatrix sigma = (ComplexMatrix(2, 2) << 0, 1, 0, 0).finished();  // |0><1|
    ComplexMatrix out = ComplexMatrix::Identity(1, 1);
    for (int j = 0; j < L; ++j) {
        if (j < i) out = kron(out, pauli(3));
        else if (j == i) out = kron(out, sigma);
        else out = kron(out, pauli(0));
    }
    return out;
}

inline ComplexMatrix fock_hamiltonian(const ComplexMatrix& a, const ComplexMatrix& b,
                                      int L) {
    const Eigen::Index dim = Eigen::Index(1) << L;
    std::vector<ComplexMatrix> c(L);
    for (int i = 0; i < L; ++i) c[i] = fock_annihilate(i, L);
    ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            if (a(i, j) != cplx(0.0)) h += a(i, j) * (c[i].adjoint() * c[j]);
            if (b(i, j) != cplx(0.0)) {
                h += 0.5 * b(i, j) * (c[i].adjoint() * c[j].adjoint());
                h += 0.5 * std::conj(b(i, j)) * (c[j] * c[i]);
            }
        }
    }
    return h;
}

// von Neumann entropy (bits) of the reduced state on `keep` (bit positions,
// site 0 = msb), for a pure state over L modes
inline double fock_entropy(const ComplexVector& psi, const std::vector<int>& keep, int L) {
    const int k = static_cast<int>(keep.size());
    std::vector<int> env;
    for (int i = 0; i < L; ++i) {
        bool kept = false;
        for (int j : keep) kept |= (j == i);
        if (!kept) env.push_back(i);
    }
    const Eigen::Index dk = Eigen::Index(1) << k;
    const Eigen::Index de = Eigen::Index(1) << env.size();
    ComplexMatrix m = ComplexMatrix::Zero(dk, de);
    for (Eigen::Index idx = 0; idx < psi.size(); ++idx) {
        Eigen::Index rk = 0, re = 0;
        for (int j = 0; j < k; ++j) rk = (rk << 1) | ((idx >> (L - 1 - keep[j])) & 1);
        for (std::size_t j = 0; j < env.size(); ++j)
            re = (re << 1) | ((idx >> (L - 1 - env[j])) & 1);
        m(rk, re) = psi[idx];
    }
    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    double s = 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        double p = svd.singularValues()[i] * svd.singularValues()[i];
        if (p > 1e-15) s -= p * std::log2(p);
    }
    return s;
}

}  // namespace oracle
