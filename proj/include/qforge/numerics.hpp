#pragma once

#include <optional>

#include "qforge/common.hpp"

namespace qforge {

struct SvdResult {
    ComplexMatrix u;        // rows x k
    RealVector s;           // k kept singular values, descending
    ComplexMatrix v;        // k x cols, so u * s.asDiagonal() * v ~ m
    double discarded_weight = 0.0;  // sum of squared dropped singular values
};

// Truncated SVD. Keeps at most max_keep values and drops trailing values whose
// cumulative squared weight stays below max_err (when given). With neither
// bound set, returns the full SVD.
SvdResult svd_truncated(const ComplexMatrix& m,
                        std::optional<int> max_keep = std::nullopt,
                        std::optional<double> max_err = std::nullopt);

struct EighResult {
    RealVector eigenvalues;   // ascending
    ComplexMatrix eigenvectors;  // columns
};

// Hermitian eigendecomposition. Input is symmetrized as (m + m^H)/2; deviation
// beyond kHermTol (relative) is an error.
EighResult eigh(const ComplexMatrix& m);

// Dense matrix exponential.
ComplexMatrix expm_dense(const ComplexMatrix& m);

}  // namespace qforge
