#pragma once

#include <cstdint>
#include <vector>

#include "qforge/common.hpp"

namespace qforge {

// Coordinate-format sparse matrix. Canonical form: entries sorted row-major
// with duplicates summed and exact zeros dropped.
struct SparseCOO {
    std::int64_t dim = 0;
    std::vector<std::int64_t> rows;
    std::vector<std::int64_t> cols;
    std::vector<cplx> vals;

    std::size_t nnz() const { return vals.size(); }

    void push(std::int64_t r, std::int64_t c, cplx v) {
        rows.push_back(r);
        cols.push_back(c);
        vals.push_back(v);
    }

    // sort row-major, sum duplicates, drop zeros
    void canonicalize();

    void matvec(const ComplexVector& in, ComplexVector& out) const;
    ComplexVector apply(const ComplexVector& in) const;

    ComplexMatrix to_dense() const;
    static SparseCOO from_dense(const ComplexMatrix& m);

    SparseCOO operator+(const SparseCOO& other) const;
};

}  // namespace qforge
