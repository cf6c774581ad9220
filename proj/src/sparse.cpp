#include "qforge/sparse.hpp"

#include <algorithm>
#include <numeric>

namespace qforge {

void SparseCOO::canonicalize() {
    const std::size_t n = vals.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rows[a] != rows[b]) return rows[a] < rows[b];
        return cols[a] < cols[b];
    });

    std::vector<std::int64_t> r2, c2;
    std::vector<cplx> v2;
    r2.reserve(n);
    c2.reserve(n);
    v2.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t i = order[k];
        if (!v2.empty() && r2.back() == rows[i] && c2.back() == cols[i]) {
            v2.back() += vals[i];
        } else {
            r2.push_back(rows[i]);
            c2.push_back(cols[i]);
            v2.push_back(vals[i]);
        }
    }
    rows.clear();
    cols.clear();
    vals.clear();
    for (std::size_t k = 0; k < v2.size(); ++k) {
        if (v2[k] != cplx(0.0, 0.0)) {
            rows.push_back(r2[k]);
            cols.push_back(c2[k]);
            vals.push_back(v2[k]);
        }
    }
}

void SparseCOO::matvec(const ComplexVector& in, ComplexVector& out) const {
    require(in.size() == dim, "SparseCOO::matvec: size mismatch");
    out.setZero(dim);
    const std::size_t n = vals.size();
    for (std::size_t k = 0; k < n; ++k) {
        out[rows[k]] += vals[k] * in[cols[k]];
    }
}

ComplexVector SparseCOO::apply(const ComplexVector& in) const {
    ComplexVector out;
    matvec(in, out);
    return out;
}

ComplexMatrix SparseCOO::to_dense() const {
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    for (std::size_t k = 0; k < vals.size(); ++k) {
        m(rows[k], cols[k]) += vals[k];
    }
    return m;
}

SparseCOO SparseCOO::from_dense(const ComplexMatrix& m) {
    require(m.rows() == m.cols(), "SparseCOO::from_dense: non-square");
    SparseCOO s;
    s.dim = m.rows();
    for (std::int64_t r = 0; r < m.rows(); ++r) {
        for (std::int64_t c = 0; c < m.cols(); ++c) {
            if (m(r, c) != cplx(0.0, 0.0)) s.push(r, c, m(r, c));
        }
    }
    return s;
}

SparseCOO SparseCOO::operator+(const SparseCOO& other) const {
    require(dim == other.dim, "SparseCOO::operator+: dim mismatch");
    SparseCOO s = *this;
    s.rows.insert(s.rows.end(), other.rows.begin(), other.rows.end());
    s.cols.insert(s.cols.end(), other.cols.begin(), other.cols.end());
    s.vals.insert(s.vals.end(), other.vals.begin(), other.vals.end());
    s.canonicalize();
    return s;
}

}  // namespace qforge
