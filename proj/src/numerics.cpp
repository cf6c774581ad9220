#include "qforge/numerics.hpp"

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace qforge {

SvdResult svd_truncated(const ComplexMatrix& m,
                        std::optional<int> max_keep,
                        std::optional<double> max_err) {
    require(m.allFinite(), "svd_truncated: non-finite input");
    if (max_keep) require(*max_keep >= 1, "svd_truncated: max_keep must be >= 1");

    Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const RealVector& s = svd.singularValues();
    const int full = static_cast<int>(s.size());

    int keep = full;
    if (max_err) {
        // drop the smallest values while the dropped squared weight stays below max_err
        double acc = 0.0;
        while (keep > 1) {
            double next = acc + s[keep - 1] * s[keep - 1];
            if (next > *max_err) break;
            acc = next;
            --keep;
        }
    }
    if (max_keep && *max_keep < keep) keep = *max_keep;

    SvdResult out;
    out.u = svd.matrixU().leftCols(keep);
    out.s = s.head(keep);
    out.v = svd.matrixV().leftCols(keep).adjoint();
    out.discarded_weight = 0.0;
    for (int i = keep; i < full; ++i) out.discarded_weight += s[i] * s[i];
    return out;
}

EighResult eigh(const ComplexMatrix& m) {
    require(m.rows() == m.cols(), "eigh: non-square");
    require(is_hermitian(m), "eigh: input not Hermitian within tolerance");
    ComplexMatrix sym = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
    require(solver.info() == Eigen::Success, "eigh: solver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

ComplexMatrix expm_dense(const ComplexMatrix& m) {
    require(m.rows() == m.cols(), "expm_dense: non-square");
    require(m.allFinite(), "expm_dense: non-finite input");
    return m.exp();
}

}  // namespace qforge
