#include "qforge/fgs.hpp"

#include <algorithm>
#include <cmath>

#include "qforge/numerics.hpp"

namespace qforge {

void QuadraticHamiltonian::validate() const {
    require(L >= 1, "QuadraticHamiltonian: L must be >= 1");
    require(A.rows() == L && A.cols() == L, "QuadraticHamiltonian: A has wrong shape");
    require(B.rows() == L && B.cols() == L, "QuadraticHamiltonian: B has wrong shape");
    require(is_hermitian(A), "QuadraticHamiltonian: A not Hermitian");
    require((B + B.transpose()).cwiseAbs().maxCoeff() <=
                kHermTol * std::max(1.0, B.cwiseAbs().maxCoeff()),
            "QuadraticHamiltonian: B not antisymmetric");
}

ComplexMatrix QuadraticHamiltonian::bdg_matrix() const {
    ComplexMatrix m(2 * L, 2 * L);
    m.topLeftCorner(L, L) = A;
    m.topRightCorner(L, L) = B;
    m.bottomLeftCorner(L, L) = B.adjoint();
    m.bottomRightCorner(L, L) = -A.transpose();
    return m;
}

QuadraticHamiltonian build_kitaev(int L, double t, double delta, double mu) {
    require(L >= 2, "build_kitaev: L must be >= 2");
    QuadraticHamiltonian h;
    h.L = L;
    h.A = ComplexMatrix::Zero(L, L);
    h.B = ComplexMatrix::Zero(L, L);
    for (int i = 0; i < L; ++i) h.A(i, i) = -mu;
    for (int i = 0; i + 1 < L; ++i) {
        h.A(i, i + 1) = -t;
        h.A(i + 1, i) = -t;
        h.B(i, i + 1) = delta;
        h.B(i + 1, i) = -delta;
    }
    return h;
}

FGSState FGSState::filled(int L, const std::vector<int>& occupied) {
    FGSState s;
    s.L = L;
    s.C = ComplexMatrix::Zero(2 * L, 2 * L);
    std::vector<bool> occ(L, false);
    for (int i : occupied) {
        require(i >= 0 && i < L, "FGSState::filled: mode out of range");
        occ[i] = true;
    }
    for (int i = 0; i < L; ++i) {
        s.C(i, i) = occ[i] ? 0.0 : 1.0;        // <c c^dag>
        s.C(L + i, L + i) = occ[i] ? 1.0 : 0.0;  // <c^dag c>
    }
    return s;
}

double FGSState::purity_defect() const {
    return (C * C - C).cwiseAbs().maxCoeff();
}

double FGSState::particle_hole_defect() const {
    ComplexMatrix ccdag = C.topLeftCorner(L, L);
    ComplexMatrix cdagc = C.bottomRightCorner(L, L);
    return (ccdag - (ComplexMatrix::Identity(L, L) - cdagc.transpose()))
        .cwiseAbs()
        .maxCoeff();
}

FGSState fgs_ground_state(const QuadraticHamiltonian& h, double zero_tol) {
    h.validate();
    EighResult eig = eigh(h.bdg_matrix());
    const int L = h.L;
    FGSState s;
    s.L = L;
    // fill the L highest-eigenvalue modes of M; C = projector onto them
    s.C = ComplexMatrix::Zero(2 * L, 2 * L);
    for (int k = L; k < 2 * L; ++k) {
        s.C += eig.eigenvectors.col(k) * eig.eigenvectors.col(k).adjoint();
    }
    if (std::abs(eig.eigenvalues[L] - eig.eigenvalues[L - 1]) < zero_tol) {
        s.degenerate_ground = true;  // zero-mode tie-break, C not unique
    }
    return s;
}

double fgs_energy(const FGSState& s, const QuadraticHamiltonian& h) {
    // H = 1/2 Psi^dag M Psi + 1/2 Tr A and <Psi^dag_a Psi_b> = delta - C_{ba}
    ComplexMatrix m = h.bdg_matrix();
    cplx e = 0.5 * h.A.trace() - 0.5 * (m * s.C).trace();
    return e.real();
}

void fgs_evolve(FGSState& s, const QuadraticHamiltonian& h, double t, EvolveMode mode) {
    h.validate();
    require(s.L == h.L, "fgs_evolve: mode count mismatch");
    require(std::isfinite(t), "fgs_evolve: non-finite time");
    if (t == 0.0) return;
    ComplexMatrix m = h.bdg_matrix();

    if (mode == EvolveMode::real) {
        ComplexMatrix u = expm_dense(cplx(0.0, -t) * m);
        s.C = u * s.C * u.adjoint();
        s.C = 0.5 * (s.C + s.C.adjoint());
        return;
    }

    require(s.purity_defect() < 1e-6, "fgs_evolve: imaginary mode needs a pure state");
    // basis of the annihilator subspace = range of C (eigenvalue ~1)
    EighResult ce = eigh(s.C);
    ComplexMatrix v(2 * s.L, s.L);
    int col = 0;
    for (int k = 0; k < 2 * s.L; ++k) {
        if (ce.eigenvalues[k] > 0.5) {
            require(col < s.L, "fgs_evolve: rank of C exceeds L");
            v.col(col++) = ce.eigenvectors.col(k);
        }
    }
    require(col == s.L, "fgs_evolve: rank of C below L");

    const int steps = static_cast<int>(std::ceil(std::abs(t) / 0.1));
    const double dt = t / steps;
    ComplexMatrix k = expm_dense(dt * m);
    for (int step = 0; step < steps; ++step) {
        v = k * v;
        Eigen::HouseholderQR<ComplexMatrix> qr(v);
        v = qr.householderQ() * ComplexMatrix::Identity(2 * s.L, s.L);
    }
    s.C = v * v.adjoint();
}

ComplexMatrix two_time_correlation(const FGSState& s0, const QuadraticHamiltonian& h,
                                   double t) {
    h.validate();
    require(s0.L == h.L, "two_time_correlation: mode count mismatch");
    const int L = s0.L;
    ComplexMatrix u = expm_dense(cplx(0.0, -t) * h.bdg_matrix());
    // <c_i^dag(t) c_j(0)> = [conj(U) (I - C^T)]_{ij}, top-left block
    ComplexMatrix full = u.conjugate() * (ComplexMatrix::Identity(2 * L, 2 * L) -
                                          s0.C.transpose());
    return full.topLeftCorner(L, L);
}

namespace {

double binary_entropy_bits(double p) {
    p = std::clamp(p, 0.0, 1.0);
    double s = 0.0;
    if (p > 1e-15) s -= p * std::log2(p);
    if (1.0 - p > 1e-15) s -= (1.0 - p) * std::log2(1.0 - p);
    return s;
}

}  // namespace

double fgs_entropy(const FGSState& s, const std::vector<int>& subsystem) {
    require(!subsystem.empty(), "fgs_entropy: empty subsystem");
    require(static_cast<int>(subsystem.size()) < s.L, "fgs_entropy: full subsystem");
    const int m = static_cast<int>(subsystem.size());
    ComplexMatrix sub(2 * m, 2 * m);
    auto idx = [&](int k) { return k < m ? subsystem[k] : s.L + subsystem[k - m]; };
    for (int r = 0; r < 2 * m; ++r)
        for (int c = 0; c < 2 * m; ++c) sub(r, c) = s.C(idx(r), idx(c));
    EighResult eig = eigh(sub);
    // eigenvalues come in (nu, 1-nu) pairs; half the total counts each pair once
    double total = 0.0;
    for (int k = 0; k < 2 * m; ++k) total += binary_entropy_bits(eig.eigenvalues[k]);
    return 0.5 * total;
}

namespace {

// Pfaffian of a small even-dimensional antisymmetric matrix by expansion
// along the first row.
cplx pfaffian_small(const ComplexMatrix& a) {
    const int n = static_cast<int>(a.rows());
    if (n == 0) return 1.0;
    if (n == 2) return a(0, 1);
    cplx acc = 0.0;
    double sign = 1.0;
    for (int j = 1; j < n; ++j) {
        ComplexMatrix minor(n - 2, n - 2);
        int rr = 0;
        for (int r = 1; r < n; ++r) {
            if (r == j) continue;
            int cc = 0;
            for (int c = 1; c < n; ++c) {
                if (c == j) continue;
                minor(rr, cc++) = a(r, c);
            }
            ++rr;
        }
        acc += sign * a(0, j) * pfaffian_small(minor);
        sign = -sign;
    }
    return acc;
}

}  // namespace

FgsMeasureResult fgs_measure(FGSState& s, int site, RngStream& rng, int forced) {
    require(site >= 0 && site < s.L, "fgs_measure: site out of range");
    const int L = s.L;
    const double p1 = std::clamp(s.C(L + site, L + site).real(), 0.0, 1.0);

    int outcome;
    if (forced >= 0) {
        require(forced <= 1, "fgs_measure: outcome must be 0 or 1");
        double p = (forced == 1) ? p1 : 1.0 - p1;
        if (p <= 1e-14) {
            throw std::runtime_error("fgs_measure: forced outcome has zero probability");
        }
        outcome = forced;
    } else {
        outcome = (rng.uniform() < p1) ? 1 : 0;
    }
    const double prob = (outcome == 1) ? p1 : 1.0 - p1;

    // Wick/Pfaffian evaluation of <P Psi_a Psi_b^dag P> / prob with
    // P = n_site (outcome 1) or 1 - n_site (outcome 0). Operator list:
    //   outcome 1: (c^dag, c, Psi_a, Psi_b, c^dag, c)   [Psi_b := Psi^dag_b]
    //   outcome 0: (c, c^dag, Psi_a, Psi_b, c, c^dag)
    // All contractions <Psi_p Psi_q> = C_{p, bar q} with bar swapping blocks.
    auto bar = [L](int q) { return q < L ? q + L : q - L; };
    const int qa = (outcome == 1) ? L + site : site;
    const int qb = bar(qa);

    ComplexMatrix newC(2 * L, 2 * L);
    ComplexMatrix w(6, 6);
    for (int alpha = 0; alpha < 2 * L; ++alpha) {
        for (int beta = 0; beta < 2 * L; ++beta) {
            const int q[6] = {qa, qb, alpha, bar(beta), qa, qb};
            w.setZero();
            for (int r = 0; r < 6; ++r)
                for (int c = r + 1; c < 6; ++c) w(r, c) = s.C(q[r], bar(q[c]));
            newC(alpha, beta) = pfaffian_small(w) / prob;
        }
    }
    s.C = 0.5 * (newC + newC.adjoint());
    return {outcome, prob};
}

EntropyScanResult kitaev_entropy_scan(int L, double t, double delta,
                                      const std::vector<double>& mu_grid) {
    require(!mu_grid.empty(), "kitaev_entropy_scan: empty grid");
    EntropyScanResult out;
    std::vector<int> half(L / 2);
    for (int i = 0; i < L / 2; ++i) half[i] = i;
    double best = -1.0;
    for (double mu : mu_grid) {
        FGSState gs = fgs_ground_state(build_kitaev(L, t, delta, mu));
        double ent = fgs_entropy(gs, half);
        out.curve.push_back({mu, ent});
        if (ent > best) {
            best = ent;
            out.argmax_mu = mu;
        }
    }
    return out;
}

Eigen::MatrixXd majorana_covariance(const FGSState& s) {
    const int L = s.L;
    // <g_a g_b> from C blocks; G = -i(<g g> - I)
    ComplexMatrix gg(2 * L, 2 * L);
    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < L; ++j) {
            cplx ccd = s.C(i, j);          // <c_i c_j^dag>
            cplx cc = s.C(i, L + j);       // <c_i c_j>
            cplx cdcd = s.C(L + i, j);     // <c_i^dag c_j^dag>
            cplx cdc = s.C(L + i, L + j);  // <c_i^dag c_j>
            gg(2 * i, 2 * j) = ccd + cc + cdcd + cdc;
            gg(2 * i, 2 * j + 1) = cplx(0, -1) * (cc - ccd + cdc - cdcd);
            gg(2 * i + 1, 2 * j) = cplx(0, -1) * (ccd + cc - cdcd - cdc);
            gg(2 * i + 1, 2 * j + 1) = -(cc - ccd - cdc + cdcd);
        }
    }
    ComplexMatrix g = cplx(0, -1) * (gg - ComplexMatrix::Identity(2 * L, 2 * L));
    return g.real();
}

}  // namespace qforge
