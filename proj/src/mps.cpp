#include "qforge/mps.hpp"

#include <algorithm>
#include <cmath>

#include "qforge/numerics.hpp"

namespace qforge {

MPSState::MPSState(int n, TruncationPolicy policy, int d)
    : n_(n), d_(d), policy_(policy) {
    require(n >= 1, "MPSState: need at least one site");
    tensors_.resize(n);
    for (auto& t : tensors_) {
        t.l = 1;
        t.d = d;
        t.r = 1;
        t.data.assign(d, cplx(0.0, 0.0));
        t.data[0] = 1.0;
    }
}

int MPSState::max_bond() const {
    int m = 1;
    for (const auto& t : tensors_) m = std::max(m, t.r);
    return m;
}

void MPSState::apply_two_site(const ComplexMatrix& u, int k) {
    MPSTensor& a = tensors_[k];
    MPSTensor& b = tensors_[k + 1];
    const int L = a.l, M = a.r, R = b.r, d = d_;
    require(M == b.l, "MPSState: inconsistent bond dimensions");

    // theta(a, s1, s2, b)
    std::vector<cplx> theta(static_cast<std::size_t>(L) * d * d * R, cplx(0.0));
    for (int al = 0; al < L; ++al)
        for (int s1 = 0; s1 < d; ++s1)
            for (int m = 0; m < M; ++m) {
                cplx av = a.at(al, s1, m);
                if (av == cplx(0.0)) continue;
                for (int s2 = 0; s2 < d; ++s2)
                    for (int br = 0; br < R; ++br)
                        theta[((static_cast<std::size_t>(al) * d + s1) * d + s2) * R + br] +=
                            av * b.at(m, s2, br);
            }

    // gate: theta'(a, t1, t2, b) = sum_s u[(t1 t2), (s1 s2)] theta(a, s1, s2, b)
    std::vector<cplx> theta2(theta.size(), cplx(0.0));
    for (int al = 0; al < L; ++al)
        for (int br = 0; br < R; ++br)
            for (int t = 0; t < d * d; ++t) {
                cplx acc = 0.0;
                for (int s = 0; s < d * d; ++s) {
                    acc += u(t, s) *
                           theta[((static_cast<std::size_t>(al) * d + s / d) * d + s % d) * R + br];
                }
                theta2[((static_cast<std::size_t>(al) * d + t / d) * d + t % d) * R + br] = acc;
            }

    // split: matrix (L*d) x (d*R)
    ComplexMatrix m(L * d, d * R);
    for (int al = 0; al < L; ++al)
        for (int s1 = 0; s1 < d; ++s1)
            for (int s2 = 0; s2 < d; ++s2)
                for (int br = 0; br < R; ++br)
                    m(al * d + s1, s2 * R + br) =
                        theta2[((static_cast<std::size_t>(al) * d + s1) * d + s2) * R + br];

    SvdResult svd = svd_truncated(m, policy_.max_singular_values, policy_.max_truncation_err);
    discarded_ += svd.discarded_weight;
    const int chi = static_cast<int>(svd.s.size());
    require(svd.s.norm() > 0.0, "MPSState: state truncated to zero");

    a.r = chi;
    a.data.assign(static_cast<std::size_t>(L) * d * chi, cplx(0.0));
    for (int al = 0; al < L; ++al)
        for (int s1 = 0; s1 < d; ++s1)
            for (int c = 0; c < chi; ++c) a.at(al, s1, c) = svd.u(al * d + s1, c);

    b.l = chi;
    b.r = R;
    b.data.assign(static_cast<std::size_t>(chi) * d * R, cplx(0.0));
    for (int c = 0; c < chi; ++c)
        for (int s2 = 0; s2 < d; ++s2)
            for (int br = 0; br < R; ++br)
                b.at(c, s2, br) = svd.s[c] * svd.v(c, s2 * R + br);

    // unitary gates preserve the norm exactly; only truncation requires a
    // global renormalization (the chain is not kept canonical, so the bond
    // spectrum alone cannot provide it)
    if (svd.discarded_weight > 0.0) {
        double nrm = global_norm();
        require(nrm > 0.0, "MPSState: state truncated to zero");
        for (auto& v : b.data) v /= nrm;
    }
}

double MPSState::global_norm() const {
    // left-to-right transfer contraction of <psi|psi>
    ComplexMatrix e = ComplexMatrix::Ones(1, 1);
    for (const auto& t : tensors_) {
        ComplexMatrix next = ComplexMatrix::Zero(t.r, t.r);
        for (int s = 0; s < t.d; ++s) {
            ComplexMatrix ts(t.l, t.r);
            for (int a = 0; a < t.l; ++a)
                for (int b = 0; b < t.r; ++b) ts(a, b) = t.at(a, s, b);
            next.noalias() += ts.adjoint() * e * ts;
        }
        e = std::move(next);
    }
    return std::sqrt(std::max(0.0, e(0, 0).real()));
}

void MPSState::apply_gate(const ComplexMatrix& u, const std::vector<int>& wires) {
    for (int w : wires) require(w >= 0 && w < n_, "MPSState: wire out of range");
    if (wires.size() == 1) {
        MPSTensor& t = tensors_[wires[0]];
        require(u.rows() == d_ && u.cols() == d_, "MPSState: wrong gate size");
        std::vector<cplx> out(t.data.size(), cplx(0.0));
        for (int a = 0; a < t.l; ++a)
            for (int s = 0; s < d_; ++s)
                for (int b = 0; b < t.r; ++b) {
                    cplx acc = 0.0;
                    for (int sp = 0; sp < d_; ++sp) acc += u(s, sp) * t.at(a, sp, b);
                    out[(static_cast<std::size_t>(a) * d_ + s) * t.r + b] = acc;
                }
        t.data = std::move(out);
        return;
    }
    require(wires.size() == 2, "MPSState: only 1- and 2-site gates supported");
    require(u.rows() == d_ * d_, "MPSState: wrong gate size");
    int w0 = wires[0], w1 = wires[1];

    ComplexMatrix g = u;
    if (w0 > w1) {
        // permute gate wires so w0 < w1
        ComplexMatrix p(d_ * d_, d_ * d_);
        p.setZero();
        for (int s1 = 0; s1 < d_; ++s1)
            for (int s2 = 0; s2 < d_; ++s2) p(s1 * d_ + s2, s2 * d_ + s1) = 1.0;
        g = p * u * p;
        std::swap(w0, w1);
    }

    if (w1 == w0 + 1) {
        apply_two_site(g, w0);
        return;
    }

    // swap w1 down next to w0, apply, swap back (each swap truncated too)
    ComplexMatrix swap = ComplexMatrix::Zero(d_ * d_, d_ * d_);
    for (int s1 = 0; s1 < d_; ++s1)
        for (int s2 = 0; s2 < d_; ++s2) swap(s1 * d_ + s2, s2 * d_ + s1) = 1.0;
    for (int k = w1 - 1; k > w0; --k) apply_two_site(swap, k);
    apply_two_site(g, w0);
    for (int k = w0 + 1; k < w1; ++k) apply_two_site(swap, k);
}

void MPSState::apply_instruction(const GateInstruction& instr) {
    apply_gate(gate_matrix(instr, d_), instr.wires);
}

void MPSState::run_circuit(const Circuit& c) {
    require(c.n == n_ && c.d == d_, "MPSState: circuit shape mismatch");
    require(!c.initial_state, "MPSState: explicit initial states not supported");
    for (const auto& instr : c.ops) apply_instruction(instr);
}

cplx MPSState::expectation_local(
    const std::vector<std::pair<int, ComplexMatrix>>& ops) const {
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = i + 1; j < ops.size(); ++j)
            require(ops[i].first != ops[j].first, "expectation_local: site collision");

    // left environment L(a, a'), ket index first
    ComplexMatrix env = ComplexMatrix::Ones(1, 1);
    for (int site = 0; site < n_; ++site) {
        const MPSTensor& t = tensors_[site];
        const ComplexMatrix* op = nullptr;
        for (const auto& [s, m] : ops) {
            if (s == site) {
                require(m.rows() == d_ && m.cols() == d_, "expectation_local: wrong op size");
                op = &m;
            }
        }
        ComplexMatrix next = ComplexMatrix::Zero(t.r, t.r);
        for (int a = 0; a < t.l; ++a)
            for (int ap = 0; ap < t.l; ++ap) {
                cplx e = env(a, ap);
                if (e == cplx(0.0)) continue;
                for (int s = 0; s < d_; ++s)
                    for (int sp = 0; sp < d_; ++sp) {
                        cplx w = op ? (*op)(sp, s) : (s == sp ? cplx(1.0) : cplx(0.0));
                        if (w == cplx(0.0)) continue;
                        for (int b = 0; b < t.r; ++b) {
                            cplx kv = t.at(a, s, b);
                            if (kv == cplx(0.0)) continue;
                            for (int bp = 0; bp < t.r; ++bp)
                                next(b, bp) += e * w * kv * std::conj(t.at(ap, sp, bp));
                        }
                    }
            }
        env = std::move(next);
    }
    return env(0, 0);
}

StateVector MPSState::to_statevector(std::size_t memory_guard_log2) const {
    double dim = std::pow(static_cast<double>(d_), n_);
    require(dim <= std::pow(2.0, static_cast<double>(memory_guard_log2)),
            "to_statevector: dimension exceeds memory guard");

    // fold left to right: block (prefix_dim x bond)
    ComplexMatrix block = ComplexMatrix::Ones(1, 1);
    for (int site = 0; site < n_; ++site) {
        const MPSTensor& t = tensors_[site];
        ComplexMatrix next = ComplexMatrix::Zero(block.rows() * d_, t.r);
        for (Eigen::Index p = 0; p < block.rows(); ++p)
            for (int s = 0; s < d_; ++s)
                for (int b = 0; b < t.r; ++b) {
                    cplx acc = 0.0;
                    for (int a = 0; a < t.l; ++a) acc += block(p, a) * t.at(a, s, b);
                    next(p * d_ + s, b) = acc;
                }
        block = std::move(next);
    }

    StateVector psi;
    psi.n = n_;
    psi.d = d_;
    psi.amps = block.col(0);
    return psi;
}

}  // namespace qforge
