#include "qforge/variational.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qforge/parallel.hpp"

namespace qforge {

void AnsatzSpec::validate() const {
    require(n_params >= 0, "AnsatzSpec: negative parameter count");
    require(static_cast<bool>(builder), "AnsatzSpec: missing builder");
    require(shift_eligible.size() == static_cast<std::size_t>(n_params),
            "AnsatzSpec: eligibility tags do not match parameter count");
}

AnsatzSpec tfim_chain_ansatz(int n, int layers) {
    require(n >= 2, "tfim_chain_ansatz: n must be >= 2");
    require(layers >= 1, "tfim_chain_ansatz: layers must be >= 1");
    AnsatzSpec a;
    a.n_params = layers * (2 * n - 1);
    a.shift_eligible.assign(a.n_params, true);
    a.builder = [n, layers](const RealVector& theta) {
        Circuit c(n);
        // |+...+> start; the rx+rzz orbit of |0...0> misses the TFIM ground
        for (int q = 0; q < n; ++q) c.h(q);
        int k = 0;
        for (int l = 0; l < layers; ++l) {
            for (int i = 0; i < n; ++i) c.rx(i, theta[k++]);
            for (int i = 0; i + 1 < n; ++i) c.rzz(i, i + 1, theta[k++]);
        }
        return c;
    };
    return a;
}

double energy(const AnsatzSpec& ansatz, const RealVector& theta, const PauliSum& h) {
    ansatz.validate();
    require(theta.size() == ansatz.n_params, "energy: parameter count mismatch");
    StateVector psi = run(ansatz.builder(theta));
    return expectation_pauli(psi, h).real();
}

double energy(const AnsatzSpec& ansatz, const RealVector& theta, const SparseCOO& h) {
    ansatz.validate();
    require(theta.size() == ansatz.n_params, "energy: parameter count mismatch");
    StateVector psi = run(ansatz.builder(theta));
    require(psi.amps.size() == static_cast<std::int64_t>(h.dim),
            "energy: Hamiltonian dimension mismatch");
    return psi.amps.dot(h.apply(psi.amps)).real();
}

RealVector gradient(const AnsatzSpec& ansatz, const RealVector& theta,
                    const PauliSum& h, GradMode mode, double fd_step, int workers) {
    ansatz.validate();
    require(theta.size() == ansatz.n_params, "gradient: parameter count mismatch");
    if (mode == GradMode::parameter_shift) {
        for (int j = 0; j < ansatz.n_params; ++j) {
            require(ansatz.shift_eligible[j],
                    "gradient: parameter not shift-eligible, use finite_diff");
        }
    } else {
        require(fd_step > 0.0, "gradient: finite-diff step must be positive");
    }
    const double shift =
        (mode == GradMode::parameter_shift) ? std::numbers::pi / 2.0 : fd_step;
    const double denom = (mode == GradMode::parameter_shift) ? 2.0 : 2.0 * fd_step;

    RealVector grad(ansatz.n_params);
    parallel_for(static_cast<std::size_t>(ansatz.n_params),
                 static_cast<std::size_t>(std::max(workers, 1)), [&](std::size_t j) {
                     RealVector t = theta;
                     t[j] = theta[j] + shift;
                     double ep = energy(ansatz, t, h);
                     t[j] = theta[j] - shift;
                     double em = energy(ansatz, t, h);
                     grad[j] = (ep - em) / denom;
                 });
    return grad;
}

void adam_step(AdamState& state, RealVector& theta, const RealVector& grad, double lr,
               double beta1, double beta2, double eps) {
    require(theta.size() == grad.size(), "adam_step: shape mismatch");
    if (state.t == 0) {
        state.m = RealVector::Zero(theta.size());
        state.v = RealVector::Zero(theta.size());
    }
    require(state.m.size() == theta.size(), "adam_step: state shape mismatch");
    ++state.t;
    state.m = beta1 * state.m + (1.0 - beta1) * grad;
    state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(beta1, state.t);
    const double c2 = 1.0 - std::pow(beta2, state.t);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        double mhat = state.m[i] / c1;
        double vhat = state.v[i] / c2;
        theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

VqeResult vqe_run(const AnsatzSpec& ansatz, const std::vector<RealVector>& theta0_batch,
                  const PauliSum& h, int steps, double lr, GradMode grad_mode,
                  int workers) {
    ansatz.validate();
    require(!theta0_batch.empty(), "vqe_run: empty batch");
    require(steps >= 1, "vqe_run: steps must be >= 1");

    VqeResult out;
    out.traces.assign(theta0_batch.size(), {});
    out.final_thetas.assign(theta0_batch.size(), RealVector());

    // leftover workers go to the per-entry gradient evaluations
    const int outer = static_cast<int>(
        std::min<std::size_t>(theta0_batch.size(), std::max(workers, 1)));
    const int inner = std::max(1, std::max(workers, 1) / outer);
    parallel_for(theta0_batch.size(), static_cast<std::size_t>(outer),
                 [&](std::size_t b) {
                     RealVector theta = theta0_batch[b];
                     AdamState adam;
                     std::vector<double> trace;
                     trace.reserve(steps);
                     for (int s = 0; s < steps; ++s) {
                         trace.push_back(energy(ansatz, theta, h));
                         RealVector g = gradient(ansatz, theta, h, grad_mode, 1e-5, inner);
                         adam_step(adam, theta, g, lr);
                     }
                     out.traces[b] = std::move(trace);
                     out.final_thetas[b] = std::move(theta);
                 });

    out.best_energy = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < theta0_batch.size(); ++b) {
        double e = energy(ansatz, out.final_thetas[b], h);
        out.traces[b].push_back(e);
        if (e < out.best_energy) {
            out.best_energy = e;
            out.best_index = static_cast<int>(b);
        }
    }
    return out;
}

SubspaceLoss subspace_loss(const SubspaceProblem& p, const RealVector& theta) {
    require(p.k >= 1, "subspace_loss: k must be >= 1");
    require(p.ridge >= 0.0, "subspace_loss: negative ridge");
    std::vector<ComplexVector> states = p.build(theta);
    require(static_cast<int>(states.size()) == p.k, "subspace_loss: wrong state count");
    for (const auto& v : states) {
        require(v.norm() > 1e-12, "subspace_loss: zero state");
        require(v.size() == static_cast<std::int64_t>(p.hamiltonian.dim),
                "subspace_loss: state dimension mismatch");
    }

    SubspaceLoss out;
    out.s = ComplexMatrix(p.k, p.k);
    out.h = ComplexMatrix(p.k, p.k);
    std::vector<ComplexVector> hpsi(p.k);
    for (int j = 0; j < p.k; ++j) hpsi[j] = p.hamiltonian.apply(states[j]);
    for (int i = 0; i < p.k; ++i) {
        for (int j = 0; j < p.k; ++j) {
            out.s(i, j) = states[i].dot(states[j]);
            out.h(i, j) = states[i].dot(hpsi[j]);
        }
    }
    ComplexMatrix sr = out.s + p.ridge * ComplexMatrix::Identity(p.k, p.k);
    Eigen::FullPivLU<ComplexMatrix> lu(sr);
    require(lu.isInvertible(), "subspace_loss: ridged overlap numerically singular");
    out.loss = (lu.solve(out.h)).trace().real();
    return out;
}

std::vector<double> subspace_spectrum(const ComplexMatrix& s, const ComplexMatrix& h) {
    require(s.rows() == s.cols() && h.rows() == h.cols() && s.rows() == h.rows(),
            "subspace_spectrum: shape mismatch");
    require(is_hermitian(h), "subspace_spectrum: H not Hermitian");
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> se(0.5 * (s + s.adjoint()));
    const double floor = 1e-10 * std::max(1.0, se.eigenvalues().maxCoeff());
    require(se.eigenvalues().maxCoeff() > 0.0, "subspace_spectrum: S numerically zero");

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < se.eigenvalues().size(); ++i) {
        if (se.eigenvalues()[i] > floor) keep.push_back(i);
    }
    require(!keep.empty(), "subspace_spectrum: S numerically zero");
    ComplexMatrix w(s.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        w.col(c) = se.eigenvectors().col(keep[c]) / std::sqrt(se.eigenvalues()[keep[c]]);
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> he(w.adjoint() * h * w);
    std::vector<double> vals(he.eigenvalues().data(),
                             he.eigenvalues().data() + he.eigenvalues().size());
    return vals;
}

}  // namespace qforge
