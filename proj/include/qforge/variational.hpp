#pragma once

#include <functional>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/common.hpp"
#include "qforge/pauli.hpp"
#include "qforge/rng.hpp"
#include "qforge/sparse.hpp"

namespace qforge {

struct AnsatzSpec {
    int n_params = 0;
    std::function<Circuit(const RealVector&)> builder;
    // generators with eigenvalues +-1/2: rx, ry, rz, rzz, subspace rotations
    std::vector<bool> shift_eligible;

    void validate() const;
};

// Hadamard column, then per layer rx on every site and rzz on every chain
// bond; params per layer: n rotation angles followed by n-1 coupling angles
AnsatzSpec tfim_chain_ansatz(int n, int layers);

double energy(const AnsatzSpec& ansatz, const RealVector& theta, const PauliSum& h);
double energy(const AnsatzSpec& ansatz, const RealVector& theta, const SparseCOO& h);

enum class GradMode { parameter_shift, finite_diff };

// parameter_shift: g_j = [E(theta_j + pi/2) - E(theta_j - pi/2)] / 2,
// exact for shift-eligible generators; finite_diff: central with step fd_step.
// 2 * n_params energy evaluations either way, parallel over workers.
RealVector gradient(const AnsatzSpec& ansatz, const RealVector& theta,
                    const PauliSum& h, GradMode mode, double fd_step = 1e-5,
                    int workers = 1);

struct AdamState {
    RealVector m;
    RealVector v;
    int t = 0;
};

void adam_step(AdamState& state, RealVector& theta, const RealVector& grad, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct VqeResult {
    std::vector<std::vector<double>> traces;  // per batch entry, energy per step
    std::vector<RealVector> final_thetas;
    double best_energy = 0.0;
    int best_index = -1;
};

VqeResult vqe_run(const AnsatzSpec& ansatz, const std::vector<RealVector>& theta0_batch,
                  const PauliSum& h, int steps, double lr, GradMode grad_mode,
                  int workers = 1);

// ---- simultaneous excited states ----

struct SubspaceProblem {
    int k = 1;
    std::function<std::vector<ComplexVector>(const RealVector&)> build;
    SparseCOO hamiltonian;
    double ridge = 1e-6;
};

struct SubspaceLoss {
    double loss = 0.0;
    ComplexMatrix s;  // overlap S_ij = <psi_i|psi_j>
    ComplexMatrix h;  // H_ij = <psi_i|H|psi_j>
};

// loss = Re Tr((S + ridge I)^{-1} H)
SubspaceLoss subspace_loss(const SubspaceProblem& p, const RealVector& theta);

// Hc = ESc via S-whitening; overlap eigenvalues below 1e-10 are dropped, so
// min(k, rank) values come back, ascending.
std::vector<double> subspace_spectrum(const ComplexMatrix& s, const ComplexMatrix& h);

}  // namespace qforge
