#pragma once

#include <vector>

#include "qforge/common.hpp"
#include "qforge/rng.hpp"

namespace qforge {

// H = sum_ij A_ij c_i^dag c_j + 1/2 sum_ij (B_ij c_i^dag c_j^dag + h.c.)
// with A Hermitian and B antisymmetric.
struct QuadraticHamiltonian {
    int L = 0;
    ComplexMatrix A;
    ComplexMatrix B;

    void validate() const;
    // 2L x 2L Bogoliubov-de Gennes matrix [[A, B], [B^dag, -A^T]] over the
    // Nambu vector Psi = (c, c^dag); H = 1/2 Psi^dag M Psi + 1/2 Tr A
    ComplexMatrix bdg_matrix() const;
};

QuadraticHamiltonian build_kitaev(int L, double t, double delta, double mu);

// Gaussian state tracked by the Nambu correlation matrix
// C_{ab} = <Psi_a Psi_b^dag>, blocks <c c^dag>, <c c>; <c^dag c^dag>, <c^dag c>.
struct FGSState {
    int L = 0;
    ComplexMatrix C;  // 2L x 2L, Hermitian; pure states satisfy C^2 = C
    bool degenerate_ground = false;  // set when a ground state was tie-broken

    static FGSState filled(int L, const std::vector<int>& occupied);

    double occupation(int site) const { return C(L + site, L + site).real(); }
    double purity_defect() const;  // max |C^2 - C|
    double particle_hole_defect() const;
};

FGSState fgs_ground_state(const QuadraticHamiltonian& h, double zero_tol = 1e-10);

double fgs_energy(const FGSState& s, const QuadraticHamiltonian& h);

enum class EvolveMode { real, imaginary };

// real: C -> e^{-iMt} C e^{iMt}. imaginary: propagates the annihilator
// subspace with e^{M tau} in sub-steps of at most 0.1, re-orthonormalizing
// each step (pure states only).
void fgs_evolve(FGSState& s, const QuadraticHamiltonian& h, double t,
                EvolveMode mode = EvolveMode::real);

// <c_i^dag(t) c_j(0)> for a pure initial state
ComplexMatrix two_time_correlation(const FGSState& s0, const QuadraticHamiltonian& h,
                                   double t);

// entanglement entropy (bits) of the listed modes
double fgs_entropy(const FGSState& s, const std::vector<int>& subsystem);

struct FgsMeasureResult {
    int outcome;  // 1 = occupied
    double prob;
};

// projective occupation measurement of one mode; Gaussian conditioning via
// the Wick/Pfaffian update of C. forced < 0 draws from Born probabilities.
FgsMeasureResult fgs_measure(FGSState& s, int site, RngStream& rng, int forced = -1);

struct EntropyScanPoint {
    double mu;
    double entropy_bits;
};

struct EntropyScanResult {
    std::vector<EntropyScanPoint> curve;
    double argmax_mu = 0.0;
};

EntropyScanResult kitaev_entropy_scan(int L, double t, double delta,
                                      const std::vector<double>& mu_grid);

// real Majorana covariance G_ab = -i (<g_a g_b> - delta_ab) with
// g_{2i} = c_i + c_i^dag, g_{2i+1} = -i (c_i - c_i^dag)
Eigen::MatrixXd majorana_covariance(const FGSState& s);

}  // namespace qforge
