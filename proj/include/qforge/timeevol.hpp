#pragma once

#include <functional>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/common.hpp"
#include "qforge/sparse.hpp"

namespace qforge {

struct SpectralBounds {
    double e_min = 0.0;
    double e_max = 0.0;
};

// psi(t) = exp(-iHt) psi0 via dense eigendecomposition
std::vector<ComplexVector> ed_evol(const ComplexMatrix& h, const ComplexVector& psi0,
                                   const std::vector<double>& times);

// Lanczos with full reorthogonalization; breakdown (beta < 1e-12) terminates
// early and the result is exact within the invariant subspace.
std::vector<ComplexVector> krylov_evol(const SparseCOO& h, const ComplexVector& psi0,
                                       const std::vector<double>& times, int subspace_dim);

// extremal Ritz values (m=40, seeded random start) widened by a 1% margin
SpectralBounds estimate_spectral_bounds(const SparseCOO& h, std::uint64_t seed = 7);

struct ChebyshevPlan {
    int k = 1;  // expansion order per sub-step
    int m = 1;  // time sub-steps
};

// a = (e_max - e_min) * t_max / 2; single step up to a = 30 with
// k = ceil(1.2 a + 20), otherwise split into ceil(a/30) sub-steps
ChebyshevPlan estimate_k(double t_max, const SpectralBounds& bounds);

ComplexVector chebyshev_evol(const SparseCOO& h, const ComplexVector& psi0, double t,
                             const SpectralBounds& bounds, int k, int m);

enum class OdeMethod { rk4_fixed, dopri_adaptive };

struct OdeOptions {
    OdeMethod method = OdeMethod::dopri_adaptive;
    double rtol = 1e-6;
    double atol = 1e-9;
    double initial_step = 1e-3;
    int rk4_steps_per_unit_time = 1000;
};

// applies H(t) to a vector
using GeneratorFn = std::function<void(double, const ComplexVector&, ComplexVector&)>;

GeneratorFn dense_generator(std::function<ComplexMatrix(double)> h_of_t);
GeneratorFn sparse_generator(const SparseCOO& h);
GeneratorFn pauli_generator(const PauliSum& h);

struct OdeResult {
    std::vector<ComplexVector> states;
    double max_norm_drift = 0.0;  // |norm - 1| over all outputs, not renormalized
    std::size_t rhs_evaluations = 0;
};

// integrates d psi/dt = -i H(t) psi through the requested output times
OdeResult ode_evol(const GeneratorFn& h_fn, const ComplexVector& psi0,
                   const std::vector<double>& times, const OdeOptions& opts = {});

// ---- digital-analog circuits ----

struct AnalogBlock {
    GeneratorFn generator;
    double duration = 0.0;
    OdeOptions solver;
};

struct AnalogCircuit {
    int n = 0;
    struct Block {
        bool digital = false;
        GateInstruction instruction;  // digital
        AnalogBlock analog;           // analog
    };
    std::vector<Block> blocks;

    void add_digital(const GateInstruction& instr);
    void add_analog(GeneratorFn generator, double duration, OdeOptions solver = {});
};

StateVector run_analog_circuit(const AnalogCircuit& c, const StateVector& psi0);

}  // namespace qforge
