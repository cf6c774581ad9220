#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qforge/common.hpp"
#include "qforge/pauli.hpp"
#include "qforge/rng.hpp"

namespace qforge {

enum class Gate {
    h, x, y, z, s,
    rx, ry, rz, rzz,
    cx, cz,
    su4,            // 15-parameter two-qubit exponential
    csum,           // qudit |x,y> -> |x, x+y mod d>
    subspace_ry,    // params: theta, j, k
    subspace_rz,
    unitary,        // explicit matrix
};

std::string gate_name(Gate g);

struct GateInstruction {
    Gate name;
    std::vector<int> wires;
    std::vector<double> params;
    ComplexMatrix matrix;  // only for Gate::unitary
};

// Dense amplitude vector over n sites of local dimension d.
// Site 0 is the most significant digit of the basis index.
struct StateVector {
    int n = 0;
    int d = 2;
    ComplexVector amps;

    static StateVector zero_state(int n, int d = 2);
    std::int64_t dim() const { return amps.size(); }
    double norm() const { return amps.norm(); }
};

// d^k x d^k unitary applied on the listed wires (wires[0] = most significant
// local digit). In-place stride arithmetic on the amplitude vector.
void apply_local_unitary(StateVector& psi, const ComplexMatrix& u,
                         const std::vector<int>& wires);

struct Circuit {
    int n = 0;
    int d = 2;
    std::vector<GateInstruction> ops;
    std::optional<ComplexVector> initial_state;

    explicit Circuit(int n_ = 0, int d_ = 2) : n(n_), d(d_) {}

    Circuit& gate(Gate g, std::vector<int> wires, std::vector<double> params = {});
    Circuit& h(int w) { return gate(Gate::h, {w}); }
    Circuit& x(int w) { return gate(Gate::x, {w}); }
    Circuit& y(int w) { return gate(Gate::y, {w}); }
    Circuit& z(int w) { return gate(Gate::z, {w}); }
    Circuit& s(int w) { return gate(Gate::s, {w}); }
    Circuit& rx(int w, double t) { return gate(Gate::rx, {w}, {t}); }
    Circuit& ry(int w, double t) { return gate(Gate::ry, {w}, {t}); }
    Circuit& rz(int w, double t) { return gate(Gate::rz, {w}, {t}); }
    Circuit& rzz(int a, int b, double t) { return gate(Gate::rzz, {a, b}, {t}); }
    Circuit& cx(int c, int t) { return gate(Gate::cx, {c, t}); }
    Circuit& cz(int a, int b) { return gate(Gate::cz, {a, b}); }
    Circuit& su4(int a, int b, const std::vector<double>& theta);
    Circuit& csum(int c, int t) { return gate(Gate::csum, {c, t}); }
    Circuit& subspace_ry(int w, double t, int j, int k) {
        return gate(Gate::subspace_ry, {w}, {t, double(j), double(k)});
    }
    Circuit& subspace_rz(int w, double t, int j, int k) {
        return gate(Gate::subspace_rz, {w}, {t, double(j), double(k)});
    }
    Circuit& unitary(std::vector<int> wires, const ComplexMatrix& u);

    std::string to_json() const;
    static Circuit from_json(const std::string& text);
};

// Resolved dense matrix of one instruction for local dimension d.
ComplexMatrix gate_matrix(const GateInstruction& instr, int d);

// Sequential application of the circuit to its initial state (default |0...0>).
StateVector run(const Circuit& c, std::size_t memory_guard_log2 = 24);

cplx expectation_pauli(const StateVector& psi, const PauliSum& obs);

cplx amplitude(const StateVector& psi, const std::vector<int>& digits);

std::map<std::string, std::int64_t> sample(const StateVector& psi, std::int64_t shots,
                                           RngStream& rng);

struct MeasureResult {
    int outcome;
    double prob;
};

// Projective measurement of one wire in the computational basis; collapses
// psi in place. forced < 0 draws from the Born distribution.
MeasureResult measure_collapse(StateVector& psi, int wire, RngStream& rng,
                               int forced = -1);

// von Neumann entropy (bits) of the reduced state on `keep`.
double subsystem_entropy(const StateVector& psi, const std::vector<int>& keep);

// Haar-random SU(4): QR of a Ginibre matrix, phases fixed, det normalized.
ComplexMatrix haar_su4(RngStream& rng);

std::string to_openqasm(const Circuit& c);

}  // namespace qforge
