#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qforge/circuit.hpp"
#include "qforge/common.hpp"
#include "qforge/rng.hpp"

namespace qforge {

struct KrausChannel {
    std::string name;
    int arity = 1;  // wire count k; operators are d^k x d^k with d = 2
    std::vector<ComplexMatrix> operators;

    // max |sum K^dag K - I|
    double completeness_defect() const;
    void validate() const;
};

KrausChannel depolarizing_channel(double p, int k = 1);
KrausChannel amplitude_damping_channel(double gamma);
KrausChannel phase_damping_channel(double lambda);
KrausChannel reset_channel(double p);
// amplitude damping followed by phase damping
KrausChannel thermal_relaxation_channel(double gamma, double lambda);

struct ReadoutError {
    double p00 = 1.0;  // p(read 0 | prepared 0)
    double p11 = 1.0;  // p(read 1 | prepared 1)
};

// Ordered rule list; all rules matching an instruction fire, in insertion
// order, after the gate.
struct NoiseRule {
    std::string gate;                         // empty = any gate name
    std::optional<std::vector<int>> wires;    // exact wire tuple when set
    std::function<bool(const GateInstruction&)> predicate;  // optional, code-level only
    KrausChannel channel;
};

struct NoiseConf {
    std::vector<NoiseRule> rules;
    std::vector<ReadoutError> readout;  // per qubit; empty = ideal readout

    // arity compatibility is checked against the channel at attach time
    void attach(const std::string& gate, KrausChannel channel);
    void attach_on_wires(const std::string& gate, std::vector<int> wires,
                         KrausChannel channel);
    void attach_predicate(std::function<bool(const GateInstruction&)> pred,
                          KrausChannel channel);

    std::vector<const KrausChannel*> match(const GateInstruction& instr) const;

    std::string to_json() const;  // predicates are not serializable and are skipped
};

struct Trajectory {
    StateVector state;
    double log_prob = 0.0;
};

Trajectory mc_trajectory(const Circuit& c, const NoiseConf& conf, RngStream& rng);

ComplexMatrix density_matrix_run(const Circuit& c, const NoiseConf& conf,
                                 int n_guard = 10);

cplx density_matrix_expectation(const ComplexMatrix& rho, const PauliSum& obs);

using Counts = std::map<std::string, std::int64_t>;

Counts apply_readout_error(const Counts& counts, const std::vector<ReadoutError>& err,
                           RngStream& rng);

struct ReadoutMitigation {
    std::vector<Eigen::Matrix2d> confusion;  // per qubit, confusion(m, p) = p(m|p)
};

// estimates per-qubit confusion matrices from all-zeros / all-ones
// calibration circuits run through `execute`
ReadoutMitigation readout_calibrate(
    const std::function<Counts(const Circuit&)>& execute, int n_qubits);

// tensored inverse applied to the empirical distribution; entries may go
// negative (quasi-distribution)
std::map<std::string, double> readout_correct(const ReadoutMitigation& mit,
                                              const Counts& counts);

// <Z_qubit> from a (quasi-)distribution over bitstrings
double quasi_expectation_z(const std::map<std::string, double>& dist, int qubit);

}  // namespace qforge
