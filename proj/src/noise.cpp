#include "qforge/noise.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

namespace qforge {

double KrausChannel::completeness_defect() const {
    if (operators.empty()) return 1.0;
    const Eigen::Index dim = operators.front().rows();
    ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
    for (const auto& k : operators) acc += k.adjoint() * k;
    return (acc - ComplexMatrix::Identity(dim, dim)).cwiseAbs().maxCoeff();
}

void KrausChannel::validate() const {
    require(!operators.empty(), "KrausChannel: no operators");
    const Eigen::Index dim = 1LL << arity;
    for (const auto& k : operators) {
        require(k.rows() == dim && k.cols() == dim, "KrausChannel: wrong operator shape");
    }
    require(completeness_defect() <= 1e-10, "KrausChannel: completeness violated");
}

KrausChannel depolarizing_channel(double p, int k) {
    require(p >= 0.0 && p <= 1.0, "depolarizing_channel: p out of range");
    require(k >= 1 && k <= 3, "depolarizing_channel: arity out of range");
    static const ComplexMatrix paulis[4] = {
        ComplexMatrix::Identity(2, 2),
        (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished(),
        (ComplexMatrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
        (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished()};
    KrausChannel ch;
    ch.name = "depolarizing";
    ch.arity = k;
    const int nwords = 1;
    int words = 1;
    for (int i = 0; i < k; ++i) words *= 4;
    (void)nwords;
    const double pw = (words > 1) ? p / (words - 1) : 0.0;
    for (int w = 0; w < words; ++w) {
        double weight = (w == 0) ? 1.0 - p : pw;
        if (weight == 0.0) continue;
        ComplexMatrix op = ComplexMatrix::Identity(1, 1);
        int ww = w;
        for (int site = 0; site < k; ++site) {
            int code = ww % 4;
            ww /= 4;
            const ComplexMatrix& pmat = paulis[code];
            ComplexMatrix next(op.rows() * 2, op.cols() * 2);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    next.block(r * op.rows(), c * op.cols(), op.rows(), op.cols()) =
                        pmat(r, c) * op;
            op = std::move(next);
        }
        ch.operators.push_back(std::sqrt(weight) * op);
    }
    ch.validate();
    return ch;
}

KrausChannel amplitude_damping_channel(double gamma) {
    require(gamma >= 0.0 && gamma <= 1.0, "amplitude_damping_channel: gamma out of range");
    KrausChannel ch;
    ch.name = "amplitude_damping";
    ch.arity = 1;
    ch.operators.push_back(
        (ComplexMatrix(2, 2) << 1, 0, 0, std::sqrt(1.0 - gamma)).finished());
    ch.operators.push_back((ComplexMatrix(2, 2) << 0, std::sqrt(gamma), 0, 0).finished());
    ch.validate();
    return ch;
}

KrausChannel phase_damping_channel(double lambda) {
    require(lambda >= 0.0 && lambda <= 1.0, "phase_damping_channel: lambda out of range");
    KrausChannel ch;
    ch.name = "phase_damping";
    ch.arity = 1;
    ch.operators.push_back(
        (ComplexMatrix(2, 2) << 1, 0, 0, std::sqrt(1.0 - lambda)).finished());
    ch.operators.push_back((ComplexMatrix(2, 2) << 0, 0, 0, std::sqrt(lambda)).finished());
    ch.validate();
    return ch;
}

KrausChannel reset_channel(double p) {
    require(p >= 0.0 && p <= 1.0, "reset_channel: p out of range");
    KrausChannel ch;
    ch.name = "reset";
    ch.arity = 1;
    double sp = std::sqrt(p), sq = std::sqrt(1.0 - p);
    ch.operators.push_back(sq * ComplexMatrix::Identity(2, 2));
    ch.operators.push_back((ComplexMatrix(2, 2) << sp, 0, 0, 0).finished());
    ch.operators.push_back((ComplexMatrix(2, 2) << 0, sp, 0, 0).finished());
    ch.validate();
    return ch;
}

KrausChannel thermal_relaxation_channel(double gamma, double lambda) {
    KrausChannel ad = amplitude_damping_channel(gamma);
    KrausChannel pd = phase_damping_channel(lambda);
    KrausChannel ch;
    ch.name = "thermal_relaxation";
    ch.arity = 1;
    for (const auto& k2 : pd.operators)
        for (const auto& k1 : ad.operators) ch.operators.push_back(k2 * k1);
    ch.validate();
    return ch;
}

void NoiseConf::attach(const std::string& gate, KrausChannel channel) {
    channel.validate();
    rules.push_back({gate, std::nullopt, nullptr, std::move(channel)});
}

void NoiseConf::attach_on_wires(const std::string& gate, std::vector<int> wires,
                                KrausChannel channel) {
    channel.validate();
    require(channel.arity == static_cast<int>(wires.size()),
            "NoiseConf: channel arity does not match wire tuple");
    rules.push_back({gate, std::move(wires), nullptr, std::move(channel)});
}

void NoiseConf::attach_predicate(std::function<bool(const GateInstruction&)> pred,
                                 KrausChannel channel) {
    channel.validate();
    rules.push_back({"", std::nullopt, std::move(pred), std::move(channel)});
}

std::vector<const KrausChannel*> NoiseConf::match(const GateInstruction& instr) const {
    std::vector<const KrausChannel*> out;
    for (const auto& rule : rules) {
        if (!rule.gate.empty() && rule.gate != gate_name(instr.name)) continue;
        if (rule.wires && *rule.wires != instr.wires) continue;
        if (rule.predicate && !rule.predicate(instr)) continue;
        if (rule.channel.arity != static_cast<int>(instr.wires.size())) continue;
        out.push_back(&rule.channel);
    }
    return out;
}

std::string NoiseConf::to_json() const {
    nlohmann::json j;
    j["rules"] = nlohmann::json::array();
    for (const auto& rule : rules) {
        if (rule.predicate) continue;  // code-level only
        nlohmann::json r;
        r["gate"] = rule.gate;
        if (rule.wires) r["wires"] = *rule.wires;
        r["channel"] = rule.channel.name;
        r["arity"] = rule.channel.arity;
        j["rules"].push_back(r);
    }
    j["readout"] = nlohmann::json::array();
    for (const auto& ro : readout) j["readout"].push_back({{"p00", ro.p00}, {"p11", ro.p11}});
    return j.dump();
}

Trajectory mc_trajectory(const Circuit& c, const NoiseConf& conf, RngStream& rng) {
    require(c.d == 2, "mc_trajectory: qubits only");
    StateVector psi = StateVector::zero_state(c.n, 2);
    if (c.initial_state) psi.amps = *c.initial_state;
    double log_prob = 0.0;

    for (const auto& instr : c.ops) {
        apply_local_unitary(psi, gate_matrix(instr, 2), instr.wires);
        for (const KrausChannel* ch : conf.match(instr)) {
            // Born-weighted branch selection
            std::vector<StateVector> branches;
            std::vector<double> probs;
            double acc = 0.0;
            for (const auto& k : ch->operators) {
                StateVector branch = psi;
                apply_local_unitary(branch, k, instr.wires);
                double p = branch.amps.squaredNorm();
                acc += p;
                probs.push_back(p);
                branches.push_back(std::move(branch));
            }
            require(acc > 1e-14, "mc_trajectory: all branch probabilities vanish");
            double u = rng.uniform() * acc;
            std::size_t pick = probs.size() - 1;
            double run = 0.0;
            for (std::size_t i = 0; i < probs.size(); ++i) {
                run += probs[i];
                if (u < run) { pick = i; break; }
            }
            psi = std::move(branches[pick]);
            psi.amps /= std::sqrt(probs[pick]);
            log_prob += std::log(probs[pick] / acc) + std::log(acc);
        }
    }
    return {std::move(psi), log_prob};
}

ComplexMatrix density_matrix_run(const Circuit& c, const NoiseConf& conf, int n_guard) {
    require(c.d == 2, "density_matrix_run: qubits only");
    require(c.n <= n_guard, "density_matrix_run: qubit count exceeds memory guard");
    const std::int64_t dim = 1LL << c.n;
    ComplexVector psi0 = ComplexVector::Zero(dim);
    psi0[0] = 1.0;
    if (c.initial_state) psi0 = *c.initial_state;
    ComplexMatrix rho = psi0 * psi0.adjoint();

    auto conjugate_by = [&](const ComplexMatrix& op, const std::vector<int>& wires) {
        // op rho op^dag via columnwise local application
        StateVector scratch;
        scratch.n = c.n;
        scratch.d = 2;
        for (std::int64_t col = 0; col < dim; ++col) {
            scratch.amps = rho.col(col);
            apply_local_unitary(scratch, op, wires);
            rho.col(col) = scratch.amps;
        }
        for (std::int64_t row = 0; row < dim; ++row) {
            scratch.amps = rho.row(row).conjugate();
            apply_local_unitary(scratch, op, wires);
            rho.row(row) = scratch.amps.conjugate();
        }
    };

    for (const auto& instr : c.ops) {
        conjugate_by(gate_matrix(instr, 2), instr.wires);
        for (const KrausChannel* ch : conf.match(instr)) {
            ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
            ComplexMatrix saved = rho;
            for (const auto& k : ch->operators) {
                rho = saved;
                conjugate_by(k, instr.wires);
                acc += rho;
            }
            rho = std::move(acc);
        }
    }
    return rho;
}

cplx density_matrix_expectation(const ComplexMatrix& rho, const PauliSum& obs) {
    return (pauli_sum_to_dense(obs) * rho).trace();
}

Counts apply_readout_error(const Counts& counts, const std::vector<ReadoutError>& err,
                           RngStream& rng) {
    for (const auto& e : err) {
        require(e.p00 >= 0.0 && e.p00 <= 1.0 && e.p11 >= 0.0 && e.p11 <= 1.0,
                "apply_readout_error: probabilities out of range");
    }
    Counts out;
    for (const auto& [bits, cnt] : counts) {
        require(bits.size() == err.size(), "apply_readout_error: qubit count mismatch");
        for (std::int64_t shot = 0; shot < cnt; ++shot) {
            std::string flipped = bits;
            for (std::size_t q = 0; q < bits.size(); ++q) {
                double u = rng.uniform();
                if (bits[q] == '0') {
                    if (u > err[q].p00) flipped[q] = '1';
                } else {
                    if (u > err[q].p11) flipped[q] = '0';
                }
            }
            ++out[flipped];
        }
    }
    return out;
}

ReadoutMitigation readout_calibrate(
    const std::function<Counts(const Circuit&)>& execute, int n_qubits) {
    Circuit zeros(n_qubits);
    Circuit ones(n_qubits);
    for (int q = 0; q < n_qubits; ++q) ones.x(q);
    Counts c0 = execute(zeros);
    Counts c1 = execute(ones);

    ReadoutMitigation mit;
    for (int q = 0; q < n_qubits; ++q) {
        double shots0 = 0, ones_seen0 = 0, shots1 = 0, ones_seen1 = 0;
        for (const auto& [bits, cnt] : c0) {
            shots0 += cnt;
            if (bits[q] == '1') ones_seen0 += cnt;
        }
        for (const auto& [bits, cnt] : c1) {
            shots1 += cnt;
            if (bits[q] == '1') ones_seen1 += cnt;
        }
        require(shots0 > 0 && shots1 > 0, "readout_calibrate: empty calibration counts");
        double p00 = 1.0 - ones_seen0 / shots0;
        double p11 = ones_seen1 / shots1;
        require(std::abs(p00 + p11 - 1.0) > 1e-12,
                "readout_calibrate: singular confusion matrix");
        Eigen::Matrix2d m;
        m << p00, 1.0 - p11, 1.0 - p00, p11;
        mit.confusion.push_back(m);
    }
    return mit;
}

std::map<std::string, double> readout_correct(const ReadoutMitigation& mit,
                                              const Counts& counts) {
    const int n = static_cast<int>(mit.confusion.size());
    require(n <= 20, "readout_correct: too many qubits for dense correction");
    const std::int64_t dim = 1LL << n;
    Eigen::VectorXd p = Eigen::VectorXd::Zero(dim);
    double total = 0.0;
    for (const auto& [bits, cnt] : counts) {
        require(static_cast<int>(bits.size()) == n, "readout_correct: qubit count mismatch");
        std::int64_t idx = 0;
        for (char b : bits) idx = idx * 2 + (b - '0');
        p[idx] += static_cast<double>(cnt);
        total += static_cast<double>(cnt);
    }
    require(total > 0.0, "readout_correct: empty counts");
    p /= total;

    // apply each qubit's inverse confusion matrix along its axis
    for (int q = 0; q < n; ++q) {
        Eigen::Matrix2d inv = mit.confusion[q].inverse();
        const std::int64_t stride = 1LL << (n - 1 - q);
        for (std::int64_t base = 0; base < dim; ++base) {
            if (base & stride) continue;
            double v0 = p[base], v1 = p[base + stride];
            p[base] = inv(0, 0) * v0 + inv(0, 1) * v1;
            p[base + stride] = inv(1, 0) * v0 + inv(1, 1) * v1;
        }
    }

    std::map<std::string, double> out;
    for (std::int64_t idx = 0; idx < dim; ++idx) {
        if (p[idx] == 0.0) continue;
        std::string bits(n, '0');
        for (int q = 0; q < n; ++q) {
            if (idx & (1LL << (n - 1 - q))) bits[q] = '1';
        }
        out[bits] = p[idx];
    }
    return out;
}

double quasi_expectation_z(const std::map<std::string, double>& dist, int qubit) {
    double acc = 0.0;
    for (const auto& [bits, w] : dist) {
        acc += (bits[qubit] == '0') ? w : -w;
    }
    return acc;
}

}  // namespace qforge
