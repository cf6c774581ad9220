#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>

#include <json.hpp>

#include "helpers.hpp"
#include "qforge/circuit.hpp"
#include "qforge/contraction.hpp"
#include "qforge/experiments.hpp"
#include "qforge/fgs.hpp"
#include "qforge/lattice.hpp"
#include "qforge/mps.hpp"
#include "qforge/noise.hpp"
#include "qforge/numerics.hpp"
#include "qforge/pauli.hpp"
#include "qforge/shadows.hpp"
#include "qforge/stabilizer.hpp"
#include "qforge/timeevol.hpp"
#include "qforge/variational.hpp"

using namespace qforge;
namespace fs = std::filesystem;

namespace {

using clk = std::chrono::steady_clock;
double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

// Collects the conditions of one acceptance criterion and prints a single
// pass/fail line; individual failures still surface through doctest.
struct Criterion {
    int index;
    const char* name;
    bool ok = true;
    Criterion(int i, const char* n) : index(i), name(n) {}
    void expect(bool cond, const char* what) {
        ok = ok && cond;
        CHECK_MESSAGE(cond, what);
    }
    ~Criterion() {
        std::printf("criterion %2d  %-42s %s\n", index, name, ok ? "PASS" : "FAIL");
        std::fflush(stdout);
    }
};

PauliSum z_on(int n, int q) {
    PauliSum obs;
    obs.n = n;
    obs.add_word(1.0, {{q, 3}});
    return obs;
}

Lattice chain(int n) { return build_lattice(LatticeKind::chain, {n}, {false}); }

// annealing-ramp start angles for the transverse-field chain ansatz
RealVector ramp_init(int n, int layers, double g) {
    RealVector theta(layers * (2 * n - 1));
    int j = 0;
    for (int l = 0; l < layers; ++l) {
        double s = (l + 0.5) / layers;
        for (int i = 0; i < n; ++i) theta[j++] = -2.0 * (1.0 - s) * g;
        for (int i = 0; i + 1 < n; ++i) theta[j++] = -2.0 * s;
    }
    return theta;
}

// plain Lanczos extremal eigenvalue with full reorthogonalization
double lanczos_ground(const SparseCOO& h, int m, std::uint64_t seed) {
    RngStream rng(seed);
    ComplexVector v(h.dim);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(rng.normal(), rng.normal());
    v.normalize();
    std::vector<ComplexVector> basis = {v};
    std::vector<double> alpha, beta;
    for (int j = 0; j < m; ++j) {
        ComplexVector w = h.apply(basis[j]);
        alpha.push_back((basis[j].adjoint() * w)(0).real());
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& b : basis) w -= (b.adjoint() * w)(0) * b;
        double nb = w.norm();
        if (nb < 1e-12 || j + 1 == m) break;
        beta.push_back(nb);
        basis.push_back(w / nb);
    }
    Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(alpha.size(), alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) t(i, i) = alpha[i];
    for (std::size_t i = 0; i < beta.size(); ++i) {
        t(i, i + 1) = beta[i];
        t(i + 1, i) = beta[i];
    }
    return eigh(t).eigenvalues[0];
}

QuadraticHamiltonian random_quadratic(int L, RngStream& rng) {
    QuadraticHamiltonian h;
    h.L = L;
    ComplexMatrix ga(L, L), gb(L, L);
    for (int i = 0; i < L; ++i)
        for (int j = 0; j < L; ++j) {
            ga(i, j) = cplx(rng.normal(), rng.normal());
            gb(i, j) = cplx(rng.normal(), rng.normal());
        }
    h.A = 0.5 * (ga + ga.adjoint());
    h.B = 0.5 * (gb - gb.transpose());
    return h;
}

Circuit random_circuit(int n, int depth, RngStream& rng) {
    Circuit c(n);
    for (int layer = 0; layer < depth; ++layer) {
        for (int q = 0; q < n; ++q) {
            switch (rng.uniform_below(4)) {
                case 0: c.h(q); break;
                case 1: c.rx(q, rng.uniform() * 3.0); break;
                case 2: c.ry(q, rng.uniform() * 3.0); break;
                default: c.rz(q, rng.uniform() * 3.0); break;
            }
        }
        for (int q = layer % 2; q + 1 < n; q += 2) c.cx(q, q + 1);
    }
    return c;
}

double marginal_prob(const StateVector& psi, int wire, int outcome) {
    std::int64_t stride = 1;
    for (int i = 0; i < psi.n - 1 - wire; ++i) stride *= psi.d;
    double p = 0.0;
    for (std::int64_t i = 0; i < psi.dim(); ++i)
        if ((i / stride) % psi.d == outcome) p += std::norm(psi.amps[i]);
    return p;
}

// exact mean of the classical-shadow estimator: every basis choice and every
// outcome weighted by its Born probability
double exact_estimator_mean(const StateVector& psi, const std::vector<int>& obs) {
    const int n = psi.n;
    const double s = 1.0 / std::sqrt(2.0);
    const ComplexMatrix rot[4] = {
        ComplexMatrix::Identity(2, 2),
        (ComplexMatrix(2, 2) << s, s, s, -s).finished(),
        (ComplexMatrix(2, 2) << s, cplx(0, -s), s, cplx(0, s)).finished(),
        ComplexMatrix::Identity(2, 2)};
    double total = 0.0;
    int n_bases = 1;
    for (int q = 0; q < n; ++q) n_bases *= 3;
    for (int bi = 0; bi < n_bases; ++bi) {
        std::vector<int> basis(n);
        int bb = bi;
        for (int q = n - 1; q >= 0; --q) {
            basis[q] = 1 + bb % 3;
            bb /= 3;
        }
        StateVector rotated = psi;
        for (int q = 0; q < n; ++q)
            if (basis[q] != 3) apply_local_unitary(rotated, rot[basis[q]], {q});
        for (std::int64_t hit = 0; hit < rotated.amps.size(); ++hit) {
            double p = std::norm(rotated.amps[hit]);
            if (p == 0.0) continue;
            ShadowDataset row;
            row.n = n;
            row.bases.push_back(basis);
            std::vector<int> bits(n);
            for (int q = 0; q < n; ++q) bits[q] = static_cast<int>((hit >> (n - 1 - q)) & 1);
            row.outcomes.push_back(bits);
            total += p * estimate_pauli(row, obs);
        }
    }
    return total / n_bases;
}

Tensor make_tensor(int id, std::vector<std::string> labels,
                   std::vector<std::int64_t> shape, RngStream& rng) {
    Tensor t;
    t.id = id;
    t.labels = std::move(labels);
    t.shape = std::move(shape);
    t.data.resize(t.size());
    for (auto& v : t.data) v = cplx(rng.normal(), rng.normal());
    return t;
}

TensorNetwork random_network(int n, RngStream& rng) {
    std::vector<std::vector<std::pair<std::string, std::int64_t>>> axes(n);
    int next = 0;
    auto connect = [&](int i, int j) {
        std::string l = "e" + std::to_string(next++);
        std::int64_t s = 2 + static_cast<std::int64_t>(rng.uniform_below(3));
        axes[i].push_back({l, s});
        axes[j].push_back({l, s});
    };
    for (int i = 0; i < n; ++i) connect(i, (i + 1) % n);
    for (int k = 0; k < n / 2; ++k) {
        int i = static_cast<int>(rng.uniform_below(n));
        int j = static_cast<int>(rng.uniform_below(n));
        if (i != j) connect(i, j);
    }
    TensorNetwork net;
    for (int k = 0; k < 2; ++k) {
        int i = static_cast<int>(rng.uniform_below(n));
        std::string l = "o" + std::to_string(k);
        axes[i].push_back({l, 2});
        net.open_edges.push_back(l);
    }
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> labels;
        std::vector<std::int64_t> shape;
        for (const auto& [l, s] : axes[i]) {
            labels.push_back(l);
            shape.push_back(s);
        }
        net.tensors.push_back(make_tensor(i, labels, shape, rng));
    }
    net.validate();
    return net;
}

std::string cli_path() {
    if (const char* p = std::getenv("QFORGE_CLI_PATH")) return p;
    return QFORGE_CLI_PATH;
}

struct CliRun {
    int code = -1;
    std::string output;
};

CliRun run_cli(const std::string& args) {
    static int counter = 0;
    fs::path log = fs::temp_directory_path() /
                   ("qforge_acc_log_" + std::to_string(counter++) + ".txt");
    std::string cmd = "\"" + cli_path() + "\" " + args + " > " + log.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    CliRun r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream f(log);
    std::stringstream ss;
    ss << f.rdbuf();
    r.output = ss.str();
    fs::remove(log);
    return r;
}

fs::path fresh_dir(const std::string& name) {
    fs::path d = fs::temp_directory_path() / "qforge_acceptance" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_CASE("1: transverse-field chain ground-state optimization") {
    Criterion crit(1, "transverse-field vqe ground state");
    {
        const int n = 2;
        auto t0 = clk::now();
        PauliSum h = tfim_terms(chain(n), 1.0);
        AnsatzSpec ansatz = tfim_chain_ansatz(n, 2);
        RealVector ramp = ramp_init(n, 2, 1.0);
        RngStream rng(0);
        auto streams = rng.split(8);
        std::vector<RealVector> theta0(8, ramp);
        for (int s = 1; s < 8; ++s)
            for (int j = 0; j < ansatz.n_params; ++j) theta0[s][j] += 0.1 * streams[s].normal();
        VqeResult res = vqe_run(ansatz, theta0, h, 300, 0.02, GradMode::parameter_shift, 1);
        double elapsed = seconds_since(t0);
        crit.expect(std::abs(res.best_energy + std::sqrt(5.0)) < 1e-3,
                    "n=2 best energy within 1e-3 of -sqrt(5)");
        crit.expect(elapsed <= 10.0, "n=2 optimization within 10 s");
    }
    {
        const int n = 10, layers = 8;
        auto t0 = clk::now();
        PauliSum h = tfim_terms(chain(n), 1.0);
        double reference = lanczos_ground(pauli_sum_to_coo(h), 60, 11);
        AnsatzSpec ansatz = tfim_chain_ansatz(n, layers);
        VqeResult res = vqe_run(ansatz, {ramp_init(n, layers, 1.0)}, h, 300, 0.05,
                                GradMode::parameter_shift, 1);
        double elapsed = seconds_since(t0);
        crit.expect(std::abs(res.best_energy - reference) < 1e-2,
                    "n=10 best energy within 1e-2 of the Lanczos ground energy");
        crit.expect(elapsed <= 300.0, "n=10 optimization within 5 min");
    }
}

TEST_CASE("2: sparse pauli lowering against the dense oracle") {
    Criterion crit(2, "sparse hamiltonian construction");
    RngStream rng(17);
    bool all_exact = true;
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng.uniform_below(8));
        int terms = 1 + static_cast<int>(rng.uniform_below(12));
        PauliSum h = oracle::random_pauli_sum(n, terms, rng, trial % 2 == 0);
        ComplexMatrix dense = pauli_sum_to_coo(h).to_dense();
        all_exact = all_exact &&
                    (dense - oracle::pauli_sum_dense(h)).cwiseAbs().maxCoeff() == 0.0;
    }
    crit.expect(all_exact, "200 random sums lower exactly");
    auto t0 = clk::now();
    SparseCOO big = pauli_sum_to_coo(tfim_terms(chain(20), 1.0));
    double elapsed = seconds_since(t0);
    crit.expect(big.nnz() > 0, "n=20 chain produced entries");
    crit.expect(elapsed <= 10.0, "n=20 construction within 10 s");
}

TEST_CASE("3: time-evolution solver agreement") {
    Criterion crit(3, "ed / krylov / chebyshev agreement");
    auto t0 = clk::now();
    const int n = 10;
    PauliSum hp = heisenberg_terms(chain(n), 1.0, 1.0, 1.0);
    RngStream rng(42);
    for (int q = 0; q < n; ++q) hp.add_word(rng.normal(), {{q, 3}});
    SparseCOO h = pauli_sum_to_coo(hp);
    ComplexMatrix hd = pauli_sum_to_dense(hp);
    ComplexVector psi0(h.dim);
    for (Eigen::Index i = 0; i < psi0.size(); ++i) psi0[i] = cplx(rng.normal(), rng.normal());
    psi0.normalize();
    const std::vector<double> times = {1.0, 2.5, 5.0};
    auto ed = ed_evol(hd, psi0, times);
    auto kr = krylov_evol(h, psi0, times, 30);
    SpectralBounds bounds = estimate_spectral_bounds(h);
    double worst = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        ChebyshevPlan plan = estimate_k(times[i], bounds);
        ComplexVector ch = chebyshev_evol(h, psi0, times[i], bounds, plan.k, plan.m);
        worst = std::max(worst, (ed[i] - kr[i]).norm());
        worst = std::max(worst, (ed[i] - ch).norm());
        worst = std::max(worst, (kr[i] - ch).norm());
    }
    double elapsed = seconds_since(t0);
    crit.expect(worst <= 1e-8, "pairwise state distance within 1e-8");
    crit.expect(elapsed <= 60.0, "solver comparison within 60 s");
}

TEST_CASE("4: fermion chain criticality scan") {
    Criterion crit(4, "entropy peak at the critical potential");
    auto t0 = clk::now();
    std::vector<double> grid;
    for (double mu = 1.5; mu <= 2.5 + 1e-9; mu += 0.05) grid.push_back(mu);
    EntropyScanResult res = kitaev_entropy_scan(200, 1.0, 1.0, grid);
    double elapsed = seconds_since(t0);
    crit.expect(std::abs(res.argmax_mu - 2.0) <= 0.05 + 1e-9,
                "argmax within one grid step of 2.0");
    crit.expect(elapsed <= 60.0, "L=200 scan within 60 s");
}

TEST_CASE("5: gaussian states against exact diagonalization") {
    Criterion crit(5, "gaussian-state oracle agreement");
    const int L = 6;
    RngStream rng(19);
    bool energies = true, entropies = true, probs = true;
    for (int inst = 0; inst < 20; ++inst) {
        QuadraticHamiltonian h = random_quadratic(L, rng);
        FGSState gs = fgs_ground_state(h);
        EighResult full = eigh(oracle::fock_hamiltonian(h.A, h.B, L));
        energies = energies && std::abs(fgs_energy(gs, h) - full.eigenvalues[0]) < 1e-8;
        ComplexVector psi = full.eigenvectors.col(0);
        for (int cut = 1; cut < L; ++cut) {
            std::vector<int> keep(cut);
            for (int i = 0; i < cut; ++i) keep[i] = i;
            entropies = entropies &&
                        std::abs(fgs_entropy(gs, keep) - oracle::fock_entropy(psi, keep, L)) < 1e-8;
        }
        for (int site = 0; site < L; ++site) {
            double occ = 0.0;
            for (Eigen::Index idx = 0; idx < psi.size(); ++idx)
                if ((idx >> (L - 1 - site)) & 1) occ += std::norm(psi[idx]);
            FGSState copy = gs;
            RngStream dummy(0);
            double p1 = occ < 1e-12 ? 0.0 : fgs_measure(copy, site, dummy, 1).prob;
            probs = probs && std::abs(p1 - occ) < 1e-8;
        }
    }
    crit.expect(energies, "ground energies within 1e-8");
    crit.expect(entropies, "all single-cut entropies within 1e-8");
    crit.expect(probs, "occupation branch probabilities within 1e-8");
}

TEST_CASE("6: stabilizer tableau against the state vector") {
    Criterion crit(6, "clifford / state-vector equivalence");
    RngStream rng(101);
    bool entropy_ok = true, outcome_ok = true;
    const std::vector<std::string> one = {"h", "s", "x", "z"};
    for (int trial = 0; trial < 100; ++trial) {
        int n = 2 + static_cast<int>(rng.uniform_below(9));
        StabilizerTableau tab(n);
        StateVector psi = StateVector::zero_state(n);
        for (int layer = 0; layer < 4; ++layer) {
            for (int q = 0; q < n; ++q) {
                if (rng.uniform() < 0.7) {
                    std::string g = one[rng.uniform_below(4)];
                    tab.apply_clifford(g, {q});
                    Circuit c(n);
                    c.initial_state = psi.amps;
                    c.gate(g == "h" ? Gate::h : g == "s" ? Gate::s : g == "x" ? Gate::x
                                                                              : Gate::z, {q});
                    psi = run(c);
                }
            }
            for (int q = 0; q + 1 < n; ++q) {
                if (rng.uniform() < 0.4) {
                    bool use_cx = rng.uniform() < 0.5;
                    tab.apply_clifford(use_cx ? "cx" : "cz", {q, q + 1});
                    Circuit c(n);
                    c.initial_state = psi.amps;
                    if (use_cx) c.cx(q, q + 1); else c.cz(q, q + 1);
                    psi = run(c);
                }
            }
            // forced measurement keeps both engines on the same branch
            int wire = static_cast<int>(rng.uniform_below(n));
            RngStream mr = rng.split(1)[0];
            auto tr = tab.measure(wire, mr);
            RngStream dummy(0);
            auto sr = measure_collapse(psi, wire, dummy, tr.outcome);
            outcome_ok = outcome_ok && sr.outcome == tr.outcome &&
                         std::abs(sr.prob - (tr.deterministic ? 1.0 : 0.5)) < 1e-10;
        }
        for (int rep = 0; rep < 3; ++rep) {
            int k = 1 + static_cast<int>(rng.uniform_below(n - 1));
            std::vector<int> sub;
            for (int q = 0; q < n && static_cast<int>(sub.size()) < k; ++q) {
                if (rng.uniform() < 0.5 || n - q == k - static_cast<int>(sub.size()))
                    sub.push_back(q);
            }
            entropy_ok = entropy_ok &&
                         std::abs(subsystem_entropy(psi, sub) -
                                  tab.entanglement_entropy(sub)) < 1e-8;
        }
    }
    crit.expect(entropy_ok, "integer entropies identical");
    crit.expect(outcome_ok, "determinism classes and outcomes identical");
}

TEST_CASE("7: clifford measurement-transition trend") {
    Criterion crit(7, "clifford circuit entropy trend");
    auto t0 = clk::now();
    fs::path out = fresh_dir("clifford_trend");
    nlohmann::json cfg = {{"L", {8, 16, 24}}, {"trajectories", 200}, {"p", 0.05}};
    nlohmann::json low = run_experiment("mipt-clifford", cfg, out.string(), 7, 1);
    cfg["p"] = 0.5;
    nlohmann::json high = run_experiment("mipt-clifford", cfg, out.string(), 8, 1);
    double elapsed = seconds_since(t0);
    auto ent = [](const nlohmann::json& meta, int L) {
        return meta.at("mean_entropy").at(std::to_string(L)).get<double>();
    };
    crit.expect(ent(low, 8) < ent(low, 16) && ent(low, 16) < ent(low, 24),
                "weak monitoring: entropy strictly increasing in L");
    double spread = std::max({ent(high, 8), ent(high, 16), ent(high, 24)}) -
                    std::min({ent(high, 8), ent(high, 16), ent(high, 24)});
    crit.expect(spread < 0.5, "strong monitoring: entropy flat across L");
    crit.expect(elapsed <= 600.0, "trajectory sweep within 10 min");
}

TEST_CASE("8: monitored haar circuits") {
    Criterion crit(8, "haar circuit branch bookkeeping");
    {
        // exhaustive branch enumeration: brickwork with every qubit measured
        // each layer; probability over all outcome strings must sum to one
        const int n = 4, depth = 2;
        RngStream grng(5);
        std::vector<std::vector<ComplexMatrix>> layer_gates(depth);
        for (int l = 0; l < depth; ++l)
            for (int i = l % 2; i + 1 < n; i += 2) layer_gates[l].push_back(haar_su4(grng));
        std::function<double(StateVector, int, int)> walk =
            [&](StateVector psi, int layer, int wire) -> double {
            if (layer == depth) return 1.0;
            if (wire == 0) {
                int g = 0;
                for (int i = layer % 2; i + 1 < n; i += 2)
                    apply_local_unitary(psi, layer_gates[layer][g++], {i, i + 1});
            }
            if (wire == n) return walk(std::move(psi), layer + 1, 0);
            double total = 0.0;
            for (int o = 0; o < 2; ++o) {
                if (marginal_prob(psi, wire, o) < 1e-14) continue;
                StateVector branch = psi;
                RngStream dummy(0);
                auto r = measure_collapse(branch, wire, dummy, o);
                total += r.prob * walk(std::move(branch), layer, wire + 1);
            }
            return total;
        };
        double total = walk(StateVector::zero_state(n), 0, 0);
        crit.expect(std::abs(total - 1.0) <= 1e-10, "branch probabilities sum to one");
    }
    {
        auto t0 = clk::now();
        fs::path out = fresh_dir("haar_budget");
        nlohmann::json cfg = {{"N", 12}, {"D", 24}, {"trajectories", 100}};
        nlohmann::json meta = run_experiment("mipt-haar", cfg, out.string(), 3, 1);
        double elapsed = seconds_since(t0);
        crit.expect(meta.at("trajectories") == 100, "100 trajectories completed");
        crit.expect(elapsed <= 600.0, "N=12 D=24 sweep within 10 min");
    }
}

TEST_CASE("9: matrix-product-state engine") {
    Criterion crit(9, "mps fidelity and truncation");
    {
        RngStream rng(15);
        bool ok = true;
        for (int rep = 0; rep < 3; ++rep) {
            Circuit c = random_circuit(12, 6, rng);
            MPSState s(12);
            s.run_circuit(c);
            ComplexVector a = s.to_statevector().amps;
            ComplexVector b = run(c).amps;
            ok = ok && std::norm((a.adjoint() * b)(0)) > 1.0 - 1e-10;
        }
        crit.expect(ok, "unbounded bond dimension reproduces the exact engine");
    }
    {
        const int n = 10;
        Circuit c(n);
        c.h(0);
        for (int q = 0; q + 1 < n; ++q) c.cx(q, q + 1);
        MPSState s(n, TruncationPolicy{2, std::nullopt});
        s.run_circuit(c);
        ComplexVector a = s.to_statevector().amps;
        ComplexVector b = run(c).amps;
        crit.expect(s.discarded_weight() == 0.0 &&
                        std::norm((a.adjoint() * b)(0)) > 1.0 - 1e-12,
                    "ghz state exact at bond dimension two");
    }
    {
        const int n = 20, layers = 5;
        Circuit c = tfim_chain_ansatz(n, layers).builder(ramp_init(n, layers, 1.0));
        ComplexMatrix z = (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished();
        ComplexMatrix x = (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished();
        auto energy_at = [&](std::optional<int> chi) {
            MPSState s(n, TruncationPolicy{chi, std::nullopt});
            s.run_circuit(c);
            double e = 0.0;
            for (int q = 0; q + 1 < n; ++q)
                e -= s.expectation_local({{q, z}, {q + 1, z}}).real();
            for (int q = 0; q < n; ++q) e -= s.expectation_local({{q, x}}).real();
            return e;
        };
        double exact = energy_at(std::nullopt);
        double last = std::numeric_limits<double>::infinity();
        bool decreasing = true;
        for (int chi : {2, 4, 8, 16}) {
            double err = std::abs(energy_at(chi) - exact);
            decreasing = decreasing && err < last;
            last = err;
        }
        crit.expect(decreasing, "n=20 energy error strictly decreasing in bond dimension");
    }
}

TEST_CASE("10: stochastic noise against the density matrix") {
    Criterion crit(10, "trajectory / density-matrix duality");
    {
        std::vector<KrausChannel> channels = {
            depolarizing_channel(0.3), depolarizing_channel(0.1, 2),
            amplitude_damping_channel(0.35), phase_damping_channel(0.2),
            reset_channel(0.4), thermal_relaxation_channel(0.3, 0.2)};
        bool complete = true;
        for (const auto& ch : channels)
            complete = complete && ch.completeness_defect() < 1e-10;
        crit.expect(complete, "all channels resolve the identity within 1e-10");
    }
    {
        RngStream crng(11);
        bool within = true;
        const int n_traj = 10000;
        for (int rep = 0; rep < 20; ++rep) {
            int n = 2 + static_cast<int>(crng.uniform_below(5));
            Circuit c = random_circuit(n, 2, crng);
            NoiseConf conf;
            conf.attach("cx", depolarizing_channel(0.05, 2));
            conf.attach("h", amplitude_damping_channel(0.08));
            conf.attach("rx", phase_damping_channel(0.1));
            double exact =
                density_matrix_expectation(density_matrix_run(c, conf), z_on(n, 0)).real();
            RngStream rng(500 + rep);
            double acc = 0.0;
            for (int i = 0; i < n_traj; ++i)
                acc += expectation_pauli(mc_trajectory(c, conf, rng).state, z_on(n, 0)).real();
            within = within &&
                     std::abs(acc / n_traj - exact) < 3.0 / std::sqrt(double(n_traj));
        }
        crit.expect(within, "trajectory averages within three sigma on 20 circuits");
    }
}

TEST_CASE("11: readout error mitigation") {
    Criterion crit(11, "readout calibration and correction");
    const int n = 4;
    const std::vector<ReadoutError> err(n, {0.95, 0.92});
    RngStream rng(14);
    auto execute = [&](const Circuit& c) {
        StateVector psi = run(c);
        Counts raw = sample(psi, 8192, rng);
        return apply_readout_error(raw, err, rng);
    };
    ReadoutMitigation mit = readout_calibrate(execute, n);
    Counts data = execute(Circuit(n));
    auto dist = readout_correct(mit, data);
    bool ok = true;
    for (int q = 0; q < n; ++q)
        ok = ok && std::abs(quasi_expectation_z(dist, q) - 1.0) < 0.02;
    crit.expect(ok, "corrected <Z> within 0.02 of one on every qubit");
}

TEST_CASE("12: classical shadows") {
    Criterion crit(12, "shadow estimator statistics");
    {
        RngStream rng(13);
        bool unbiased = true;
        for (int trial = 0; trial < 6; ++trial) {
            int n = 1 + static_cast<int>(rng.uniform_below(3));
            Circuit c(n);
            for (int q = 0; q < n; ++q)
                c.ry(q, rng.uniform() * 3.0).rz(q, rng.uniform() * 3.0);
            for (int q = 0; q + 1 < n; ++q) c.cx(q, q + 1);
            StateVector psi = run(c);
            std::vector<int> obs(n);
            bool nontrivial = false;
            for (int q = 0; q < n; ++q) {
                obs[q] = static_cast<int>(rng.uniform_below(4));
                nontrivial |= obs[q] != 0;
            }
            if (!nontrivial) obs[0] = 3;
            PauliSum ps;
            ps.n = n;
            ps.add(1.0, obs);
            double truth = expectation_pauli(psi, ps).real();
            unbiased = unbiased && std::abs(exact_estimator_mean(psi, obs) - truth) < 1e-10;
        }
        crit.expect(unbiased, "estimator mean analytically unbiased within 1e-10");
    }
    {
        const int n = 6;
        const std::size_t m_snap = 10000;
        int hits = 0;
        for (int seed = 0; seed < 100; ++seed) {
            RngStream rng(1000 + seed);
            Circuit c(n);
            for (int q = 0; q < n; ++q)
                c.ry(q, rng.uniform() * M_PI).rz(q, rng.uniform() * M_PI);
            StateVector psi = run(c);
            double truth = expectation_pauli(psi, z_on(n, 0)).real();
            auto bases = random_bases(m_snap, n, rng);
            auto ds = shadow_snapshots(psi, bases, rng);
            std::vector<int> obs(n, 0);
            obs[0] = 3;
            if (std::abs(estimate_pauli(ds, obs) - truth) <=
                3.0 * std::sqrt(9.0 / double(m_snap)))
                ++hits;
        }
        crit.expect(hits >= 95, "single-site estimate within bound for >= 95/100 seeds");
    }
    {
        auto t0 = clk::now();
        Circuit c(20);
        for (int q = 0; q < 20; ++q) c.h(q);
        StateVector psi = run(c, 25);
        RngStream rng(9);
        auto ds = shadow_snapshots(psi, random_bases(256, 20, rng), rng);
        double elapsed = seconds_since(t0);
        crit.expect(ds.bases.size() == 256 && elapsed <= 10.0,
                    "256 snapshots at n=20 within 10 s");
    }
}

TEST_CASE("13: tensor-network contraction engine") {
    Criterion crit(13, "sliced contraction and path persistence");
    {
        RngStream rng(21);
        bool match = true, capped = true;
        for (int trial = 0; trial < 50; ++trial) {
            TensorNetwork net =
                random_network(6 + static_cast<int>(rng.uniform_below(5)), rng);
            ContractionTree plain = find_path(net);
            std::int64_t biggest = 0;
            for (const auto& t : net.tensors) biggest = std::max(biggest, t.size());
            PathOptions tight;
            tight.target_size =
                std::max<std::int64_t>(biggest, plain.largest_intermediate / 4);
            ContractionTree sliced = find_path(net, tight);
            Tensor a = contract(net, plain);
            ContractStats stats;
            Tensor b = contract(net, sliced, 1, &stats);
            double diff = 0.0, norm = 0.0;
            for (std::size_t i = 0; i < a.data.size(); ++i) {
                diff = std::max(diff, std::abs(a.data[i] - b.data[i]));
                norm = std::max(norm, std::abs(a.data[i]));
            }
            match = match && diff <= 1e-12 * std::max(1.0, norm);
            capped = capped && stats.max_intermediate <= tight.target_size;
        }
        crit.expect(match, "sliced equals unsliced within 1e-12 on 50 networks");
        crit.expect(capped, "memory instrumentation never exceeds the target");
    }
    {
        // find in one process, execute in another: identical values
        fs::path dir = fresh_dir("path_roundtrip");
        fs::path pathfile = dir / "plan.json";
        const std::string args = " --set n=8 --set depth=6 --seed 17 --out " + dir.string();
        CliRun find = run_cli("contract --set save_path=\"" + pathfile.string() + "\"" + args);
        CliRun exec = run_cli("contract --set load_path=\"" + pathfile.string() + "\"" + args);
        bool ok = find.code == 0 && exec.code == 0;
        if (ok) {
            nlohmann::json a = nlohmann::json::parse(find.output);
            nlohmann::json b = nlohmann::json::parse(exec.output);
            ok = a.at("value_re") == b.at("value_re") &&
                 a.at("value_im") == b.at("value_im");
        }
        crit.expect(ok, "find-execute round trip across processes is identical");
    }
    {
        // soft-reported: parallel slice execution on a >= 16-slice workload
        RngStream rng(33);
        Circuit c(16);
        for (int l = 0; l < 8; ++l)
            for (int i = l % 2; i + 1 < 16; i += 2) c.unitary({i, i + 1}, haar_su4(rng));
        std::vector<int> obs(16, 0);
        obs[3] = 3;
        obs[11] = 1;
        TensorNetwork net = capture_expectation_network(c, obs);
        ContractionTree plain = find_path(net);
        PathOptions opt;
        opt.target_size = plain.largest_intermediate / 8;
        ContractionTree tree = find_path(net, opt);
        ContractStats stats;
        auto t0 = clk::now();
        Tensor r1 = contract(net, tree, 1, &stats);
        double t1 = seconds_since(t0);
        t0 = clk::now();
        Tensor r4 = contract(net, tree, 4);
        double t4 = seconds_since(t0);
        crit.expect(stats.slice_count >= 16, "workload produced at least 16 slices");
        crit.expect(std::abs(r1.data[0] - r4.data[0]) == 0.0,
                    "worker count does not change the value");
        std::printf("    [soft] 4-worker speedup on %lld slices: %.2fx "
                    "(threshold 2x not asserted on shared CPU budgets)\n",
                    static_cast<long long>(stats.slice_count), t1 / std::max(t4, 1e-9));
    }
}

TEST_CASE("14: excited-state subspace search") {
    Criterion crit(14, "generalized-eigenvalue subspace search");
    fs::path out = fresh_dir("subspace");
    nlohmann::json cfg = {{"n", 8}, {"k", 3}};
    nlohmann::json meta = run_experiment("excited-subspace", cfg, out.string(), 1, 1);
    EighResult full = eigh(pauli_sum_to_dense(heisenberg_terms(chain(8), 1.0, 1.0, 1.0)));
    auto evs = meta.at("eigenvalues").get<std::vector<double>>();
    bool close = evs.size() == 3;
    double floor3 = 0.0;
    for (int i = 0; i < 3; ++i) {
        if (close) close = std::abs(evs[i] - full.eigenvalues[i]) < 1e-2;
        floor3 += full.eigenvalues[i];
    }
    crit.expect(close, "three lowest eigenvalues within 1e-2 of exact diagonalization");
    // the trace loss is variationally bounded below by the exact sum
    std::ifstream csv(out / meta.at("data").get<std::string>());
    std::string line;
    std::getline(csv, line);  // header
    double min_loss = std::numeric_limits<double>::infinity();
    while (std::getline(csv, line)) {
        auto comma = line.find(',');
        if (comma != std::string::npos)
            min_loss = std::min(min_loss, std::stod(line.substr(comma + 1)));
    }
    crit.expect(min_loss >= floor3 - 1e-3, "loss never below the exact sum minus slack");
}

TEST_CASE("15: qudit engine") {
    Criterion crit(15, "qudit circuits and the clock model");
    {
        // d=2 generic qudit gates against the specialized qubit paths
        RngStream rng(3);
        bool ok = true;
        for (int trial = 0; trial < 10; ++trial) {
            Circuit a(4, 2), b(4, 2);
            for (int l = 0; l < 4; ++l) {
                for (int q = 0; q < 4; ++q) {
                    double t = rng.uniform() * 3.0;
                    switch (rng.uniform_below(4)) {
                        case 0: a.x(q); b.unitary({q}, shift_x(2)); break;
                        case 1: a.z(q); b.unitary({q}, clock_z(2)); break;
                        case 2: a.ry(q, t); b.subspace_ry(q, t, 0, 1); break;
                        default: a.rz(q, t); b.subspace_rz(q, t, 0, 1); break;
                    }
                }
                for (int q = l % 2; q + 1 < 4; q += 2) {
                    a.cx(q, q + 1);
                    b.csum(q, q + 1);
                }
            }
            ok = ok && (run(a).amps - run(b).amps).cwiseAbs().maxCoeff() < 1e-12;
        }
        crit.expect(ok, "d=2 qudit gates reproduce the qubit engine");
    }
    {
        // three-level clock model: subspace-rotation ansatz optimized against
        // the dense ground energy
        const int n = 4, d = 3, layers = 4;
        QuditOperatorSum hq = clock_model(n, d, 1.0, 1.0);
        ComplexMatrix hd = qudit_sum_to_dense(hq);
        double e0 = eigh(hd).eigenvalues[0];
        const int n_params = layers * n * 6;
        auto build = [&](const RealVector& th) {
            Circuit c(n, d);
            int j = 0;
            for (int l = 0; l < layers; ++l) {
                for (int q = 0; q < n; ++q) {
                    c.subspace_ry(q, th[j++], 0, 1);
                    c.subspace_ry(q, th[j++], 1, 2);
                    c.subspace_ry(q, th[j++], 0, 2);
                    c.subspace_rz(q, th[j++], 0, 1);
                    c.subspace_rz(q, th[j++], 1, 2);
                    c.subspace_rz(q, th[j++], 0, 2);
                }
                for (int q = 0; q + 1 < n; ++q) c.csum(q, q + 1);
            }
            return c;
        };
        auto energy = [&](const RealVector& th) {
            ComplexVector psi = run(build(th)).amps;
            return (psi.adjoint() * (hd * psi))(0).real();
        };
        double best = std::numeric_limits<double>::infinity();
        RngStream rng(7);
        for (int restart = 0; restart < 2; ++restart) {
            RealVector th(n_params);
            for (int j = 0; j < n_params; ++j) th[j] = 0.3 * rng.normal();
            AdamState adam;
            const double fd = 1e-4;
            for (int step = 0; step < 600; ++step) {
                RealVector g(n_params);
                for (int j = 0; j < n_params; ++j) {
                    RealVector p = th, m = th;
                    p[j] += fd;
                    m[j] -= fd;
                    g[j] = (energy(p) - energy(m)) / (2.0 * fd);
                }
                adam_step(adam, th, g, step < 400 ? 0.1 : 0.02);
            }
            best = std::min(best, energy(th));
        }
        crit.expect(std::abs(best - e0) < 1e-2,
                    "clock-model energy within 1e-2 of the dense ground state");
    }
}
