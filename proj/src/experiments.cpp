#include "qforge/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qforge/circuit.hpp"
#include "qforge/contraction.hpp"
#include "qforge/fgs.hpp"
#include "qforge/lattice.hpp"
#include "qforge/parallel.hpp"
#include "qforge/pauli.hpp"
#include "qforge/rng.hpp"
#include "qforge/shadows.hpp"
#include "qforge/stabilizer.hpp"
#include "qforge/variational.hpp"

namespace qforge {

namespace fs = std::filesystem;

namespace {

template <class T>
T cfg_get(const nlohmann::json& cfg, const std::string& key, T fallback) {
    if (!cfg.contains(key)) return fallback;
    try {
        return cfg.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config field '" + key + "' has the wrong type");
    }
}

std::uint64_t config_digest(const std::string& name, const nlohmann::json& cfg,
                            std::uint64_t seed) {
    std::string s = name + "|" + cfg.dump() + "|" + std::to_string(seed);
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

std::string hex16(std::uint64_t v) {
    std::ostringstream ss;
    ss << std::hex << std::setw(16) << std::setfill('0') << v;
    return ss.str();
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream f(p);
    if (!f.good()) throw std::runtime_error("cannot open output file " + p.string());
    f << std::setprecision(17);
    return f;
}

Lattice chain(int n) { return build_lattice(LatticeKind::chain, {n}, {false}); }

std::vector<int> list_of_int(const nlohmann::json& cfg, const std::string& key,
                             std::vector<int> fallback) {
    if (!cfg.contains(key)) return fallback;
    const auto& v = cfg.at(key);
    if (v.is_number_integer()) return {v.get<int>()};
    if (v.is_array()) {
        std::vector<int> out;
        for (const auto& e : v) {
            if (!e.is_number_integer())
                throw ConfigError("config field '" + key + "' must hold integers");
            out.push_back(e.get<int>());
        }
        if (out.empty()) throw ConfigError("config field '" + key + "' is empty");
        return out;
    }
    throw ConfigError("config field '" + key + "' must be an integer or list");
}

// ---- individual experiments; each returns extra metadata fields ----

nlohmann::json exp_vqe_tfim(const nlohmann::json& cfg, const fs::path& out,
                            const std::string& base, RngStream& rng, int workers) {
    const int n = cfg_get(cfg, "n", 2);
    const double g = cfg_get(cfg, "g", 1.0);
    const int layers = cfg_get(cfg, "layers", 2);
    const int steps = cfg_get(cfg, "steps", 300);
    const double lr = cfg_get(cfg, "lr", 2e-2);
    const int seeds = cfg_get(cfg, "seeds", 8);
    const std::string mode_name = cfg_get<std::string>(cfg, "grad_mode", "parameter_shift");
    if (n < 2) throw ConfigError("vqe-tfim: n must be >= 2");
    if (seeds < 1) throw ConfigError("vqe-tfim: seeds must be >= 1");
    GradMode mode;
    if (mode_name == "parameter_shift") mode = GradMode::parameter_shift;
    else if (mode_name == "finite_diff") mode = GradMode::finite_diff;
    else throw ConfigError("vqe-tfim: grad_mode must be parameter_shift or finite_diff");

    PauliSum h = tfim_terms(chain(n), g);
    AnsatzSpec ansatz = tfim_chain_ansatz(n, layers);
    // annealing-ramp start: the ansatz is a Trotterized interpolation from the
    // transverse field to the coupling, so a linear schedule lands near the
    // ground state; seed 0 is the pure ramp, later seeds perturb it
    RealVector ramp(ansatz.n_params);
    {
        const double dt = 1.0;
        int j = 0;
        for (int l = 0; l < layers; ++l) {
            double s = (l + 0.5) / layers;
            for (int i = 0; i < n; ++i) ramp[j++] = -2.0 * dt * (1.0 - s) * g;
            for (int i = 0; i + 1 < n; ++i) ramp[j++] = -2.0 * dt * s;
        }
    }
    std::vector<RealVector> theta0(seeds);
    auto streams = rng.split(seeds);
    for (int s = 0; s < seeds; ++s) {
        theta0[s] = ramp;
        if (s > 0) {
            for (int j = 0; j < ansatz.n_params; ++j)
                theta0[s][j] += 0.1 * streams[s].normal();
        }
    }
    VqeResult res = vqe_run(ansatz, theta0, h, steps, lr, mode, workers);

    auto csv = open_out(out / (base + ".csv"));
    csv << "step,seed,energy\n";
    for (int s = 0; s < seeds; ++s) {
        for (std::size_t step = 0; step < res.traces[s].size(); ++step) {
            csv << step << "," << s << "," << res.traces[s][step] << "\n";
        }
    }
    nlohmann::json params = nlohmann::json::array();
    for (int j = 0; j < ansatz.n_params; ++j) {
        params.push_back(res.final_thetas[res.best_index][j]);
    }
    auto pf = open_out(out / (base + ".params.json"));
    pf << nlohmann::json{{"theta", params}}.dump(2) << "\n";

    return {{"best_energy", res.best_energy}, {"best_index", res.best_index},
            {"n", n}, {"g", g}, {"layers", layers}};
}

nlohmann::json exp_kitaev_scan(const nlohmann::json& cfg, const fs::path& out,
                               const std::string& base) {
    const int L = cfg_get(cfg, "L", 200);
    const double t = cfg_get(cfg, "t", 1.0);
    const double delta = cfg_get(cfg, "delta", 1.0);
    const double mu_min = cfg_get(cfg, "mu_min", 1.5);
    const double mu_max = cfg_get(cfg, "mu_max", 2.5);
    const double mu_step = cfg_get(cfg, "mu_step", 0.05);
    if (L < 4) throw ConfigError("kitaev-scan: L must be >= 4");
    if (mu_step <= 0.0 || mu_max < mu_min)
        throw ConfigError("kitaev-scan: bad grid (mu_min, mu_max, mu_step)");

    std::vector<double> grid;
    for (double mu = mu_min; mu <= mu_max + 1e-9; mu += mu_step) grid.push_back(mu);
    EntropyScanResult res = kitaev_entropy_scan(L, t, delta, grid);

    auto csv = open_out(out / (base + ".csv"));
    csv << "mu,entropy_bits\n";
    for (const auto& p : res.curve) csv << p.mu << "," << p.entropy_bits << "\n";
    return {{"argmax_mu", res.argmax_mu}, {"L", L}, {"t", t}, {"delta", delta},
            {"grid_points", grid.size()}};
}

nlohmann::json exp_mipt_clifford(const nlohmann::json& cfg, const fs::path& out,
                                 const std::string& base, RngStream& rng, int workers) {
    std::vector<int> Ls = list_of_int(cfg, "L", {8, 16, 24});
    const double p = cfg_get(cfg, "p", 0.05);
    const int trajectories = cfg_get(cfg, "trajectories", 200);
    const int depth_factor = cfg_get(cfg, "depth_factor", 4);
    if (p < 0.0 || p > 1.0) throw ConfigError("mipt-clifford: p must lie in [0, 1]");
    if (trajectories < 1) throw ConfigError("mipt-clifford: trajectories must be >= 1");

    auto csv = open_out(out / (base + ".csv"));
    csv << "L,p,trajectory,entropy_bits\n";
    nlohmann::json means;
    auto l_streams = rng.split(Ls.size());
    for (std::size_t li = 0; li < Ls.size(); ++li) {
        const int L = Ls[li];
        const int depth = cfg_get(cfg, "depth", depth_factor * L);
        std::vector<int> half(L / 2);
        for (int i = 0; i < L / 2; ++i) half[i] = i;
        std::vector<double> ent(trajectories, 0.0);
        auto t_streams = l_streams[li].split(trajectories);
        parallel_for(trajectories, static_cast<std::size_t>(std::max(workers, 1)),
                     [&](std::size_t tr) {
                         RngStream rs = t_streams[tr];
                         StabilizerTableau tab(L);
                         for (int layer = 0; layer < depth; ++layer) {
                             for (int i = layer % 2; i + 1 < L; i += 2) {
                                 tab.random_two_qubit_clifford(i, i + 1, rs);
                             }
                             for (int q = 0; q < L; ++q) {
                                 if (rs.uniform() < p) tab.measure(q, rs);
                             }
                         }
                         ent[tr] = tab.entanglement_entropy(half);
                     });
        double mean = 0.0;
        for (int tr = 0; tr < trajectories; ++tr) {
            csv << L << "," << p << "," << tr << "," << ent[tr] << "\n";
            mean += ent[tr];
        }
        means[std::to_string(L)] = mean / trajectories;
    }
    return {{"mean_entropy", means}, {"p", p}, {"trajectories", trajectories}};
}

nlohmann::json exp_mipt_haar(const nlohmann::json& cfg, const fs::path& out,
                             const std::string& base, RngStream& rng, int workers) {
    const int n = cfg_get(cfg, "N", 12);
    const int depth = cfg_get(cfg, "D", 24);
    const double p = cfg_get(cfg, "p", 0.1);
    const int trajectories = cfg_get(cfg, "trajectories", 100);
    if (n < 2 || n > 20) throw ConfigError("mipt-haar: N must lie in [2, 20]");
    if (p < 0.0 || p > 1.0) throw ConfigError("mipt-haar: p must lie in [0, 1]");
    if (trajectories < 1) throw ConfigError("mipt-haar: trajectories must be >= 1");

    std::vector<int> half(n / 2);
    for (int i = 0; i < n / 2; ++i) half[i] = i;
    std::vector<double> ent(trajectories, 0.0);
    auto t_streams = rng.split(trajectories);
    parallel_for(trajectories, static_cast<std::size_t>(std::max(workers, 1)),
                 [&](std::size_t tr) {
                     RngStream rs = t_streams[tr];
                     StateVector psi = StateVector::zero_state(n, 2);
                     for (int layer = 0; layer < depth; ++layer) {
                         for (int i = layer % 2; i + 1 < n; i += 2) {
                             apply_local_unitary(psi, haar_su4(rs), {i, i + 1});
                         }
                         for (int q = 0; q < n; ++q) {
                             if (rs.uniform() < p) measure_collapse(psi, q, rs);
                         }
                     }
                     ent[tr] = subsystem_entropy(psi, half);
                 });

    auto csv = open_out(out / (base + ".csv"));
    csv << "L,p,trajectory,entropy_bits\n";
    double mean = 0.0;
    for (int tr = 0; tr < trajectories; ++tr) {
        csv << n << "," << p << "," << tr << "," << ent[tr] << "\n";
        mean += ent[tr];
    }
    nlohmann::json means;
    means[std::to_string(n)] = mean / trajectories;
    return {{"mean_entropy", means}, {"p", p}, {"trajectories", trajectories},
            {"N", n}, {"D", depth}};
}

nlohmann::json exp_shadow_gen(const nlohmann::json& cfg, const fs::path& out,
                              const std::string& base, RngStream& rng, int workers) {
    const int n = cfg_get(cfg, "n", 20);
    const int m = cfg_get(cfg, "M", 256);
    const int depth = cfg_get(cfg, "depth", 0);
    if (n < 1 || n > 24) throw ConfigError("shadow-gen: n must lie in [1, 24]");
    if (m < 1) throw ConfigError("shadow-gen: M must be >= 1");

    auto streams = rng.split(3);
    Circuit c(n);
    for (int l = 0; l < depth; ++l) {
        for (int q = 0; q < n; ++q) {
            c.ry(q, 2.0 * 3.14159265358979323846 * streams[0].uniform());
        }
        for (int q = 0; q + 1 < n; ++q) c.cx(q, q + 1);
    }
    StateVector psi = run(c, 25);
    auto bases = random_bases(m, n, streams[1]);
    ShadowDataset ds = shadow_snapshots(psi, bases, streams[2], workers);

    const std::string dataset_name = base + ".dataset.csv";
    save_dataset(ds, (out / dataset_name).string());
    return {{"n", n}, {"M", m}, {"depth", depth}, {"dataset", dataset_name}};
}

nlohmann::json exp_bench_hamiltonian(const nlohmann::json& cfg, const fs::path& out,
                                     const std::string& base, int workers) {
    const int n = cfg_get(cfg, "n", 20);
    const double g = cfg_get(cfg, "g", 1.0);
    if (n < 2 || n > 26) throw ConfigError("bench-hamiltonian: n must lie in [2, 26]");

    PauliSum h = tfim_terms(chain(n), g);
    auto t0 = std::chrono::steady_clock::now();
    SparseCOO coo = pauli_sum_to_coo(h, 26, static_cast<std::size_t>(std::max(workers, 1)));
    double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                         .count();

    auto csv = open_out(out / (base + ".csv"));
    csv << "n,terms,nnz,seconds\n";
    csv << n << "," << h.terms.size() << "," << coo.vals.size() << "," << seconds << "\n";
    return {{"n", n}, {"terms", h.terms.size()}, {"nnz", coo.vals.size()},
            {"seconds", seconds}};
}

nlohmann::json exp_contract(const nlohmann::json& cfg, const fs::path& out,
                            const std::string& base, RngStream& rng, int workers) {
    const int n = cfg_get(cfg, "n", 8);
    const int depth = cfg_get(cfg, "depth", 6);
    const std::int64_t target_size =
        cfg_get<std::int64_t>(cfg, "target_size", std::int64_t(1) << 20);
    const int max_repeats = cfg_get(cfg, "max_repeats", 8);
    if (n < 2 || n > 24) throw ConfigError("contract: n must lie in [2, 24]");
    if (target_size < 4) throw ConfigError("contract: target_size too small");

    Circuit c(n);
    for (int l = 0; l < depth; ++l) {
        for (int i = l % 2; i + 1 < n; i += 2) {
            c.unitary({i, i + 1}, haar_su4(rng));
        }
    }
    std::vector<int> obs(n, 0);
    int q0 = static_cast<int>(rng.uniform_below(n));
    int q1 = static_cast<int>(rng.uniform_below(n - 1));
    if (q1 >= q0) ++q1;
    obs[q0] = 1 + static_cast<int>(rng.uniform_below(3));
    obs[q1] = 1 + static_cast<int>(rng.uniform_below(3));

    TensorNetwork net = capture_expectation_network(c, obs);
    ContractionTree tree;
    const std::string load_file = cfg_get<std::string>(cfg, "load_path", "");
    if (!load_file.empty()) {
        tree = load_path(load_file);
    } else {
        PathOptions opts;
        opts.target_size = target_size;
        opts.max_repeats = max_repeats;
        opts.seed = rng.seed();
        tree = find_path(net, opts);
    }
    const std::string save_file = cfg_get<std::string>(cfg, "save_path", "");
    if (!save_file.empty()) save_path(tree, save_file);

    ContractStats stats;
    Tensor result = contract(net, tree, workers, &stats);
    cplx value = result.data.at(0);

    PauliSum obs_sum;
    obs_sum.n = n;
    obs_sum.add(1.0, obs);
    cplx reference = expectation_pauli(run(c), obs_sum);

    auto csv = open_out(out / (base + ".csv"));
    csv << "value_re,value_im,reference_re,reference_im,abs_error,flops,slices,"
           "max_intermediate\n";
    csv << value.real() << "," << value.imag() << "," << reference.real() << ","
        << reference.imag() << "," << std::abs(value - reference) << "," << tree.flops
        << "," << stats.slice_count << "," << stats.max_intermediate << "\n";
    return {{"value_re", value.real()}, {"value_im", value.imag()},
            {"abs_error", std::abs(value - reference)}, {"flops", tree.flops},
            {"slices", stats.slice_count}, {"sliced_labels", tree.sliced},
            {"max_intermediate", stats.max_intermediate}};
}

nlohmann::json exp_excited_subspace(const nlohmann::json& cfg, const fs::path& out,
                                    const std::string& base, RngStream& rng,
                                    int workers) {
    const int n = cfg_get(cfg, "n", 8);
    const int k = cfg_get(cfg, "k", 3);
    const int steps = cfg_get(cfg, "steps", 800);
    const double lr = cfg_get(cfg, "lr", 0.1);
    const double ridge = cfg_get(cfg, "ridge", 1e-6);
    if (n < 2 || n > 12) throw ConfigError("excited-subspace: n must lie in [2, 12]");
    if (k < 1) throw ConfigError("excited-subspace: k must be >= 1");
    (void)workers;

    PauliSum hp = heisenberg_terms(chain(n), 1.0, 1.0, 1.0);
    SparseCOO h = pauli_sum_to_coo(hp);
    const std::int64_t dim = h.dim;

    // states parameterized directly by their (unnormalized) amplitudes;
    // the loss is basis-invariant, so no normalization is needed
    auto unpack = [k, dim](const RealVector& theta) {
        std::vector<ComplexVector> states(k);
        for (int i = 0; i < k; ++i) {
            states[i] = ComplexVector(dim);
            for (std::int64_t j = 0; j < dim; ++j) {
                states[i][j] = cplx(theta[(2 * i) * dim + j], theta[(2 * i + 1) * dim + j]);
            }
        }
        return states;
    };
    SubspaceProblem prob;
    prob.k = k;
    prob.build = unpack;
    prob.hamiltonian = h;
    prob.ridge = ridge;

    RealVector theta(2 * k * dim);
    for (Eigen::Index j = 0; j < theta.size(); ++j) theta[j] = rng.normal();

    auto csv = open_out(out / (base + ".csv"));
    csv << "step,loss\n";
    AdamState adam;
    SubspaceLoss last;
    for (int step = 0; step < steps; ++step) {
        std::vector<ComplexVector> states = unpack(theta);
        ComplexMatrix psi(dim, k);
        for (int i = 0; i < k; ++i) psi.col(i) = states[i];
        ComplexMatrix hpsi(dim, k);
        for (int i = 0; i < k; ++i) hpsi.col(i) = h.apply(states[i]);
        ComplexMatrix s = psi.adjoint() * psi;
        ComplexMatrix hm = psi.adjoint() * hpsi;
        ComplexMatrix sr = s + ridge * ComplexMatrix::Identity(k, k);
        ComplexMatrix sinv = sr.inverse();
        last.loss = (sinv * hm).trace().real();
        last.s = s;
        last.h = hm;
        csv << step << "," << last.loss << "\n";

        // d loss / d psi*: H Psi S^{-1} - Psi S^{-1} H_mat S^{-1}
        ComplexMatrix g = hpsi * sinv - psi * (sinv * hm * sinv);
        RealVector grad(theta.size());
        for (int i = 0; i < k; ++i) {
            for (std::int64_t j = 0; j < dim; ++j) {
                grad[(2 * i) * dim + j] = 2.0 * g(j, i).real();
                grad[(2 * i + 1) * dim + j] = 2.0 * g(j, i).imag();
            }
        }
        adam_step(adam, theta, grad, lr);
    }
    std::vector<double> spectrum = subspace_spectrum(last.s, last.h);
    return {{"loss", last.loss}, {"eigenvalues", spectrum}, {"n", n}, {"k", k},
            {"ridge", ridge}};
}

}  // namespace

std::vector<std::string> experiment_names() {
    return {"vqe-tfim", "kitaev-scan", "mipt-clifford", "mipt-haar",
            "shadow-gen", "bench-hamiltonian", "contract", "excited-subspace"};
}

nlohmann::json run_experiment(const std::string& name, const nlohmann::json& cfg,
                              const std::string& out_dir, std::uint64_t seed,
                              int workers) {
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    auto names = experiment_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        throw ConfigError("unknown experiment '" + name + "'");
    }
    fs::path out(out_dir);
    fs::create_directories(out);
    const std::string base = name + "_" + hex16(config_digest(name, cfg, seed));
    RngStream rng(seed);

    auto t0 = std::chrono::steady_clock::now();
    nlohmann::json extra;
    if (name == "vqe-tfim") extra = exp_vqe_tfim(cfg, out, base, rng, workers);
    else if (name == "kitaev-scan") extra = exp_kitaev_scan(cfg, out, base);
    else if (name == "mipt-clifford") extra = exp_mipt_clifford(cfg, out, base, rng, workers);
    else if (name == "mipt-haar") extra = exp_mipt_haar(cfg, out, base, rng, workers);
    else if (name == "shadow-gen") extra = exp_shadow_gen(cfg, out, base, rng, workers);
    else if (name == "bench-hamiltonian") extra = exp_bench_hamiltonian(cfg, out, base, workers);
    else if (name == "contract") extra = exp_contract(cfg, out, base, rng, workers);
    else if (name == "excited-subspace") extra = exp_excited_subspace(cfg, out, base, rng, workers);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                      .count();

    nlohmann::json meta = {{"experiment", name}, {"seed", seed}, {"config", cfg},
                           {"workers", workers}, {"wall_time_s", wall},
                           {"data", base + ".csv"}};
    for (auto& [key, value] : extra.items()) meta[key] = value;
    auto mf = open_out(out / (base + ".meta.json"));
    mf << meta.dump(2) << "\n";
    return meta;
}

nlohmann::json emit_summary(const std::string& dir) {
    fs::path d(dir);
    if (!fs::is_directory(d)) throw ConfigError("summary: not a directory: " + dir);
    std::vector<fs::path> metas;
    for (const auto& entry : fs::directory_iterator(d)) {
        const std::string fn = entry.path().filename().string();
        if (fn.size() > 10 && fn.substr(fn.size() - 10) == ".meta.json") {
            metas.push_back(entry.path());
        }
    }
    if (metas.empty()) throw ConfigError("summary: no run metadata in " + dir);
    std::sort(metas.begin(), metas.end());

    nlohmann::json summary;
    summary["runs"] = nlohmann::json::array();
    double best_energy = std::numeric_limits<double>::infinity();
    nlohmann::json mipt_entropy = nlohmann::json::object();
    for (const auto& p : metas) {
        std::ifstream f(p);
        nlohmann::json meta = nlohmann::json::parse(f);
        summary["runs"].push_back(meta);
        if (meta.contains("best_energy")) {
            best_energy = std::min(best_energy, meta["best_energy"].get<double>());
        }
        if (meta.contains("argmax_mu")) summary["argmax_mu"] = meta["argmax_mu"];
        if (meta.contains("mean_entropy")) {
            for (auto& [key, value] : meta["mean_entropy"].items()) {
                mipt_entropy[key] = value;
            }
        }
        if (meta.contains("eigenvalues")) summary["eigenvalues"] = meta["eigenvalues"];
    }
    if (best_energy < std::numeric_limits<double>::infinity()) {
        summary["best_energy"] = best_energy;
    }
    if (!mipt_entropy.empty()) summary["mipt_entropy"] = mipt_entropy;

    auto f = open_out(d / "summary.json");
    f << summary.dump(2) << "\n";
    return summary;
}

}  // namespace qforge
