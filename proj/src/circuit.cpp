#include "qforge/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "qforge/numerics.hpp"

namespace qforge {

std::string gate_name(Gate g) {
    switch (g) {
        case Gate::h: return "h";
        case Gate::x: return "x";
        case Gate::y: return "y";
        case Gate::z: return "z";
        case Gate::s: return "s";
        case Gate::rx: return "rx";
        case Gate::ry: return "ry";
        case Gate::rz: return "rz";
        case Gate::rzz: return "rzz";
        case Gate::cx: return "cx";
        case Gate::cz: return "cz";
        case Gate::su4: return "su4";
        case Gate::csum: return "csum";
        case Gate::subspace_ry: return "subspace_ry";
        case Gate::subspace_rz: return "subspace_rz";
        case Gate::unitary: return "unitary";
    }
    return "?";
}

namespace {

Gate gate_from_name(const std::string& s) {
    static const std::pair<const char*, Gate> table[] = {
        {"h", Gate::h}, {"x", Gate::x}, {"y", Gate::y}, {"z", Gate::z}, {"s", Gate::s},
        {"rx", Gate::rx}, {"ry", Gate::ry}, {"rz", Gate::rz}, {"rzz", Gate::rzz},
        {"cx", Gate::cx}, {"cz", Gate::cz}, {"su4", Gate::su4}, {"csum", Gate::csum},
        {"subspace_ry", Gate::subspace_ry}, {"subspace_rz", Gate::subspace_rz},
        {"unitary", Gate::unitary}};
    for (const auto& [name, g] : table) {
        if (s == name) return g;
    }
    throw std::invalid_argument("unknown gate name: " + s);
}

std::int64_t ipow(std::int64_t b, int e) {
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

bool qubit_only(Gate g) {
    switch (g) {
        case Gate::h: case Gate::x: case Gate::y: case Gate::z: case Gate::s:
        case Gate::rx: case Gate::ry: case Gate::rz: case Gate::rzz:
        case Gate::cx: case Gate::cz: case Gate::su4:
            return true;
        default:
            return false;
    }
}

}  // namespace

StateVector StateVector::zero_state(int n, int d) {
    StateVector psi;
    psi.n = n;
    psi.d = d;
    psi.amps = ComplexVector::Zero(ipow(d, n));
    psi.amps[0] = 1.0;
    return psi;
}

void apply_local_unitary(StateVector& psi, const ComplexMatrix& u,
                         const std::vector<int>& wires) {
    const int k = static_cast<int>(wires.size());
    const std::int64_t d = psi.d;
    const std::int64_t dk = ipow(d, k);
    require(u.rows() == dk && u.cols() == dk, "apply_local_unitary: wrong gate size");
    for (int w : wires) require(w >= 0 && w < psi.n, "apply_local_unitary: wire out of range");

    std::vector<std::int64_t> stride(psi.n);
    for (int i = 0; i < psi.n; ++i) stride[i] = ipow(d, psi.n - 1 - i);

    // diagonal gates scale amplitudes in place, no gather/scatter
    if (d == 2 && k <= 8) {
        bool diagonal = true;
        for (std::int64_t r = 0; r < dk && diagonal; ++r)
            for (std::int64_t c = 0; c < dk && diagonal; ++c)
                if (r != c && u(r, c) != cplx(0.0)) diagonal = false;
        if (diagonal) {
            const std::int64_t dim = psi.dim();
            std::int64_t wire_stride[8];
            for (int i = 0; i < k; ++i) wire_stride[i] = stride[wires[i]];
            cplx* a = psi.amps.data();
            for (std::int64_t idx = 0; idx < dim; ++idx) {
                std::int64_t loc = 0;
                for (int i = 0; i < k; ++i)
                    loc = (loc << 1) | ((idx / wire_stride[i]) & 1);
                a[idx] *= u(loc, loc);
            }
            return;
        }
    }
    if (d == 2 && k == 1) {
        const std::int64_t s = stride[wires[0]];
        const cplx u00 = u(0, 0), u01 = u(0, 1), u10 = u(1, 0), u11 = u(1, 1);
        cplx* a = psi.amps.data();
        const std::int64_t dim = psi.dim();
        for (std::int64_t hi = 0; hi < dim; hi += 2 * s) {
            for (std::int64_t lo = hi; lo < hi + s; ++lo) {
                cplx a0 = a[lo], a1 = a[lo + s];
                a[lo] = u00 * a0 + u01 * a1;
                a[lo + s] = u10 * a0 + u11 * a1;
            }
        }
        return;
    }
    if (d == 2 && k == 2) {
        const std::int64_t s0 = stride[wires[0]], s1 = stride[wires[1]];
        cplx m[4][4];
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) m[r][c] = u(r, c);
        cplx* a = psi.amps.data();
        const std::int64_t dim = psi.dim();
        const std::int64_t hibit = std::max(s0, s1), lobit = std::min(s0, s1);
        for (std::int64_t b0 = 0; b0 < dim; b0 += 2 * hibit) {
            for (std::int64_t b1 = b0; b1 < b0 + hibit; b1 += 2 * lobit) {
                for (std::int64_t base = b1; base < b1 + lobit; ++base) {
                    cplx v[4] = {a[base], a[base + s1], a[base + s0],
                                 a[base + s0 + s1]};
                    for (int r = 0; r < 4; ++r) {
                        a[base + (r >> 1) * s0 + (r & 1) * s1] =
                            m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2] +
                            m[r][3] * v[3];
                    }
                }
            }
        }
        return;
    }

    // offsets of the d^k local basis states (wires[0] most significant)
    std::vector<std::int64_t> offs(dk);
    for (std::int64_t j = 0; j < dk; ++j) {
        std::int64_t jj = j, off = 0;
        for (int i = k - 1; i >= 0; --i) {
            off += (jj % d) * stride[wires[i]];
            jj /= d;
        }
        offs[j] = off;
    }

    std::vector<std::int64_t> env_stride;
    for (int i = 0; i < psi.n; ++i) {
        if (std::find(wires.begin(), wires.end(), i) == wires.end())
            env_stride.push_back(stride[i]);
    }

    const std::int64_t outer = psi.dim() / dk;
    ComplexVector in(dk), out(dk);
    for (std::int64_t t = 0; t < outer; ++t) {
        std::int64_t base = 0, tt = t;
        for (std::int64_t es : env_stride) {
            base += (tt % d) * es;
            tt /= d;
        }
        for (std::int64_t j = 0; j < dk; ++j) in[j] = psi.amps[base + offs[j]];
        out.noalias() = u * in;
        for (std::int64_t j = 0; j < dk; ++j) psi.amps[base + offs[j]] = out[j];
    }
}

Circuit& Circuit::gate(Gate g, std::vector<int> wires, std::vector<double> params) {
    for (int w : wires) require(w >= 0 && w < n, "Circuit: wire out of range");
    for (std::size_t a = 0; a < wires.size(); ++a)
        for (std::size_t b = a + 1; b < wires.size(); ++b)
            require(wires[a] != wires[b], "Circuit: duplicate wires");
    for (double p : params) require(std::isfinite(p), "Circuit: non-finite parameter");
    ops.push_back({g, std::move(wires), std::move(params), {}});
    return *this;
}

Circuit& Circuit::su4(int a, int b, const std::vector<double>& theta) {
    require(theta.size() == 15, "su4: needs 15 parameters");
    return gate(Gate::su4, {a, b}, theta);
}

Circuit& Circuit::unitary(std::vector<int> wires, const ComplexMatrix& u) {
    ComplexMatrix check = u.adjoint() * u;
    require((check - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() < 1e-10,
            "unitary: matrix is not unitary");
    gate(Gate::unitary, wires, {});
    ops.back().matrix = u;
    return *this;
}

ComplexMatrix gate_matrix(const GateInstruction& instr, int d) {
    if (qubit_only(instr.name))
        require(d == 2, "gate_matrix: qubit-only gate in a qudit circuit");
    const double isq = 1.0 / std::sqrt(2.0);
    const cplx I(0.0, 1.0);
    static const ComplexMatrix px = (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished();
    static const ComplexMatrix py =
        (ComplexMatrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished();
    static const ComplexMatrix pz = (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished();

    switch (instr.name) {
        case Gate::h:
            return (ComplexMatrix(2, 2) << isq, isq, isq, -isq).finished();
        case Gate::x: return px;
        case Gate::y: return py;
        case Gate::z: return pz;
        case Gate::s:
            return (ComplexMatrix(2, 2) << 1, 0, 0, I).finished();
        case Gate::rx: {
            double t = instr.params.at(0);
            cplx c = std::cos(0.5 * t), s = cplx(0.0, -std::sin(0.5 * t));
            return (ComplexMatrix(2, 2) << c, s, s, c).finished();
        }
        case Gate::ry: {
            double t = instr.params.at(0);
            double c = std::cos(0.5 * t), s = std::sin(0.5 * t);
            return (ComplexMatrix(2, 2) << c, -s, s, c).finished();
        }
        case Gate::rz: {
            double t = instr.params.at(0);
            ComplexMatrix m = ComplexMatrix::Zero(2, 2);
            m(0, 0) = std::polar(1.0, -0.5 * t);
            m(1, 1) = std::polar(1.0, 0.5 * t);
            return m;
        }
        case Gate::rzz: {
            double t = instr.params.at(0);
            ComplexMatrix m = ComplexMatrix::Zero(4, 4);
            cplx em = std::polar(1.0, -0.5 * t), ep = std::polar(1.0, 0.5 * t);
            m(0, 0) = em; m(1, 1) = ep; m(2, 2) = ep; m(3, 3) = em;
            return m;
        }
        case Gate::cx: {
            ComplexMatrix m = ComplexMatrix::Zero(4, 4);
            m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
            return m;
        }
        case Gate::cz: {
            ComplexMatrix m = ComplexMatrix::Identity(4, 4);
            m(3, 3) = -1.0;
            return m;
        }
        case Gate::su4: {
            // exp(-i/2 sum theta_k P_k) over two-qubit Pauli words in
            // lexicographic code order, (0,0) excluded
            require(instr.params.size() == 15, "su4: needs 15 parameters");
            static const ComplexMatrix single[4] = {ComplexMatrix::Identity(2, 2), px, py, pz};
            ComplexMatrix gen = ComplexMatrix::Zero(4, 4);
            int k = 0;
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    if (a == 0 && b == 0) continue;
                    ComplexMatrix word(4, 4);
                    for (int r = 0; r < 2; ++r)
                        for (int c = 0; c < 2; ++c)
                            word.block(r * 2, c * 2, 2, 2) = single[a](r, c) * single[b];
                    gen += instr.params[k++] * word;
                }
            }
            return expm_dense(cplx(0.0, -0.5) * gen);
        }
        case Gate::csum: {
            ComplexMatrix m = ComplexMatrix::Zero(d * d, d * d);
            for (int x = 0; x < d; ++x)
                for (int y = 0; y < d; ++y) m(x * d + (x + y) % d, x * d + y) = 1.0;
            return m;
        }
        case Gate::subspace_ry:
        case Gate::subspace_rz: {
            double t = instr.params.at(0);
            int j = static_cast<int>(instr.params.at(1));
            int k = static_cast<int>(instr.params.at(2));
            require(j != k, "subspace rotation: j must differ from k");
            require(j >= 0 && j < d && k >= 0 && k < d, "subspace rotation: level out of range");
            ComplexMatrix m = ComplexMatrix::Identity(d, d);
            if (instr.name == Gate::subspace_ry) {
                m(j, j) = std::cos(0.5 * t);
                m(k, k) = std::cos(0.5 * t);
                m(j, k) = -std::sin(0.5 * t);
                m(k, j) = std::sin(0.5 * t);
            } else {
                m(j, j) = std::polar(1.0, -0.5 * t);
                m(k, k) = std::polar(1.0, 0.5 * t);
            }
            return m;
        }
        case Gate::unitary:
            return instr.matrix;
    }
    throw std::logic_error("gate_matrix: unreachable");
}

StateVector run(const Circuit& c, std::size_t memory_guard_log2) {
    double dim = std::pow(static_cast<double>(c.d), c.n);
    require(dim <= std::pow(2.0, static_cast<double>(memory_guard_log2)),
            "run: state dimension exceeds memory guard");
    StateVector psi = StateVector::zero_state(c.n, c.d);
    if (c.initial_state) {
        require(c.initial_state->size() == psi.dim(), "run: initial state size mismatch");
        psi.amps = *c.initial_state;
    }
    for (const auto& instr : c.ops) {
        apply_local_unitary(psi, gate_matrix(instr, c.d), instr.wires);
    }
    return psi;
}

cplx expectation_pauli(const StateVector& psi, const PauliSum& obs) {
    require(psi.d == 2, "expectation_pauli: qubits only");
    require(obs.n == psi.n, "expectation_pauli: size mismatch");
    static const cplx ipowt[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const std::int64_t dim = psi.dim();
    cplx acc = 0.0;
    for (const auto& term : obs.terms) {
        std::uint64_t flip = 0, zmask = 0;
        int ycount = 0;
        for (int i = 0; i < psi.n; ++i) {
            std::uint64_t bit = 1ULL << (psi.n - 1 - i);
            switch (term.codes[i]) {
                case 1: flip |= bit; break;
                case 2: flip |= bit; zmask |= bit; ++ycount; break;
                case 3: zmask |= bit; break;
                default: break;
            }
        }
        cplx base = term.weight * ipowt[ycount & 3];
        cplx sum = 0.0;
        for (std::int64_t s = 0; s < dim; ++s) {
            cplx v = base;
            if (__builtin_parityll(static_cast<std::uint64_t>(s) & zmask)) v = -v;
            sum += std::conj(psi.amps[s ^ static_cast<std::int64_t>(flip)]) * v * psi.amps[s];
        }
        acc += sum;
    }
    return acc;
}

cplx amplitude(const StateVector& psi, const std::vector<int>& digits) {
    require(static_cast<int>(digits.size()) == psi.n, "amplitude: wrong length");
    std::int64_t idx = 0;
    for (int dgt : digits) {
        require(dgt >= 0 && dgt < psi.d, "amplitude: digit out of range");
        idx = idx * psi.d + dgt;
    }
    return psi.amps[idx];
}

namespace {

std::string index_to_string(std::int64_t idx, int n, int d) {
    std::string s(n, '0');
    for (int i = n - 1; i >= 0; --i) {
        s[i] = static_cast<char>('0' + idx % d);
        idx /= d;
    }
    return s;
}

}  // namespace

std::map<std::string, std::int64_t> sample(const StateVector& psi, std::int64_t shots,
                                           RngStream& rng) {
    const std::int64_t dim = psi.dim();
    std::vector<double> cdf(dim);
    double acc = 0.0;
    for (std::int64_t i = 0; i < dim; ++i) {
        acc += std::norm(psi.amps[i]);
        cdf[i] = acc;
    }
    std::map<std::string, std::int64_t> counts;
    for (std::int64_t s = 0; s < shots; ++s) {
        double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::int64_t idx = std::min<std::int64_t>(it - cdf.begin(), dim - 1);
        ++counts[index_to_string(idx, psi.n, psi.d)];
    }
    return counts;
}

MeasureResult measure_collapse(StateVector& psi, int wire, RngStream& rng, int forced) {
    require(wire >= 0 && wire < psi.n, "measure_collapse: wire out of range");
    const std::int64_t d = psi.d;
    const std::int64_t stride = ipow(d, psi.n - 1 - wire);
    const std::int64_t dim = psi.dim();

    std::vector<double> probs(d, 0.0);
    for (std::int64_t i = 0; i < dim; ++i) {
        probs[(i / stride) % d] += std::norm(psi.amps[i]);
    }

    int outcome;
    if (forced >= 0) {
        require(forced < d, "measure_collapse: forced outcome out of range");
        if (probs[forced] <= 1e-14) {
            throw std::runtime_error("measure_collapse: forced outcome has zero probability");
        }
        outcome = forced;
    } else {
        double u = rng.uniform();
        double acc = 0.0;
        outcome = static_cast<int>(d) - 1;
        for (int o = 0; o < d; ++o) {
            acc += probs[o];
            if (u < acc) { outcome = o; break; }
        }
    }

    const double p = probs[outcome];
    const double scale = 1.0 / std::sqrt(p);
    for (std::int64_t i = 0; i < dim; ++i) {
        if ((i / stride) % d == outcome) {
            psi.amps[i] *= scale;
        } else {
            psi.amps[i] = 0.0;
        }
    }
    return {outcome, p};
}

double subsystem_entropy(const StateVector& psi, const std::vector<int>& keep) {
    require(!keep.empty(), "subsystem_entropy: empty subsystem");
    require(static_cast<int>(keep.size()) < psi.n, "subsystem_entropy: full subsystem");
    const std::int64_t d = psi.d;
    const std::int64_t dk = ipow(d, static_cast<int>(keep.size()));
    const std::int64_t de = psi.dim() / dk;

    std::vector<std::int64_t> stride(psi.n);
    for (int i = 0; i < psi.n; ++i) stride[i] = ipow(d, psi.n - 1 - i);

    ComplexMatrix m(dk, de);
    std::vector<int> env;
    for (int i = 0; i < psi.n; ++i) {
        if (std::find(keep.begin(), keep.end(), i) == keep.end()) env.push_back(i);
    }
    for (std::int64_t a = 0; a < dk; ++a) {
        std::int64_t base = 0, aa = a;
        for (int i = static_cast<int>(keep.size()) - 1; i >= 0; --i) {
            base += (aa % d) * stride[keep[i]];
            aa /= d;
        }
        for (std::int64_t e = 0; e < de; ++e) {
            std::int64_t idx = base, ee = e;
            for (int i = static_cast<int>(env.size()) - 1; i >= 0; --i) {
                idx += (ee % d) * stride[env[i]];
                ee /= d;
            }
            m(a, e) = psi.amps[idx];
        }
    }

    Eigen::JacobiSVD<ComplexMatrix> svd(m);
    double ent = 0.0;
    for (int i = 0; i < svd.singularValues().size(); ++i) {
        double p = svd.singularValues()[i];
        p = std::clamp(p * p, 0.0, 1.0);
        if (p > 1e-15) ent -= p * std::log2(p);
    }
    return std::max(ent, 0.0);
}

ComplexMatrix haar_su4(RngStream& rng) {
    ComplexMatrix g(4, 4);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g(r, c) = cplx(rng.normal(), rng.normal());
    Eigen::HouseholderQR<ComplexMatrix> qr(g);
    ComplexMatrix q = qr.householderQ();
    ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < 4; ++i) {
        cplx diag = r(i, i);
        cplx phase = (std::abs(diag) > 0.0) ? diag / std::abs(diag) : cplx(1.0, 0.0);
        q.col(i) *= phase;
    }
    cplx det = q.determinant();
    double arg = std::arg(det);
    q *= std::polar(1.0, -arg / 4.0);
    return q;
}

std::string to_openqasm(const Circuit& c) {
    require(c.d == 2, "to_openqasm: qubit circuits only");
    std::ostringstream out;
    out << "OPENQASM 2.0;\n";
    out << "include \"qelib1.inc\";\n";
    out << "qreg q[" << c.n << "];\n";
    for (std::size_t i = 0; i < c.ops.size(); ++i) {
        const auto& op = c.ops[i];
        auto wire = [&](int k) { return "q[" + std::to_string(op.wires[k]) + "]"; };
        switch (op.name) {
            case Gate::h: case Gate::x: case Gate::y: case Gate::z: case Gate::s:
                out << gate_name(op.name) << " " << wire(0) << ";\n";
                break;
            case Gate::rx: case Gate::ry: case Gate::rz:
                out << gate_name(op.name) << "(" << op.params[0] << ") " << wire(0) << ";\n";
                break;
            case Gate::cx: case Gate::cz:
                out << gate_name(op.name) << " " << wire(0) << "," << wire(1) << ";\n";
                break;
            case Gate::rzz:
                // exp(-i t/2 Z Z) = cx; rz(t); cx
                out << "cx " << wire(0) << "," << wire(1) << ";\n";
                out << "rz(" << op.params[0] << ") " << wire(1) << ";\n";
                out << "cx " << wire(0) << "," << wire(1) << ";\n";
                break;
            default:
                throw std::invalid_argument("to_openqasm: unsupported gate '" +
                                            gate_name(op.name) + "' at instruction " +
                                            std::to_string(i));
        }
    }
    return out.str();
}

std::string Circuit::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["d"] = d;
    j["ops"] = nlohmann::json::array();
    for (const auto& op : ops) {
        nlohmann::json o;
        o["name"] = gate_name(op.name);
        o["wires"] = op.wires;
        o["params"] = op.params;
        if (op.name == Gate::unitary) {
            std::vector<double> re, im;
            for (int r = 0; r < op.matrix.rows(); ++r)
                for (int c = 0; c < op.matrix.cols(); ++c) {
                    re.push_back(op.matrix(r, c).real());
                    im.push_back(op.matrix(r, c).imag());
                }
            o["rows"] = op.matrix.rows();
            o["re"] = re;
            o["im"] = im;
        }
        j["ops"].push_back(o);
    }
    return j.dump();
}

Circuit Circuit::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Circuit c(j.at("n").get<int>(), j.value("d", 2));
    for (const auto& o : j.at("ops")) {
        Gate g = gate_from_name(o.at("name").get<std::string>());
        auto wires = o.at("wires").get<std::vector<int>>();
        auto params = o.at("params").get<std::vector<double>>();
        if (g == Gate::unitary) {
            int rows = o.at("rows").get<int>();
            auto re = o.at("re").get<std::vector<double>>();
            auto im = o.at("im").get<std::vector<double>>();
            ComplexMatrix m(rows, rows);
            for (int r = 0; r < rows; ++r)
                for (int col = 0; col < rows; ++col)
                    m(r, col) = cplx(re[r * rows + col], im[r * rows + col]);
            c.unitary(wires, m);
        } else {
            c.gate(g, wires, params);
        }
    }
    return c;
}

}  // namespace qforge
