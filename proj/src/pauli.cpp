#include "qforge/pauli.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "qforge/parallel.hpp"

namespace qforge {

void PauliSum::add(cplx weight, const std::vector<int>& codes) {
    require(static_cast<int>(codes.size()) == n, "PauliSum::add: wrong code length");
    for (int c : codes) require(c >= 0 && c <= 3, "PauliSum::add: code out of range");
    require(std::isfinite(weight.real()) && std::isfinite(weight.imag()),
            "PauliSum::add: non-finite weight");
    terms.push_back({weight, codes});
}

void PauliSum::add_word(cplx weight, const std::vector<std::pair<int, int>>& site_codes) {
    std::vector<int> codes(n, 0);
    for (const auto& [site, code] : site_codes) {
        require(site >= 0 && site < n, "PauliSum::add_word: site out of range");
        codes[site] = code;
    }
    add(weight, codes);
}

std::string PauliSum::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["terms"] = nlohmann::json::array();
    for (const auto& t : terms) {
        j["terms"].push_back({{"w_re", t.weight.real()},
                              {"w_im", t.weight.imag()},
                              {"codes", t.codes}});
    }
    return j.dump();
}

PauliSum PauliSum::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    PauliSum h;
    h.n = j.at("n").get<int>();
    for (const auto& t : j.at("terms")) {
        h.add(cplx(t.at("w_re").get<double>(), t.at("w_im").get<double>()),
              t.at("codes").get<std::vector<int>>());
    }
    return h;
}

namespace {

struct TermAction {
    std::uint64_t flip_mask = 0;  // X/Y sites flip these bits
    std::uint64_t z_mask = 0;     // Z/Y sites contribute (-1)^bit
    int y_count = 0;
    cplx weight;
};

TermAction compile_term(const PauliTerm& t, int n) {
    TermAction a;
    a.weight = t.weight;
    for (int i = 0; i < n; ++i) {
        std::uint64_t bit = 1ULL << (n - 1 - i);  // site 0 most significant
        switch (t.codes[i]) {
            case 0: break;
            case 1: a.flip_mask |= bit; break;
            case 2: a.flip_mask |= bit; a.z_mask |= bit; ++a.y_count; break;
            case 3: a.z_mask |= bit; break;
        }
    }
    return a;
}

// matrix element <row| P |col> with col = row ^ flip_mask:
//   value = weight * i^{y_count} * (-1)^{popcount(col & z_mask)}
// (Y|0> = i|1>, Y|1> = -i|0>; Z|b> = (-1)^b |b>)
cplx term_value(const TermAction& a, std::uint64_t col) {
    static const cplx ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    cplx v = a.weight * ipow[a.y_count & 3];
    // for Y sites: bit taken from col; acting phase i appears per Y, sign from col bit
    if (__builtin_parityll(col & a.z_mask)) v = -v;
    return v;
}

}  // namespace

SparseCOO pauli_sum_to_coo(const PauliSum& h, int n_guard, std::size_t workers) {
    require(h.n >= 1, "pauli_sum_to_coo: empty system");
    require(h.n <= n_guard, "pauli_sum_to_coo: qubit count exceeds memory guard");

    const std::uint64_t dim = 1ULL << h.n;
    std::vector<TermAction> actions;
    actions.reserve(h.terms.size());
    for (const auto& t : h.terms) actions.push_back(compile_term(t, h.n));

    SparseCOO out;
    out.dim = static_cast<std::int64_t>(dim);
    if (actions.empty()) return out;

    const std::uint64_t block = std::max<std::uint64_t>(1024, dim / std::max<std::size_t>(workers * 8, 1));
    const std::size_t nblocks = static_cast<std::size_t>((dim + block - 1) / block);

    struct Buf {
        std::vector<std::int64_t> rows, cols;
        std::vector<cplx> vals;
    };
    std::vector<Buf> bufs(nblocks);

    parallel_for(nblocks, workers, [&](std::size_t bi) {
        Buf& buf = bufs[bi];
        const std::uint64_t lo = bi * block;
        const std::uint64_t hi = std::min(dim, lo + block);
        std::vector<std::pair<std::uint64_t, cplx>> entries;
        for (std::uint64_t row = lo; row < hi; ++row) {
            entries.clear();
            for (const auto& a : actions) {
                std::uint64_t col = row ^ a.flip_mask;
                entries.push_back({col, term_value(a, col)});
            }
            std::sort(entries.begin(), entries.end(),
                      [](const auto& x, const auto& y) { return x.first < y.first; });
            std::size_t k = 0;
            while (k < entries.size()) {
                cplx v = entries[k].second;
                std::size_t k2 = k + 1;
                while (k2 < entries.size() && entries[k2].first == entries[k].first) {
                    v += entries[k2].second;
                    ++k2;
                }
                if (v != cplx(0.0, 0.0)) {
                    buf.rows.push_back(static_cast<std::int64_t>(row));
                    buf.cols.push_back(static_cast<std::int64_t>(entries[k].first));
                    buf.vals.push_back(v);
                }
                k = k2;
            }
        }
    });

    std::size_t total = 0;
    for (const auto& b : bufs) total += b.vals.size();
    out.rows.reserve(total);
    out.cols.reserve(total);
    out.vals.reserve(total);
    for (const auto& b : bufs) {
        out.rows.insert(out.rows.end(), b.rows.begin(), b.rows.end());
        out.cols.insert(out.cols.end(), b.cols.begin(), b.cols.end());
        out.vals.insert(out.vals.end(), b.vals.begin(), b.vals.end());
    }
    return out;  // already canonical: rows ascending per block, cols sorted per row
}

ComplexMatrix pauli_sum_to_dense(const PauliSum& h) {
    require(h.n <= 14, "pauli_sum_to_dense: too large");
    static const ComplexMatrix paulis[4] = {
        (ComplexMatrix(2, 2) << 1, 0, 0, 1).finished(),
        (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished(),
        (ComplexMatrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
        (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished()};
    const std::int64_t dim = 1LL << h.n;
    ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
    for (const auto& t : h.terms) {
        // fold from the last site so site 0 ends up most significant
        ComplexMatrix acc = ComplexMatrix::Identity(1, 1);
        for (int i = h.n - 1; i >= 0; --i) {
            const ComplexMatrix& p = paulis[t.codes[i]];
            ComplexMatrix next(acc.rows() * 2, acc.cols() * 2);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    next.block(r * acc.rows(), c * acc.cols(), acc.rows(), acc.cols()) =
                        p(r, c) * acc;
            acc = std::move(next);
        }
        total += t.weight * acc;
    }
    return total;
}

PauliSum tfim_terms(const Lattice& l, double g) {
    PauliSum h;
    h.n = static_cast<int>(l.num_sites());
    auto it = l.edges_by_order.find(1);
    require(it != l.edges_by_order.end(), "tfim_terms: lattice has no order-1 edges");
    for (const auto& [i, j] : it->second) h.add_word(-1.0, {{i, 3}, {j, 3}});
    for (int i = 0; i < h.n; ++i) h.add_word(-g, {{i, 1}});
    return h;
}

PauliSum heisenberg_terms(const Lattice& l, double jx, double jy, double jz) {
    PauliSum h;
    h.n = static_cast<int>(l.num_sites());
    auto it = l.edges_by_order.find(1);
    require(it != l.edges_by_order.end(), "heisenberg_terms: lattice has no order-1 edges");
    const double js[3] = {jx, jy, jz};
    for (const auto& [i, j] : it->second) {
        for (int axis = 0; axis < 3; ++axis) {
            if (js[axis] != 0.0) h.add_word(js[axis], {{i, axis + 1}, {j, axis + 1}});
        }
    }
    return h;
}

PauliSum rydberg_terms(const Lattice& l, double omega, double delta, double c6,
                       double cutoff_radius) {
    require(l.num_sites() >= 2, "rydberg_terms: need at least 2 sites");
    PauliSum h;
    h.n = static_cast<int>(l.num_sites());
    std::vector<int> identity(h.n, 0);
    double const_acc = 0.0;

    // drive and detuning: omega/2 X_i - delta n_i with n_i = (1 - Z_i)/2
    for (int i = 0; i < h.n; ++i) {
        if (omega != 0.0) h.add_word(0.5 * omega, {{i, 1}});
        if (delta != 0.0) {
            const_acc += -0.5 * delta;
            h.add_word(0.5 * delta, {{i, 3}});
        }
    }

    // van der Waals tails: V_ij n_i n_j = V/4 (I - Z_i - Z_j + Z_i Z_j)
    if (c6 != 0.0) {
        for (int i = 0; i < h.n; ++i) {
            for (int j = i + 1; j < h.n; ++j) {
                double r = l.distance(i, j);
                require(r > 0.0, "rydberg_terms: coincident sites");
                if (cutoff_radius > 0.0 && r > cutoff_radius) continue;
                double v = c6 / std::pow(r, 6.0);
                const_acc += 0.25 * v;
                h.add_word(-0.25 * v, {{i, 3}});
                h.add_word(-0.25 * v, {{j, 3}});
                h.add_word(0.25 * v, {{i, 3}, {j, 3}});
            }
        }
    }
    if (const_acc != 0.0) h.add(const_acc, identity);
    return h;
}

ComplexMatrix clock_z(int d) {
    require(d >= 2, "clock_z: d must be >= 2");
    ComplexMatrix z = ComplexMatrix::Zero(d, d);
    const double w = 2.0 * M_PI / static_cast<double>(d);
    for (int k = 0; k < d; ++k) z(k, k) = std::polar(1.0, w * k);
    return z;
}

ComplexMatrix shift_x(int d) {
    require(d >= 2, "shift_x: d must be >= 2");
    ComplexMatrix x = ComplexMatrix::Zero(d, d);
    for (int k = 0; k < d; ++k) x((k + 1) % d, k) = 1.0;
    return x;
}

QuditOperatorSum clock_model(int n, int d, double j, double h) {
    require(d >= 2, "clock_model: d must be >= 2");
    require(n >= 2, "clock_model: n must be >= 2");
    QuditOperatorSum sum;
    sum.n = n;
    sum.d = d;
    ComplexMatrix z = clock_z(d);
    ComplexMatrix zdag = z.adjoint();
    ComplexMatrix xh = shift_x(d) + shift_x(d).adjoint();
    for (int i = 0; i + 1 < n; ++i) {
        sum.terms.push_back({-j, {{i, z}, {i + 1, zdag}}});
        sum.terms.push_back({-j, {{i, zdag}, {i + 1, z}}});
    }
    for (int i = 0; i < n; ++i) {
        sum.terms.push_back({-h, {{i, xh}}});
    }
    return sum;
}

ComplexMatrix qudit_sum_to_dense(const QuditOperatorSum& h) {
    double dim_check = std::pow(static_cast<double>(h.d), h.n);
    require(dim_check <= 16384.0, "qudit_sum_to_dense: dimension exceeds guard");
    const std::int64_t dim = static_cast<std::int64_t>(dim_check + 0.5);
    ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
    ComplexMatrix eye = ComplexMatrix::Identity(h.d, h.d);
    for (const auto& t : h.terms) {
        // fold from the last site so site 0 ends up most significant
        ComplexMatrix acc = ComplexMatrix::Identity(1, 1);
        for (int i = h.n - 1; i >= 0; --i) {
            const ComplexMatrix* p = &eye;
            for (const auto& f : t.factors) {
                if (f.site == i) {
                    require(f.op.rows() == h.d && f.op.cols() == h.d,
                            "qudit_sum_to_dense: wrong local dimension");
                    p = &f.op;
                }
            }
            ComplexMatrix next(acc.rows() * h.d, acc.cols() * h.d);
            for (int r = 0; r < h.d; ++r)
                for (int c = 0; c < h.d; ++c)
                    next.block(r * acc.rows(), c * acc.cols(), acc.rows(), acc.cols()) =
                        (*p)(r, c) * acc;
            acc = std::move(next);
        }
        total += t.weight * acc;
    }
    return total;
}

}  // namespace qforge
