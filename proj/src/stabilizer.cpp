#include "qforge/stabilizer.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

#include "qforge/common.hpp"

namespace qforge {

StabilizerTableau::StabilizerTableau(int n) : n_(n) {
    require(n >= 1, "StabilizerTableau: need at least one qubit");
    words_ = (n + 63) / 64;
    const std::size_t rows = static_cast<std::size_t>(2 * n + 1);
    xbits_.assign(rows * words_, 0);
    zbits_.assign(rows * words_, 0);
    phase_.assign(rows, 0);
    // destabilizer i = X_i, stabilizer n+i = Z_i
    for (int i = 0; i < n; ++i) {
        xw(i)[i / 64] |= 1ULL << (i % 64);
        zw(n + i)[i / 64] |= 1ULL << (i % 64);
    }
}

bool StabilizerTableau::x_bit(int row, int col) const {
    return (xw(row)[col / 64] >> (col % 64)) & 1ULL;
}
bool StabilizerTableau::z_bit(int row, int col) const {
    return (zw(row)[col / 64] >> (col % 64)) & 1ULL;
}
bool StabilizerTableau::sign_bit(int row) const { return phase_[row]; }

void StabilizerTableau::apply_h(int a) {
    const int w = a / 64;
    const std::uint64_t bit = 1ULL << (a % 64);
    for (int r = 0; r < 2 * n_; ++r) {
        std::uint64_t x = xw(r)[w] & bit, z = zw(r)[w] & bit;
        if (x && z) phase_[r] ^= 1;
        xw(r)[w] ^= x ^ z;
        zw(r)[w] ^= x ^ z;
    }
}

void StabilizerTableau::apply_s(int a) {
    const int w = a / 64;
    const std::uint64_t bit = 1ULL << (a % 64);
    for (int r = 0; r < 2 * n_; ++r) {
        std::uint64_t x = xw(r)[w] & bit, z = zw(r)[w] & bit;
        if (x && z) phase_[r] ^= 1;
        zw(r)[w] ^= x;
    }
}

void StabilizerTableau::apply_x(int a) {
    const int w = a / 64;
    const std::uint64_t bit = 1ULL << (a % 64);
    for (int r = 0; r < 2 * n_; ++r) {
        if (zw(r)[w] & bit) phase_[r] ^= 1;
    }
}

void StabilizerTableau::apply_z(int a) {
    const int w = a / 64;
    const std::uint64_t bit = 1ULL << (a % 64);
    for (int r = 0; r < 2 * n_; ++r) {
        if (xw(r)[w] & bit) phase_[r] ^= 1;
    }
}

void StabilizerTableau::apply_cx(int c, int t) {
    require(c != t, "apply_cx: wires must differ");
    const int wc = c / 64, wt = t / 64;
    const std::uint64_t bc = 1ULL << (c % 64), bt = 1ULL << (t % 64);
    for (int r = 0; r < 2 * n_; ++r) {
        bool xc = xw(r)[wc] & bc, zc = zw(r)[wc] & bc;
        bool xt = xw(r)[wt] & bt, zt = zw(r)[wt] & bt;
        if (xc && zt && (xt == zc)) phase_[r] ^= 1;
        if (xc) xw(r)[wt] ^= bt;
        if (zt) zw(r)[wc] ^= bc;
    }
}

void StabilizerTableau::apply_cz(int a, int b) {
    apply_h(b);
    apply_cx(a, b);
    apply_h(b);
}

void StabilizerTableau::apply_clifford(const std::string& gate, const std::vector<int>& wires) {
    if (gate == "h") apply_h(wires.at(0));
    else if (gate == "s") apply_s(wires.at(0));
    else if (gate == "x") apply_x(wires.at(0));
    else if (gate == "z") apply_z(wires.at(0));
    else if (gate == "cx") apply_cx(wires.at(0), wires.at(1));
    else if (gate == "cz") apply_cz(wires.at(0), wires.at(1));
    else throw std::invalid_argument("apply_clifford: non-Clifford gate '" + gate + "'");
}

void StabilizerTableau::rowsum(int h, int i) {
    int carry = 2 * (phase_[h] + phase_[i]);
    for (int w = 0; w < words_; ++w) {
        std::uint64_t x1 = xw(i)[w], z1 = zw(i)[w];
        std::uint64_t x2 = xw(h)[w], z2 = zw(h)[w];
        std::uint64_t plus = (x1 & z1 & z2 & ~x2) | (x1 & ~z1 & z2 & x2) |
                             (~x1 & z1 & x2 & ~z2);
        std::uint64_t minus = (x1 & z1 & x2 & ~z2) | (x1 & ~z1 & z2 & ~x2) |
                              (~x1 & z1 & x2 & z2);
        carry += __builtin_popcountll(plus) - __builtin_popcountll(minus);
        xw(h)[w] ^= x1;
        zw(h)[w] ^= z1;
    }
    phase_[h] = ((carry % 4 + 4) % 4 == 2) ? 1 : 0;
}

StabilizerTableau::MeasureResult StabilizerTableau::measure(int wire, RngStream& rng) {
    return measure_impl(wire, &rng, -1);
}

StabilizerTableau::MeasureResult StabilizerTableau::measure_forced(int wire, int forced) {
    return measure_impl(wire, nullptr, forced);
}

StabilizerTableau::MeasureResult StabilizerTableau::measure_impl(int wire, RngStream* rng,
                                                                 int forced) {
    require(wire >= 0 && wire < n_, "measure: wire out of range");
    const int w = wire / 64;
    const std::uint64_t bit = 1ULL << (wire % 64);

    int p = -1;
    for (int r = n_; r < 2 * n_; ++r) {
        if (xw(r)[w] & bit) { p = r; break; }
    }

    if (p >= 0) {
        // random outcome
        for (int r = 0; r < 2 * n_; ++r) {
            if (r != p && (xw(r)[w] & bit)) rowsum(r, p);
        }
        // stabilizer row p becomes the destabilizer; fresh +/- Z_wire replaces it
        std::memcpy(xw(p - n_), xw(p), sizeof(std::uint64_t) * words_);
        std::memcpy(zw(p - n_), zw(p), sizeof(std::uint64_t) * words_);
        phase_[p - n_] = phase_[p];
        std::memset(xw(p), 0, sizeof(std::uint64_t) * words_);
        std::memset(zw(p), 0, sizeof(std::uint64_t) * words_);
        zw(p)[w] |= bit;
        int outcome = (forced >= 0) ? forced
                                    : static_cast<int>(rng->next_u64() & 1ULL);
        phase_[p] = static_cast<std::uint8_t>(outcome);
        return {outcome, false};
    }

    // deterministic: accumulate into the scratch row
    const int scratch = 2 * n_;
    std::memset(xw(scratch), 0, sizeof(std::uint64_t) * words_);
    std::memset(zw(scratch), 0, sizeof(std::uint64_t) * words_);
    phase_[scratch] = 0;
    for (int i = 0; i < n_; ++i) {
        if (xw(i)[w] & bit) rowsum(scratch, i + n_);
    }
    return {phase_[scratch], true};
}

int StabilizerTableau::entanglement_entropy(const std::vector<int>& subsystem) const {
    require(!subsystem.empty(), "entanglement_entropy: empty subsystem");
    require(static_cast<int>(subsystem.size()) < n_, "entanglement_entropy: full subsystem");

    // clip stabilizer rows to subsystem columns, packed as (x|z) pairs
    const int cols = static_cast<int>(subsystem.size());
    const int cw = (2 * cols + 63) / 64;
    std::vector<std::uint64_t> m(static_cast<std::size_t>(n_) * cw, 0);
    for (int r = 0; r < n_; ++r) {
        for (int c = 0; c < cols; ++c) {
            int q = subsystem[c];
            if (x_bit(n_ + r, q)) m[r * cw + (2 * c) / 64] |= 1ULL << ((2 * c) % 64);
            if (z_bit(n_ + r, q)) m[r * cw + (2 * c + 1) / 64] |= 1ULL << ((2 * c + 1) % 64);
        }
    }

    // GF(2) Gaussian elimination on packed rows
    int rank = 0;
    for (int col = 0; col < 2 * cols && rank < n_; ++col) {
        const int cwi = col / 64;
        const std::uint64_t cbit = 1ULL << (col % 64);
        int pivot = -1;
        for (int r = rank; r < n_; ++r) {
            if (m[r * cw + cwi] & cbit) { pivot = r; break; }
        }
        if (pivot < 0) continue;
        for (int k = 0; k < cw; ++k) std::swap(m[rank * cw + k], m[pivot * cw + k]);
        for (int r = 0; r < n_; ++r) {
            if (r != rank && (m[r * cw + cwi] & cbit)) {
                for (int k = 0; k < cw; ++k) m[r * cw + k] ^= m[rank * cw + k];
            }
        }
        ++rank;
    }
    return rank - cols;
}

int StabilizerTableau::stabilizer_rank() const {
    const int cw = (2 * n_ + 63) / 64;
    std::vector<std::uint64_t> m(static_cast<std::size_t>(n_) * cw, 0);
    for (int r = 0; r < n_; ++r) {
        for (int c = 0; c < n_; ++c) {
            if (x_bit(n_ + r, c)) m[r * cw + (2 * c) / 64] |= 1ULL << ((2 * c) % 64);
            if (z_bit(n_ + r, c)) m[r * cw + (2 * c + 1) / 64] |= 1ULL << ((2 * c + 1) % 64);
        }
    }
    int rank = 0;
    for (int col = 0; col < 2 * n_ && rank < n_; ++col) {
        const int cwi = col / 64;
        const std::uint64_t cbit = 1ULL << (col % 64);
        int pivot = -1;
        for (int r = rank; r < n_; ++r) {
            if (m[r * cw + cwi] & cbit) { pivot = r; break; }
        }
        if (pivot < 0) continue;
        for (int k = 0; k < cw; ++k) std::swap(m[rank * cw + k], m[pivot * cw + k]);
        for (int r = rank + 1; r < n_; ++r) {
            if (m[r * cw + cwi] & cbit) {
                for (int k = 0; k < cw; ++k) m[r * cw + k] ^= m[rank * cw + k];
            }
        }
        ++rank;
    }
    return rank;
}

// ---- uniform two-qubit Clifford sampling ----
//
// The symplectic group Sp(4, GF(2)) has 720 elements. We enumerate it once by
// BFS over the gate generators {h0, h1, s0, s1, cx01, cx10}, storing one gate
// word per element. A uniform Clifford is then a uniform symplectic element
// composed with a uniform Pauli layer (16 sign choices), giving all
// 720 * 16 = 11520 elements with equal weight.

namespace {

struct GateStep {
    int gate;  // 0=h, 1=s, 2=cx
    int a, b;
};

// symplectic action of a gate word on (x0, z0, x1, z1) basis columns,
// tracked with a tiny sign-free tableau: column k holds the image of the
// k-th basis Pauli as 4 bits
using Symp = std::array<std::uint8_t, 4>;

Symp symp_identity() { return {1, 2, 4, 8}; }

std::uint8_t apply_step_bits(const GateStep& g, std::uint8_t p) {
    // bit layout: 1=x0, 2=z0, 4=x1, 8=z1
    auto getx = [&](int q) { return (p >> (2 * q)) & 1; };
    auto getz = [&](int q) { return (p >> (2 * q + 1)) & 1; };
    auto setx = [&](int q, int v) {
        p = static_cast<std::uint8_t>((p & ~(1 << (2 * q))) | (v << (2 * q)));
    };
    auto setz = [&](int q, int v) {
        p = static_cast<std::uint8_t>((p & ~(1 << (2 * q + 1))) | (v << (2 * q + 1)));
    };
    if (g.gate == 0) {  // h
        int x = getx(g.a), z = getz(g.a);
        setx(g.a, z);
        setz(g.a, x);
    } else if (g.gate == 1) {  // s
        setz(g.a, getz(g.a) ^ getx(g.a));
    } else {  // cx
        setx(g.b, getx(g.b) ^ getx(g.a));
        setz(g.a, getz(g.a) ^ getz(g.b));
    }
    return p;
}

Symp apply_step(const GateStep& g, const Symp& s) {
    Symp out;
    for (int k = 0; k < 4; ++k) out[k] = apply_step_bits(g, s[k]);
    return out;
}

std::uint32_t symp_key(const Symp& s) {
    return static_cast<std::uint32_t>(s[0]) | (s[1] << 4) | (s[2] << 8) |
           (static_cast<std::uint32_t>(s[3]) << 12);
}

std::vector<std::vector<GateStep>> build_symplectic_words() {
    const GateStep gens[] = {{0, 0, 0}, {0, 1, 0}, {1, 0, 0},
                             {1, 1, 0}, {2, 0, 1}, {2, 1, 0}};
    std::map<std::uint32_t, std::vector<GateStep>> seen;
    std::vector<Symp> frontier{symp_identity()};
    seen[symp_key(symp_identity())] = {};
    while (!frontier.empty()) {
        std::vector<Symp> next;
        for (const Symp& s : frontier) {
            const auto& word = seen[symp_key(s)];
            for (const GateStep& g : gens) {
                Symp t = apply_step(g, s);
                auto key = symp_key(t);
                if (!seen.count(key)) {
                    auto w = word;
                    w.push_back(g);
                    seen[key] = std::move(w);
                    next.push_back(t);
                }
            }
        }
        frontier = std::move(next);
    }
    std::vector<std::vector<GateStep>> out;
    out.reserve(seen.size());
    for (auto& [key, word] : seen) out.push_back(std::move(word));
    return out;
}

const std::vector<std::vector<GateStep>>& symplectic_words() {
    static const std::vector<std::vector<GateStep>> table = [] {
        auto t = build_symplectic_words();
        if (t.size() != 720) {
            throw std::logic_error("two-qubit symplectic enumeration incomplete");
        }
        return t;
    }();
    return table;
}

}  // namespace

void StabilizerTableau::random_two_qubit_clifford(int i, int j, RngStream& rng) {
    require(i != j, "random_two_qubit_clifford: wires must differ");
    const auto& words = symplectic_words();
    const auto& word = words[rng.uniform_below(words.size())];
    const int map[2] = {i, j};
    for (const GateStep& g : word) {
        if (g.gate == 0) apply_h(map[g.a]);
        else if (g.gate == 1) apply_s(map[g.a]);
        else apply_cx(map[g.a], map[g.b]);
    }
    std::uint64_t bits = rng.next_u64();
    if (bits & 1) apply_x(i);
    if (bits & 2) apply_z(i);
    if (bits & 4) apply_x(j);
    if (bits & 8) apply_z(j);
}

}  // namespace qforge
