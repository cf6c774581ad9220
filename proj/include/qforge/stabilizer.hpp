#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qforge/rng.hpp"

namespace qforge {

// Aaronson-Gottesman tableau with destabilizer bookkeeping. Rows 0..n-1 are
// destabilizers, rows n..2n-1 stabilizers; X/Z bits are packed into 64-bit
// words so GF(2) rank and row sums run word-at-a-time.
class StabilizerTableau {
public:
    explicit StabilizerTableau(int n);

    int num_qubits() const { return n_; }

    void apply_h(int a);
    void apply_s(int a);
    void apply_x(int a);
    void apply_z(int a);
    void apply_cx(int c, int t);
    void apply_cz(int a, int b);
    // by name, for generic circuit replay
    void apply_clifford(const std::string& gate, const std::vector<int>& wires);

    // uniformly random element of the two-qubit Clifford group on (i, j)
    void random_two_qubit_clifford(int i, int j, RngStream& rng);

    struct MeasureResult {
        int outcome;
        bool deterministic;
    };
    MeasureResult measure(int wire, RngStream& rng);
    // forced variant for cross-engine trajectory replay; only valid when the
    // outcome is random (deterministic outcomes ignore `forced`)
    MeasureResult measure_forced(int wire, int forced);

    // entanglement entropy in bits: GF(2) rank of the clipped stabilizer
    // block minus subsystem size (always a non-negative integer)
    int entanglement_entropy(const std::vector<int>& subsystem) const;

    // diagnostics: full 2n-column generator matrix rank (should equal n)
    int stabilizer_rank() const;

    bool x_bit(int row, int col) const;
    bool z_bit(int row, int col) const;
    bool sign_bit(int row) const;

private:
    void rowsum(int h, int i);
    MeasureResult measure_impl(int wire, RngStream* rng, int forced);

    int n_;
    int words_;
    // per row: words_ x-words then words_ z-words; 2n+1 rows (last is scratch)
    std::vector<std::uint64_t> xbits_;
    std::vector<std::uint64_t> zbits_;
    std::vector<std::uint8_t> phase_;

    std::uint64_t* xw(int row) { return &xbits_[static_cast<std::size_t>(row) * words_]; }
    std::uint64_t* zw(int row) { return &zbits_[static_cast<std::size_t>(row) * words_]; }
    const std::uint64_t* xw(int row) const {
        return &xbits_[static_cast<std::size_t>(row) * words_];
    }
    const std::uint64_t* zw(int row) const {
        return &zbits_[static_cast<std::size_t>(row) * words_];
    }
};

}  // namespace qforge
