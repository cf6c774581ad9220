#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "helpers.hpp"
#include "qforge/shadows.hpp"

using namespace qforge;

namespace {

// exact expectation of the shadow estimator: average over all 3^n bases and
// all 2^n outcomes weighted by the exact Born probabilities
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

StateVector random_product_state(int n, RngStream& rng) {
    Circuit c(n);
    for (int q = 0; q < n; ++q) c.ry(q, rng.uniform() * M_PI).rz(q, rng.uniform() * M_PI);
    return run(c);
}

}  // namespace

TEST_CASE("dataset validation") {
    ShadowDataset ds;
    ds.n = 2;
    ds.bases = {{1, 3}};
    ds.outcomes = {{0, 1}};
    ds.validate();
    SUBCASE("bad basis code") {
        ds.bases[0][0] = 4;
        CHECK_THROWS(ds.validate());
    }
    SUBCASE("bad outcome") {
        ds.outcomes[0][1] = 2;
        CHECK_THROWS(ds.validate());
    }
    SUBCASE("row count mismatch") {
        ds.bases.push_back({2, 2});
        CHECK_THROWS(ds.validate());
    }
}

TEST_CASE("random basis generation") {
    RngStream rng(5);
    auto bases = random_bases(3000, 4, rng);
    REQUIRE(bases.size() == 3000);
    int hist[4] = {0, 0, 0, 0};
    for (const auto& row : bases) {
        REQUIRE(row.size() == 4);
        for (int c : row) {
            REQUIRE(c >= 1);
            REQUIRE(c <= 3);
            ++hist[c];
        }
    }
    // chi-square over 12000 draws, 2 dof, far tail bound
    double chi2 = 0.0;
    for (int c = 1; c <= 3; ++c) chi2 += (hist[c] - 4000.0) * (hist[c] - 4000.0) / 4000.0;
    CHECK(chi2 < 13.8);
    RngStream a(5), b(5);
    CHECK(random_bases(10, 4, a) == random_bases(10, 4, b));
}

TEST_CASE("snapshot generation") {
    SUBCASE("all-z on the all-zeros state") {
        StateVector psi = StateVector::zero_state(3);
        RngStream rng(1);
        auto ds = shadow_snapshots(psi, std::vector<std::vector<int>>(50, {3, 3, 3}), rng);
        for (const auto& row : ds.outcomes)
            for (int b : row) CHECK(b == 0);
    }
    SUBCASE("all-x on the plus state") {
        Circuit c(3);
        c.h(0).h(1).h(2);
        StateVector psi = run(c);
        RngStream rng(2);
        auto ds = shadow_snapshots(psi, std::vector<std::vector<int>>(50, {1, 1, 1}), rng);
        for (const auto& row : ds.outcomes)
            for (int b : row) CHECK(b == 0);
    }
    SUBCASE("all-x on |0> is a fair coin") {
        StateVector psi = StateVector::zero_state(1);
        RngStream rng(3);
        auto ds = shadow_snapshots(psi, std::vector<std::vector<int>>(10000, {1}), rng);
        int ones = 0;
        for (const auto& row : ds.outcomes) ones += row[0];
        CHECK(std::abs(ones / 10000.0 - 0.5) < 3.0 * std::sqrt(0.25 / 10000.0));
    }
    SUBCASE("worker count does not change the dataset") {
        RngStream brng(7);
        Circuit c(4);
        c.h(0).cx(0, 1).ry(2, 0.8).cx(2, 3);
        StateVector psi = run(c);
        auto bases = random_bases(64, 4, brng);
        RngStream r1(9), r4(9);
        auto d1 = shadow_snapshots(psi, bases, r1, 1);
        auto d4 = shadow_snapshots(psi, bases, r4, 4);
        CHECK(d1.outcomes == d4.outcomes);
    }
    SUBCASE("invalid basis code rejected") {
        StateVector psi = StateVector::zero_state(1);
        RngStream rng(4);
        CHECK_THROWS(shadow_snapshots(psi, {{0}}, rng));
    }
}

TEST_CASE("estimator algebra") {
    SUBCASE("identity observable") {
        ShadowDataset ds;
        ds.n = 1;
        ds.bases = {{3}};
        ds.outcomes = {{0}};
        CHECK(estimate_pauli(ds, {0}) == 1.0);
    }
    SUBCASE("ground state z is exactly the inverse-channel factor") {
        // all three bases appear; only the matching one contributes, 3 * 1/3 = 1
        StateVector psi = StateVector::zero_state(1);
        CHECK(exact_estimator_mean(psi, {3}) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("mismatched bases estimate zero") {
        ShadowDataset ds;
        ds.n = 2;
        ds.bases.assign(20, {3, 3});
        ds.outcomes.assign(20, {0, 1});
        CHECK(estimate_pauli(ds, {1, 0}) == 0.0);
    }
    SUBCASE("analytic unbiasedness on random states and words") {
        RngStream rng(13);
        for (int trial = 0; trial < 6; ++trial) {
            int n = 1 + static_cast<int>(rng.uniform_below(3));
            Circuit c(n);
            for (int q = 0; q < n; ++q) c.ry(q, rng.uniform() * 3.0).rz(q, rng.uniform() * 3.0);
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
            CHECK(exact_estimator_mean(psi, obs) == doctest::Approx(truth).epsilon(1e-10));
        }
    }
    SUBCASE("bell correlator from sampled snapshots") {
        Circuit c(2);
        c.h(0).cx(0, 1);
        StateVector psi = run(c);
        RngStream rng(21);
        auto bases = random_bases(10000, 2, rng);
        auto ds = shadow_snapshots(psi, bases, rng);
        double est = estimate_pauli(ds, {1, 1}, 10);
        CHECK(std::abs(est - 1.0) < 0.5);
    }
    SUBCASE("median of means agrees with the mean on clean data") {
        ShadowDataset ds;
        ds.n = 1;
        for (int i = 0; i < 90; ++i) {
            ds.bases.push_back({3});
            ds.outcomes.push_back({i % 3 == 0 ? 1 : 0});
        }
        double mean = estimate_pauli(ds, {3}, 1);
        double mom = estimate_pauli(ds, {3}, 3);
        CHECK(mean == doctest::Approx(mom).epsilon(1e-12));
        CHECK_THROWS(estimate_pauli(ds, {3}, 1000));
    }
}

TEST_CASE("statistical convergence of single-qubit estimates") {
    // product states, <Z_0>, M snapshots: within 3 sqrt(9/M) for >= 95 of 100 seeds
    const int n = 6;
    const std::size_t m_snap = 2000;
    int hits = 0;
    for (int seed = 0; seed < 100; ++seed) {
        RngStream rng(1000 + seed);
        StateVector psi = random_product_state(n, rng);
        PauliSum z0;
        z0.n = n;
        z0.add_word(1.0, {{0, 3}});
        double truth = expectation_pauli(psi, z0).real();
        auto bases = random_bases(m_snap, n, rng);
        auto ds = shadow_snapshots(psi, bases, rng);
        std::vector<int> obs(n, 0);
        obs[0] = 3;
        double est = estimate_pauli(ds, obs);
        if (std::abs(est - truth) <= 3.0 * std::sqrt(9.0 / static_cast<double>(m_snap)))
            ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("dataset file round trip") {
    RngStream rng(31);
    Circuit c(5);
    c.h(0).cx(0, 1).cx(1, 2).ry(3, 1.2).cx(3, 4);
    StateVector psi = run(c);
    auto bases = random_bases(40, 5, rng);
    auto ds = shadow_snapshots(psi, bases, rng);
    const std::string path = "shadow_roundtrip.csv";
    save_dataset(ds, path);
    ShadowDataset back = load_dataset(path);
    CHECK(back.n == ds.n);
    CHECK(back.bases == ds.bases);
    CHECK(back.outcomes == ds.outcomes);
    std::remove(path.c_str());
    CHECK_THROWS(load_dataset("does_not_exist.csv"));
}
