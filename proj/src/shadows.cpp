#include "qforge/shadows.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qforge/parallel.hpp"

namespace qforge {

void ShadowDataset::validate() const {
    require(n >= 1, "ShadowDataset: n must be >= 1");
    require(bases.size() == outcomes.size(), "ShadowDataset: row count mismatch");
    for (std::size_t r = 0; r < bases.size(); ++r) {
        require(static_cast<int>(bases[r].size()) == n, "ShadowDataset: bad basis row");
        require(static_cast<int>(outcomes[r].size()) == n,
                "ShadowDataset: bad outcome row");
        for (int c : bases[r]) require(c >= 1 && c <= 3, "ShadowDataset: bad basis code");
        for (int b : outcomes[r]) require(b == 0 || b == 1, "ShadowDataset: bad outcome");
    }
}

std::vector<std::vector<int>> random_bases(std::size_t m, int n, RngStream& rng) {
    std::vector<std::vector<int>> out(m, std::vector<int>(n));
    for (auto& row : out)
        for (int& c : row) c = 1 + static_cast<int>(rng.uniform_below(3));
    return out;
}

namespace {

const ComplexMatrix& basis_rotation(int code) {
    static const double s = 1.0 / std::sqrt(2.0);
    // maps the code's Pauli eigenbasis onto the computational basis
    static const ComplexMatrix hx = (ComplexMatrix(2, 2) << s, s, s, -s).finished();
    static const ComplexMatrix hy =
        (ComplexMatrix(2, 2) << s, cplx(0, -s), s, cplx(0, s)).finished();
    static const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
    switch (code) {
        case 1: return hx;
        case 2: return hy;
        case 3: return id;
        default: throw std::invalid_argument("basis_rotation: code must be 1, 2, or 3");
    }
}

}  // namespace

ShadowDataset shadow_snapshots(const StateVector& psi,
                               const std::vector<std::vector<int>>& bases,
                               RngStream& rng, int workers) {
    require(psi.d == 2, "shadow_snapshots: qubits only");
    const std::size_t m = bases.size();
    ShadowDataset ds;
    ds.n = psi.n;
    ds.bases = bases;
    ds.outcomes.assign(m, std::vector<int>(psi.n, 0));
    std::vector<RngStream> streams = rng.split(m);

    parallel_for(m, static_cast<std::size_t>(std::max(workers, 1)), [&](std::size_t r) {
        require(static_cast<int>(bases[r].size()) == psi.n,
                "shadow_snapshots: bad basis row");
        StateVector rotated = psi;
        for (int q = 0; q < psi.n; ++q) {
            int code = bases[r][q];
            require(code >= 1 && code <= 3, "shadow_snapshots: bad basis code");
            if (code != 3) apply_local_unitary(rotated, basis_rotation(code), {q});
        }
        double u = streams[r].uniform();
        double acc = 0.0;
        std::int64_t hit = rotated.amps.size() - 1;
        for (std::int64_t i = 0; i < rotated.amps.size(); ++i) {
            acc += std::norm(rotated.amps[i]);
            if (u < acc) {
                hit = i;
                break;
            }
        }
        for (int q = 0; q < psi.n; ++q) {
            ds.outcomes[r][q] = static_cast<int>((hit >> (psi.n - 1 - q)) & 1);
        }
    });
    return ds;
}

double estimate_pauli(const ShadowDataset& ds, const std::vector<int>& obs_codes,
                      int n_batches) {
    require(static_cast<int>(obs_codes.size()) == ds.n, "estimate_pauli: length mismatch");
    require(n_batches >= 1, "estimate_pauli: n_batches must be >= 1");
    std::vector<int> support;
    for (int q = 0; q < ds.n; ++q) {
        require(obs_codes[q] >= 0 && obs_codes[q] <= 3, "estimate_pauli: bad code");
        if (obs_codes[q] != 0) support.push_back(q);
    }
    if (support.empty()) return 1.0;
    const std::size_t m = ds.size();
    require(m > 0, "estimate_pauli: empty dataset");
    require(static_cast<std::size_t>(n_batches) <= m,
            "estimate_pauli: more batches than snapshots");

    std::vector<double> means(n_batches, 0.0);
    std::vector<std::size_t> counts(n_batches, 0);
    for (std::size_t r = 0; r < m; ++r) {
        double v = 1.0;
        for (int q : support) {
            if (ds.bases[r][q] != obs_codes[q]) {
                v = 0.0;
                break;
            }
            v *= 3.0 * (1.0 - 2.0 * ds.outcomes[r][q]);
        }
        std::size_t b = r * n_batches / m;
        means[b] += v;
        ++counts[b];
    }
    for (int b = 0; b < n_batches; ++b) means[b] /= static_cast<double>(counts[b]);
    std::sort(means.begin(), means.end());
    const int mid = n_batches / 2;
    if (n_batches % 2 == 1) return means[mid];
    return 0.5 * (means[mid - 1] + means[mid]);
}

void save_dataset(const ShadowDataset& ds, const std::string& path) {
    ds.validate();
    std::ofstream f(path);
    require(f.good(), ("save_dataset: cannot open " + path).c_str());
    f << ds.n << "," << ds.size() << "\n";
    for (std::size_t r = 0; r < ds.size(); ++r) {
        for (int c : ds.bases[r]) f << c;
        f << ";";
        for (int b : ds.outcomes[r]) f << b;
        f << "\n";
    }
    require(f.good(), "save_dataset: write failed");
}

ShadowDataset load_dataset(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), ("load_dataset: cannot open " + path).c_str());
    std::string header;
    require(static_cast<bool>(std::getline(f, header)), "load_dataset: missing header");
    std::size_t comma = header.find(',');
    require(comma != std::string::npos, "load_dataset: bad header");
    ShadowDataset ds;
    ds.n = std::stoi(header.substr(0, comma));
    std::size_t m = std::stoul(header.substr(comma + 1));
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::size_t semi = line.find(';');
        require(semi != std::string::npos, "load_dataset: bad row");
        std::string bs = line.substr(0, semi);
        std::string os = line.substr(semi + 1);
        require(bs.size() == static_cast<std::size_t>(ds.n) && os.size() == bs.size(),
                "load_dataset: bad row length");
        std::vector<int> brow(ds.n), orow(ds.n);
        for (int q = 0; q < ds.n; ++q) {
            brow[q] = bs[q] - '0';
            orow[q] = os[q] - '0';
        }
        ds.bases.push_back(std::move(brow));
        ds.outcomes.push_back(std::move(orow));
    }
    require(ds.size() == m, "load_dataset: row count does not match header");
    ds.validate();
    return ds;
}

}  // namespace qforge
