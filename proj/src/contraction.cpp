#include "qforge/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qforge/parallel.hpp"
#include "qforge/rng.hpp"

namespace qforge {

std::int64_t Tensor::size() const {
    std::int64_t s = 1;
    for (std::int64_t d : shape) s *= d;
    return s;
}

void TensorNetwork::validate() const {
    std::map<std::string, std::pair<std::int64_t, int>> seen;  // size, attach count
    for (const auto& t : tensors) {
        require(t.labels.size() == t.shape.size(), "TensorNetwork: label/shape mismatch");
        require(static_cast<std::int64_t>(t.data.size()) == t.size(),
                "TensorNetwork: data size mismatch");
        std::set<std::string> local;
        for (std::size_t ax = 0; ax < t.labels.size(); ++ax) {
            require(t.shape[ax] >= 1, "TensorNetwork: bad axis size");
            require(local.insert(t.labels[ax]).second,
                    "TensorNetwork: label repeated within one tensor");
            auto [it, fresh] = seen.try_emplace(t.labels[ax], t.shape[ax], 0);
            require(it->second.first == t.shape[ax],
                    "TensorNetwork: inconsistent label size");
            require(++it->second.second <= 2, "TensorNetwork: label attached 3+ times");
        }
    }
    std::set<std::string> single;
    for (const auto& [label, info] : seen) {
        if (info.second == 1) single.insert(label);
    }
    std::set<std::string> open(open_edges.begin(), open_edges.end());
    require(open.size() == open_edges.size(), "TensorNetwork: duplicate open edge");
    require(open == single, "TensorNetwork: open edges do not match single attachments");
}

std::map<std::string, std::int64_t> TensorNetwork::label_sizes() const {
    std::map<std::string, std::int64_t> out;
    for (const auto& t : tensors)
        for (std::size_t ax = 0; ax < t.labels.size(); ++ax) out[t.labels[ax]] = t.shape[ax];
    return out;
}

std::uint64_t TensorNetwork::signature() const {
    std::ostringstream ss;
    for (const auto& t : tensors) {
        ss << t.id << '(';
        for (std::size_t ax = 0; ax < t.labels.size(); ++ax)
            ss << t.labels[ax] << '=' << t.shape[ax] << ',';
        ss << ')';
    }
    for (const auto& e : open_edges) ss << '|' << e;
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (char c : ss.str()) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

namespace {

Tensor permute_tensor(const Tensor& t, const std::vector<int>& order) {
    const int rank = static_cast<int>(t.shape.size());
    Tensor out;
    out.id = t.id;
    out.labels.resize(rank);
    out.shape.resize(rank);
    for (int i = 0; i < rank; ++i) {
        out.labels[i] = t.labels[order[i]];
        out.shape[i] = t.shape[order[i]];
    }
    out.data.resize(t.data.size());
    if (rank == 0) {
        out.data = t.data;
        return out;
    }
    std::vector<std::int64_t> src_stride(rank, 1);
    for (int i = rank - 2; i >= 0; --i) src_stride[i] = src_stride[i + 1] * t.shape[i + 1];
    std::vector<std::int64_t> step(rank);
    for (int i = 0; i < rank; ++i) step[i] = src_stride[order[i]];

    std::vector<std::int64_t> idx(rank, 0);
    std::int64_t src = 0;
    const std::int64_t total = t.size();
    for (std::int64_t dst = 0; dst < total; ++dst) {
        out.data[dst] = t.data[src];
        for (int ax = rank - 1; ax >= 0; --ax) {
            src += step[ax];
            if (++idx[ax] < out.shape[ax]) break;
            src -= step[ax] * out.shape[ax];
            idx[ax] = 0;
        }
    }
    return out;
}

// drops one axis by fixing its index
Tensor select_axis(const Tensor& t, int axis, std::int64_t index) {
    Tensor out;
    out.id = t.id;
    const int rank = static_cast<int>(t.shape.size());
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= t.shape[i];
    for (int i = axis + 1; i < rank; ++i) inner *= t.shape[i];
    for (int i = 0; i < rank; ++i) {
        if (i == axis) continue;
        out.labels.push_back(t.labels[i]);
        out.shape.push_back(t.shape[i]);
    }
    out.data.resize(outer * inner);
    const std::int64_t mid = t.shape[axis];
    for (std::int64_t o = 0; o < outer; ++o) {
        std::copy_n(t.data.begin() + (o * mid + index) * inner, inner,
                    out.data.begin() + o * inner);
    }
    return out;
}

}  // namespace

Tensor tensordot(const Tensor& a, const Tensor& b, double* flops) {
    std::set<std::string> b_labels(b.labels.begin(), b.labels.end());
    std::vector<std::string> shared;
    for (const auto& l : a.labels)
        if (b_labels.count(l)) shared.push_back(l);

    std::vector<int> order_a, order_b;
    std::vector<std::string> keep_a, keep_b;
    std::int64_t prod_keep_a = 1, prod_keep_b = 1, prod_shared = 1;
    for (std::size_t ax = 0; ax < a.labels.size(); ++ax) {
        if (!b_labels.count(a.labels[ax])) {
            order_a.push_back(static_cast<int>(ax));
            keep_a.push_back(a.labels[ax]);
            prod_keep_a *= a.shape[ax];
        }
    }
    for (const auto& l : shared) {
        auto it = std::find(a.labels.begin(), a.labels.end(), l);
        order_a.push_back(static_cast<int>(it - a.labels.begin()));
        prod_shared *= a.shape[it - a.labels.begin()];
        auto jt = std::find(b.labels.begin(), b.labels.end(), l);
        require(jt != b.labels.end() &&
                    b.shape[jt - b.labels.begin()] == a.shape[it - a.labels.begin()],
                "tensordot: shared label size mismatch");
        order_b.push_back(static_cast<int>(jt - b.labels.begin()));
    }
    for (std::size_t ax = 0; ax < b.labels.size(); ++ax) {
        if (std::find(shared.begin(), shared.end(), b.labels[ax]) == shared.end()) {
            order_b.push_back(static_cast<int>(ax));
            keep_b.push_back(b.labels[ax]);
            prod_keep_b *= b.shape[ax];
        }
    }

    Tensor pa = permute_tensor(a, order_a);
    Tensor pb = permute_tensor(b, order_b);

    using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> ma(pa.data.data(), prod_keep_a, prod_shared);
    Eigen::Map<const RowMat> mb(pb.data.data(), prod_shared, prod_keep_b);

    Tensor out;
    out.id = -1;
    out.data.resize(prod_keep_a * prod_keep_b);
    Eigen::Map<RowMat>(out.data.data(), prod_keep_a, prod_keep_b) = ma * mb;
    for (std::size_t ax = 0; ax < a.labels.size(); ++ax) {
        if (!b_labels.count(a.labels[ax])) {
            out.labels.push_back(a.labels[ax]);
            out.shape.push_back(a.shape[ax]);
        }
    }
    for (std::size_t ax = 0; ax < b.labels.size(); ++ax) {
        if (std::find(shared.begin(), shared.end(), b.labels[ax]) == shared.end()) {
            out.labels.push_back(b.labels[ax]);
            out.shape.push_back(b.shape[ax]);
        }
    }
    if (flops) {
        *flops += static_cast<double>(prod_keep_a) * static_cast<double>(prod_shared) *
                  static_cast<double>(prod_keep_b);
    }
    return out;
}

TensorNetwork capture_expectation_network(const Circuit& c,
                                          const std::vector<int>& obs_codes) {
    require(c.d == 2, "capture_expectation_network: qubits only");
    require(static_cast<int>(obs_codes.size()) == c.n,
            "capture_expectation_network: observable length mismatch");
    for (int code : obs_codes)
        require(code >= 0 && code <= 3, "capture_expectation_network: bad Pauli code");

    TensorNetwork net;
    int next_id = 0;
    std::vector<int> version(c.n, 0);
    auto klabel = [](int q, int v) {
        return "k" + std::to_string(q) + "_" + std::to_string(v);
    };
    auto blabel = [](int q, int v) {
        return "b" + std::to_string(q) + "_" + std::to_string(v);
    };

    auto emit_layer = [&](bool bra) {
        std::fill(version.begin(), version.end(), 0);
        auto lab = [&](int q, int v) { return bra ? blabel(q, v) : klabel(q, v); };
        if (c.initial_state) {
            require(c.initial_state->size() == (std::int64_t(1) << c.n),
                    "capture_expectation_network: bad initial state size");
            Tensor t;
            t.id = next_id++;
            for (int q = 0; q < c.n; ++q) {
                t.labels.push_back(lab(q, 0));
                t.shape.push_back(2);
            }
            t.data.resize(c.initial_state->size());
            for (std::int64_t i = 0; i < c.initial_state->size(); ++i) {
                t.data[i] = bra ? std::conj((*c.initial_state)[i]) : (*c.initial_state)[i];
            }
            net.tensors.push_back(std::move(t));
        } else {
            for (int q = 0; q < c.n; ++q) {
                Tensor t;
                t.id = next_id++;
                t.labels = {lab(q, 0)};
                t.shape = {2};
                t.data = {1.0, 0.0};
                net.tensors.push_back(std::move(t));
            }
        }
        for (const auto& instr : c.ops) {
            ComplexMatrix m = gate_matrix(instr, 2);
            const int w = static_cast<int>(instr.wires.size());
            const std::int64_t dim = std::int64_t(1) << w;
            Tensor t;
            t.id = next_id++;
            for (int q : instr.wires) {
                t.labels.push_back(lab(q, version[q] + 1));
                t.shape.push_back(2);
            }
            for (int q : instr.wires) {
                t.labels.push_back(lab(q, version[q]));
                t.shape.push_back(2);
                ++version[q];
            }
            t.data.resize(dim * dim);
            for (std::int64_t r = 0; r < dim; ++r)
                for (std::int64_t cc = 0; cc < dim; ++cc)
                    t.data[r * dim + cc] = bra ? std::conj(m(r, cc)) : m(r, cc);
            net.tensors.push_back(std::move(t));
        }
    };

    emit_layer(false);
    std::vector<int> ket_top = version;
    emit_layer(true);

    static const ComplexMatrix paulis[4] = {
        ComplexMatrix::Identity(2, 2),
        (ComplexMatrix(2, 2) << 0, 1, 1, 0).finished(),
        (ComplexMatrix(2, 2) << 0, cplx(0, -1), cplx(0, 1), 0).finished(),
        (ComplexMatrix(2, 2) << 1, 0, 0, -1).finished()};
    for (int q = 0; q < c.n; ++q) {
        const ComplexMatrix& p = paulis[obs_codes[q]];
        Tensor t;
        t.id = next_id++;
        t.labels = {blabel(q, ket_top[q]), klabel(q, ket_top[q])};
        t.shape = {2, 2};
        t.data = {p(0, 0), p(0, 1), p(1, 0), p(1, 1)};
        net.tensors.push_back(std::move(t));
    }
    net.validate();
    return net;
}

namespace {

struct TreeMetrics {
    double flops = 0.0;                     // per-slice multiply-adds
    std::int64_t largest = 0;               // per-slice, internal nodes and leaves
    std::vector<std::vector<std::string>> free_labels;  // per node, sorted
    std::vector<std::int64_t> node_size;
};

TreeMetrics tree_metrics(const TensorNetwork& net, int n_leaves,
                         const std::vector<std::pair<int, int>>& nodes,
                         const std::set<std::string>& sliced) {
    auto sizes = net.label_sizes();
    auto label_size = [&](const std::string& l) {
        return sliced.count(l) ? std::int64_t(1) : sizes.at(l);
    };
    TreeMetrics m;
    const int total = n_leaves + static_cast<int>(nodes.size());
    m.free_labels.resize(total);
    m.node_size.resize(total);
    for (int i = 0; i < n_leaves; ++i) {
        m.free_labels[i] = net.tensors[i].labels;
        std::sort(m.free_labels[i].begin(), m.free_labels[i].end());
        std::int64_t s = 1;
        for (const auto& l : m.free_labels[i]) s *= label_size(l);
        m.node_size[i] = s;
        m.largest = std::max(m.largest, s);
    }
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const auto& a = m.free_labels[nodes[k].first];
        const auto& b = m.free_labels[nodes[k].second];
        std::vector<std::string> uni, sym;
        std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
        std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                      std::back_inserter(sym));
        double fl = 1.0;
        for (const auto& l : uni) fl *= static_cast<double>(label_size(l));
        std::int64_t s = 1;
        for (const auto& l : sym) s *= label_size(l);
        const int node = n_leaves + static_cast<int>(k);
        m.free_labels[node] = std::move(sym);
        m.node_size[node] = s;
        m.flops += fl;
        m.largest = std::max(m.largest, s);
    }
    return m;
}

// one greedy pass; noisy when temperature > 0
std::vector<std::pair<int, int>> greedy_tree(const TensorNetwork& net,
                                             double temperature, RngStream rng) {
    const int n = static_cast<int>(net.tensors.size());
    auto sizes = net.label_sizes();

    struct Comp {
        int node;
        std::vector<std::string> labels;  // sorted free labels
        double size;
        bool alive = true;
    };
    std::vector<Comp> comps(n);
    for (int i = 0; i < n; ++i) {
        comps[i].node = i;
        comps[i].labels = net.tensors[i].labels;
        std::sort(comps[i].labels.begin(), comps[i].labels.end());
        comps[i].size = static_cast<double>(net.tensors[i].size());
    }

    std::vector<std::pair<int, int>> nodes;
    int alive = n;
    while (alive > 1) {
        // candidate pairs: components sharing at least one label
        std::set<std::pair<int, int>> cand;
        std::map<std::string, int> owner;
        for (int i = 0; i < static_cast<int>(comps.size()); ++i) {
            if (!comps[i].alive) continue;
            for (const auto& l : comps[i].labels) {
                auto [it, fresh] = owner.try_emplace(l, i);
                if (!fresh && it->second != i) cand.insert({std::min(it->second, i),
                                                            std::max(it->second, i)});
            }
        }
        int best_a = -1, best_b = -1;
        double best_score = std::numeric_limits<double>::infinity();
        for (auto [i, j] : cand) {
            std::vector<std::string> sym;
            std::set_symmetric_difference(comps[i].labels.begin(), comps[i].labels.end(),
                                          comps[j].labels.begin(), comps[j].labels.end(),
                                          std::back_inserter(sym));
            double out_size = 1.0;
            for (const auto& l : sym) out_size *= static_cast<double>(sizes.at(l));
            double score = out_size - comps[i].size - comps[j].size;
            if (temperature > 0.0) {
                score += temperature * (std::abs(score) + 1.0) * rng.normal();
            }
            if (score < best_score) {
                best_score = score;
                best_a = i;
                best_b = j;
            }
        }
        if (best_a < 0) {
            // disconnected remnants: outer-product the two smallest
            std::vector<int> order;
            for (int i = 0; i < static_cast<int>(comps.size()); ++i)
                if (comps[i].alive) order.push_back(i);
            std::sort(order.begin(), order.end(), [&](int x, int y) {
                return comps[x].size < comps[y].size;
            });
            best_a = order[0];
            best_b = order[1];
        }

        Comp merged;
        merged.node = n + static_cast<int>(nodes.size());
        std::set_symmetric_difference(
            comps[best_a].labels.begin(), comps[best_a].labels.end(),
            comps[best_b].labels.begin(), comps[best_b].labels.end(),
            std::back_inserter(merged.labels));
        merged.size = 1.0;
        for (const auto& l : merged.labels) merged.size *= static_cast<double>(sizes.at(l));
        nodes.push_back({comps[best_a].node, comps[best_b].node});
        comps[best_a].alive = false;
        comps[best_b].alive = false;
        comps.push_back(std::move(merged));
        --alive;
    }
    return nodes;
}

}  // namespace

ContractionTree find_path(const TensorNetwork& net, const PathOptions& options) {
    net.validate();
    require(!net.tensors.empty(), "find_path: empty network");
    require(options.max_repeats >= 1, "find_path: max_repeats must be >= 1");
    for (const auto& t : net.tensors) {
        require(t.size() <= options.target_size,
                "find_path: target_size smaller than an input tensor");
    }

    const int n = static_cast<int>(net.tensors.size());
    ContractionTree best;
    best.n_leaves = n;
    best.signature = net.signature();
    double best_flops = std::numeric_limits<double>::infinity();
    std::int64_t best_largest = 0;
    for (int r = 0; r < options.max_repeats; ++r) {
        double temperature = (r == 0) ? 0.0 : 0.3;
        auto nodes = greedy_tree(net, temperature, RngStream(options.seed, r));
        TreeMetrics m = tree_metrics(net, n, nodes, {});
        if (m.flops < best_flops ||
            (m.flops == best_flops && m.largest < best_largest)) {
            best_flops = m.flops;
            best_largest = m.largest;
            best.nodes = std::move(nodes);
        }
    }

    std::set<std::string> open(net.open_edges.begin(), net.open_edges.end());
    auto sizes = net.label_sizes();
    std::set<std::string> sliced;
    TreeMetrics m = tree_metrics(net, n, best.nodes, sliced);
    while (m.largest > options.target_size) {
        // count labels across oversized intermediates
        std::map<std::string, int> freq;
        for (int node = 0; node < n + static_cast<int>(best.nodes.size()); ++node) {
            if (m.node_size[node] <= options.target_size) continue;
            for (const auto& l : m.free_labels[node]) {
                if (sliced.count(l) || open.count(l) || sizes.at(l) <= 1) continue;
                ++freq[l];
            }
        }
        require(!freq.empty(), "find_path: cannot slice below target_size");
        std::string pick;
        int pick_freq = -1;
        for (const auto& [l, f] : freq) {
            if (f > pick_freq ||
                (f == pick_freq && (sizes.at(l) > sizes.at(pick) ||
                                    (sizes.at(l) == sizes.at(pick) && l < pick)))) {
                pick = l;
                pick_freq = f;
            }
        }
        sliced.insert(pick);
        m = tree_metrics(net, n, best.nodes, sliced);
    }
    best.sliced.assign(sliced.begin(), sliced.end());
    double n_assign = 1.0;
    for (const auto& l : best.sliced) n_assign *= static_cast<double>(sizes.at(l));
    best.flops = m.flops * n_assign;
    best.largest_intermediate = m.largest;
    return best;
}

Tensor contract(const TensorNetwork& net, const ContractionTree& tree, int workers,
                ContractStats* stats) {
    net.validate();
    const int n = static_cast<int>(net.tensors.size());
    require(tree.n_leaves == n, "contract: tree does not match network");
    require(static_cast<int>(tree.nodes.size()) == std::max(n - 1, 0),
            "contract: tree is not a full binary plan");
    if (tree.signature != 0) {
        require(tree.signature == net.signature(),
                "contract: path signature does not match network");
    }
    {
        std::vector<int> used(n + tree.nodes.size(), 0);
        for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
            auto [a, b] = tree.nodes[k];
            int node = n + static_cast<int>(k);
            require(a >= 0 && b >= 0 && a < node && b < node && a != b,
                    "contract: bad tree node");
            require(++used[a] == 1 && ++used[b] == 1, "contract: node reused in tree");
        }
    }

    auto sizes = net.label_sizes();
    std::vector<std::int64_t> slice_size;
    for (const auto& l : tree.sliced) {
        auto it = sizes.find(l);
        require(it != sizes.end(), "contract: sliced label not in network");
        slice_size.push_back(it->second);
    }
    std::int64_t n_assign = 1;
    for (std::int64_t s : slice_size) n_assign *= s;

    // per tensor: (axis, sliced-label position), axes descending for removal
    std::vector<std::vector<std::pair<int, int>>> slice_axes(n);
    for (int i = 0; i < n; ++i) {
        const auto& t = net.tensors[i];
        for (int ax = static_cast<int>(t.labels.size()) - 1; ax >= 0; --ax) {
            auto it = std::find(tree.sliced.begin(), tree.sliced.end(), t.labels[ax]);
            if (it != tree.sliced.end()) {
                slice_axes[i].push_back({ax, static_cast<int>(it - tree.sliced.begin())});
            }
        }
    }

    std::vector<Tensor> partial(n_assign);
    std::vector<std::int64_t> slot_max(n_assign, 0);
    parallel_for(static_cast<std::size_t>(n_assign),
                 static_cast<std::size_t>(std::max(workers, 1)), [&](std::size_t a) {
                     std::vector<std::int64_t> digit(slice_size.size(), 0);
                     std::int64_t rem = static_cast<std::int64_t>(a);
                     for (int j = static_cast<int>(slice_size.size()) - 1; j >= 0; --j) {
                         digit[j] = rem % slice_size[j];
                         rem /= slice_size[j];
                     }
                     std::vector<Tensor> node(n + tree.nodes.size());
                     std::int64_t local_max = 0;
                     for (int i = 0; i < n; ++i) {
                         node[i] = net.tensors[i];
                         for (auto [ax, sl] : slice_axes[i]) {
                             node[i] = select_axis(node[i], ax, digit[sl]);
                         }
                         local_max = std::max(local_max, node[i].size());
                     }
                     for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
                         int id = n + static_cast<int>(k);
                         node[id] = tensordot(node[tree.nodes[k].first],
                                              node[tree.nodes[k].second]);
                         local_max = std::max(local_max, node[id].size());
                         node[tree.nodes[k].first].data.clear();
                         node[tree.nodes[k].second].data.clear();
                     }
                     partial[a] = std::move(node.back());
                     slot_max[a] = local_max;
                 });

    Tensor result = std::move(partial[0]);
    for (std::int64_t a = 1; a < n_assign; ++a) {
        require(partial[a].labels == result.labels, "contract: slice label drift");
        for (std::size_t i = 0; i < result.data.size(); ++i) {
            result.data[i] += partial[a].data[i];
        }
    }

    if (!result.labels.empty() && result.labels != net.open_edges) {
        std::vector<int> order;
        for (const auto& l : net.open_edges) {
            auto it = std::find(result.labels.begin(), result.labels.end(), l);
            require(it != result.labels.end(), "contract: open edge missing from result");
            order.push_back(static_cast<int>(it - result.labels.begin()));
        }
        require(order.size() == result.labels.size(),
                "contract: result rank does not match open edges");
        result = permute_tensor(result, order);
    }

    if (stats) {
        stats->max_intermediate = *std::max_element(slot_max.begin(), slot_max.end());
        stats->slice_count = n_assign;
    }
    return result;
}

void save_path(const ContractionTree& tree, const std::string& path) {
    nlohmann::json j;
    j["signature"] = tree.signature;
    j["n_leaves"] = tree.n_leaves;
    j["nodes"] = nlohmann::json::array();
    for (auto [a, b] : tree.nodes) j["nodes"].push_back({a, b});
    j["sliced"] = tree.sliced;
    j["flops"] = tree.flops;
    j["largest_intermediate"] = tree.largest_intermediate;
    std::ofstream f(path);
    require(f.good(), "save_path: cannot open file");
    f << j.dump(2) << "\n";
    require(f.good(), "save_path: write failed");
}

ContractionTree load_path(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "load_path: cannot open file");
    nlohmann::json j = nlohmann::json::parse(f);
    ContractionTree tree;
    tree.signature = j.at("signature").get<std::uint64_t>();
    tree.n_leaves = j.at("n_leaves").get<int>();
    for (const auto& node : j.at("nodes")) {
        tree.nodes.push_back({node.at(0).get<int>(), node.at(1).get<int>()});
    }
    tree.sliced = j.at("sliced").get<std::vector<std::string>>();
    tree.flops = j.at("flops").get<double>();
    tree.largest_intermediate = j.at("largest_intermediate").get<std::int64_t>();
    return tree;
}

}  // namespace qforge
