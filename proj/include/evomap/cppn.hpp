#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "evomap/rng.hpp"

namespace evomap {

// Course geometry. The course is 220 units long; the first 20 units are a
// flat startpad and are not part of the stored height vector.
inline constexpr int kTerrainUnits = 200;
inline constexpr double kStartpadLength = 20.0;
inline constexpr double kCourseLength = 220.0;
inline constexpr double kMaxTerrainHeight = 25.0;
inline constexpr double kTerrainHeightScale = 5.0;

struct Terrain {
    std::array<double, kTerrainUnits> heights{};
};

inline double terrain_distance(const Terrain& a, const Terrain& b) {
    double sum = 0.0;
    for (int i = 0; i < kTerrainUnits; ++i) sum += std::abs(a.heights[i] - b.heights[i]);
    return sum;
}

enum class Activation : std::uint8_t { Identity, Sine, Sigmoid, Gaussian, Abs };

inline double apply_activation(Activation a, double x) {
    switch (a) {
        case Activation::Identity: return x;
        case Activation::Sine: return std::sin(x);
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Activation::Gaussian: return std::exp(-x * x);
        case Activation::Abs: return std::abs(x);
    }
    return x;
}

inline constexpr std::array<Activation, 5> kActivationSet = {
    Activation::Sine, Activation::Sigmoid, Activation::Gaussian,
    Activation::Identity, Activation::Abs};

struct CppnNode {
    int id = 0;
    Activation activation = Activation::Identity;
    double bias = 0.0;
};

struct CppnConnection {
    int src = 0;
    int dst = 0;
    double weight = 0.0;
    bool enabled = true;
};

struct CppnMutationConfig {
    double add_node_prob = 0.05;
    double add_connection_prob = 0.1;
    double weight_perturb_prob = 0.8;
    double weight_perturb_sigma = 0.3;
    double reassign_activation_prob = 0.1;
};

// Feed-forward pattern network mapping course position in [0,1] to a raw
// height value. Node 0 is the input, node 1 a constant-one bias source,
// node 2 the output. The enabled-connection graph is kept acyclic by
// construction.
struct Cppn {
    static constexpr int kInputId = 0;
    static constexpr int kBiasId = 1;
    static constexpr int kOutputId = 2;

    std::vector<CppnNode> nodes;
    std::vector<CppnConnection> connections;
    int next_node_id = 3;

    int node_count() const { return static_cast<int>(nodes.size()); }

    int index_of(int id) const {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i].id == id) return static_cast<int>(i);
        return -1;
    }
};

// Minimal topology: input, bias, output, both feeding the output with zero
// weight. Evaluates to the same constant (zero through the identity output)
// for every input.
inline Cppn cppn_init_flat() {
    Cppn c;
    c.nodes = {{Cppn::kInputId, Activation::Identity, 0.0},
               {Cppn::kBiasId, Activation::Identity, 0.0},
               {Cppn::kOutputId, Activation::Identity, 0.0}};
    c.connections = {{Cppn::kInputId, Cppn::kOutputId, 0.0, true},
                     {Cppn::kBiasId, Cppn::kOutputId, 0.0, true}};
    c.next_node_id = 3;
    return c;
}

namespace detail {

// Kahn topological order over all connections (enabled or not); returns
// node indices. Throws if a cycle slipped in, which the mutation operators
// are required to prevent.
inline std::vector<int> cppn_topo_order(const Cppn& c) {
    const int n = c.node_count();
    std::vector<int> indegree(n, 0);
    std::vector<std::vector<int>> out(n);
    for (const auto& conn : c.connections) {
        int si = c.index_of(conn.src);
        int di = c.index_of(conn.dst);
        assert(si >= 0 && di >= 0);
        out[si].push_back(di);
        ++indegree[di];
    }
    std::vector<int> order;
    order.reserve(n);
    std::vector<int> ready;
    for (int i = 0; i < n; ++i)
        if (indegree[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
        int v = ready.back();
        ready.pop_back();
        order.push_back(v);
        for (int w : out[v])
            if (--indegree[w] == 0) ready.push_back(w);
    }
    if (static_cast<int>(order.size()) != n)
        throw std::logic_error("cppn graph contains a cycle");
    return order;
}

// True if `to` is reachable from `from` over the connection graph.
inline bool cppn_reachable(const Cppn& c, int from_id, int to_id) {
    if (from_id == to_id) return true;
    std::vector<int> stack = {from_id};
    std::vector<bool> seen(c.node_count(), false);
    while (!stack.empty()) {
        int id = stack.back();
        stack.pop_back();
        int idx = c.index_of(id);
        if (idx < 0 || seen[idx]) continue;
        seen[idx] = true;
        for (const auto& conn : c.connections) {
            if (conn.src != id) continue;
            if (conn.dst == to_id) return true;
            stack.push_back(conn.dst);
        }
    }
    return false;
}

}  // namespace detail

inline double cppn_eval(const Cppn& c, double x) {
    const std::vector<int> order = detail::cppn_topo_order(c);
    const int n = c.node_count();
    std::vector<double> sum(n, 0.0);
    std::vector<double> value(n, 0.0);
    for (int idx : order) {
        const CppnNode& node = c.nodes[idx];
        if (node.id == Cppn::kInputId) {
            value[idx] = x;
        } else if (node.id == Cppn::kBiasId) {
            value[idx] = 1.0;
        } else {
            value[idx] = apply_activation(node.activation, sum[idx] + node.bias);
        }
        for (const auto& conn : c.connections) {
            if (!conn.enabled || conn.src != node.id) continue;
            sum[c.index_of(conn.dst)] += conn.weight * value[idx];
        }
    }
    return value[c.index_of(Cppn::kOutputId)];
}

// 200 sample positions evenly spread over [0,1]; raw outputs scaled and
// clamped into the legal height band.
inline Terrain generate_terrain(const Cppn& c) {
    Terrain t;
    for (int i = 0; i < kTerrainUnits; ++i) {
        double x = static_cast<double>(i) / (kTerrainUnits - 1);
        double raw = cppn_eval(c, x);
        t.heights[i] = std::clamp(kTerrainHeightScale * raw, 0.0, kMaxTerrainHeight);
    }
    return t;
}

// Structural mutation. Operators fire independently; when none fires, one
// random connection weight is perturbed so every call changes something.
inline Cppn cppn_mutate(const Cppn& parent, Rng& rng,
                        const CppnMutationConfig& cfg = {}) {
    Cppn c = parent;
    bool changed = false;

    if (rng.bernoulli(cfg.add_node_prob)) {
        // Split a random enabled connection.
        std::vector<int> enabled;
        for (std::size_t i = 0; i < c.connections.size(); ++i)
            if (c.connections[i].enabled) enabled.push_back(static_cast<int>(i));
        if (!enabled.empty()) {
            int ci = enabled[rng.uniform_int(enabled.size())];
            CppnConnection& split = c.connections[ci];
            split.enabled = false;
            CppnNode node;
            node.id = c.next_node_id++;
            node.activation = kActivationSet[rng.uniform_int(kActivationSet.size())];
            node.bias = rng.gaussian(0.0, 1.0);
            int src = split.src;
            int dst = split.dst;
            double w = split.weight;
            c.nodes.push_back(node);
            c.connections.push_back({src, node.id, 1.0, true});
            c.connections.push_back({node.id, dst, w, true});
            changed = true;
        }
    }

    if (rng.bernoulli(cfg.add_connection_prob)) {
        for (int attempt = 0; attempt < 10; ++attempt) {
            const CppnNode& a = c.nodes[rng.uniform_int(c.nodes.size())];
            const CppnNode& b = c.nodes[rng.uniform_int(c.nodes.size())];
            int src = a.id;
            int dst = b.id;
            if (src == dst) continue;
            if (dst == Cppn::kInputId || dst == Cppn::kBiasId) continue;
            if (src == Cppn::kOutputId) continue;
            bool duplicate = false;
            for (const auto& conn : c.connections)
                if (conn.src == src && conn.dst == dst) duplicate = true;
            if (duplicate) continue;
            if (detail::cppn_reachable(c, dst, src)) continue;  // would cycle
            c.connections.push_back({src, dst, rng.gaussian(0.0, 1.0), true});
            changed = true;
            break;
        }
    }

    for (auto& conn : c.connections) {
        if (rng.bernoulli(cfg.weight_perturb_prob)) {
            conn.weight += rng.gaussian(0.0, cfg.weight_perturb_sigma);
            changed = true;
        }
    }

    if (rng.bernoulli(cfg.reassign_activation_prob)) {
        // Hidden and output nodes only; input and bias emit raw values.
        std::vector<int> eligible;
        for (std::size_t i = 0; i < c.nodes.size(); ++i)
            if (c.nodes[i].id != Cppn::kInputId && c.nodes[i].id != Cppn::kBiasId)
                eligible.push_back(static_cast<int>(i));
        c.nodes[eligible[rng.uniform_int(eligible.size())]].activation =
            kActivationSet[rng.uniform_int(kActivationSet.size())];
        changed = true;
    }

    if (!changed && !c.connections.empty()) {
        auto& conn = c.connections[rng.uniform_int(c.connections.size())];
        conn.weight += rng.gaussian(0.0, cfg.weight_perturb_sigma);
    }

    return c;
}

}  // namespace evomap
