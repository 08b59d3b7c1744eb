#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "evomap/rng.hpp"

namespace evomap {

inline constexpr int kGenomeBits = 288;
inline constexpr int kGenomeBytes = kGenomeBits / 8;

// Fixed 288-bit agent genome, stored most-significant-bit first.
struct Genome {
    std::array<std::uint8_t, kGenomeBytes> bytes{};

    bool bit(int i) const {
        assert(i >= 0 && i < kGenomeBits);
        return (bytes[i / 8] >> (7 - (i % 8))) & 1;
    }

    void set_bit(int i, bool v) {
        assert(i >= 0 && i < kGenomeBits);
        std::uint8_t mask = static_cast<std::uint8_t>(1u << (7 - (i % 8)));
        if (v)
            bytes[i / 8] |= mask;
        else
            bytes[i / 8] &= static_cast<std::uint8_t>(~mask);
    }

    bool operator==(const Genome&) const = default;
};

inline Genome genome_random(Rng& rng) {
    Genome g;
    for (auto& b : g.bytes) b = static_cast<std::uint8_t>(rng.uniform_int(256));
    return g;
}

inline Genome genome_mutate(const Genome& parent, Rng& rng, double flip_prob = 0.05) {
    Genome g = parent;
    for (int i = 0; i < kGenomeBits; ++i)
        if (rng.bernoulli(flip_prob)) g.set_bit(i, !g.bit(i));
    return g;
}

inline int genome_hamming(const Genome& a, const Genome& b) {
    int d = 0;
    for (int i = 0; i < kGenomeBytes; ++i)
        d += __builtin_popcount(static_cast<unsigned>(a.bytes[i] ^ b.bytes[i]));
    return d;
}

inline std::string genome_to_hex(const Genome& g) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    s.reserve(2 * kGenomeBytes);
    for (std::uint8_t b : g.bytes) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

inline Genome genome_from_hex(const std::string& hex) {
    if (hex.size() != 2 * kGenomeBytes)
        throw std::invalid_argument("genome hex string must have 72 characters");
    auto nibble = [](char ch) -> int {
        if (ch >= '0' && ch <= '9') return ch - '0';
        if (ch >= 'a' && ch <= 'f') return ch - 'a' + 10;
        if (ch >= 'A' && ch <= 'F') return ch - 'A' + 10;
        throw std::invalid_argument("invalid hex digit in genome string");
    };
    Genome g;
    for (int i = 0; i < kGenomeBytes; ++i)
        g.bytes[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
    return g;
}

// Open-loop sine controller: target angle amplitude*sin(2*pi*t/period + phase).
struct ControllerSpec {
    double amplitude = 0.0;  // radians
    double period = 1.0;     // timesteps
    double phase = 0.0;      // radians
};

enum class ModuleShape : std::uint8_t { Rectangle, Circle };

struct ModuleSpec {
    ModuleShape shape = ModuleShape::Rectangle;
    double width = 0.0;        // rectangles
    double height = 0.0;       // rectangles
    double radius = 0.0;       // circles
    double attach_angle = 0.0; // radians, relative to the connection point normal
    ControllerSpec controller;
};

// One node of the decoded creature tree. Children are stored flat with a
// parent index and the parent connection point they occupy (0 = left side,
// 1 = top, 2 = right side of a rectangle).
struct CreatureNode {
    ModuleSpec module;
    int parent = -1;
    int parent_connection_point = -1;
};

struct CreatureSpec {
    std::vector<CreatureNode> nodes;  // nodes[0] is the root, always a rectangle
};

inline constexpr int kMaxCreatureNodes = 17;  // root + 112 tree bits / 7 per child

// Value-range mapping for the 4-bit fields of the encoding.
struct DecodeRanges {
    double rect_width_min = 0.25, rect_width_max = 1.0;
    double rect_height_min = 0.25, rect_height_max = 1.0;
    double circle_radius_min = 0.15, circle_radius_max = 0.5;
    double attach_angle_min = -std::numbers::pi / 2, attach_angle_max = std::numbers::pi / 2;
    double amplitude_min = 0.0, amplitude_max = std::numbers::pi / 3;
    double period_min = 10.0, period_max = 100.0;
    double phase_min = 0.0, phase_max = 2 * std::numbers::pi;
};

// Linear map of a 4-bit value onto [lo, hi].
inline double field_from_bits(int value, double lo, double hi) {
    assert(value >= 0 && value <= 15);
    return lo + (static_cast<double>(value) / 15.0) * (hi - lo);
}

namespace detail {

inline int read_bits(const Genome& g, int start, int count) {
    int v = 0;
    for (int i = 0; i < count; ++i) v = (v << 1) | (g.bit(start + i) ? 1 : 0);
    return v;
}

}  // namespace detail

// Decode layout:
//   bits [0,48)    four rectangle templates, 12 bits each (width, height, angle)
//   bits [48,80)   four circle templates, 8 bits each (radius, angle)
//   bits [80,176)  eight controller templates, 12 bits each (amplitude, period, phase)
//   bits [176,288) tree construction
//
// Tree construction keeps a LIFO stack of open connection points, seeded
// with the root's three points pushed left, top, right. Every 0 bit pops a
// point; a 1 bit consumes six more bits naming a module template (3 bits,
// 0-3 rectangles, 4-7 circles) and a controller template (3 bits), attaches
// the module at the point on top of the stack, and pushes the new module's
// points. Construction stops when the tree bits or the stack run out.
// Decoding is total: any 288-bit string yields a valid creature.
inline CreatureSpec decode(const Genome& g, const DecodeRanges& ranges = {}) {
    std::array<ModuleSpec, 8> modules;
    for (int i = 0; i < 4; ++i) {
        ModuleSpec m;
        m.shape = ModuleShape::Rectangle;
        int base = 12 * i;
        m.width = field_from_bits(detail::read_bits(g, base, 4), ranges.rect_width_min,
                                  ranges.rect_width_max);
        m.height = field_from_bits(detail::read_bits(g, base + 4, 4), ranges.rect_height_min,
                                   ranges.rect_height_max);
        m.attach_angle = field_from_bits(detail::read_bits(g, base + 8, 4),
                                         ranges.attach_angle_min, ranges.attach_angle_max);
        modules[i] = m;
    }
    for (int i = 0; i < 4; ++i) {
        ModuleSpec m;
        m.shape = ModuleShape::Circle;
        int base = 48 + 8 * i;
        m.radius = field_from_bits(detail::read_bits(g, base, 4), ranges.circle_radius_min,
                                   ranges.circle_radius_max);
        m.attach_angle = field_from_bits(detail::read_bits(g, base + 4, 4),
                                         ranges.attach_angle_min, ranges.attach_angle_max);
        modules[4 + i] = m;
    }
    std::array<ControllerSpec, 8> controllers;
    for (int i = 0; i < 8; ++i) {
        int base = 80 + 12 * i;
        controllers[i].amplitude = field_from_bits(detail::read_bits(g, base, 4),
                                                   ranges.amplitude_min, ranges.amplitude_max);
        controllers[i].period = field_from_bits(detail::read_bits(g, base + 4, 4),
                                                ranges.period_min, ranges.period_max);
        controllers[i].phase = field_from_bits(detail::read_bits(g, base + 8, 4),
                                               ranges.phase_min, ranges.phase_max);
    }

    CreatureSpec creature;
    // Root: rectangle template 0 with controller template 0; the root has
    // no parent joint so its controller is inert.
    CreatureNode root;
    root.module = modules[0];
    root.module.controller = controllers[0];
    creature.nodes.push_back(root);

    struct OpenPoint {
        int node;
        int point;
    };
    std::vector<OpenPoint> stack = {{0, 0}, {0, 1}, {0, 2}};

    int pos = 176;
    while (pos < kGenomeBits && !stack.empty()) {
        if (!g.bit(pos)) {
            ++pos;
            stack.pop_back();
            continue;
        }
        ++pos;
        if (pos + 6 > kGenomeBits) break;
        int module_idx = detail::read_bits(g, pos, 3);
        int controller_idx = detail::read_bits(g, pos + 3, 3);
        pos += 6;

        OpenPoint at = stack.back();
        stack.pop_back();

        CreatureNode node;
        node.module = modules[module_idx];
        node.module.controller = controllers[controller_idx];
        node.parent = at.node;
        node.parent_connection_point = at.point;
        int index = static_cast<int>(creature.nodes.size());
        creature.nodes.push_back(node);

        if (node.module.shape == ModuleShape::Rectangle)
            for (int p = 0; p < 3; ++p) stack.push_back({index, p});
    }

    assert(static_cast<int>(creature.nodes.size()) <= kMaxCreatureNodes);
    return creature;
}

}  // namespace evomap
