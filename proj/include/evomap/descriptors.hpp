#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "evomap/autoencoder.hpp"
#include "evomap/cppn.hpp"

namespace evomap {

struct Descriptor {
    double d1 = 0.0;
    double d2 = 0.0;  // already scaled
};

struct CellIndex {
    int row = 0;
    int col = 0;
    bool operator==(const CellIndex&) const = default;
};

inline constexpr int kArchiveGrid = 25;
inline constexpr int kReferenceGrid = 100;
inline constexpr double kStaticSteepnessScale = 50.0;
inline constexpr double kDynamicErrorScale = 5.0;
inline constexpr int kMinCppnNodes = 3;

// Static dimensions: maximum terrain height, and average steepness over the
// 199 interior unit differences scaled by 50. The startpad junction is
// excluded, so a single tall first step gives a high first dimension with
// near-zero steepness.
inline Descriptor static_descriptor(const Terrain& t) {
    Descriptor d;
    d.d1 = *std::max_element(t.heights.begin(), t.heights.end());
    double total = 0.0;
    for (int i = 0; i + 1 < kTerrainUnits; ++i)
        total += std::abs(t.heights[i + 1] - t.heights[i]);
    d.d2 = kStaticSteepnessScale * total / (kTerrainUnits - 1);
    return d;
}

// Dynamic dimensions: CPPN node count, and autoencoder reconstruction error
// scaled by 5 against a frozen network snapshot.
inline Descriptor dynamic_descriptor(const Cppn& c, const Terrain& t, const Mlp& m) {
    Descriptor d;
    d.d1 = static_cast<double>(c.node_count());
    d.d2 = kDynamicErrorScale * ae_reconstruction_error(m, t);
    return d;
}

enum class BinMode { StaticArchive, DynamicArchive, Reference };

inline CellIndex bin(const Descriptor& d, BinMode mode) {
    if (!std::isfinite(d.d1) || !std::isfinite(d.d2))
        throw std::invalid_argument("descriptor is not finite");
    CellIndex cell;
    switch (mode) {
        case BinMode::StaticArchive:
            cell.row = std::clamp(static_cast<int>(std::floor(d.d1)), 0, kArchiveGrid - 1);
            cell.col = std::clamp(static_cast<int>(std::floor(d.d2)), 0, kArchiveGrid - 1);
            break;
        case BinMode::DynamicArchive:
            // node count offset so the minimal flat-base topology lands in row 0
            cell.row = std::clamp(static_cast<int>(std::floor(d.d1)) - kMinCppnNodes, 0,
                                  kArchiveGrid - 1);
            cell.col = std::clamp(static_cast<int>(std::floor(d.d2)), 0, kArchiveGrid - 1);
            break;
        case BinMode::Reference:
            cell.row = std::clamp(static_cast<int>(std::floor(4.0 * d.d1)), 0, kReferenceGrid - 1);
            cell.col = std::clamp(static_cast<int>(std::floor(4.0 * d.d2)), 0, kReferenceGrid - 1);
            break;
    }
    return cell;
}

}  // namespace evomap
