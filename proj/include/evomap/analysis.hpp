#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "evomap/cppn.hpp"
#include "evomap/descriptors.hpp"
#include "evomap/genome.hpp"

namespace evomap {

// One evaluated terrain/agent pair, the unit stored in every archive cell.
struct Pair {
    Genome genome;
    Cppn cppn;
    Terrain terrain;  // cache of generate_terrain(cppn)
    double fitness = 0.0;
    Descriptor descriptor;
};

// 100x100 elitist recording grid over the static dimensions. Observes every
// evaluated pair regardless of archive placement.
class ReferenceMap {
public:
    ReferenceMap() : fitness_(kReferenceGrid * kReferenceGrid) {}

    void update(const Pair& p) {
        CellIndex cell = bin(static_descriptor(p.terrain), BinMode::Reference);
        auto& slot = fitness_[cell.row * kReferenceGrid + cell.col];
        if (!slot || p.fitness > *slot) slot = p.fitness;
    }

    const std::optional<double>& at(int row, int col) const {
        return fitness_[row * kReferenceGrid + col];
    }

    int occupancy() const {
        int n = 0;
        for (const auto& s : fitness_)
            if (s) ++n;
        return n;
    }

    double fitness_sum() const {
        double total = 0.0;
        for (const auto& s : fitness_)
            if (s) total += *s;
        return total;
    }

private:
    std::vector<std::optional<double>> fitness_;
};

struct ArchivedEnvironment {
    Terrain terrain;
    Genome genome;
    double fitness = 0.0;
};

// Distance-deduplicated list of explored environments. "Found" uses radius
// 25 with no fitness requirement; "solved" uses radius 2.5 and requires
// fitness above 200.
class EnvironmentArchive {
public:
    EnvironmentArchive(double radius, double min_fitness)
        : radius_(radius), min_fitness_(min_fitness) {}

    static EnvironmentArchive found() { return EnvironmentArchive(25.0, -1.0); }
    static EnvironmentArchive solved() { return EnvironmentArchive(2.5, 200.0); }

    bool record(const Pair& p) {
        if (min_fitness_ >= 0.0 && p.fitness <= min_fitness_) return false;
        for (const auto& e : entries_)
            if (terrain_distance(e.terrain, p.terrain) < radius_) return false;
        entries_.push_back({p.terrain, p.genome, p.fitness});
        return true;
    }

    const std::vector<ArchivedEnvironment>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    double radius() const { return radius_; }

private:
    double radius_;
    double min_fitness_;
    std::vector<ArchivedEnvironment> entries_;
};

// Steepness categories, symmetric around the closed flat band
// [-0.024, 0.024]. Index 0 is the steepest descent, 6 the steepest ascent.
inline int steepness_category(double s) {
    if (s < -2.4) return 0;
    if (s < -0.24) return 1;
    if (s < -0.024) return 2;
    if (s <= 0.024) return 3;
    if (s <= 0.24) return 4;
    if (s <= 2.4) return 5;
    return 6;
}

// Difficulty value per hill: rows are length buckets 1-3, 4-8, >8; columns
// the seven steepness categories.
inline constexpr int kHillValues[3][7] = {
    {-3, -2, -1, 0, 2, 4, 6},
    {-4, -3, -2, 0, 4, 6, 8},
    {-5, -4, -3, 0, 6, 8, 10},
};

inline int hill_length_bucket(int length) {
    if (length <= 3) return 0;
    if (length <= 8) return 1;
    return 2;
}

// Sum over hills, where a hill is a maximal run of consecutive unit
// steepness values sharing one category.
inline int difficulty(const Terrain& t) {
    int total = 0;
    int run_category = -1;
    int run_length = 0;
    for (int i = 0; i + 1 < kTerrainUnits; ++i) {
        int cat = steepness_category(t.heights[i + 1] - t.heights[i]);
        if (cat == run_category) {
            ++run_length;
        } else {
            if (run_length > 0)
                total += kHillValues[hill_length_bucket(run_length)][run_category];
            run_category = cat;
            run_length = 1;
        }
    }
    if (run_length > 0) total += kHillValues[hill_length_bucket(run_length)][run_category];
    return total;
}

struct RunStats {
    double reference_coverage = 0.0;      // fraction of reference cells occupied
    double mean_present_fitness = 0.0;    // mean over occupied reference cells
    double average_map_fitness = 0.0;     // fitness sum / total cell count
    std::size_t found_count = 0;
    std::size_t solved_count = 0;
    std::map<int, int> found_difficulty_histogram;
    std::map<int, int> solved_difficulty_histogram;
};

struct Recorders {
    ReferenceMap reference;
    EnvironmentArchive found = EnvironmentArchive::found();
    EnvironmentArchive solved = EnvironmentArchive::solved();

    void observe(const Pair& p) {
        reference.update(p);
        found.record(p);
        solved.record(p);
    }
};

inline RunStats summarize(const ReferenceMap& r, const EnvironmentArchive& f,
                          const EnvironmentArchive& s) {
    RunStats stats;
    const double cells = static_cast<double>(kReferenceGrid) * kReferenceGrid;
    int occupied = r.occupancy();
    double sum = r.fitness_sum();
    stats.reference_coverage = occupied / cells;
    stats.mean_present_fitness = occupied > 0 ? sum / occupied : 0.0;
    stats.average_map_fitness = sum / cells;
    stats.found_count = f.size();
    stats.solved_count = s.size();
    for (const auto& e : f.entries()) ++stats.found_difficulty_histogram[difficulty(e.terrain)];
    for (const auto& e : s.entries()) ++stats.solved_difficulty_histogram[difficulty(e.terrain)];
    return stats;
}

}  // namespace evomap
