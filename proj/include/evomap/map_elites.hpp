#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "evomap/analysis.hpp"
#include "evomap/autoencoder.hpp"
#include "evomap/cppn.hpp"
#include "evomap/descriptors.hpp"
#include "evomap/genome.hpp"
#include "evomap/physics.hpp"

namespace evomap {

enum class ArchiveMode { Static, Dynamic };

enum class InsertOutcome { InsertedEmpty, Replaced, RejectedThreshold, RejectedWorse };

// 25x25 elitist grid of pairs keyed by binned descriptors.
class Archive {
public:
    explicit Archive(ArchiveMode mode)
        : mode_(mode), cells_(kArchiveGrid * kArchiveGrid) {}

    ArchiveMode mode() const { return mode_; }

    BinMode bin_mode() const {
        return mode_ == ArchiveMode::Static ? BinMode::StaticArchive
                                            : BinMode::DynamicArchive;
    }

    std::optional<Pair>& at(int row, int col) { return cells_[row * kArchiveGrid + col]; }
    const std::optional<Pair>& at(int row, int col) const {
        return cells_[row * kArchiveGrid + col];
    }

    int occupancy() const {
        int n = 0;
        for (const auto& c : cells_)
            if (c) ++n;
        return n;
    }

    std::vector<CellIndex> occupied_cells() const {
        std::vector<CellIndex> out;
        for (int r = 0; r < kArchiveGrid; ++r)
            for (int c = 0; c < kArchiveGrid; ++c)
                if (at(r, c)) out.push_back({r, c});
        return out;
    }

    std::vector<Terrain> terrains() const {
        std::vector<Terrain> out;
        for (const auto& c : cells_)
            if (c) out.push_back(c->terrain);
        return out;
    }

    double max_fitness() const {
        double best = 0.0;
        for (const auto& c : cells_)
            if (c && c->fitness > best) best = c->fitness;
        return best;
    }

    double mean_fitness() const {
        double total = 0.0;
        int n = 0;
        for (const auto& c : cells_)
            if (c) {
                total += c->fitness;
                ++n;
            }
        return n > 0 ? total / n : 0.0;
    }

    // Elitist placement used during bootstrap and re-binning: no fitness
    // threshold, collisions keep the higher-fitness pair.
    void place(const Pair& p) {
        CellIndex cell = bin(p.descriptor, bin_mode());
        auto& slot = at(cell.row, cell.col);
        if (!slot || p.fitness > slot->fitness) slot = p;
    }

    // Steady-state insertion: empty cells require fitness above the
    // threshold; occupied cells keep the higher fitness, ties keep the
    // incumbent.
    InsertOutcome try_insert(const Pair& p, double threshold = 100.0) {
        CellIndex cell = bin(p.descriptor, bin_mode());
        auto& slot = at(cell.row, cell.col);
        if (!slot) {
            if (p.fitness > threshold) {
                slot = p;
                return InsertOutcome::InsertedEmpty;
            }
            return InsertOutcome::RejectedThreshold;
        }
        if (p.fitness > slot->fitness) {
            slot = p;
            return InsertOutcome::Replaced;
        }
        return InsertOutcome::RejectedWorse;
    }

    int iteration = 0;

private:
    ArchiveMode mode_;
    std::vector<std::optional<Pair>> cells_;
};

// Re-place all stored pairs under a new descriptor snapshot; collisions are
// resolved elitistically, so occupancy can only stay equal or drop.
inline Archive rebin(const Archive& a,
                     const std::function<Descriptor(const Pair&)>& descriptor_fn) {
    Archive fresh(a.mode());
    fresh.iteration = a.iteration;
    for (const CellIndex& cell : a.occupied_cells()) {
        Pair p = *a.at(cell.row, cell.col);
        p.descriptor = descriptor_fn(p);
        fresh.place(p);
    }
    return fresh;
}

struct RunConfig {
    ArchiveMode mode = ArchiveMode::Static;
    std::uint64_t seed = 1;
    int iterations = 0;
    double wall_clock_seconds = 0.0;  // 0 = unlimited
    int batch_size = 500;
    int bootstrap_size = 500;
    double env_mutation_prob = 0.2;
    double bit_flip_prob = 0.05;
    double insert_threshold = 100.0;
    int retrain_interval = 100;
    int ae_epochs = 200;
    int ae_batch_size = 32;
    double ae_learning_rate = 1e-3;
    int workers = 1;
    int snapshot_interval = 10;
    SimConfig sim;
    CppnMutationConfig cppn_mutation;
    DecodeRanges decode_ranges;

    void validate() const {
        if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
        if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
        if (bootstrap_size < 1) throw std::invalid_argument("bootstrap_size must be >= 1");
        if (env_mutation_prob < 0.0 || env_mutation_prob > 1.0)
            throw std::invalid_argument("env_mutation_prob must be in [0,1]");
        if (bit_flip_prob < 0.0 || bit_flip_prob > 1.0)
            throw std::invalid_argument("bit_flip_prob must be in [0,1]");
        if (mode == ArchiveMode::Dynamic && retrain_interval < 1)
            throw std::invalid_argument("retrain_interval must be >= 1 in dynamic mode");
        if (ae_epochs < 1) throw std::invalid_argument("ae_epochs must be >= 1");
        if (ae_batch_size < 1) throw std::invalid_argument("ae_batch_size must be >= 1");
        if (workers < 1) throw std::invalid_argument("workers must be >= 1");
        if (snapshot_interval < 1) throw std::invalid_argument("snapshot_interval must be >= 1");
        if (wall_clock_seconds < 0.0)
            throw std::invalid_argument("wall_clock_seconds must be >= 0");
    }
};

struct IterationStats {
    int iteration = 0;
    int occupancy = 0;
    double mean_fitness = 0.0;
    double max_fitness = 0.0;
};

struct RunResult {
    Archive archive{ArchiveMode::Static};
    std::optional<Mlp> autoencoder;
    std::vector<IterationStats> log;
    IterationStats bootstrap_stats;
    std::int64_t evaluations = 0;
};

namespace detail {

// Deterministic fan-out over a batch: each slot's work is a pure function
// of its own derived rng stream, so results are independent of the worker
// count and of completion order.
template <typename Fn>
void parallel_for(int count, int workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    int n_threads = std::min(workers, count);
    pool.reserve(n_threads);
    for (int w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w]() {
            for (int i = w; i < count; i += n_threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Offspring operator: the agent genome is always mutated; the environment
// with the configured probability, refreshing the terrain cache. Fitness
// and descriptor are recomputed by the caller at evaluation time.
inline Pair mutate_pair(const Pair& parent, Rng& rng, const RunConfig& cfg) {
    Pair child = parent;
    child.genome = genome_mutate(parent.genome, rng, cfg.bit_flip_prob);
    if (rng.bernoulli(cfg.env_mutation_prob)) {
        child.cppn = cppn_mutate(parent.cppn, rng, cfg.cppn_mutation);
        child.terrain = generate_terrain(child.cppn);
    }
    return child;
}

class MapElites {
public:
    explicit MapElites(RunConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    using Observer = std::function<void(const Pair&)>;
    using SnapshotHook = std::function<void(int iteration, const Archive&, const Mlp*)>;

    void set_observer(Observer obs) { observer_ = std::move(obs); }
    void set_snapshot_hook(SnapshotHook hook) { snapshot_hook_ = std::move(hook); }

    // 500 random pairs: environments are single mutations of the flat base,
    // agents are uniform random genomes. Placement is elitist with no
    // fitness threshold.
    Archive bootstrap(RunResult& result) {
        std::vector<Pair> pairs(cfg_.bootstrap_size);
        detail::parallel_for(cfg_.bootstrap_size, cfg_.workers, [&](int i) {
            Rng rng = Rng::derive(cfg_.seed, 0, static_cast<std::uint64_t>(i));
            Pair p;
            p.cppn = cppn_mutate(cppn_init_flat(), rng, cfg_.cppn_mutation);
            p.terrain = generate_terrain(p.cppn);
            p.genome = genome_random(rng);
            p.fitness = evaluate(decode(p.genome, cfg_.decode_ranges), p.terrain, cfg_.sim).fitness;
            pairs[i] = p;
        });
        result.evaluations += cfg_.bootstrap_size;

        if (cfg_.mode == ArchiveMode::Dynamic) {
            // The autoencoder bootstraps on the same freshly generated
            // simple terrains before anything is binned.
            Rng ae_rng = Rng::derive(cfg_.seed, 0, 0, kAeStreamTag);
            autoencoder_ = ae_init(ae_rng);
            std::vector<Terrain> terrains;
            terrains.reserve(pairs.size());
            for (const auto& p : pairs) terrains.push_back(p.terrain);
            ae_train(*autoencoder_, terrains, cfg_.ae_epochs, cfg_.ae_batch_size,
                     cfg_.ae_learning_rate, ae_rng);
        }

        Archive archive(cfg_.mode);
        for (auto& p : pairs) {
            p.descriptor = describe(p);
            if (observer_) observer_(p);
            archive.place(p);
        }
        return archive;
    }

    // Uniform selection with replacement over occupied cells.
    std::vector<Pair> select_batch(const Archive& archive, int n, Rng& rng) const {
        std::vector<CellIndex> occupied = archive.occupied_cells();
        if (occupied.empty()) throw std::logic_error("cannot select from an empty archive");
        std::vector<Pair> batch;
        batch.reserve(n);
        for (int i = 0; i < n; ++i) {
            CellIndex cell = occupied[rng.uniform_int(occupied.size())];
            batch.push_back(*archive.at(cell.row, cell.col));
        }
        return batch;
    }

    RunResult run() {
        auto start_time = std::chrono::steady_clock::now();
        RunResult result;
        Archive archive = bootstrap(result);
        result.bootstrap_stats = stats_of(archive, 0);
        result.log.push_back(result.bootstrap_stats);
        if (snapshot_hook_) snapshot_hook_(0, archive, current_ae());

        for (int iter = 1; iter <= cfg_.iterations; ++iter) {
            if (cfg_.wall_clock_seconds > 0.0) {
                std::chrono::duration<double> elapsed =
                    std::chrono::steady_clock::now() - start_time;
                if (elapsed.count() >= cfg_.wall_clock_seconds) break;
            }

            // Select: all draws read the archive state from the start of
            // the iteration.
            Rng select_rng = Rng::derive(cfg_.seed, static_cast<std::uint64_t>(iter), 0,
                                         kSelectStreamTag);
            std::vector<Pair> parents = select_batch(archive, cfg_.batch_size, select_rng);

            // Mutate + evaluate in parallel; each slot owns a derived stream.
            std::vector<Pair> offspring(cfg_.batch_size);
            detail::parallel_for(cfg_.batch_size, cfg_.workers, [&](int i) {
                Rng rng = Rng::derive(cfg_.seed, static_cast<std::uint64_t>(iter),
                                      static_cast<std::uint64_t>(i) + 1);
                Pair child = mutate_pair(parents[i], rng, cfg_);
                child.fitness =
                    evaluate(decode(child.genome, cfg_.decode_ranges), child.terrain, cfg_.sim)
                        .fitness;
                child.descriptor = describe(child);
                offspring[i] = child;
            });
            result.evaluations += cfg_.batch_size;

            // Insert sequentially in batch order.
            for (const Pair& child : offspring) {
                if (observer_) observer_(child);
                archive.try_insert(child, cfg_.insert_threshold);
            }
            archive.iteration = iter;

            if (cfg_.mode == ArchiveMode::Dynamic && iter % cfg_.retrain_interval == 0) {
                Rng ae_rng = Rng::derive(cfg_.seed, static_cast<std::uint64_t>(iter), 0,
                                         kAeStreamTag);
                ae_train(*autoencoder_, archive.terrains(), cfg_.ae_epochs, cfg_.ae_batch_size,
                         cfg_.ae_learning_rate, ae_rng);
                archive = rebin(archive, [this](const Pair& p) { return describe(p); });
            }

            result.log.push_back(stats_of(archive, iter));
            if (snapshot_hook_ &&
                (iter % cfg_.snapshot_interval == 0 || iter == cfg_.iterations))
                snapshot_hook_(iter, archive, current_ae());
        }

        result.archive = archive;
        result.autoencoder = autoencoder_;
        return result;
    }

    Descriptor describe(const Pair& p) const {
        if (cfg_.mode == ArchiveMode::Static) return static_descriptor(p.terrain);
        return dynamic_descriptor(p.cppn, p.terrain, *autoencoder_);
    }

    const Mlp* current_ae() const { return autoencoder_ ? &*autoencoder_ : nullptr; }
    const RunConfig& config() const { return cfg_; }

private:
    static constexpr std::uint64_t kSelectStreamTag = 0x53454c45;  // "SELE"
    static constexpr std::uint64_t kAeStreamTag = 0x41453030;      // "AE00"

    static IterationStats stats_of(const Archive& a, int iter) {
        return {iter, a.occupancy(), a.mean_fitness(), a.max_fitness()};
    }

    RunConfig cfg_;
    std::optional<Mlp> autoencoder_;
    Observer observer_;
    SnapshotHook snapshot_hook_;
};

}  // namespace evomap
