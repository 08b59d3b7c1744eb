#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "evomap/map_elites.hpp"
#include "evomap/rng.hpp"

using namespace evomap;

namespace {

RunConfig small_config() {
    RunConfig cfg;
    cfg.seed = 11;
    cfg.batch_size = 10;
    cfg.bootstrap_size = 20;
    cfg.sim.max_steps = 200;  // desk-scale physics budget
    cfg.ae_epochs = 5;
    return cfg;
}

Pair synthetic_pair(double fitness, double d1, double d2) {
    Pair p;
    p.cppn = cppn_init_flat();
    p.terrain = generate_terrain(p.cppn);
    p.fitness = fitness;
    p.descriptor = {d1, d2};
    return p;
}

bool archives_equal(const Archive& a, const Archive& b) {
    for (int r = 0; r < kArchiveGrid; ++r)
        for (int c = 0; c < kArchiveGrid; ++c) {
            const auto& x = a.at(r, c);
            const auto& y = b.at(r, c);
            if (x.has_value() != y.has_value()) return false;
            if (x && (x->fitness != y->fitness || !(x->genome == y->genome))) return false;
        }
    return true;
}

}  // namespace

TEST_CASE("insertion rules: threshold, replacement, ties") {
    Archive a(ArchiveMode::Static);

    // empty cell below the threshold
    CHECK(a.try_insert(synthetic_pair(99.0, 5.0, 5.0)) == InsertOutcome::RejectedThreshold);
    CHECK(a.occupancy() == 0);

    // exactly at the threshold is still rejected (must be strictly above)
    CHECK(a.try_insert(synthetic_pair(100.0, 5.0, 5.0)) == InsertOutcome::RejectedThreshold);

    CHECK(a.try_insert(synthetic_pair(150.0, 5.0, 5.0)) == InsertOutcome::InsertedEmpty);
    CHECK(a.occupancy() == 1);

    // occupied cell: lower fitness rejected
    CHECK(a.try_insert(synthetic_pair(120.0, 5.0, 5.0)) == InsertOutcome::RejectedWorse);
    CHECK(a.at(5, 5)->fitness == 150.0);

    // tie keeps the incumbent
    CHECK(a.try_insert(synthetic_pair(150.0, 5.0, 5.0)) == InsertOutcome::RejectedWorse);

    // higher fitness replaces
    CHECK(a.try_insert(synthetic_pair(151.0, 5.0, 5.0)) == InsertOutcome::Replaced);
    CHECK(a.at(5, 5)->fitness == 151.0);
}

TEST_CASE("bootstrap places pairs without a fitness threshold") {
    RunConfig cfg = small_config();
    cfg.bootstrap_size = 1;
    MapElites search(cfg);
    RunResult result;
    Archive a = search.bootstrap(result);
    CHECK(a.occupancy() == 1);  // bootstrap fitness is certainly below 100

    cfg.bootstrap_size = 50;
    MapElites bigger(cfg);
    RunResult r2;
    Archive b = bigger.bootstrap(r2);
    CHECK(b.occupancy() >= 1);
    CHECK(b.occupancy() <= 50);
}

TEST_CASE("bootstrap is deterministic per seed") {
    RunConfig cfg = small_config();
    MapElites s1(cfg), s2(cfg);
    RunResult r1, r2;
    CHECK(archives_equal(s1.bootstrap(r1), s2.bootstrap(r2)));
}

TEST_CASE("select_batch draws uniformly with replacement from occupied cells") {
    Archive a(ArchiveMode::Static);
    a.place(synthetic_pair(50.0, 2.0, 2.0));
    MapElites search(small_config());
    Rng rng(5);
    std::vector<Pair> batch = search.select_batch(a, 5, rng);
    REQUIRE(batch.size() == 5);
    for (const auto& p : batch) CHECK(p.fitness == 50.0);

    Archive empty(ArchiveMode::Static);
    CHECK_THROWS(search.select_batch(empty, 1, rng));

    Rng ra(9), rb(9);
    a.place(synthetic_pair(60.0, 3.0, 3.0));
    auto ba = search.select_batch(a, 20, ra);
    auto bb = search.select_batch(a, 20, rb);
    for (std::size_t i = 0; i < ba.size(); ++i) CHECK(ba[i].fitness == bb[i].fitness);
}

TEST_CASE("mutate_pair mutates the agent always and the environment sometimes") {
    RunConfig cfg = small_config();
    Pair parent = synthetic_pair(0.0, 0.0, 0.0);
    Rng rng(3);

    cfg.env_mutation_prob = 0.0;
    Pair child = mutate_pair(parent, rng, cfg);
    CHECK(terrain_distance(child.terrain, parent.terrain) == 0.0);

    cfg.env_mutation_prob = 0.2;
    int env_mutations = 0;
    long bit_flips = 0;
    const int samples = 1000;
    for (int i = 0; i < samples; ++i) {
        Pair c = mutate_pair(parent, rng, cfg);
        bit_flips += genome_hamming(parent.genome, c.genome);
        if (c.cppn.connections.size() != parent.cppn.connections.size() ||
            terrain_distance(c.terrain, parent.terrain) > 0.0 ||
            c.cppn.node_count() != parent.cppn.node_count())
            ++env_mutations;
        else {
            bool weights_differ = false;
            for (std::size_t k = 0; k < c.cppn.connections.size(); ++k)
                if (c.cppn.connections[k].weight != parent.cppn.connections[k].weight)
                    weights_differ = true;
            if (weights_differ) ++env_mutations;
        }
    }
    double env_rate = static_cast<double>(env_mutations) / samples;
    CHECK(env_rate > 0.16);
    CHECK(env_rate < 0.24);
    double mean_flips = static_cast<double>(bit_flips) / samples;
    CHECK(mean_flips > 12.4);
    CHECK(mean_flips < 16.4);
}

TEST_CASE("rebin keeps the higher-fitness pair on collision and never grows") {
    Archive a(ArchiveMode::Static);
    a.place(synthetic_pair(150.0, 4.0, 4.0));
    a.place(synthetic_pair(120.0, 6.0, 6.0));
    a.place(synthetic_pair(90.0, 8.0, 8.0));
    int before = a.occupancy();

    // identity rebin: nothing moves
    Archive same = rebin(a, [](const Pair& p) { return p.descriptor; });
    CHECK(archives_equal(a, same));

    // collapse everything into one cell: the fittest survives
    Archive collapsed = rebin(a, [](const Pair&) { return Descriptor{1.0, 1.0}; });
    CHECK(collapsed.occupancy() == 1);
    CHECK(collapsed.at(1, 1)->fitness == 150.0);
    CHECK(collapsed.occupancy() <= before);
}

TEST_CASE("zero iterations returns the bootstrap archive") {
    RunConfig cfg = small_config();
    cfg.iterations = 0;
    MapElites search(cfg);
    RunResult result = search.run();
    CHECK(result.log.size() == 1);
    CHECK(result.archive.occupancy() == result.bootstrap_stats.occupancy);
    CHECK(result.evaluations == cfg.bootstrap_size);
}

TEST_CASE("static runs keep per-cell fitness and coverage monotone") {
    RunConfig cfg = small_config();
    cfg.iterations = 8;
    MapElites search(cfg);

    std::vector<std::vector<double>> fitness_snapshots;
    std::vector<int> coverage;
    cfg.snapshot_interval = 1;
    MapElites tracked(cfg);
    tracked.set_snapshot_hook([&](int, const Archive& a, const Mlp*) {
        std::vector<double> grid(kArchiveGrid * kArchiveGrid, -1.0);
        for (const CellIndex& cell : a.occupied_cells())
            grid[cell.row * kArchiveGrid + cell.col] = a.at(cell.row, cell.col)->fitness;
        fitness_snapshots.push_back(grid);
        coverage.push_back(a.occupancy());
    });
    tracked.run();

    REQUIRE(fitness_snapshots.size() >= 2);
    for (std::size_t s = 1; s < fitness_snapshots.size(); ++s) {
        CHECK(coverage[s] >= coverage[s - 1]);
        for (int i = 0; i < kArchiveGrid * kArchiveGrid; ++i)
            CHECK(fitness_snapshots[s][i] >= fitness_snapshots[s - 1][i]);
    }
}

TEST_CASE("serial and parallel runs produce identical archives") {
    RunConfig cfg = small_config();
    cfg.iterations = 4;
    cfg.workers = 1;
    MapElites serial(cfg);
    RunResult rs = serial.run();

    cfg.workers = 4;
    MapElites parallel(cfg);
    RunResult rp = parallel.run();

    CHECK(archives_equal(rs.archive, rp.archive));
    CHECK(rs.evaluations == rp.evaluations);
}

TEST_CASE("dynamic mode retrains, rebins, and never gains coverage at a retrain") {
    RunConfig cfg = small_config();
    cfg.mode = ArchiveMode::Dynamic;
    cfg.iterations = 6;
    cfg.retrain_interval = 2;
    cfg.snapshot_interval = 1;
    MapElites search(cfg);
    RunResult result = search.run();
    REQUIRE(result.autoencoder.has_value());

    // log covers bootstrap + each iteration; retrains happen at 2, 4, 6
    REQUIRE(result.log.size() == 7);
    for (std::size_t i = 1; i < result.log.size(); ++i) {
        if (static_cast<int>(i) % cfg.retrain_interval != 0)
            CHECK(result.log[i].occupancy >= result.log[i - 1].occupancy);
    }
}

TEST_CASE("invalid configurations are rejected before any work") {
    RunConfig cfg = small_config();
    cfg.mode = ArchiveMode::Dynamic;
    cfg.retrain_interval = 0;
    CHECK_THROWS(MapElites{cfg});

    RunConfig bad = small_config();
    bad.batch_size = 0;
    CHECK_THROWS(MapElites{bad});

    RunConfig negative = small_config();
    negative.iterations = -1;
    CHECK_THROWS(MapElites{negative});
}

TEST_CASE("stored pairs were either bootstrapped or beat the threshold") {
    RunConfig cfg = small_config();
    cfg.iterations = 5;
    MapElites search(cfg);
    RunResult bootstrap_only;
    Archive bootstrap = search.bootstrap(bootstrap_only);

    MapElites full(cfg);
    RunResult result = full.run();
    for (const CellIndex& cell : result.archive.occupied_cells()) {
        const Pair& p = *result.archive.at(cell.row, cell.col);
        // cells empty after bootstrap can only be filled above the threshold
        if (!bootstrap.at(cell.row, cell.col)) CHECK(p.fitness > cfg.insert_threshold);
    }
}
