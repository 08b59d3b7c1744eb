#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "evomap/descriptors.hpp"
#include "evomap/rng.hpp"

using namespace evomap;

TEST_CASE("static descriptor of a flat terrain") {
    Terrain t{};
    for (double& h : t.heights) h = 3.0;
    Descriptor d = static_descriptor(t);
    CHECK(d.d1 == doctest::Approx(3.0));
    CHECK(d.d2 == doctest::Approx(0.0));

    Terrain zero{};
    Descriptor dz = static_descriptor(zero);
    CHECK(dz.d1 == 0.0);
    CHECK(dz.d2 == 0.0);
}

TEST_CASE("static descriptor of a 0.1-per-unit ramp") {
    Terrain t{};
    for (int i = 0; i < kTerrainUnits; ++i) t.heights[i] = 0.1 * i;
    Descriptor d = static_descriptor(t);
    CHECK(d.d1 == doctest::Approx(19.9));
    CHECK(d.d2 == doctest::Approx(5.0));  // 199 diffs of 0.1, mean 0.1, x50
}

TEST_CASE("static descriptor ignores the startpad junction") {
    // a single tall first step: high max height, zero interior steepness
    Terrain t{};
    for (double& h : t.heights) h = 20.0;
    Descriptor d = static_descriptor(t);
    CHECK(d.d1 == doctest::Approx(20.0));
    CHECK(d.d2 == doctest::Approx(0.0));
}

TEST_CASE("dynamic descriptor uses node count and scaled reconstruction error") {
    Rng rng(2);
    Mlp m = ae_init(rng);
    Cppn flat = cppn_init_flat();
    Terrain t = generate_terrain(flat);
    Descriptor d = dynamic_descriptor(flat, t, m);
    CHECK(d.d1 == 3.0);
    CHECK(d.d2 >= 0.0);
    CHECK(d.d2 == doctest::Approx(kDynamicErrorScale * ae_reconstruction_error(m, t)));
}

TEST_CASE("binning clamps and places as specified") {
    CHECK(bin({0.0, 0.0}, BinMode::StaticArchive) == CellIndex{0, 0});
    CHECK(bin({24.9, 24.9}, BinMode::StaticArchive) == CellIndex{24, 24});
    CHECK(bin({300.0, 300.0}, BinMode::StaticArchive) == CellIndex{24, 24});
    CHECK(bin({3.0, 0.0}, BinMode::DynamicArchive) == CellIndex{0, 0});
    CHECK(bin({12.0, 4.2}, BinMode::DynamicArchive) == CellIndex{9, 4});
    CHECK(bin({0.0, 0.0}, BinMode::Reference) == CellIndex{0, 0});
    CHECK(bin({24.9, 24.9}, BinMode::Reference) == CellIndex{99, 99});
    CHECK(bin({5.1, 2.6}, BinMode::Reference) == CellIndex{20, 10});
}

TEST_CASE("non-finite descriptors are rejected") {
    CHECK_THROWS(bin({std::numeric_limits<double>::quiet_NaN(), 0.0},
                     BinMode::StaticArchive));
    CHECK_THROWS(bin({0.0, std::numeric_limits<double>::infinity()},
                     BinMode::Reference));
}

TEST_CASE("binning is monotone in each coordinate") {
    Rng rng(44);
    for (auto mode : {BinMode::StaticArchive, BinMode::DynamicArchive, BinMode::Reference}) {
        for (int i = 0; i < 500; ++i) {
            double a1 = rng.uniform(0.0, 30.0), a2 = rng.uniform(0.0, 30.0);
            double b1 = a1 + rng.uniform(0.0, 5.0), b2 = a2 + rng.uniform(0.0, 5.0);
            CellIndex ca = bin({a1, a2}, mode);
            CellIndex cb = bin({b1, b2}, mode);
            CHECK(cb.row >= ca.row);
            CHECK(cb.col >= ca.col);
        }
    }
}

TEST_CASE("every finite descriptor lands in bounds") {
    Rng rng(45);
    for (int i = 0; i < 2000; ++i) {
        Descriptor d{rng.uniform(-100.0, 1000.0), rng.uniform(-100.0, 1000.0)};
        for (auto mode : {BinMode::StaticArchive, BinMode::DynamicArchive}) {
            CellIndex c = bin(d, mode);
            CHECK(c.row >= 0);
            CHECK(c.row < kArchiveGrid);
            CHECK(c.col >= 0);
            CHECK(c.col < kArchiveGrid);
        }
        CellIndex r = bin(d, BinMode::Reference);
        CHECK(r.row >= 0);
        CHECK(r.row < kReferenceGrid);
        CHECK(r.col >= 0);
        CHECK(r.col < kReferenceGrid);
    }
}

TEST_CASE("static descriptor depends only on the terrain") {
    Rng rng(46);
    Cppn c = cppn_mutate(cppn_init_flat(), rng);
    Terrain t = generate_terrain(c);
    Descriptor a = static_descriptor(t);
    Descriptor b = static_descriptor(t);
    CHECK(a.d1 == b.d1);
    CHECK(a.d2 == b.d2);
}
