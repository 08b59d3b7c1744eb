#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include "evomap/genome.hpp"
#include "evomap/rng.hpp"

using namespace evomap;

TEST_CASE("genome_random is deterministic per seed") {
    Rng a(42), b(42);
    CHECK(genome_random(a) == genome_random(b));
}

TEST_CASE("random genomes have unbiased bits") {
    Rng rng(7);
    long ones = 0;
    const int samples = 1000;
    for (int i = 0; i < samples; ++i) {
        Genome g = genome_random(rng);
        for (int b = 0; b < kGenomeBits; ++b) ones += g.bit(b) ? 1 : 0;
    }
    double mean = static_cast<double>(ones) / (samples * kGenomeBits);
    CHECK(mean > 0.45);
    CHECK(mean < 0.55);
}

TEST_CASE("mutation flips the expected number of bits") {
    Rng rng(11);
    Genome parent = genome_random(rng);
    long total = 0;
    const int samples = 1000;
    for (int i = 0; i < samples; ++i)
        total += genome_hamming(parent, genome_mutate(parent, rng));
    double mean = static_cast<double>(total) / samples;
    CHECK(mean > 14.4 - 2.0);
    CHECK(mean < 14.4 + 2.0);
}

TEST_CASE("zero flip probability is the identity; same seed same offspring") {
    Rng rng(3);
    Genome parent = genome_random(rng);
    Rng m(5);
    CHECK(genome_mutate(parent, m, 0.0) == parent);
    Rng a(9), b(9);
    CHECK(genome_mutate(parent, a) == genome_mutate(parent, b));
}

TEST_CASE("all-zero genome decodes to the lone root module") {
    Genome g{};
    CreatureSpec c = decode(g);
    REQUIRE(c.nodes.size() == 1);
    CHECK(c.nodes[0].module.shape == ModuleShape::Rectangle);
    CHECK(c.nodes[0].parent == -1);
    // rectangle template 0 with all-zero fields: minimum width/height
    CHECK(c.nodes[0].module.width == doctest::Approx(0.25));
    CHECK(c.nodes[0].module.height == doctest::Approx(0.25));
}

TEST_CASE("tree bits 1 followed by zeros attach one child from template 0") {
    Genome g{};
    g.set_bit(176, true);  // first tree bit; the following six are zero
    CreatureSpec c = decode(g);
    REQUIRE(c.nodes.size() == 2);
    CHECK(c.nodes[1].parent == 0);
    CHECK(c.nodes[1].module.shape == ModuleShape::Rectangle);  // module index 0
    // attached at the most recently pushed root point: the right side
    CHECK(c.nodes[1].parent_connection_point == 2);
    // controller template 0 with all-zero fields
    CHECK(c.nodes[1].module.controller.amplitude == doctest::Approx(0.0));
    CHECK(c.nodes[1].module.controller.period == doctest::Approx(10.0));
}

TEST_CASE("module index 4 selects the first circle template") {
    Genome g{};
    g.set_bit(176, true);
    g.set_bit(177, true);  // module index bits 100 -> 4
    CreatureSpec c = decode(g);
    REQUIRE(c.nodes.size() >= 2);
    CHECK(c.nodes[1].module.shape == ModuleShape::Circle);
}

TEST_CASE("field_from_bits maps the 4-bit range linearly") {
    CHECK(field_from_bits(0, 0.2, 1.0) == doctest::Approx(0.2));
    CHECK(field_from_bits(15, 0.2, 1.0) == doctest::Approx(1.0));
    CHECK(field_from_bits(5, 0.0, 15.0) == doctest::Approx(5.0));
}

TEST_CASE("decode is total and preserves creature invariants under fuzz") {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        Genome g = genome_random(rng);
        CreatureSpec c = decode(g);
        REQUIRE(!c.nodes.empty());
        CHECK(c.nodes.size() <= kMaxCreatureNodes);
        CHECK(c.nodes[0].module.shape == ModuleShape::Rectangle);
        for (std::size_t n = 0; n < c.nodes.size(); ++n) {
            const CreatureNode& node = c.nodes[n];
            if (n == 0) {
                CHECK(node.parent == -1);
            } else {
                REQUIRE(node.parent >= 0);
                REQUIRE(node.parent < static_cast<int>(n));
                // circles are always leaves
                CHECK(c.nodes[node.parent].module.shape == ModuleShape::Rectangle);
                CHECK(node.parent_connection_point >= 0);
                CHECK(node.parent_connection_point < 3);
            }
            if (node.module.shape == ModuleShape::Rectangle) {
                CHECK(node.module.width >= 0.25);
                CHECK(node.module.width <= 1.0);
                CHECK(node.module.height >= 0.25);
                CHECK(node.module.height <= 1.0);
            } else {
                CHECK(node.module.radius >= 0.15);
                CHECK(node.module.radius <= 0.5);
            }
            CHECK(node.module.controller.amplitude >= 0.0);
            CHECK(node.module.controller.amplitude <= std::numbers::pi / 3 + 1e-12);
            CHECK(node.module.controller.period >= 10.0);
            CHECK(node.module.controller.period <= 100.0);
        }
        // no connection point used twice
        for (std::size_t a = 1; a < c.nodes.size(); ++a)
            for (std::size_t b = a + 1; b < c.nodes.size(); ++b)
                if (c.nodes[a].parent == c.nodes[b].parent)
                    CHECK(c.nodes[a].parent_connection_point !=
                          c.nodes[b].parent_connection_point);
    }
}

TEST_CASE("decode depends only on the genome") {
    Rng rng(17);
    Genome g = genome_random(rng);
    CreatureSpec a = decode(g);
    CreatureSpec b = decode(g);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].module.width == b.nodes[i].module.width);
        CHECK(a.nodes[i].module.attach_angle == b.nodes[i].module.attach_angle);
        CHECK(a.nodes[i].module.controller.phase == b.nodes[i].module.controller.phase);
    }
}

TEST_CASE("hex serialization round-trips") {
    Rng rng(23);
    for (int i = 0; i < 100; ++i) {
        Genome g = genome_random(rng);
        std::string hex = genome_to_hex(g);
        CHECK(hex.size() == 72);
        CHECK(genome_from_hex(hex) == g);
    }
    CHECK_THROWS(genome_from_hex("abc"));
    CHECK_THROWS(genome_from_hex(std::string(72, 'z')));
}
