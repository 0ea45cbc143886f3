#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "raysim/errors.hpp"
#include "raysim/geometry.hpp"
#include "raysim/rng.hpp"

using namespace raysim;

TEST_CASE("default footprint builds 15 tiles covering the lattice") {
    ChipLattice chip = build_chip({7, 3, 3}, FootprintSpec::default_footprint());
    CHECK(chip.tiles().size() == 15);
    CHECK(chip.height() == 3 * (2 * 3 + 1));
    CHECK(chip.width() == 5 * (2 * 7 + 1));
    // every tile region lies within the lattice
    for (const Tile& t : chip.tiles()) {
        CHECK(t.region.row0 >= 0);
        CHECK(t.region.col0 >= 0);
        CHECK(t.region.row0 + t.region.rows <= chip.height());
        CHECK(t.region.col0 + t.region.cols <= chip.width());
    }
    // 2 d_x d_z - 1 qubits per tile
    CHECK(chip.num_qubits() == 15 * (2 * 7 * 3 - 1));
}

TEST_CASE("single-tile footprint holds one patch of data plus measure sites") {
    ChipLattice chip = build_chip({5, 5, 3}, FootprintSpec::single_tile());
    CHECK(chip.tiles().size() == 1);
    int data = 0, measure = 0;
    for (const Qubit& q : chip.qubits())
        q.role == QubitRole::Data ? ++data : ++measure;
    CHECK(data == 25);
    CHECK(measure == 24);  // d^2 - 1
}

TEST_CASE("two tiles sharing a grid position is a configuration error") {
    FootprintSpec fp;
    fp.tiles.push_back({0, 0, TileKind::LogicalSlot});
    fp.tiles.push_back({0, 0, TileKind::Routing});
    CHECK_THROWS_AS(build_chip({3, 3, 3}, fp), config_error);
}

TEST_CASE("invalid distances rejected, even ones warn") {
    CHECK_THROWS_AS(build_chip({0, 3, 3}, FootprintSpec::single_tile()), config_error);
    std::vector<std::string> warnings;
    build_chip({4, 3, 3}, FootprintSpec::single_tile(), &warnings);
    CHECK(!warnings.empty());
}

TEST_CASE("euclidean distance") {
    CHECK(euclidean_distance({0, 0}, {0, 0}) == 0.0);
    CHECK(euclidean_distance({0, 0}, {3, 4}) == 5.0);
    CHECK(euclidean_distance({1, 1}, {2, 2}) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("tile regions are pairwise disjoint and own their qubits") {
    ChipLattice chip = build_chip({7, 3, 3}, FootprintSpec::default_footprint());
    std::set<std::pair<int, int>> seen;
    for (const Tile& t : chip.tiles()) {
        for (int r = t.region.row0; r < t.region.row0 + t.region.rows; ++r)
            for (int c = t.region.col0; c < t.region.col0 + t.region.cols; ++c)
                CHECK(seen.insert({r, c}).second);
    }
    for (const Qubit& q : chip.qubits()) {
        CHECK(chip.tile_at(q.coord) == q.tile);
        CHECK(chip.tiles()[q.tile].region.contains(q.coord));
    }
}

TEST_CASE("tiles_touching basics") {
    ChipLattice chip = build_chip({7, 3, 3}, FootprintSpec::default_footprint());

    CHECK(tiles_touching(chip, {}).empty());

    QubitCoord inside = chip.qubits()[0].coord;
    std::vector<QubitCoord> one{inside};
    auto tiles = tiles_touching(chip, one);
    REQUIRE(tiles.size() == 1);
    CHECK(tiles[0] == chip.qubits()[0].tile);

    // qubits spanning two adjacent tiles report both
    const Tile& t0 = chip.tiles()[0];
    const Tile& t1 = chip.tiles()[1];
    std::vector<QubitCoord> two{{t0.region.row0 + 1, t0.region.col0 + 1},
                                {t1.region.row0 + 1, t1.region.col0 + 1}};
    auto both = tiles_touching(chip, two);
    CHECK(both == std::vector<int>{0, 1});
}

TEST_CASE("tiles_touching is monotone under extra flags") {
    ChipLattice chip = build_chip({7, 3, 3}, FootprintSpec::default_footprint());
    Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<QubitCoord> flags;
        int n = 1 + static_cast<int>(rng.uniform_index(20));
        for (int i = 0; i < n; ++i) {
            const Qubit& q = chip.qubits()[rng.uniform_index(chip.qubits().size())];
            flags.push_back(q.coord);
        }
        auto base = tiles_touching(chip, flags);
        flags.push_back(chip.qubits()[rng.uniform_index(chip.qubits().size())].coord);
        auto more = tiles_touching(chip, flags);
        for (int t : base) CHECK(std::find(more.begin(), more.end(), t) != more.end());
    }
}
