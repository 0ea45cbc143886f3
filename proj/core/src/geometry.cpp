#include "raysim/geometry.hpp"

#include <algorithm>
#include <set>

#include "raysim/errors.hpp"

namespace raysim {

TileKind tile_kind_from_string(const std::string& s) {
    if (s == "logical") return TileKind::LogicalSlot;
    if (s == "routing") return TileKind::Routing;
    if (s == "buffer") return TileKind::Buffer;
    throw config_error("unknown tile kind '" + s + "' (expected logical|routing|buffer)");
}

std::string to_string(TileKind k) {
    switch (k) {
        case TileKind::LogicalSlot: return "logical";
        case TileKind::Routing: return "routing";
        case TileKind::Buffer: return "buffer";
    }
    return "?";
}

FootprintSpec FootprintSpec::default_footprint() {
    FootprintSpec fp;
    for (int c = 0; c < 5; ++c) fp.tiles.push_back({0, c, TileKind::Routing});
    for (int c = 0; c < 5; ++c) fp.tiles.push_back({1, c, TileKind::LogicalSlot});
    for (int c = 0; c < 5; ++c) fp.tiles.push_back({2, c, TileKind::Routing});
    return fp;
}

FootprintSpec FootprintSpec::single_tile(TileKind kind) {
    FootprintSpec fp;
    fp.tiles.push_back({0, 0, kind});
    return fp;
}

namespace {

// Measure-qubit presence on the (d_rows+1) x (d_cols+1) dual grid of a
// rotated-layout patch with a d_rows x d_cols data grid.
bool measure_site_present(int i, int j, int d_rows, int d_cols) {
    bool interior_r = (i >= 1 && i <= d_rows - 1);
    bool interior_c = (j >= 1 && j <= d_cols - 1);
    if (interior_r && interior_c) return true;
    if (i == 0 && interior_c) return (j % 2) == 1;
    if (i == d_rows && interior_c) return (j % 2) == 0;
    if (j == 0 && interior_r) return (i % 2) == 0;
    if (j == d_cols && interior_r) return (i % 2) == 1;
    return false;
}

}  // namespace

ChipLattice build_chip(const CodeDistances& d, const FootprintSpec& footprint,
                       std::vector<std::string>* warnings) {
    if (d.d_x < 1 || d.d_z < 1 || d.d_m < 1)
        throw config_error("code distances must all be >= 1");
    if (warnings) {
        if (d.d_x % 2 == 0 || d.d_z % 2 == 0 || d.d_m % 2 == 0)
            warnings->push_back("even code distance; odd values are recommended");
    }
    if (footprint.tiles.empty()) throw config_error("footprint lists no tiles");

    const int trows = 2 * d.d_z + 1;
    const int tcols = 2 * d.d_x + 1;

    std::set<std::pair<int, int>> seen;
    int max_gr = 0, max_gc = 0;
    for (const TileSpec& t : footprint.tiles) {
        if (t.grid_row < 0 || t.grid_col < 0)
            throw config_error("tile grid positions must be non-negative");
        if (!seen.insert({t.grid_row, t.grid_col}).second)
            throw config_error("two tiles share qubit sites at tile grid (" +
                               std::to_string(t.grid_row) + "," + std::to_string(t.grid_col) + ")");
        max_gr = std::max(max_gr, t.grid_row);
        max_gc = std::max(max_gc, t.grid_col);
    }

    ChipLattice chip;
    chip.distances_ = d;
    chip.height_ = (max_gr + 1) * trows;
    chip.width_ = (max_gc + 1) * tcols;
    chip.site_to_qubit_.assign(static_cast<size_t>(chip.height_) * chip.width_, -1);
    chip.site_to_tile_.assign(static_cast<size_t>(chip.height_) * chip.width_, -1);

    for (const TileSpec& ts : footprint.tiles) {
        Tile tile;
        tile.index = static_cast<int>(chip.tiles_.size());
        tile.grid_row = ts.grid_row;
        tile.grid_col = ts.grid_col;
        tile.kind = ts.kind;
        tile.region = Rect{ts.grid_row * trows, ts.grid_col * tcols, trows, tcols};

        for (int r = 0; r < trows; ++r) {
            for (int c = 0; c < tcols; ++c) {
                size_t site = static_cast<size_t>(tile.region.row0 + r) * chip.width_ +
                              (tile.region.col0 + c);
                chip.site_to_tile_[site] = tile.index;
            }
        }

        // data qubits at local (2i+1, 2j+1)
        for (int i = 0; i < d.d_z; ++i) {
            for (int j = 0; j < d.d_x; ++j) {
                Qubit q;
                q.coord = {tile.region.row0 + 2 * i + 1, tile.region.col0 + 2 * j + 1};
                q.role = QubitRole::Data;
                q.tile = tile.index;
                q.local_row = 2 * i + 1;
                q.local_col = 2 * j + 1;
                chip.site_to_qubit_[static_cast<size_t>(q.coord.row) * chip.width_ + q.coord.col] =
                    static_cast<int>(chip.qubits_.size());
                chip.qubits_.push_back(q);
            }
        }
        // measure qubits at local (2i, 2j), rotated-layout subset
        for (int i = 0; i <= d.d_z; ++i) {
            for (int j = 0; j <= d.d_x; ++j) {
                if (!measure_site_present(i, j, d.d_z, d.d_x)) continue;
                Qubit q;
                q.coord = {tile.region.row0 + 2 * i, tile.region.col0 + 2 * j};
                q.role = QubitRole::Measure;
                q.tile = tile.index;
                q.local_row = 2 * i;
                q.local_col = 2 * j;
                chip.site_to_qubit_[static_cast<size_t>(q.coord.row) * chip.width_ + q.coord.col] =
                    static_cast<int>(chip.qubits_.size());
                chip.qubits_.push_back(q);
            }
        }

        chip.tiles_.push_back(tile);
    }

    return chip;
}

std::vector<int> tiles_touching(const ChipLattice& chip, std::span<const QubitCoord> flagged) {
    std::vector<int> out;
    for (const QubitCoord& q : flagged) {
        int t = chip.tile_at(q);
        if (t >= 0) out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace raysim
