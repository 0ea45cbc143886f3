#ifndef RAYSIM_GEOMETRY_HPP_
#define RAYSIM_GEOMETRY_HPP_

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace raysim {

/// Position on the dense chip grid (unit spacing between adjacent sites).
struct QubitCoord {
    int row = 0;
    int col = 0;

    friend bool operator==(const QubitCoord&, const QubitCoord&) = default;
    friend auto operator<=>(const QubitCoord&, const QubitCoord&) = default;
};

inline double euclidean_distance(QubitCoord a, QubitCoord b) {
    double dr = static_cast<double>(a.row) - b.row;
    double dc = static_cast<double>(a.col) - b.col;
    return std::sqrt(dr * dr + dc * dc);
}

enum class TileKind { LogicalSlot, Routing, Buffer };

TileKind tile_kind_from_string(const std::string& s);
std::string to_string(TileKind k);

enum class QubitRole { Data, Measure };

/// Half-open rectangle of grid sites: rows [row0, row0+rows), cols [col0, col0+cols).
struct Rect {
    int row0 = 0;
    int col0 = 0;
    int rows = 0;
    int cols = 0;

    bool contains(QubitCoord q) const {
        return q.row >= row0 && q.row < row0 + rows && q.col >= col0 && q.col < col0 + cols;
    }
};

struct CodeDistances {
    int d_x = 7;
    int d_z = 3;
    int d_m = 3;
};

/// One entry of a footprint: a tile-grid position plus the tile kind.
struct TileSpec {
    int grid_row = 0;
    int grid_col = 0;
    TileKind kind = TileKind::Routing;
};

struct FootprintSpec {
    std::vector<TileSpec> tiles;

    /// Fig.-style default: 3 tile rows x 5 tile cols, middle row all logical
    /// slots, outer rows routing channels.
    static FootprintSpec default_footprint();
    static FootprintSpec single_tile(TileKind kind = TileKind::LogicalSlot);
};

struct Tile {
    int index = 0;
    int grid_row = 0;
    int grid_col = 0;
    TileKind kind = TileKind::Routing;
    Rect region;
};

struct Qubit {
    QubitCoord coord;
    QubitRole role = QubitRole::Data;
    int tile = -1;
    // tile-local position on the interleaved grid: data at (2i+1, 2j+1),
    // measure at (2i, 2j)
    int local_row = 0;
    int local_col = 0;
};

/// Immutable physical layout: tile set plus every physical qubit site.
/// Each tile is a surface-code patch region holding a d_Z x d_X grid of data
/// qubits with measure qubits interleaved on the dual grid (2*d_X*d_Z - 1
/// qubits per tile).
class ChipLattice {
  public:
    ChipLattice() = default;

    int width() const { return width_; }
    int height() const { return height_; }
    const CodeDistances& distances() const { return distances_; }
    const std::vector<Tile>& tiles() const { return tiles_; }
    const std::vector<Qubit>& qubits() const { return qubits_; }
    int num_qubits() const { return static_cast<int>(qubits_.size()); }

    /// Index into qubits(), or -1 if no qubit sits at this site.
    int qubit_index(QubitCoord q) const {
        if (q.row < 0 || q.row >= height_ || q.col < 0 || q.col >= width_) return -1;
        return site_to_qubit_[static_cast<size_t>(q.row) * width_ + q.col];
    }

    /// Tile whose region contains the site, or -1.
    int tile_at(QubitCoord q) const {
        if (q.row < 0 || q.row >= height_ || q.col < 0 || q.col >= width_) return -1;
        return site_to_tile_[static_cast<size_t>(q.row) * width_ + q.col];
    }

    /// Rows/cols of the per-tile data-qubit grid.
    int tile_data_rows() const { return distances_.d_z; }
    int tile_data_cols() const { return distances_.d_x; }
    int tile_region_rows() const { return 2 * distances_.d_z + 1; }
    int tile_region_cols() const { return 2 * distances_.d_x + 1; }

  private:
    friend ChipLattice build_chip(const CodeDistances&, const FootprintSpec&,
                                  std::vector<std::string>*);

    CodeDistances distances_;
    int width_ = 0;
    int height_ = 0;
    std::vector<Tile> tiles_;
    std::vector<Qubit> qubits_;
    std::vector<int32_t> site_to_qubit_;
    std::vector<int32_t> site_to_tile_;
};

/// Builds the lattice covering every tile in the footprint.
/// Throws config_error on invalid distances, an empty footprint, or two tiles
/// claiming the same qubit site.
ChipLattice build_chip(const CodeDistances& d, const FootprintSpec& footprint,
                       std::vector<std::string>* warnings = nullptr);

/// Every tile whose region contains at least one flagged site. Sorted,
/// deduplicated. Monotone: more flags never shrink the result.
std::vector<int> tiles_touching(const ChipLattice& chip, std::span<const QubitCoord> flagged);

}  // namespace raysim

#endif
