#ifndef RAYSIM_FACTORY_HPP_
#define RAYSIM_FACTORY_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "raysim/geometry.hpp"

namespace raysim {

/// A multi-qubit T rotation acting on a subset of the factory's logical
/// qubits (1-based indices).
struct Rotation {
    int id = 0;
    std::vector<int> support;
};

/// The default 15-rotation set. Chosen so the default 3x5 footprint runs a
/// full distillation in exactly 6 steps; override via config for other
/// circuits.
std::vector<Rotation> default_rotations();

struct FactoryLayout {
    const ChipLattice* chip = nullptr;
    std::vector<Rotation> rotations;
    int d_m = 3;
    int arity = 5;                    // number of logical qubits
    std::vector<int> default_placement;  // tile index per logical qubit

    int c_t() const { return 6 * d_m; }
};

/// Validates rotations (nonempty supports, indices within arity) and picks
/// the default placement: logical-slot tiles first, in index order.
FactoryLayout make_factory_layout(const ChipLattice& chip, std::vector<Rotation> rotations,
                                  int d_m);

inline uint64_t tile_bit(int t) { return 1ULL << t; }
uint64_t tile_mask(std::span<const int> tiles);

enum class ScheduleMode { Greedy, Exact };

struct StepClaim {
    int rotation_id = 0;
    uint64_t routing_tiles = 0;  // claimed routing-tile mask
};

struct ScheduleResult {
    bool feasible = false;
    int steps = 0;
    std::vector<std::vector<StepClaim>> plan;
};

/// Schedules all rotations for a fixed placement.
///
/// A rotation is executable in a step if a connected set of online,
/// non-hosting tiles exists that is adjacent to every tile hosting one of its
/// support qubits and is disjoint from the routing tiles already claimed in
/// that step. Greedy packs maximal sets in ascending rotation id, claiming
/// shortest connecting trees (deterministic tie-breaks). Exact runs
/// branch-and-bound over step assignments with full claim re-search.
ScheduleResult schedule(const FactoryLayout& layout, std::span<const int> placement,
                        uint64_t offline_mask, ScheduleMode mode);

/// Checks a ScheduleResult against the claim model; returns false and fills
/// `why` on the first violation. Test oracle helper.
bool validate_schedule(const FactoryLayout& layout, std::span<const int> placement,
                       uint64_t offline_mask, const ScheduleResult& sched, std::string* why);

struct RemapResult {
    bool operable = false;
    std::vector<int> placement;
    int steps = 0;
    int cycles = 0;
    ScheduleResult plan;
};

/// Searches placements of the logical qubits over online tiles (any kind) and
/// returns the placement with the fewest cycles; Inoperable when no placement
/// admits a schedule. Search mode: every placement is ranked with a fixed
/// shortest-tree greedy, near-best placements are re-ranked with the
/// rerouting greedy, and exact scheduling runs on the resulting ties.
RemapResult remap(const FactoryLayout& layout, uint64_t offline_mask);
RemapResult remap(const FactoryLayout& layout, std::span<const int> offline_tiles);

struct BufferRequirements {
    int capacity = 0;
    long extra_qubits = 0;
};

/// capacity = ceil(c_D / c_T) with c_T = 6*d_m; each slot is a d_buf x d_buf
/// patch of 2*d_buf^2 physical qubits.
BufferRequirements buffer_requirements(double c_d_cycles, int d_m, int d_buf);

struct DetectionRecord {
    std::vector<int> offline_tiles;
    int discarded_states = 0;
    bool remap_performed = false;
    RemapResult remap;
    double t_offline = 0.0;
};

/// Ray-detected handler: aborts the distillation in progress, discards the
/// buffer (capacity + 1 states), marks touched tiles offline and re-maps.
/// Flags touching no tile are a no-op.
DetectionRecord on_detection(const FactoryLayout& layout, std::span<const QubitCoord> flags,
                             int buffer_capacity, double t_offline);

}  // namespace raysim

#endif
