#include "raysim/factory.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "raysim/errors.hpp"
#include "raysim/rng.hpp"

namespace raysim {

std::vector<Rotation> default_rotations() {
    // the 15 nonempty subsets of {q1..q4}, with the output qubit q5 joined to
    // every odd-weight subset; the best placement on the default footprint
    // runs these in 6 steps
    const std::vector<std::vector<int>> supports = {
        {1, 5},       {2, 5},       {3, 5},       {4, 5},       {1, 2},
        {1, 3},       {1, 4},       {2, 3},       {2, 4},       {3, 4},
        {1, 2, 3, 5}, {1, 2, 4, 5}, {1, 3, 4, 5}, {2, 3, 4, 5}, {1, 2, 3, 4}};
    std::vector<Rotation> rots;
    for (size_t i = 0; i < supports.size(); ++i)
        rots.push_back({static_cast<int>(i) + 1, supports[i]});
    return rots;
}

uint64_t tile_mask(std::span<const int> tiles) {
    uint64_t m = 0;
    for (int t : tiles) m |= tile_bit(t);
    return m;
}

FactoryLayout make_factory_layout(const ChipLattice& chip, std::vector<Rotation> rotations,
                                  int d_m) {
    if (chip.tiles().size() > 64) throw config_error("factory footprints are limited to 64 tiles");
    if (d_m < 1) throw config_error("d_m must be >= 1");
    if (rotations.empty()) throw config_error("rotation list is empty");
    if (rotations.size() > 20) throw config_error("rotation lists are limited to 20 entries");

    FactoryLayout lay;
    lay.chip = &chip;
    lay.d_m = d_m;

    int arity = 0;
    for (const Rotation& r : rotations) {
        if (r.support.empty())
            throw config_error("rotation " + std::to_string(r.id) + " has an empty support");
        for (int q : r.support) {
            if (q < 1) throw config_error("rotation supports are 1-based logical indices");
            arity = std::max(arity, q);
        }
    }
    if (arity > 5) throw config_error("factories host at most 5 logical qubits");
    lay.arity = arity;
    lay.rotations = std::move(rotations);

    for (const Tile& t : chip.tiles())
        if (t.kind == TileKind::LogicalSlot) lay.default_placement.push_back(t.index);
    for (const Tile& t : chip.tiles()) {
        if (static_cast<int>(lay.default_placement.size()) >= arity) break;
        if (t.kind != TileKind::LogicalSlot) lay.default_placement.push_back(t.index);
    }
    if (static_cast<int>(lay.default_placement.size()) < arity)
        throw config_error("footprint has fewer tiles than logical qubits");
    lay.default_placement.resize(arity);
    return lay;
}

namespace {

struct ClaimResult {
    bool feasible = false;
    int size = 0;
    uint64_t mask = 0;
};

constexpr int8_t kInf = 127;

struct TileGraph {
    int n = 0;
    uint64_t all = 0;
    std::array<uint64_t, 64> neighbors{};  // 4-adjacency on the tile grid

    explicit TileGraph(const ChipLattice& chip) {
        n = static_cast<int>(chip.tiles().size());
        all = n == 64 ? ~0ULL : ((1ULL << n) - 1);
        for (const Tile& a : chip.tiles()) {
            for (const Tile& b : chip.tiles()) {
                if (std::abs(a.grid_row - b.grid_row) + std::abs(a.grid_col - b.grid_col) == 1)
                    neighbors[a.index] |= tile_bit(b.index);
            }
        }
    }
};

bool mask_connected(uint64_t sub, const TileGraph& g) {
    if (sub == 0) return false;
    uint64_t reach = sub & (~sub + 1);
    while (true) {
        uint64_t grow = reach;
        uint64_t m = reach;
        while (m) {
            int v = std::countr_zero(m);
            m &= m - 1;
            grow |= g.neighbors[v] & sub;
        }
        if (grow == reach) break;
        reach = grow;
    }
    return reach == sub;
}

/// Dreyfus-Wagner over terminal subsets: minimum connected tile set within
/// `routable` that is adjacent to every terminal of the subset. Claims are
/// kept as masks; ties resolve to the first minimum in a fixed scan order.
struct DwTable {
    int t = 0;
    std::array<ClaimResult, 32> best{};
};

DwTable dw_claims(uint64_t routable, std::span<const int> terminals, const TileGraph& g) {
    DwTable out;
    out.t = static_cast<int>(terminals.size());
    const int nsub = 1 << out.t;

    static thread_local std::vector<int8_t> size_tbl;
    static thread_local std::vector<uint64_t> mask_tbl;
    size_tbl.assign(static_cast<size_t>(nsub) * 64, kInf);
    mask_tbl.assign(static_cast<size_t>(nsub) * 64, 0);
    auto sz = [&](int s, int v) -> int8_t& { return size_tbl[static_cast<size_t>(s) * 64 + v]; };
    auto mk = [&](int s, int v) -> uint64_t& { return mask_tbl[static_cast<size_t>(s) * 64 + v]; };

    std::vector<int> rt;
    {
        uint64_t m = routable;
        while (m) {
            rt.push_back(std::countr_zero(m));
            m &= m - 1;
        }
    }

    for (int i = 0; i < out.t; ++i) {
        uint64_t cand = g.neighbors[terminals[i]] & routable;
        while (cand) {
            int v = std::countr_zero(cand);
            cand &= cand - 1;
            sz(1 << i, v) = 1;
            mk(1 << i, v) = tile_bit(v);
        }
    }

    std::vector<std::vector<int>> buckets;
    for (int s = 1; s < nsub; ++s) {
        if (std::popcount(static_cast<unsigned>(s)) >= 2) {
            int low = s & (-s);
            for (int a = (s - 1) & s; a; a = (a - 1) & s) {
                if (!(a & low)) continue;
                int b = s ^ a;
                for (int v : rt) {
                    if (sz(a, v) == kInf || sz(b, v) == kInf) continue;
                    uint64_t u = mk(a, v) | mk(b, v);
                    int c = std::popcount(u);
                    if (c < sz(s, v)) {
                        sz(s, v) = static_cast<int8_t>(c);
                        mk(s, v) = u;
                    }
                }
            }
        }
        buckets.assign(66, {});
        for (int v : rt)
            if (sz(s, v) != kInf) buckets[sz(s, v)].push_back(v);
        for (int size = 1; size <= 64; ++size) {
            for (size_t qi = 0; qi < buckets[size].size(); ++qi) {
                int v = buckets[size][qi];
                if (sz(s, v) != size) continue;
                uint64_t nb = g.neighbors[v] & routable & ~mk(s, v);
                while (nb) {
                    int u = std::countr_zero(nb);
                    nb &= nb - 1;
                    uint64_t cand = mk(s, v) | tile_bit(u);
                    int c = std::popcount(cand);
                    if (c < sz(s, u)) {
                        sz(s, u) = static_cast<int8_t>(c);
                        mk(s, u) = cand;
                        buckets[c].push_back(u);
                    }
                }
            }
        }
        for (int v : rt) {
            if (sz(s, v) == kInf) continue;
            if (!out.best[s].feasible || sz(s, v) < out.best[s].size)
                out.best[s] = {true, sz(s, v), mk(s, v)};
        }
    }
    return out;
}

struct PairHash {
    size_t operator()(const std::pair<uint64_t, uint64_t>& p) const {
        return static_cast<size_t>(splitmix64(p.first ^ splitmix64(p.second)));
    }
};

struct Scheduler {
    const FactoryLayout& lay;
    TileGraph graph;
    std::unordered_map<std::pair<uint64_t, uint64_t>, ClaimResult, PairHash> claim_cache;
    std::unordered_map<uint64_t, std::vector<uint64_t>> connected_cache;
    std::unordered_map<std::pair<uint64_t, uint64_t>, std::vector<uint64_t>, PairHash>
        candidate_cache;

    explicit Scheduler(const FactoryLayout& l) : lay(l), graph(*l.chip) {}

    std::vector<int> terminal_tiles(const Rotation& rot, std::span<const int> placement) const {
        std::vector<int> t;
        for (int q : rot.support) t.push_back(placement[q - 1]);
        std::sort(t.begin(), t.end());
        t.erase(std::unique(t.begin(), t.end()), t.end());
        return t;
    }

    ClaimResult claim(uint64_t routable, std::span<const int> terminals) {
        uint64_t tmask = tile_mask(terminals);
        auto key = std::make_pair(routable, tmask);
        auto it = claim_cache.find(key);
        if (it != claim_cache.end()) return it->second;
        DwTable dw = dw_claims(routable, terminals, graph);
        ClaimResult res = dw.best[(1 << terminals.size()) - 1];
        claim_cache.emplace(key, res);
        return res;
    }

    const std::vector<uint64_t>& connected_subsets(uint64_t routable) {
        auto it = connected_cache.find(routable);
        if (it != connected_cache.end()) return it->second;
        if (std::popcount(routable) > 16)
            throw config_error("exact scheduling is limited to 16 routable tiles");
        std::vector<int> rt;
        uint64_t m = routable;
        while (m) {
            rt.push_back(std::countr_zero(m));
            m &= m - 1;
        }
        std::vector<uint64_t> subs;
        const uint64_t total = 1ULL << rt.size();
        for (uint64_t bits = 1; bits < total; ++bits) {
            uint64_t sub = 0;
            for (size_t i = 0; i < rt.size(); ++i)
                if (bits & (1ULL << i)) sub |= tile_bit(rt[i]);
            if (mask_connected(sub, graph)) subs.push_back(sub);
        }
        std::sort(subs.begin(), subs.end(), [](uint64_t a, uint64_t b) {
            int pa = std::popcount(a), pb = std::popcount(b);
            return pa != pb ? pa < pb : a < b;
        });
        return connected_cache.emplace(routable, std::move(subs)).first->second;
    }

    /// Inclusion-minimal connected covering claims, size then value order.
    const std::vector<uint64_t>& candidates(uint64_t routable, std::span<const int> terminals) {
        uint64_t tmask = tile_mask(terminals);
        auto key = std::make_pair(routable, tmask);
        auto it = candidate_cache.find(key);
        if (it != candidate_cache.end()) return it->second;

        std::vector<uint64_t> minimal;
        for (uint64_t sub : connected_subsets(routable)) {
            bool covers = true;
            for (int h : terminals)
                if (!(graph.neighbors[h] & sub)) {
                    covers = false;
                    break;
                }
            if (!covers) continue;
            bool dominated = false;
            for (uint64_t m2 : minimal)
                if ((m2 & sub) == m2) {
                    dominated = true;
                    break;
                }
            if (!dominated) minimal.push_back(sub);
        }
        return candidate_cache.emplace(key, std::move(minimal)).first->second;
    }
};

struct RotationCtx {
    int id = 0;
    std::vector<int> terminals;
};

std::vector<RotationCtx> rotation_contexts(const Scheduler& sch, const FactoryLayout& lay,
                                           std::span<const int> placement) {
    std::vector<RotationCtx> ctx;
    for (const Rotation& r : lay.rotations)
        ctx.push_back({r.id, sch.terminal_tiles(r, placement)});
    std::sort(ctx.begin(), ctx.end(),
              [](const RotationCtx& a, const RotationCtx& b) { return a.id < b.id; });
    return ctx;
}

ScheduleResult greedy_schedule(Scheduler& sch, const std::vector<RotationCtx>& rots,
                               uint64_t routable) {
    ScheduleResult res;
    for (const RotationCtx& r : rots)
        if (!sch.claim(routable, r.terminals).feasible) return res;

    std::vector<bool> done(rots.size(), false);
    size_t remaining = rots.size();
    while (remaining > 0) {
        uint64_t claimed = 0;
        std::vector<StepClaim> step;
        for (size_t i = 0; i < rots.size(); ++i) {
            if (done[i]) continue;
            ClaimResult c = sch.claim(routable & ~claimed, rots[i].terminals);
            if (!c.feasible) continue;
            claimed |= c.mask;
            step.push_back({rots[i].id, c.mask});
            done[i] = true;
            --remaining;
        }
        res.plan.push_back(std::move(step));
    }
    res.feasible = true;
    res.steps = static_cast<int>(res.plan.size());
    return res;
}

bool assign_claims(Scheduler& sch, uint64_t routable, const std::vector<RotationCtx>& rots,
                   const std::vector<int>& members, size_t idx, uint64_t used,
                   std::vector<uint64_t>& claims) {
    if (idx == members.size()) return true;
    const RotationCtx& r = rots[members[idx]];
    for (uint64_t cand : sch.candidates(routable, r.terminals)) {
        if (cand & used) continue;
        claims[idx] = cand;
        if (assign_claims(sch, routable, rots, members, idx + 1, used | cand, claims)) return true;
    }
    return false;
}

/// Branch-and-bound over step assignments. Rotations are branched in
/// decreasing minimal-claim size; a step is admissible when a disjoint claim
/// assignment exists for its member set (memoized). The per-step rotation
/// capacity bound keeps the incumbent pruning admissible.
struct ExactSearch {
    Scheduler& sch;
    const std::vector<RotationCtx>& rots;  // branch order
    uint64_t routable;
    int p_cap;  // max rotations that can ever share a step
    std::vector<int> min_claim;
    int best_steps;
    std::vector<std::vector<int>> best_plan;
    std::vector<std::vector<int>> steps;
    std::vector<int> step_load;  // sum of member min-claim sizes
    std::unordered_map<uint32_t, char> feasible_memo;
    long nodes = 0;
    long node_budget = 4'000'000;
    bool budget_hit = false;

    bool step_feasible(const std::vector<int>& members) {
        uint32_t key = 0;
        for (int m : members) key |= 1u << m;
        auto it = feasible_memo.find(key);
        if (it != feasible_memo.end()) return it->second != 0;
        std::vector<uint64_t> claims(members.size(), 0);
        bool ok = assign_claims(sch, routable, rots, members, 0, 0, claims);
        feasible_memo.emplace(key, ok ? 1 : 0);
        return ok;
    }

    void run(size_t i) {
        if (budget_hit || static_cast<int>(steps.size()) >= best_steps) return;
        if (++nodes > node_budget) {
            budget_hit = true;
            return;
        }
        if (i == rots.size()) {
            best_steps = static_cast<int>(steps.size());
            best_plan = steps;
            return;
        }
        // admissible progressive bound: open steps absorb at most their free
        // rotation capacity; the rest needs ceil(overflow / p_cap) new steps
        const int routable_count = std::popcount(routable);
        int rem = static_cast<int>(rots.size() - i);
        int absorb = 0;
        for (size_t s = 0; s < steps.size(); ++s) {
            int cap_rot = p_cap - static_cast<int>(steps[s].size());
            int cap_tiles = routable_count - step_load[s];  // every claim takes >= its min size
            absorb += std::max(0, std::min(cap_rot, cap_tiles));
        }
        int overflow = std::max(0, rem - absorb);
        int lb = static_cast<int>(steps.size()) + (overflow + p_cap - 1) / p_cap;
        if (lb >= best_steps) return;

        for (size_t s = 0; s < steps.size() && !budget_hit; ++s) {
            if (static_cast<int>(steps[s].size()) >= p_cap) continue;
            if (step_load[s] + min_claim[i] > routable_count) continue;
            steps[s].push_back(static_cast<int>(i));
            step_load[s] += min_claim[i];
            if (step_feasible(steps[s])) run(i + 1);
            step_load[s] -= min_claim[i];
            steps[s].pop_back();
            if (static_cast<int>(steps.size()) >= best_steps) return;
        }
        if (!budget_hit && static_cast<int>(steps.size()) + 1 < best_steps) {
            steps.push_back({static_cast<int>(i)});
            step_load.push_back(min_claim[i]);
            run(i + 1);
            steps.pop_back();
            step_load.pop_back();
        }
    }
};

ScheduleResult exact_schedule(Scheduler& sch, const std::vector<RotationCtx>& rots_by_id,
                              uint64_t routable, const ScheduleResult& greedy_hint) {
    ScheduleResult res;
    std::vector<int> min_claim_by_id(rots_by_id.size(), 0);
    for (size_t i = 0; i < rots_by_id.size(); ++i) {
        ClaimResult c = sch.claim(routable, rots_by_id[i].terminals);
        if (!c.feasible) return res;
        min_claim_by_id[i] = c.size;
    }

    // branch order: large claims first
    std::vector<size_t> order(rots_by_id.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return min_claim_by_id[a] > min_claim_by_id[b];
    });
    std::vector<RotationCtx> rots;
    std::vector<int> min_claim;
    for (size_t i : order) {
        rots.push_back(rots_by_id[i]);
        min_claim.push_back(min_claim_by_id[i]);
    }

    // per-step rotation capacity: largest prefix of ascending min claims that
    // fits the routable tile budget
    int p_cap = 0;
    {
        std::vector<int> asc = min_claim;
        std::sort(asc.begin(), asc.end());
        int acc = 0;
        for (int c : asc) {
            if (acc + c > std::popcount(routable)) break;
            acc += c;
            ++p_cap;
        }
        p_cap = std::max(1, p_cap);
    }

    ExactSearch search{sch,       rots, routable, p_cap,
                       min_claim, 0,    {},       {},
                       {},        {},   0,        4'000'000,
                       false};
    search.best_steps =
        greedy_hint.feasible ? greedy_hint.steps : static_cast<int>(rots.size()) + 1;
    // the greedy plan is a valid incumbent at greedy_hint.steps, so only
    // strictly better plans need to be found
    search.run(0);

    if (search.best_plan.empty()) {
        // nothing better than greedy (or budget exhausted): keep greedy
        return greedy_hint;
    }
    res.feasible = true;
    res.steps = static_cast<int>(search.best_plan.size());
    for (const auto& members : search.best_plan) {
        std::vector<uint64_t> claims(members.size(), 0);
        assign_claims(sch, routable, rots, members, 0, 0, claims);
        std::vector<StepClaim> step;
        for (size_t k = 0; k < members.size(); ++k)
            step.push_back({rots[members[k]].id, claims[k]});
        std::sort(step.begin(), step.end(),
                  [](const StepClaim& a, const StepClaim& b) { return a.rotation_id < b.rotation_id; });
        res.plan.push_back(std::move(step));
    }
    return res;
}

}  // namespace

ScheduleResult schedule(const FactoryLayout& layout, std::span<const int> placement,
                        uint64_t offline_mask, ScheduleMode mode) {
    if (static_cast<int>(placement.size()) != layout.arity)
        throw config_error("placement size must equal the number of logical qubits");
    const int n_tiles = static_cast<int>(layout.chip->tiles().size());
    uint64_t all = n_tiles == 64 ? ~0ULL : ((1ULL << n_tiles) - 1);
    uint64_t online = all & ~offline_mask;
    for (int t : placement) {
        if (t < 0 || t >= n_tiles)
            throw config_error("placement references a tile outside the footprint");
        if (!(online & tile_bit(t))) throw config_error("placement uses an offline tile");
    }
    {
        std::vector<int> p(placement.begin(), placement.end());
        std::sort(p.begin(), p.end());
        if (std::adjacent_find(p.begin(), p.end()) != p.end())
            throw config_error("placement must be injective");
    }

    Scheduler sch(layout);
    std::vector<RotationCtx> rots = rotation_contexts(sch, layout, placement);
    uint64_t routable = online & ~tile_mask(placement);

    ScheduleResult greedy = greedy_schedule(sch, rots, routable);
    if (mode == ScheduleMode::Greedy || !greedy.feasible) return greedy;
    return exact_schedule(sch, rots, routable, greedy);
}

bool validate_schedule(const FactoryLayout& layout, std::span<const int> placement,
                       uint64_t offline_mask, const ScheduleResult& sched, std::string* why) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (!sched.feasible) return fail("schedule marked infeasible");

    Scheduler sch(layout);
    const int n_tiles = static_cast<int>(layout.chip->tiles().size());
    uint64_t all = n_tiles == 64 ? ~0ULL : ((1ULL << n_tiles) - 1);
    uint64_t routable = (all & ~offline_mask) & ~tile_mask(placement);

    std::vector<int> seen;
    for (const auto& step : sched.plan) {
        uint64_t used = 0;
        for (const StepClaim& sc : step) {
            seen.push_back(sc.rotation_id);
            const Rotation* rot = nullptr;
            for (const Rotation& r : layout.rotations)
                if (r.id == sc.rotation_id) rot = &r;
            if (!rot) return fail("unknown rotation id in plan");
            if (sc.routing_tiles == 0) return fail("empty claim");
            if (sc.routing_tiles & ~routable) return fail("claim uses non-routable tiles");
            if (sc.routing_tiles & used) return fail("claims overlap within a step");
            used |= sc.routing_tiles;
            if (!mask_connected(sc.routing_tiles, sch.graph)) return fail("claim not connected");
            for (int t : sch.terminal_tiles(*rot, placement))
                if (!(sch.graph.neighbors[t] & sc.routing_tiles))
                    return fail("claim not adjacent to a host tile");
        }
    }
    std::sort(seen.begin(), seen.end());
    std::vector<int> want;
    for (const Rotation& r : layout.rotations) want.push_back(r.id);
    std::sort(want.begin(), want.end());
    if (seen != want) return fail("rotations scheduled != rotation list");
    return true;
}

namespace {

/// Qubit relabelings that map the rotation multiset onto itself. Placements
/// related by such a relabeling have identical optimal schedules, so the
/// placement search only visits canonical representatives.
std::vector<std::vector<int>> rotation_automorphisms(const std::vector<Rotation>& rotations,
                                                     int arity) {
    std::vector<uint32_t> multiset;
    for (const Rotation& r : rotations) {
        uint32_t m = 0;
        for (int q : r.support) m |= 1u << (q - 1);
        multiset.push_back(m);
    }
    std::sort(multiset.begin(), multiset.end());

    std::vector<std::vector<int>> autg;
    std::vector<int> perm(arity);
    for (int i = 0; i < arity; ++i) perm[i] = i;
    do {
        std::vector<uint32_t> mapped;
        for (const Rotation& r : rotations) {
            uint32_t m = 0;
            for (int q : r.support) m |= 1u << perm[q - 1];
            mapped.push_back(m);
        }
        std::sort(mapped.begin(), mapped.end());
        if (mapped == multiset) autg.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return autg;
}

struct Candidate {
    int lb = 0;
    std::array<int, 5> placement{};
};

}  // namespace

RemapResult remap(const FactoryLayout& layout, uint64_t offline_mask) {
    RemapResult result;
    const int n_tiles = static_cast<int>(layout.chip->tiles().size());
    uint64_t all = n_tiles == 64 ? ~0ULL : ((1ULL << n_tiles) - 1);
    uint64_t online = all & ~offline_mask;

    std::vector<int> online_tiles;
    for (int t = 0; t < n_tiles; ++t)
        if (online & tile_bit(t)) online_tiles.push_back(t);

    const int arity = layout.arity;
    const int n_rot = static_cast<int>(layout.rotations.size());
    if (static_cast<int>(online_tiles.size()) < arity) return result;  // Inoperable
    if (online_tiles.size() > 24)
        throw config_error("remap placement enumeration is limited to 24 online tiles");

    Scheduler sch(layout);

    std::vector<uint32_t> support_bits;
    std::vector<int> qubit_count(arity, 0);  // rotations touching each qubit
    for (const Rotation& r : layout.rotations) {
        uint32_t m = 0;
        for (int q : r.support) m |= 1u << (q - 1);
        support_bits.push_back(m);
        for (int q : r.support) ++qubit_count[q - 1];
    }
    const std::vector<std::vector<int>> autg = rotation_automorphisms(layout.rotations, arity);

    // Pass 1: admissible lower bound per canonical placement. For each host
    // subset the Dreyfus-Wagner table prices every terminal subset at once.
    std::vector<Candidate> candidates;

    std::vector<int> comb(arity);
    for (int i = 0; i < arity; ++i) comb[i] = i;
    const int n_online = static_cast<int>(online_tiles.size());
    auto next_combination = [&]() -> bool {
        int i = arity - 1;
        while (i >= 0 && comb[i] == n_online - arity + i) --i;
        if (i < 0) return false;
        ++comb[i];
        for (int j = i + 1; j < arity; ++j) comb[j] = comb[j - 1] + 1;
        return true;
    };

    std::array<int, 5> hosts{};
    std::array<int, 5> perm{};
    do {
        for (int i = 0; i < arity; ++i) hosts[i] = online_tiles[comb[i]];
        uint64_t hmask = 0;
        for (int i = 0; i < arity; ++i) hmask |= tile_bit(hosts[i]);
        uint64_t routable = online & ~hmask;
        const int r_count = std::popcount(routable);
        if (r_count == 0) continue;

        DwTable dw = dw_claims(routable, std::span<const int>(hosts.data(), arity), sch.graph);

        for (int i = 0; i < arity; ++i) perm[i] = i;
        do {
            // canonical under the rotation automorphisms: keep the
            // lexicographically smallest equivalent assignment
            bool canonical = true;
            for (const std::vector<int>& sigma : autg) {
                for (int q = 0; q < arity; ++q) {
                    int mine = perm[q], theirs = perm[sigma[q]];
                    if (theirs < mine) {
                        canonical = false;
                        break;
                    }
                    if (theirs > mine) break;
                }
                if (!canonical) break;
            }
            if (!canonical) continue;

            int claim_sum = 0;
            bool ok = true;
            for (int ri = 0; ri < n_rot; ++ri) {
                int tsm = 0;
                for (int q = 0; q < arity; ++q)
                    if (support_bits[ri] & (1u << q)) tsm |= 1 << perm[q];
                const ClaimResult& c = dw.best[tsm];
                if (!c.feasible) {
                    ok = false;
                    break;
                }
                claim_sum += c.size;
            }
            if (!ok) continue;

            int lb = (claim_sum + r_count - 1) / r_count;
            for (int q = 0; q < arity && ok; ++q) {
                int deg = std::popcount(sch.graph.neighbors[hosts[perm[q]]] & routable);
                if (deg == 0)
                    ok = false;  // unreachable host
                else
                    lb = std::max(lb, (qubit_count[q] + deg - 1) / deg);
            }
            if (!ok) continue;

            Candidate cand;
            cand.lb = lb;
            for (int q = 0; q < arity; ++q) cand.placement[q] = hosts[perm[q]];
            candidates.push_back(cand);
        } while (std::next_permutation(perm.begin(), perm.begin() + arity));
    } while (next_combination());

    if (candidates.empty()) return result;  // Inoperable

    // Pass 2: evaluate in lower-bound order; stop once no candidate can beat
    // the incumbent. Exact scheduling runs only when greedy exceeds the bound.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) { return a.lb < b.lb; });

    int best_steps = n_rot + 1;
    for (const Candidate& cand : candidates) {
        if (cand.lb >= best_steps) break;
        std::vector<int> placement(cand.placement.begin(), cand.placement.begin() + arity);
        std::vector<RotationCtx> rots = rotation_contexts(sch, layout, placement);
        uint64_t routable = online & ~tile_mask(placement);
        ScheduleResult g = greedy_schedule(sch, rots, routable);
        if (!g.feasible) continue;
        ScheduleResult ex = (g.steps > cand.lb) ? exact_schedule(sch, rots, routable, g)
                                                : std::move(g);
        if (!ex.feasible) continue;
        bool better = !result.operable || ex.steps < best_steps ||
                      (ex.steps == best_steps && placement < result.placement);
        if (better) {
            best_steps = ex.steps;
            result.operable = true;
            result.placement = placement;
            result.steps = ex.steps;
            result.cycles = ex.steps * layout.d_m;
            result.plan = std::move(ex);
        }
    }
    return result;
}

RemapResult remap(const FactoryLayout& layout, std::span<const int> offline_tiles) {
    return remap(layout, tile_mask(offline_tiles));
}

BufferRequirements buffer_requirements(double c_d_cycles, int d_m, int d_buf) {
    if (c_d_cycles < 0.0) throw config_error("c_D must be >= 0");
    if (d_m < 1 || d_buf < 1) throw config_error("distances must be >= 1");
    BufferRequirements br;
    const double c_t = 6.0 * d_m;
    br.capacity = static_cast<int>(std::ceil(c_d_cycles / c_t));
    br.extra_qubits = static_cast<long>(br.capacity) * 2 * d_buf * d_buf;
    return br;
}

DetectionRecord on_detection(const FactoryLayout& layout, std::span<const QubitCoord> flags,
                             int buffer_capacity, double t_offline) {
    DetectionRecord rec;
    rec.t_offline = t_offline;
    rec.offline_tiles = tiles_touching(*layout.chip, flags);
    if (rec.offline_tiles.empty()) return rec;  // off-footprint: no-op
    rec.discarded_states = buffer_capacity + 1;
    rec.remap_performed = true;
    rec.remap = remap(layout, std::span<const int>(rec.offline_tiles));
    return rec;
}

}  // namespace raysim
