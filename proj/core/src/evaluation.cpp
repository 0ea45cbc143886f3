#include "raysim/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "raysim/errors.hpp"
#include "raysim/rng.hpp"

namespace raysim {

DetectionMode detection_mode_from_string(const std::string& s) {
    if (s == "ideal") return DetectionMode::Ideal;
    if (s == "windowed") return DetectionMode::Windowed;
    throw config_error("unknown detection mode '" + s + "' (expected ideal|windowed)");
}

std::string to_string(DetectionMode m) {
    return m == DetectionMode::Ideal ? "ideal" : "windowed";
}

FactoryModel::FactoryModel(const CodeDistances& d, const FootprintSpec& fp,
                           std::vector<Rotation> rotations) {
    chip_ = build_chip(d, fp);
    if (rotations.empty()) rotations = default_rotations();
    layout_ = make_factory_layout(chip_, std::move(rotations), d.d_m);
}

RemapResult FactoryModel::remap_mask(uint64_t offline_mask) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = memo_.find(offline_mask);
        if (it != memo_.end()) return it->second;
        for (uint64_t bad : minimal_inoperable_) {
            if ((offline_mask & bad) == bad) {
                RemapResult r;  // inoperable by dominance
                memo_.emplace(offline_mask, r);
                return r;
            }
        }
    }
    RemapResult r = remap(layout_, offline_mask);
    std::lock_guard<std::mutex> lock(mu_);
    memo_.emplace(offline_mask, r);
    if (!r.operable) minimal_inoperable_.push_back(offline_mask);
    return r;
}

namespace {

/// Qubits strictly inside the ray disk around an impact site.
std::vector<QubitCoord> ideal_flags(const ChipLattice& chip, QubitCoord site, double r_cre) {
    std::vector<QubitCoord> flags;
    if (r_cre <= 0.0) return flags;
    int rad = static_cast<int>(std::ceil(r_cre));
    for (int dr = -rad; dr <= rad; ++dr) {
        for (int dc = -rad; dc <= rad; ++dc) {
            QubitCoord q{site.row + dr, site.col + dc};
            if (chip.qubit_index(q) < 0) continue;
            if (euclidean_distance(q, site) < r_cre) flags.push_back(q);
        }
    }
    return flags;
}

/// Detector context for windowed-mode flag sampling on the factory chip.
struct WindowedCtx {
    PhysicalParams baseline_params;
    std::vector<Stabilizer> stabs;
    SyndromeModel baseline;
    DetectorBank bank;
    std::vector<uint64_t> window_tiles;  // tiles each window's flag disk touches
    double horizon_rounds = 1.0;         // per-window race length in cycles
};

WindowedCtx make_windowed_ctx(const FactoryModel& factory, const RayParams& ray,
                              const ParamDistributions& dist, double horizon_cycles) {
    WindowedCtx ctx;
    const ChipLattice& chip = factory.chip();
    Rng dummy(1);
    ctx.baseline_params = sample_baseline_params(chip, dist, dummy);
    ctx.stabs = build_stabilizers(chip);
    ctx.baseline = build_syndrome_model(ctx.baseline_params, ctx.stabs);
    WindowSpec spec = default_window_spec(ray.model, ray.r_cre, chip.distances().d_m);
    ctx.bank = build_detector(chip, ctx.stabs, ctx.baseline, spec);
    ctx.window_tiles.resize(ctx.bank.windows.size(), 0);
    for (size_t wi = 0; wi < ctx.bank.windows.size(); ++wi) {
        uint64_t tm = 0;
        for (int qi : ctx.bank.windows[wi].flag_qubits)
            tm |= tile_bit(chip.qubits()[qi].tile);
        ctx.window_tiles[wi] = tm;
    }
    ctx.horizon_rounds = std::max(1.0, horizon_cycles - spec.w_t + 1);
    return ctx;
}

/// Per-tile offline probabilities for a set of simultaneous rays: a tile goes
/// offline if any window whose flag disk touches it wins its trigger race
/// within the detection horizon. Windows at baseline rates are ignored (their
/// contribution is bounded by the FPR).
void windowed_tile_probs(const WindowedCtx& ctx, const ChipLattice& chip,
                         std::span<const RayEvent> rays, std::vector<double>& p_off) {
    PhysicalParams hit = ctx.baseline_params;
    for (const RayEvent& r : rays) apply_ray_in_place(hit, chip, r, r.t_start);

    p_off.assign(chip.tiles().size(), 0.0);
    std::vector<double> elevated(ctx.stabs.size());
    for (size_t i = 0; i < ctx.stabs.size(); ++i) {
        // untouched stabilizers keep their baseline rate; recompute only when
        // a support or measure qubit changed
        bool touched = false;
        const Stabilizer& s = ctx.stabs[i];
        if (hit.qubit[s.measure_index].t1 != ctx.baseline_params.qubit[s.measure_index].t1)
            touched = true;
        for (int q : s.support)
            if (hit.qubit[q].t1 != ctx.baseline_params.qubit[q].t1) touched = true;
        elevated[i] = touched ? syndrome_prob(hit, s) : ctx.baseline.p_syn[i];
    }

    std::vector<double> log_keep(chip.tiles().size(), 0.0);
    for (size_t wi = 0; wi < ctx.bank.windows.size(); ++wi) {
        const Window& w = ctx.bank.windows[wi];
        double sum = 0.0;
        bool touched = false;
        for (int sid : w.members) {
            sum += elevated[sid];
            if (elevated[sid] != ctx.baseline.p_syn[sid]) touched = true;
        }
        if (!touched) continue;
        double q = window_trigger_prob(w, elevated);
        if (q <= ctx.bank.spec.fpr) continue;
        double lk = ctx.horizon_rounds * std::log1p(-std::min(q, 1.0 - 1e-15));
        uint64_t tm = ctx.window_tiles[wi];
        while (tm) {
            int t = std::countr_zero(tm);
            tm &= tm - 1;
            log_keep[t] += lk;
        }
    }
    for (size_t t = 0; t < p_off.size(); ++t) p_off[t] = -std::expm1(log_keep[t]);
}

struct TrialOutcome {
    bool operable;
    int cycles;
};

/// Shared per-trial machinery: offline mask for the first k rays of a trial.
class TrialSampler {
  public:
    TrialSampler(FactoryModel& factory, const PerRayOptions& opts)
        : factory_(factory), opts_(opts) {
        if (opts.detection == DetectionMode::Windowed) {
            double horizon = opts.horizon_cycles;
            if (horizon < 0) {
                WindowSpec spec = default_window_spec(opts.ray.model, opts.ray.r_cre,
                                                      factory.chip().distances().d_m);
                LatencyOptions lopts;
                lopts.dist = opts.dist;
                lopts.d_m = factory.chip().distances().d_m;
                LatencyResult lr = detection_latency(make_ray(0, {0, 0}), spec, lopts);
                horizon = lr.detectable ? lr.cycles : static_cast<double>(spec.w_t);
            }
            ctx_ = make_windowed_ctx(factory, opts.ray, opts.dist, horizon);
        }
    }

    RayEvent make_ray(uint64_t scramble_seed, QubitCoord center) const {
        RayEvent e;
        e.model = opts_.ray.model;
        e.center = center;
        e.r_cre = opts_.ray.r_cre;
        e.f_t1 = opts_.ray.f_t1;
        e.t_start = 0.0;
        e.t_offline = opts_.t_offline;
        e.scramble_seed = scramble_seed;
        return e;
    }

    /// Offline tile mask for rays[0..k). Windowed sampling uses one uniform
    /// per (trial, tile) so the flagged set grows monotonically with k.
    uint64_t offline_mask(std::span<const RayEvent> rays, uint64_t trial_key) {
        const ChipLattice& chip = factory_.chip();
        uint64_t mask = 0;
        std::vector<QubitCoord> flags;
        for (const RayEvent& r : rays) {
            std::vector<QubitCoord> f = ideal_flags(chip, r.center, r.r_cre);
            flags.insert(flags.end(), f.begin(), f.end());
        }
        for (int t : tiles_touching(chip, flags)) mask |= tile_bit(t);

        if (opts_.detection == DetectionMode::Windowed && !rays.empty()) {
            std::vector<double> p_off;
            windowed_tile_probs(ctx_, chip, rays, p_off);
            for (size_t t = 0; t < p_off.size(); ++t) {
                if (mask & tile_bit(t)) continue;
                if (p_off[t] <= 0.0) continue;
                double u = u64_to_unit_double(
                    splitmix64(hash_mix(trial_key, 0xf1a6 + static_cast<uint64_t>(t))));
                if (u < p_off[t]) mask |= tile_bit(t);
            }
        }
        return mask;
    }

    TrialOutcome outcome(uint64_t offline_mask) {
        RemapResult r = factory_.remap_mask(offline_mask);
        if (!r.operable) return {false, 0};
        return {true, r.cycles};
    }

  private:
    FactoryModel& factory_;
    PerRayOptions opts_;
    WindowedCtx ctx_;
};

}  // namespace

OverheadDistribution per_ray_overhead(FactoryModel& factory, const PerRayOptions& opts) {
    if (opts.trials < 1) throw config_error("trials must be >= 1");
    const ChipLattice& chip = factory.chip();
    TrialSampler sampler(factory, opts);

    OverheadDistribution dist;
    dist.samples.reserve(opts.trials);
    const uint64_t n_sites = static_cast<uint64_t>(chip.width()) * chip.height();

    double inv_sum = 0.0;
    double cyc_sum = 0.0;
    long n_inop = 0;
    for (int t = 0; t < opts.trials; ++t) {
        Rng rng = Rng::derive(opts.seed, 0x7e1a1, static_cast<uint64_t>(t));
        uint64_t site = rng.uniform_index(n_sites);
        QubitCoord center{static_cast<int>(site / chip.width()),
                          static_cast<int>(site % chip.width())};
        RayEvent ray = sampler.make_ray(rng.next_u64(), center);
        uint64_t mask =
            sampler.offline_mask(std::span<const RayEvent>(&ray, 1),
                                 hash_mix(opts.seed, 0xfeed0 + static_cast<uint64_t>(t)));
        TrialOutcome out = sampler.outcome(mask);
        dist.samples.push_back({out.operable, out.cycles});
        if (out.operable) {
            inv_sum += 1.0 / out.cycles;
            cyc_sum += out.cycles;
        } else {
            ++n_inop;
        }
    }
    dist.p_inoperable = static_cast<double>(n_inop) / opts.trials;
    long n_op = opts.trials - n_inop;
    dist.mean_operable_cycles = n_op > 0 ? cyc_sum / n_op : 0.0;
    dist.mean_inv_cycles = inv_sum / opts.trials;
    return dist;
}

PerRayDataset build_per_ray_dataset(FactoryModel& factory, const PerRayOptions& opts,
                                    int k_cap) {
    if (opts.trials < 1) throw config_error("trials must be >= 1");
    if (k_cap < 0) throw config_error("k_cap must be >= 0");
    const ChipLattice& chip = factory.chip();
    TrialSampler sampler(factory, opts);

    PerRayDataset data;
    data.trials = opts.trials;
    data.mean_inv_cycles.assign(k_cap + 1, 0.0);
    data.p_inoperable.assign(k_cap + 1, 0.0);
    data.mean_inv_cycles[0] = 1.0 / factory.c_t();

    if (k_cap == 0) return data;

    const uint64_t n_sites = static_cast<uint64_t>(chip.width()) * chip.height();
    std::vector<double> inv_sum(k_cap + 1, 0.0);
    std::vector<long> inop(k_cap + 1, 0);
    std::vector<RayEvent> rays;

    for (int t = 0; t < opts.trials; ++t) {
        // site/seed stream is independent of the ray parameters so sweeps
        // share impact sequences across radii (common random numbers)
        Rng rng = Rng::derive(opts.seed, 0x7e1a1, static_cast<uint64_t>(t));
        rays.clear();
        for (int k = 0; k < k_cap; ++k) {
            uint64_t site = rng.uniform_index(n_sites);
            QubitCoord center{static_cast<int>(site / chip.width()),
                              static_cast<int>(site % chip.width())};
            rays.push_back(sampler.make_ray(rng.next_u64(), center));
        }
        uint64_t trial_key = hash_mix(opts.seed, 0xfeed0 + static_cast<uint64_t>(t));
        for (int k = 1; k <= k_cap; ++k) {
            uint64_t mask = sampler.offline_mask(std::span<const RayEvent>(rays.data(), k),
                                                 trial_key);
            TrialOutcome out = sampler.outcome(mask);
            if (out.operable)
                inv_sum[k] += 1.0 / out.cycles;
            else
                ++inop[k];
        }
    }
    for (int k = 1; k <= k_cap; ++k) {
        data.mean_inv_cycles[k] = inv_sum[k] / opts.trials;
        data.p_inoperable[k] = static_cast<double>(inop[k]) / opts.trials;
    }
    return data;
}

double steady_state_remap_cost(const SteadyStateParams& p) {
    if (!p.data) throw config_error("steady state needs per-ray data");
    double rate = 0.0;
    for (size_t k = 0; k < p.occupancy.size(); ++k) {
        size_t idx = std::min(k, p.data->mean_inv_cycles.size() - 1);
        rate += p.occupancy[k] * p.data->mean_inv_cycles[idx];
    }
    // each ray event discards the buffer plus the distillation in progress
    double events_per_cycle = p.t_offline_cycles > 0 ? p.lambda / p.t_offline_cycles : 0.0;
    rate -= events_per_cycle * (p.buffer_capacity + 1);
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    double space = static_cast<double>(p.factory_qubits + p.buffer_qubits) / p.factory_qubits;
    return space * (1.0 / p.c_t) / rate;
}

namespace {

int occupancy_cap(double lambda, double tail_mass) {
    double pk = std::exp(-lambda);
    double cum = pk;
    int k = 0;
    while (1.0 - cum >= tail_mass && k < 200) {
        ++k;
        pk *= lambda / k;
        cum += pk;
    }
    return std::max(1, k);
}

struct DatasetKey {
    RayModel model;
    double r_cre;
    double f_t1;  // 0 for scrambling

    bool operator==(const DatasetKey&) const = default;
    bool operator<(const DatasetKey& o) const {
        if (model != o.model) return model < o.model;
        if (r_cre != o.r_cre) return r_cre < o.r_cre;
        return f_t1 < o.f_t1;
    }
};

}  // namespace

CostReport sweep(FactoryModel& factory, const SweepSpec& spec, uint64_t seed, int threads) {
    if (spec.models.empty() || spec.r_cre_values.empty() || spec.gamma_toffline_values.empty())
        throw config_error("sweep grid is empty");
    if (spec.trials < 1) throw config_error("trials must be >= 1");

    CostReport report;
    report.seed = seed;
    report.trials = spec.trials;

    const int n_q = factory.chip().num_qubits();
    double max_lambda = 0.0;
    for (double gt : spec.gamma_toffline_values) max_lambda = std::max(max_lambda, gt * n_q);
    const int k_cap = occupancy_cap(max_lambda, 1e-9);

    // distinct per-ray datasets; ideal flags are model- and f-independent
    std::vector<DatasetKey> keys;
    auto key_for = [&](RayModel m, double r, double f) {
        if (spec.detection == DetectionMode::Ideal) return DatasetKey{RayModel::Direct, r, 0.0};
        return DatasetKey{m, r, m == RayModel::Direct ? f : 0.0};
    };
    auto forall_cells = [&](auto&& fn) {
        for (RayModel m : spec.models) {
            const std::vector<double> fs =
                m == RayModel::Direct ? spec.f_t1_values : std::vector<double>{0.0};
            for (double f : fs)
                for (double r : spec.r_cre_values) fn(m, f, r);
        }
    };
    forall_cells([&](RayModel m, double f, double r) {
        DatasetKey k = key_for(m, r, f);
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    });
    std::sort(keys.begin(), keys.end());

    // latency per (model, r, f) for windowed cells
    std::vector<PerRayDataset> datasets(keys.size());
    std::vector<double> latencies(keys.size(), 0.0);

    auto build_one = [&](size_t i) {
        const DatasetKey& k = keys[i];
        PerRayOptions opts;
        opts.ray = {k.model, k.r_cre, k.f_t1 == 0.0 ? 0.01 : k.f_t1};
        opts.detection = spec.detection;
        opts.trials = spec.trials;
        opts.seed = seed;
        opts.dist = spec.dist;
        opts.t_offline = spec.t_offline;
        if (spec.detection == DetectionMode::Windowed) {
            WindowSpec wspec =
                default_window_spec(k.model, k.r_cre, factory.chip().distances().d_m);
            LatencyOptions lopts;
            lopts.dist = spec.dist;
            lopts.d_m = factory.chip().distances().d_m;
            lopts.coverage = spec.coverage;
            RayEvent probe;
            probe.model = k.model;
            probe.r_cre = k.r_cre;
            probe.f_t1 = opts.ray.f_t1;
            probe.t_offline = spec.t_offline;
            probe.scramble_seed = splitmix64(seed ^ 0xabcd);
            LatencyResult lr = detection_latency(probe, wspec, lopts);
            latencies[i] = lr.detectable ? lr.cycles
                                         : std::numeric_limits<double>::infinity();
            opts.horizon_cycles = lr.detectable ? lr.cycles : wspec.w_t;
        }
        datasets[i] = build_per_ray_dataset(factory, opts, k_cap);
    };

    if (threads <= 1 || keys.size() <= 1) {
        for (size_t i = 0; i < keys.size(); ++i) build_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        int n_threads = std::min<size_t>(threads, keys.size());
        for (int w = 0; w < n_threads; ++w) {
            pool.emplace_back([&]() {
                while (true) {
                    size_t i = next.fetch_add(1);
                    if (i >= keys.size()) break;
                    build_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    const double t_offline_cycles = spec.t_offline / spec.dist.t_cycle;

    forall_cells([&](RayModel m, double f, double r) {
        DatasetKey dkey = key_for(m, r, f);
        size_t di = std::find(keys.begin(), keys.end(), dkey) - keys.begin();

        for (double gt : spec.gamma_toffline_values) {
            RayProcess proc{gt / spec.t_offline, n_q, spec.t_offline};
            std::vector<double> occ = occupancy_distribution(proc, k_cap);

            double c_d = spec.detection == DetectionMode::Windowed ? latencies[di] : 0.0;
            BufferRequirements buf{0, 0};
            bool c_d_finite = std::isfinite(c_d);
            if (spec.detection == DetectionMode::Windowed && c_d_finite)
                buf = buffer_requirements(c_d, factory.chip().distances().d_m, spec.d_buf);

            for (const std::string& method : spec.methods) {
                CostCell cell;
                cell.model = m;
                cell.f_t1 = m == RayModel::Direct ? f : 0.0;
                cell.r_cre = r;
                cell.gamma_toffline = gt;
                cell.method = method;
                cell.c_d_cycles = c_d;
                cell.trials = spec.trials;

                if (method == "remap") {
                    cell.buffer_slots = buf.capacity;
                    if (spec.detection == DetectionMode::Windowed && !c_d_finite) {
                        cell.rel_cost = std::numeric_limits<double>::infinity();
                        cell.p_inoperable = 1.0;
                    } else {
                        SteadyStateParams sp;
                        sp.occupancy = occ;
                        sp.data = &datasets[di];
                        sp.c_t = factory.c_t();
                        sp.lambda = proc.lambda();
                        sp.t_offline_cycles = t_offline_cycles;
                        sp.factory_qubits = factory.factory_qubits();
                        sp.buffer_qubits = buf.extra_qubits;
                        sp.buffer_capacity = buf.capacity;
                        cell.rel_cost = steady_state_remap_cost(sp);
                        double pi = 0.0;
                        for (size_t k = 0; k < occ.size(); ++k) {
                            size_t idx = std::min(k, datasets[di].p_inoperable.size() - 1);
                            pi += occ[k] * datasets[di].p_inoperable[idx];
                        }
                        cell.p_inoperable = pi;
                    }
                } else if (method == "expansion") {
                    int k_max = k_max_simultaneous(proc, spec.epsilon);
                    cell.rel_cost = expansion_relative_cost(
                        spec.expansion, factory.chip().distances(), m, r,
                        m == RayModel::Direct ? f : 0.0, k_max, occ);
                } else if (method == "distributed") {
                    int k_max = k_max_simultaneous(proc, spec.epsilon);
                    try {
                        DistributedCode code = select_distributed_code(
                            k_max, std::span<const DistributedCode>(spec.codes));
                        cell.rel_cost = distributed_relative_cost(code, occ);
                    } catch (const config_error&) {
                        cell.rel_cost = std::numeric_limits<double>::infinity();
                    }
                } else {
                    throw config_error("unknown method '" + method + "'");
                }
                report.cells.push_back(std::move(cell));
            }
        }
    });

    return report;
}

}  // namespace raysim
