#include "raysim/detector.hpp"

#include <algorithm>
#include <cmath>

#include "raysim/errors.hpp"

namespace raysim {

WindowSpec default_window_spec(RayModel model, double r_cre, int d_m) {
    if (r_cre <= 0.0) throw config_error("r_cre must be positive");
    WindowSpec spec;
    if (model == RayModel::Direct) {
        spec.w_s = static_cast<int>(std::ceil(r_cre / 2.0)) + 1;
        spec.r_off = r_cre;
    } else {
        spec.w_s = std::max(1, static_cast<int>(std::ceil(r_cre)));
        spec.r_off = 1.5 * r_cre;
    }
    spec.w_t = 6 * d_m;
    spec.fpr = 1e-8;
    return spec;
}

double binomial_tail_gt(int n_trials, double p, int n) {
    if (n >= n_trials) return 0.0;
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) return n < n_trials ? 1.0 : 0.0;
    if (n < 0) return 1.0;
    const double logp = std::log(p);
    const double log1mp = std::log1p(-p);
    const double lgn = std::lgamma(n_trials + 1.0);
    long double acc = 0.0L;
    for (int k = n_trials; k > n; --k) {
        double lp = lgn - std::lgamma(k + 1.0) - std::lgamma(n_trials - k + 1.0) + k * logp +
                    (n_trials - k) * log1mp;
        acc += expl(static_cast<long double>(lp));
    }
    return std::min(1.0, static_cast<double>(acc));
}

int binomial_threshold(int n_trials, double p, double fpr) {
    if (!(fpr > 0.0 && fpr < 1.0)) throw config_error("FPR must lie in (0, 1)");
    if (n_trials < 0) throw config_error("n_trials must be >= 0");
    if (p < 0.0 || p >= 1.0) {
        if (p == 0.0) return 0;
        throw config_error("threshold probability must lie in [0, 1)");
    }
    if (p == 0.0 || n_trials == 0) return 0;

    // suffix[k] = P(X >= k), accumulated from the top so small terms add first
    const double logp = std::log(p);
    const double log1mp = std::log1p(-p);
    const double lgn = std::lgamma(n_trials + 1.0);
    std::vector<long double> suffix(static_cast<size_t>(n_trials) + 2, 0.0L);
    for (int k = n_trials; k >= 0; --k) {
        double lp = lgn - std::lgamma(k + 1.0) - std::lgamma(n_trials - k + 1.0) + k * logp +
                    (n_trials - k) * log1mp;
        suffix[k] = suffix[k + 1] + expl(static_cast<long double>(lp));
    }
    for (int n = 0; n <= n_trials; ++n) {
        if (suffix[n + 1] < static_cast<long double>(fpr)) return n;
    }
    return n_trials;
}

DetectorBank build_detector(const ChipLattice& chip, std::span<const Stabilizer> stabs,
                            const SyndromeModel& baseline, const WindowSpec& spec) {
    if (spec.w_s < 1 || spec.w_t < 1) throw config_error("window sizes must be >= 1");
    if (!(spec.fpr > 0.0 && spec.fpr < 1.0)) throw config_error("FPR must lie in (0, 1)");
    if (spec.r_off <= 0.0) throw config_error("r_off must be positive");

    DetectorBank bank;
    bank.spec = spec;
    bank.windows_of_stab.resize(stabs.size());

    const int grid_rows = chip.tile_data_rows() + 1;
    const int grid_cols = chip.tile_data_cols() + 1;

    // dual-grid index per tile
    std::vector<std::vector<int>> grid(chip.tiles().size(),
                                       std::vector<int>(grid_rows * grid_cols, -1));
    for (const Stabilizer& s : stabs)
        grid[s.tile][s.grid_row * grid_cols + s.grid_col] = s.id;

    for (const Tile& tile : chip.tiles()) {
        const int size_r = std::min(spec.w_s, grid_rows);
        const int size_c = std::min(spec.w_s, grid_cols);
        for (int r0 = 0; r0 + size_r <= grid_rows; ++r0) {
            for (int c0 = 0; c0 + size_c <= grid_cols; ++c0) {
                Window w;
                w.tile = tile.index;
                w.grid_row0 = r0;
                w.grid_col0 = c0;
                w.size_rows = size_r;
                w.size_cols = size_c;
                double sum_p = 0.0;
                for (int r = r0; r < r0 + size_r; ++r) {
                    for (int c = c0; c < c0 + size_c; ++c) {
                        int sid = grid[tile.index][r * grid_cols + c];
                        if (sid < 0) continue;
                        w.members.push_back(sid);
                        sum_p += baseline.p_syn[sid];
                    }
                }
                if (w.members.empty()) continue;
                w.center = {tile.region.row0 + 2 * r0 + (size_r - 1),
                            tile.region.col0 + 2 * c0 + (size_c - 1)};
                w.p_base = sum_p / static_cast<double>(w.members.size());
                w.n_trials = static_cast<int>(w.members.size()) * spec.w_t;
                w.n_th = binomial_threshold(w.n_trials, w.p_base, spec.fpr);

                // flag disk: every qubit within r_off of the window center
                int rad = static_cast<int>(std::ceil(spec.r_off));
                for (int dr = -rad; dr <= rad; ++dr) {
                    for (int dc = -rad; dc <= rad; ++dc) {
                        QubitCoord q{w.center.row + dr, w.center.col + dc};
                        int qi = chip.qubit_index(q);
                        if (qi < 0) continue;
                        if (euclidean_distance(q, w.center) <= spec.r_off)
                            w.flag_qubits.push_back(qi);
                    }
                }

                w.index = static_cast<int>(bank.windows.size());
                for (int sid : w.members) bank.windows_of_stab[sid].push_back(w.index);
                bank.windows.push_back(std::move(w));
            }
        }
    }
    return bank;
}

DetectorState::DetectorState(const DetectorBank& bank) : bank_(&bank) {
    ring_.assign(bank.windows.size() * static_cast<size_t>(bank.spec.w_t), 0);
    totals_.assign(bank.windows.size(), 0);
}

void DetectorState::reset() {
    std::fill(ring_.begin(), ring_.end(), 0);
    std::fill(totals_.begin(), totals_.end(), 0);
    cursor_ = 0;
}

std::vector<int> DetectorState::step(std::span<const uint8_t> cycle_bits) {
    const int w_t = bank_->spec.w_t;
    std::vector<int> triggered;
    for (size_t wi = 0; wi < bank_->windows.size(); ++wi) {
        const Window& w = bank_->windows[wi];
        int sum = 0;
        for (int sid : w.members) sum += cycle_bits[sid];
        uint16_t& oldest = ring_[wi * w_t + cursor_];
        totals_[wi] += sum - oldest;
        oldest = static_cast<uint16_t>(sum);
        if (totals_[wi] > w.n_th) triggered.push_back(static_cast<int>(wi));
    }
    cursor_ = (cursor_ + 1) % w_t;
    return triggered;
}

double window_trigger_prob(const Window& w, std::span<const double> elevated_rates) {
    double sum = 0.0;
    for (int sid : w.members) sum += elevated_rates[sid];
    double p_hat = sum / static_cast<double>(w.members.size());
    if (p_hat >= 1.0) p_hat = 1.0 - 1e-12;
    return binomial_tail_gt(w.n_trials, p_hat, w.n_th);
}

namespace {

struct LatencyContext {
    ChipLattice chip;
    std::vector<Stabilizer> stabs;
    SyndromeModel baseline;
    SyndromeModel elevated;
    DetectorBank bank;
    std::vector<int> ray_qubits;
    RayEvent ray;
    int c_t = 18;
};

LatencyContext make_latency_context(const RayEvent& ray, const WindowSpec& spec,
                                    const LatencyOptions& opts) {
    LatencyContext ctx;
    int half = static_cast<int>(std::ceil(ray.r_cre + spec.r_off)) + 2 * opts.patch_margin;
    int n = std::max(3, half);
    if (n % 2 == 0) ++n;
    ctx.chip = build_chip({n, n, opts.d_m}, FootprintSpec::single_tile());
    Rng dummy(1);
    PhysicalParams params = sample_baseline_params(ctx.chip, opts.dist, dummy);
    ctx.stabs = build_stabilizers(ctx.chip);
    ctx.baseline = build_syndrome_model(params, ctx.stabs);

    ctx.ray = ray;
    ctx.ray.center = {n, n};  // data qubit at patch center for odd n
    ctx.ray.t_start = 0.0;
    if (ctx.ray.t_offline <= 0.0) ctx.ray.t_offline = 1.0;
    PhysicalParams hit = apply_ray(params, ctx.chip, ctx.ray, 0.0);
    ctx.elevated = build_syndrome_model(hit, ctx.stabs);

    ctx.bank = build_detector(ctx.chip, ctx.stabs, ctx.baseline, spec);
    for (int qi = 0; qi < ctx.chip.num_qubits(); ++qi) {
        if (euclidean_distance(ctx.chip.qubits()[qi].coord, ctx.ray.center) < ray.r_cre)
            ctx.ray_qubits.push_back(qi);
    }
    ctx.c_t = 6 * opts.d_m;
    return ctx;
}

LatencyResult analytic_latency(const LatencyContext& ctx, const WindowSpec& spec,
                               const LatencyOptions& opts) {
    LatencyResult res;
    std::vector<double> q(ctx.bank.windows.size(), 0.0);
    for (size_t wi = 0; wi < ctx.bank.windows.size(); ++wi)
        q[wi] = window_trigger_prob(ctx.bank.windows[wi], ctx.elevated.p_syn);

    // per-qubit union of informative windows whose flag disk covers it
    std::vector<double> log_miss(ctx.chip.num_qubits(), 0.0);
    for (size_t wi = 0; wi < ctx.bank.windows.size(); ++wi) {
        if (q[wi] <= spec.fpr) continue;  // indistinguishable from baseline
        double l = -std::log1p(-std::min(q[wi], 1.0 - 1e-15));
        for (int qi : ctx.bank.windows[wi].flag_qubits) log_miss[qi] += l;
    }

    const double need = -std::log(1.0 - opts.coverage);
    long max_m = 0;
    for (int qi : ctx.ray_qubits) {
        if (log_miss[qi] <= 0.0) {
            res.detectable = false;
            return res;
        }
        long m = static_cast<long>(std::ceil(need / log_miss[qi]));
        max_m = std::max(max_m, std::max(1L, m));
    }
    res.detectable = true;
    res.cycles = static_cast<double>(spec.w_t - 1 + max_m);
    res.distillations = res.cycles / ctx.c_t;
    return res;
}

LatencyResult montecarlo_latency(const LatencyContext& ctx, const WindowSpec& spec,
                                 const LatencyOptions& opts) {
    LatencyResult res;
    std::vector<long> latencies;
    latencies.reserve(opts.mc_trials);
    std::vector<uint8_t> cycle(ctx.stabs.size(), 0);
    std::vector<uint8_t> flagged(ctx.chip.num_qubits(), 0);

    for (int trial = 0; trial < opts.mc_trials; ++trial) {
        Rng rng = Rng::derive(opts.seed, 0x1a7e, static_cast<uint64_t>(trial));
        DetectorState state(ctx.bank);
        std::fill(flagged.begin(), flagged.end(), 0);
        size_t remaining = ctx.ray_qubits.size();
        long cycles = opts.mc_max_cycles;
        for (long c = 0; c < opts.mc_max_cycles; ++c) {
            sample_cycle(ctx.elevated, rng, cycle);
            for (int wi : state.step(cycle)) {
                for (int qi : ctx.bank.windows[wi].flag_qubits) {
                    if (!flagged[qi]) {
                        flagged[qi] = 1;
                        if (std::find(ctx.ray_qubits.begin(), ctx.ray_qubits.end(), qi) !=
                            ctx.ray_qubits.end())
                            --remaining;
                    }
                }
            }
            if (remaining == 0) {
                cycles = c + 1;
                break;
            }
        }
        latencies.push_back(cycles);
    }
    std::sort(latencies.begin(), latencies.end());
    size_t idx = static_cast<size_t>(std::ceil(opts.coverage * opts.mc_trials));
    idx = std::min(latencies.size() - 1, idx == 0 ? 0 : idx - 1);
    res.detectable = latencies[idx] < opts.mc_max_cycles;
    res.cycles = static_cast<double>(latencies[idx]);
    res.distillations = res.cycles / ctx.c_t;
    return res;
}

}  // namespace

LatencyResult detection_latency(const RayEvent& ray, const WindowSpec& spec,
                                const LatencyOptions& opts) {
    if (!(opts.coverage > 0.0 && opts.coverage < 1.0))
        throw config_error("coverage must lie in (0, 1)");
    LatencyContext ctx = make_latency_context(ray, spec, opts);
    if (opts.mode == LatencyMode::Analytic) return analytic_latency(ctx, spec, opts);
    return montecarlo_latency(ctx, spec, opts);
}

}  // namespace raysim
