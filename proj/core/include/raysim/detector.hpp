#ifndef RAYSIM_DETECTOR_HPP_
#define RAYSIM_DETECTOR_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "raysim/geometry.hpp"
#include "raysim/noise.hpp"
#include "raysim/syndrome.hpp"

namespace raysim {

struct WindowSpec {
    int w_s = 3;          // spatial side, in dual-grid cells
    int w_t = 18;         // cycles
    double fpr = 1e-8;    // per-window false positive rate target
    double r_off = 3.0;   // offline flag radius, in qubit spacings
};

/// The empirically chosen window settings for a given ray model and radius:
/// w_s = ceil(r/2)+1 (Direct) or ceil(r) (Scrambling), w_t = 6*d_m,
/// r_off = r (Direct) or 1.5*r (Scrambling), FPR = 1e-8.
WindowSpec default_window_spec(RayModel model, double r_cre, int d_m);

/// Smallest n such that P[X > n] < fpr for X ~ Binomial(n_trials, p).
/// p == 0 maps to 0; p >= 1 or fpr outside (0,1) is a config error.
int binomial_threshold(int n_trials, double p, double fpr);

/// Upper tail P[X > n] for X ~ Binomial(n_trials, p), log-space sum.
double binomial_tail_gt(int n_trials, double p, int n);

struct Window {
    int index = 0;
    int tile = -1;
    int grid_row0 = 0, grid_col0 = 0;  // dual-grid cell range
    int size_rows = 0, size_cols = 0;
    std::vector<int> members;  // stabilizer ids inside the window
    QubitCoord center;         // spatial center on the chip grid
    double p_base = 0.0;       // mean member baseline rate
    int n_trials = 0;          // members * w_t
    int n_th = 0;
    std::vector<int> flag_qubits;  // qubit indices within r_off of center
};

/// All windows of a chip, one bank per run. Windows slide with stride 1 over
/// each tile's dual grid; windows wider than a tile clip to the tile.
struct DetectorBank {
    WindowSpec spec;
    std::vector<Window> windows;
    std::vector<std::vector<int>> windows_of_stab;  // stabilizer id -> window indices
};

DetectorBank build_detector(const ChipLattice& chip, std::span<const Stabilizer> stabs,
                            const SyndromeModel& baseline, const WindowSpec& spec);

/// Rolling spatiotemporal sums over a syndrome stream. Missing history counts
/// as zero. step() is O(#stabilizers + #windows) per cycle.
class DetectorState {
  public:
    explicit DetectorState(const DetectorBank& bank);

    /// Consumes one cycle of syndrome bits; returns indices of windows whose
    /// rolling sum exceeds their threshold this cycle.
    std::vector<int> step(std::span<const uint8_t> cycle_bits);

    int rolling_sum(int window) const { return totals_[window]; }
    void reset();

  private:
    const DetectorBank* bank_;
    std::vector<uint16_t> ring_;  // per window, w_t per-cycle member sums
    std::vector<int> totals_;
    int cursor_ = 0;
};

/// Trigger probability per cycle for a window under elevated per-stabilizer
/// rates (binomial approximation at the mean member rate).
double window_trigger_prob(const Window& w, std::span<const double> elevated_rates);

enum class LatencyMode { Analytic, MonteCarlo };

struct LatencyOptions {
    ParamDistributions dist = ParamDistributions::defaults().means_only();
    int d_m = 3;
    double coverage = 1.0 - 1e-6;
    LatencyMode mode = LatencyMode::Analytic;
    int patch_margin = 3;   // dual-grid cells beyond ceil(r_cre + r_off)
    int mc_trials = 20;
    long mc_max_cycles = 2'000'000;
    uint64_t seed = 1;
};

struct LatencyResult {
    bool detectable = false;
    double cycles = 0.0;
    double distillations = 0.0;  // cycles / (6 d_m)
};

/// Cycles until every qubit within r_cre of the impact is flagged with the
/// requested probability. The ray is placed at the center of a single square
/// patch large enough to contain the ray and its flag disks.
///
/// Analytic mode races per-cycle window triggers treated as independent;
/// Monte Carlo mode replays sampled streams through DetectorState and reports
/// the empirical quantile at `coverage`.
LatencyResult detection_latency(const RayEvent& ray, const WindowSpec& spec,
                                const LatencyOptions& opts);

}  // namespace raysim

#endif
