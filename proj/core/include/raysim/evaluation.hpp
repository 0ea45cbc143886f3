#ifndef RAYSIM_EVALUATION_HPP_
#define RAYSIM_EVALUATION_HPP_

#include <cstdint>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "raysim/baselines.hpp"
#include "raysim/detector.hpp"
#include "raysim/factory.hpp"
#include "raysim/geometry.hpp"
#include "raysim/noise.hpp"
#include "raysim/syndrome.hpp"

namespace raysim {

struct RayParams {
    RayModel model = RayModel::Direct;
    double r_cre = 3.0;
    double f_t1 = 0.01;  // Direct only
};

enum class DetectionMode { Ideal, Windowed };

DetectionMode detection_mode_from_string(const std::string& s);
std::string to_string(DetectionMode m);

/// Shared factory context with a thread-safe memoized remap. Remap results
/// are pure functions of the offline-tile mask, so caching is transparent;
/// masks dominating a known-inoperable mask short-circuit to Inoperable.
class FactoryModel {
  public:
    FactoryModel(const CodeDistances& d, const FootprintSpec& fp, std::vector<Rotation> rotations);

    const ChipLattice& chip() const { return chip_; }
    const FactoryLayout& layout() const { return layout_; }
    int c_t() const { return layout_.c_t(); }
    long factory_qubits() const { return chip_.num_qubits(); }

    RemapResult remap_mask(uint64_t offline_mask);

  private:
    ChipLattice chip_;
    FactoryLayout layout_;
    std::mutex mu_;
    std::unordered_map<uint64_t, RemapResult> memo_;
    std::vector<uint64_t> minimal_inoperable_;
};

struct OverheadSample {
    bool operable = false;
    int cycles = 0;
};

struct OverheadDistribution {
    std::vector<OverheadSample> samples;
    double p_inoperable = 0.0;
    double mean_operable_cycles = 0.0;
    double mean_inv_cycles = 0.0;  // E[1/c]; inoperable trials contribute 0
};

struct PerRayOptions {
    RayParams ray;
    DetectionMode detection = DetectionMode::Ideal;
    int trials = 1000;
    uint64_t seed = 1;
    ParamDistributions dist = ParamDistributions::defaults().means_only();
    double horizon_cycles = -1.0;  // windowed detection episode; <0 = derive
    double t_offline = 0.05;
};

/// Samples ray impacts uniformly over the chip grid; flags qubits (ideal:
/// exactly the ray disk; windowed: per-tile detector trigger sampling with
/// the harmful region always flagged), marks touched tiles offline, re-maps
/// and records cycles-per-distillation or Inoperable.
OverheadDistribution per_ray_overhead(FactoryModel& factory, const PerRayOptions& opts);

/// E[1/c_k] and P(inoperable | k rays) for k = 0..k_cap, sampled with common
/// random numbers: the k-ray trial reuses the first k impacts of the
/// (k+1)-ray trial, so the estimates are monotone in k by construction.
struct PerRayDataset {
    std::vector<double> mean_inv_cycles;
    std::vector<double> p_inoperable;
    int trials = 0;
};

PerRayDataset build_per_ray_dataset(FactoryModel& factory, const PerRayOptions& opts, int k_cap);

struct SteadyStateParams {
    std::span<const double> occupancy;  // P(0..K) with tail lumped at K
    const PerRayDataset* data = nullptr;
    int c_t = 18;
    double lambda = 0.0;            // Gamma * n_q * T_offline
    double t_offline_cycles = 5e4;  // T_offline / t_cycle
    long factory_qubits = 0;
    long buffer_qubits = 0;
    int buffer_capacity = 0;
};

/// Remap method steady state: production rate R = sum_k P(k) E[1/c_k] minus
/// the amortized buffer discard (capacity+1 states per ray event); relative
/// qubitcycle cost = [(n_f + n_buf)/n_f] * [(1/c_T)/R]. Returns +inf when the
/// factory produces nothing.
double steady_state_remap_cost(const SteadyStateParams& p);

struct SweepSpec {
    std::vector<RayModel> models;
    std::vector<double> f_t1_values{0.1, 0.01, 0.001};
    std::vector<double> r_cre_values{1, 2, 3, 4};
    std::vector<double> gamma_toffline_values{1e-6, 1e-5, 1e-4, 1e-3};
    std::vector<std::string> methods{"remap", "expansion", "distributed"};
    DetectionMode detection = DetectionMode::Ideal;
    int trials = 10000;
    double t_offline = 0.05;
    double epsilon = 1e-6;
    int d_buf = 11;
    double coverage = 1.0 - 1e-6;
    ExpansionPolicy expansion;
    std::vector<DistributedCode> codes;
    ParamDistributions dist = ParamDistributions::defaults().means_only();
};

struct CostCell {
    RayModel model;
    double f_t1 = 0.0;  // 0 marks not-applicable (scrambling rows)
    double r_cre = 0.0;
    double gamma_toffline = 0.0;
    std::string method;
    double rel_cost = 0.0;
    double p_inoperable = 0.0;
    double c_d_cycles = 0.0;
    int buffer_slots = 0;
    int trials = 0;
};

struct CostReport {
    std::vector<CostCell> cells;
    uint64_t seed = 0;
    int trials = 0;
};

/// Evaluates steady_state cost per grid cell. Per-ray datasets are shared
/// across the gamma_toffline axis (common random numbers), windowed cells
/// derive c_D from the analytic detector latency first. Deterministic for a
/// fixed seed regardless of thread count.
CostReport sweep(FactoryModel& factory, const SweepSpec& spec, uint64_t seed, int threads);

}  // namespace raysim

#endif
