#ifndef RAYSIM_CONFIG_HPP_
#define RAYSIM_CONFIG_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "raysim/baselines.hpp"
#include "raysim/detector.hpp"
#include "raysim/evaluation.hpp"
#include "raysim/factory.hpp"
#include "raysim/geometry.hpp"
#include "raysim/noise.hpp"

namespace raysim {

struct LatencyRunSpec {
    std::vector<RayModel> models{RayModel::Direct};
    std::vector<double> radii{1, 2, 3, 4};
    std::vector<double> f_t1_values{0.1, 0.01, 0.001};
    LatencyMode mode = LatencyMode::Analytic;
    int rays_per_radius = 100;  // scrambling draws per radius
    int mc_trials = 20;
};

struct PerRayRunSpec {
    int trials = 1000;
    DetectionMode detection = DetectionMode::Ideal;
};

struct RemapDemoSpec {
    std::vector<std::pair<int, int>> offline_tiles;  // tile-grid coordinates
};

/// Fully-validated run configuration. Defaults fill every omitted field; the
/// effective config (defaults applied) is kept as canonical JSON text for
/// hashing and the run manifest.
struct RunConfig {
    uint64_t seed = 0;
    CodeDistances distances;
    FootprintSpec footprint = FootprintSpec::default_footprint();
    ParamDistributions noise = ParamDistributions::defaults();

    RayParams ray{RayModel::Direct, 3.0, 0.01};
    double gamma_toffline = 1e-5;
    double t_offline = 0.05;

    WindowSpec detector{0, 0, 1e-8, 0.0};  // zeros resolve from model/r/d_m
    double coverage = 1.0 - 1e-6;

    std::vector<Rotation> rotations;  // empty = default_rotations()
    int d_buf = 11;

    double epsilon = 1e-6;
    ExpansionPolicy expansion;
    std::vector<DistributedCode> codes = default_distributed_codes();

    SweepSpec sweep;
    PerRayRunSpec per_ray;
    LatencyRunSpec latency;
    RemapDemoSpec remap_demo;

    std::string output_prefix = "run";

    std::string canonical_text;  // effective config, canonical JSON
    std::string config_hash;     // FNV-1a 64 over canonical_text, hex

    /// Detector spec with auto fields resolved for a given model/radius.
    WindowSpec resolved_window_spec(RayModel model, double r_cre) const;
};

/// Parses and validates a config file. Unknown keys and out-of-range values
/// raise config_error with the offending key path.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

/// Ships the default Direct-model d_extra table (representative estimates;
/// replace via baselines.d_extra_direct).
ExpansionPolicy default_expansion_policy();

extern const char* const kVersion;

}  // namespace raysim

#endif
