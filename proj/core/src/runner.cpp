#include "raysim/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "raysim/errors.hpp"
#include "raysim/rng.hpp"

namespace raysim {

using nlohmann::json;

Subcommand subcommand_from_string(const std::string& s) {
    if (s == "detect-latency") return Subcommand::DetectLatency;
    if (s == "per-ray") return Subcommand::PerRay;
    if (s == "sweep") return Subcommand::Sweep;
    if (s == "remap-demo") return Subcommand::RemapDemo;
    throw config_error("unknown subcommand '" + s +
                       "' (detect-latency|per-ray|sweep|remap-demo)");
}

namespace {

std::string fmt(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

json num_or_string(double v) {
    if (std::isfinite(v)) return v;
    return fmt(v);
}

void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw config_error("cannot write output file: " + p.string());
    out << content;
}

void write_manifest(const std::filesystem::path& dir, const std::string& subcommand,
                    const RunConfig& cfg) {
    json m;
    m["subcommand"] = subcommand;
    m["config_hash"] = cfg.config_hash;
    m["seed"] = cfg.seed;
    m["version"] = kVersion;
    m["config"] = json::parse(cfg.canonical_text);
    write_file(dir / (cfg.output_prefix + "_manifest.json"), m.dump(2) + "\n");
}

std::string model_field(RayModel m, double f_t1) {
    return m == RayModel::Direct ? fmt(f_t1) : "";
}

int run_detect_latency(const RunConfig& cfg, const std::filesystem::path& dir) {
    std::string csv = "model,f_t1,r_cre,mode,coverage,sample,cycles,distillations\n";
    const std::string mode_s =
        cfg.latency.mode == LatencyMode::Analytic ? "analytic" : "montecarlo";

    for (RayModel model : cfg.latency.models) {
        const std::vector<double> fs = model == RayModel::Direct
                                           ? cfg.latency.f_t1_values
                                           : std::vector<double>{0.0};
        for (double f : fs) {
            for (double r : cfg.latency.radii) {
                WindowSpec spec = cfg.resolved_window_spec(model, r);
                LatencyOptions opts;
                opts.dist = cfg.noise.means_only();
                opts.d_m = cfg.distances.d_m;
                opts.coverage = cfg.coverage;
                opts.mode = cfg.latency.mode;
                opts.mc_trials = cfg.latency.mc_trials;

                const int samples =
                    model == RayModel::Scrambling ? cfg.latency.rays_per_radius : 1;
                for (int s = 0; s < samples; ++s) {
                    RayEvent ray;
                    ray.model = model;
                    ray.r_cre = r;
                    ray.f_t1 = f;
                    ray.t_offline = cfg.t_offline;
                    ray.scramble_seed = Rng::derive(cfg.seed, 0x5c, static_cast<uint64_t>(s),
                                                    static_cast<uint64_t>(r * 1000))
                                            .next_u64();
                    opts.seed = hash_mix(cfg.seed, static_cast<uint64_t>(s));
                    LatencyResult res = detection_latency(ray, spec, opts);
                    double cycles = res.detectable ? res.cycles
                                                   : std::numeric_limits<double>::infinity();
                    double dist = res.detectable ? res.distillations
                                                 : std::numeric_limits<double>::infinity();
                    csv += to_string(model) + "," + model_field(model, f) + "," + fmt(r) + "," +
                           mode_s + "," + fmt(cfg.coverage) + "," + std::to_string(s) + "," +
                           fmt(cycles) + "," + fmt(dist) + "\n";
                }
            }
        }
    }
    write_file(dir / (cfg.output_prefix + "_latency.csv"), csv);
    return 0;
}

int run_per_ray(const RunConfig& cfg, const std::filesystem::path& dir) {
    FactoryModel factory(cfg.distances, cfg.footprint, cfg.rotations);
    PerRayOptions opts;
    opts.ray = cfg.ray;
    opts.detection = cfg.per_ray.detection;
    opts.trials = cfg.per_ray.trials;
    opts.seed = cfg.seed;
    opts.dist = cfg.noise.means_only();
    opts.t_offline = cfg.t_offline;
    OverheadDistribution dist = per_ray_overhead(factory, opts);

    std::string csv = "model,f_t1,r_cre,detection,trial,operable,cycles\n";
    for (size_t t = 0; t < dist.samples.size(); ++t) {
        const OverheadSample& s = dist.samples[t];
        csv += to_string(cfg.ray.model) + "," + model_field(cfg.ray.model, cfg.ray.f_t1) + "," +
               fmt(cfg.ray.r_cre) + "," + to_string(opts.detection) + "," + std::to_string(t) +
               "," + (s.operable ? "1" : "0") + "," + std::to_string(s.cycles) + "\n";
    }
    write_file(dir / (cfg.output_prefix + "_per_ray.csv"), csv);

    json summary;
    summary["model"] = to_string(cfg.ray.model);
    summary["f_t1"] = cfg.ray.f_t1;
    summary["r_cre"] = cfg.ray.r_cre;
    summary["detection"] = to_string(opts.detection);
    summary["trials"] = opts.trials;
    summary["p_inoperable"] = dist.p_inoperable;
    summary["mean_operable_cycles"] = dist.mean_operable_cycles;
    summary["mean_inv_cycles"] = dist.mean_inv_cycles;
    summary["seed"] = cfg.seed;
    summary["config_hash"] = cfg.config_hash;
    write_file(dir / (cfg.output_prefix + "_per_ray_summary.json"), summary.dump(2) + "\n");
    return 0;
}

int run_sweep(const RunConfig& cfg, const std::filesystem::path& dir, int threads) {
    FactoryModel factory(cfg.distances, cfg.footprint, cfg.rotations);
    CostReport report = sweep(factory, cfg.sweep, cfg.seed, threads);

    std::string csv =
        "model,f_t1,r_cre,gamma_toffline,method,rel_cost,p_inoperable,c_D_cycles,"
        "buffer_slots,trials,seed\n";
    json rows = json::array();
    for (const CostCell& c : report.cells) {
        csv += to_string(c.model) + "," + model_field(c.model, c.f_t1) + "," + fmt(c.r_cre) +
               "," + fmt(c.gamma_toffline) + "," + c.method + "," + fmt(c.rel_cost) + "," +
               fmt(c.p_inoperable) + "," + fmt(c.c_d_cycles) + "," +
               std::to_string(c.buffer_slots) + "," + std::to_string(c.trials) + "," +
               std::to_string(cfg.seed) + "\n";
        json row;
        row["model"] = to_string(c.model);
        if (c.model == RayModel::Direct) row["f_t1"] = c.f_t1;
        row["r_cre"] = c.r_cre;
        row["gamma_toffline"] = c.gamma_toffline;
        row["method"] = c.method;
        row["rel_cost"] = num_or_string(c.rel_cost);
        row["p_inoperable"] = c.p_inoperable;
        row["c_D_cycles"] = num_or_string(c.c_d_cycles);
        row["buffer_slots"] = c.buffer_slots;
        rows.push_back(row);
    }
    write_file(dir / (cfg.output_prefix + "_sweep.csv"), csv);

    json out;
    out["cells"] = rows;
    out["seed"] = cfg.seed;
    out["trials"] = report.trials;
    out["detection"] = to_string(cfg.sweep.detection);
    out["config_hash"] = cfg.config_hash;
    write_file(dir / (cfg.output_prefix + "_sweep.json"), out.dump(2) + "\n");
    return 0;
}

int run_remap_demo(const RunConfig& cfg, const std::filesystem::path& dir) {
    FactoryModel factory(cfg.distances, cfg.footprint, cfg.rotations);
    const ChipLattice& chip = factory.chip();

    std::vector<int> offline;
    for (const auto& [r, c] : cfg.remap_demo.offline_tiles) {
        bool found = false;
        for (const Tile& t : chip.tiles()) {
            if (t.grid_row == r && t.grid_col == c) {
                offline.push_back(t.index);
                found = true;
            }
        }
        if (!found)
            throw config_error("remap_demo.offline_tiles: no tile at (" + std::to_string(r) +
                               "," + std::to_string(c) + ")");
    }

    RemapResult res = factory.remap_mask(tile_mask(offline));

    json out;
    json off = json::array();
    for (int t : offline)
        off.push_back({chip.tiles()[t].grid_row, chip.tiles()[t].grid_col});
    out["offline_tiles"] = off;
    out["operable"] = res.operable;
    out["seed"] = cfg.seed;
    out["config_hash"] = cfg.config_hash;
    if (res.operable) {
        out["steps"] = res.steps;
        out["cycles"] = res.cycles;
        json placement = json::array();
        for (int t : res.placement)
            placement.push_back({chip.tiles()[t].grid_row, chip.tiles()[t].grid_col});
        out["placement"] = placement;
        json plan = json::array();
        for (const auto& step : res.plan.plan) {
            json jstep = json::array();
            for (const StepClaim& sc : step) {
                json claim = json::array();
                uint64_t m = sc.routing_tiles;
                while (m) {
                    int t = std::countr_zero(m);
                    m &= m - 1;
                    claim.push_back({chip.tiles()[t].grid_row, chip.tiles()[t].grid_col});
                }
                jstep.push_back({{"rotation", sc.rotation_id}, {"routing_tiles", claim}});
            }
            plan.push_back(jstep);
        }
        out["schedule"] = plan;
    }
    write_file(dir / (cfg.output_prefix + "_remap.json"), out.dump(2) + "\n");
    return 0;
}

}  // namespace

int run_subcommand(Subcommand cmd, const RunConfig& cfg, const RunOptions& opts) {
    std::filesystem::path dir(opts.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw config_error("cannot create output directory: " + dir.string());

    switch (cmd) {
        case Subcommand::DetectLatency:
            write_manifest(dir, "detect-latency", cfg);
            return run_detect_latency(cfg, dir);
        case Subcommand::PerRay:
            write_manifest(dir, "per-ray", cfg);
            return run_per_ray(cfg, dir);
        case Subcommand::Sweep:
            write_manifest(dir, "sweep", cfg);
            return run_sweep(cfg, dir, std::max(1, opts.threads));
        case Subcommand::RemapDemo:
            write_manifest(dir, "remap-demo", cfg);
            return run_remap_demo(cfg, dir);
    }
    return 1;
}

}  // namespace raysim
