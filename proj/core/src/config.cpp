#include "raysim/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "raysim/errors.hpp"

namespace raysim {

using nlohmann::json;

const char* const kVersion = "0.1.0";

ExpansionPolicy default_expansion_policy() {
    // representative Direct-model d_extra values; monotone in radius, larger
    // for stronger rays. Meant to be replaced by measured values via config.
    ExpansionPolicy p;
    const struct {
        double f, r, d;
    } rows[] = {
        {0.1, 1, 2},  {0.1, 2, 2},  {0.1, 3, 4},   {0.1, 4, 6},
        {0.01, 1, 2}, {0.01, 2, 4}, {0.01, 3, 6},  {0.01, 4, 10},
        {0.001, 1, 4}, {0.001, 2, 6}, {0.001, 3, 10}, {0.001, 4, 14},
    };
    for (const auto& row : rows) p.direct_table[{row.r, row.f}] = row.d;
    return p;
}

WindowSpec RunConfig::resolved_window_spec(RayModel model, double r_cre) const {
    WindowSpec spec = default_window_spec(model, r_cre, distances.d_m);
    if (detector.w_s > 0) spec.w_s = detector.w_s;
    if (detector.w_t > 0) spec.w_t = detector.w_t;
    if (detector.r_off > 0) spec.r_off = detector.r_off;
    spec.fpr = detector.fpr;
    return spec;
}

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& msg) {
    throw config_error("config error at '" + path + "': " + msg);
}

void require_object(const json& j, const std::string& path) {
    if (!j.is_object()) bad(path, "expected an object");
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    require_object(j, path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) bad(path, "unknown key '" + it.key() + "'");
    }
}

double get_num(const json& j, const std::string& path, const char* key, double dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number()) bad(path + "." + key, "expected a number");
    return j[key].get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, int dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_number_integer()) bad(path + "." + key, "expected an integer");
    return j[key].get<int>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_string()) bad(path + "." + key, "expected a string");
    return j[key].get<std::string>();
}

std::vector<double> get_num_list(const json& j, const std::string& path, const char* key,
                                 std::vector<double> dflt) {
    if (!j.contains(key)) return dflt;
    if (!j[key].is_array()) bad(path + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& v : j[key]) {
        if (!v.is_number()) bad(path + "." + key, "expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

FootprintSpec parse_footprint(const json& j) {
    check_keys(j, "footprint", {"preset", "grid", "tiles"});
    int forms = j.contains("preset") + j.contains("grid") + j.contains("tiles");
    if (forms > 1) bad("footprint", "give exactly one of preset|grid|tiles");
    if (forms == 0 || j.contains("preset")) {
        std::string p = get_str(j, "footprint", "preset", "default");
        if (p == "default") return FootprintSpec::default_footprint();
        if (p == "single") return FootprintSpec::single_tile();
        bad("footprint.preset", "unknown preset '" + p + "'");
    }
    FootprintSpec fp;
    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_array() || g.empty()) bad("footprint.grid", "expected rows of kind strings");
        for (size_t r = 0; r < g.size(); ++r) {
            if (!g[r].is_array()) bad("footprint.grid", "expected rows of kind strings");
            for (size_t c = 0; c < g[r].size(); ++c) {
                if (!g[r][c].is_string()) bad("footprint.grid", "tile kinds are strings");
                fp.tiles.push_back({static_cast<int>(r), static_cast<int>(c),
                                    tile_kind_from_string(g[r][c].get<std::string>())});
            }
        }
        return fp;
    }
    for (const auto& t : j["tiles"]) {
        check_keys(t, "footprint.tiles[]", {"row", "col", "kind"});
        fp.tiles.push_back({get_int(t, "footprint.tiles[]", "row", 0),
                            get_int(t, "footprint.tiles[]", "col", 0),
                            tile_kind_from_string(get_str(t, "footprint.tiles[]", "kind",
                                                          "routing"))});
    }
    return fp;
}

json footprint_to_json(const FootprintSpec& fp) {
    json tiles = json::array();
    for (const TileSpec& t : fp.tiles)
        tiles.push_back({{"row", t.grid_row}, {"col", t.grid_col}, {"kind", to_string(t.kind)}});
    return json{{"tiles", tiles}};
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw config_error(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "(top level)",
               {"seed", "distances", "footprint", "noise", "ray", "detector", "factory",
                "baselines", "sweep", "per_ray", "detect_latency", "remap_demo", "output"});

    RunConfig cfg;
    if (!j.contains("seed")) bad("seed", "a seed is required (no wall-clock default)");
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
        bad("seed", "expected an integer");
    cfg.seed = j["seed"].get<uint64_t>();

    if (j.contains("distances")) {
        const json& d = j["distances"];
        check_keys(d, "distances", {"d_x", "d_z", "d_m"});
        cfg.distances.d_x = get_int(d, "distances", "d_x", 7);
        cfg.distances.d_z = get_int(d, "distances", "d_z", 3);
        cfg.distances.d_m = get_int(d, "distances", "d_m", 3);
        if (cfg.distances.d_x < 1 || cfg.distances.d_z < 1 || cfg.distances.d_m < 1)
            bad("distances", "distances must be >= 1");
    }
    if (j.contains("footprint")) cfg.footprint = parse_footprint(j["footprint"]);

    if (j.contains("noise")) {
        const json& n = j["noise"];
        check_keys(n, "noise",
                   {"t1_mean", "t1_std", "t2_mean", "t2_std", "p1_mean", "p1_std", "p2_mean",
                    "p2_std", "pmr_mean", "pmr_std", "t_cycle"});
        ParamDistributions& pd = cfg.noise;
        pd.t1_mean = get_num(n, "noise", "t1_mean", pd.t1_mean);
        pd.t1_std = get_num(n, "noise", "t1_std", pd.t1_std);
        pd.t2_mean = get_num(n, "noise", "t2_mean", pd.t2_mean);
        pd.t2_std = get_num(n, "noise", "t2_std", pd.t2_std);
        pd.p1_mean = get_num(n, "noise", "p1_mean", pd.p1_mean);
        pd.p1_std = get_num(n, "noise", "p1_std", pd.p1_std);
        pd.p2_mean = get_num(n, "noise", "p2_mean", pd.p2_mean);
        pd.p2_std = get_num(n, "noise", "p2_std", pd.p2_std);
        pd.pmr_mean = get_num(n, "noise", "pmr_mean", pd.pmr_mean);
        pd.pmr_std = get_num(n, "noise", "pmr_std", pd.pmr_std);
        pd.t_cycle = get_num(n, "noise", "t_cycle", pd.t_cycle);
        if (pd.t1_mean <= 0 || pd.t2_mean <= 0 || pd.p1_mean <= 0 || pd.p2_mean <= 0 ||
            pd.pmr_mean <= 0)
            bad("noise", "means must be positive");
        if (pd.t_cycle <= 0) bad("noise.t_cycle", "must be positive");
    }

    if (j.contains("ray")) {
        const json& r = j["ray"];
        check_keys(r, "ray", {"model", "r_cre", "f_t1", "gamma_toffline", "t_offline"});
        cfg.ray.model = ray_model_from_string(get_str(r, "ray", "model", "direct"));
        cfg.ray.r_cre = get_num(r, "ray", "r_cre", cfg.ray.r_cre);
        cfg.ray.f_t1 = get_num(r, "ray", "f_t1", cfg.ray.f_t1);
        cfg.gamma_toffline = get_num(r, "ray", "gamma_toffline", cfg.gamma_toffline);
        cfg.t_offline = get_num(r, "ray", "t_offline", cfg.t_offline);
        if (cfg.ray.r_cre <= 0) bad("ray.r_cre", "must be positive");
        if (!(cfg.ray.f_t1 > 0 && cfg.ray.f_t1 <= 1)) bad("ray.f_t1", "must lie in (0, 1]");
        if (cfg.t_offline <= 0) bad("ray.t_offline", "must be positive");
        if (cfg.gamma_toffline < 0) bad("ray.gamma_toffline", "must be >= 0");
    }

    if (j.contains("detector")) {
        const json& d = j["detector"];
        check_keys(d, "detector", {"fpr", "w_s", "w_t", "r_off", "coverage"});
        cfg.detector.fpr = get_num(d, "detector", "fpr", cfg.detector.fpr);
        cfg.detector.w_s = get_int(d, "detector", "w_s", 0);
        cfg.detector.w_t = get_int(d, "detector", "w_t", 0);
        cfg.detector.r_off = get_num(d, "detector", "r_off", 0.0);
        cfg.coverage = get_num(d, "detector", "coverage", cfg.coverage);
        if (!(cfg.detector.fpr > 0 && cfg.detector.fpr < 1))
            bad("detector.fpr", "must lie in (0, 1)");
        if (!(cfg.coverage > 0 && cfg.coverage < 1))
            bad("detector.coverage", "must lie in (0, 1)");
    }

    if (j.contains("factory")) {
        const json& f = j["factory"];
        check_keys(f, "factory", {"rotations", "d_buf"});
        cfg.d_buf = get_int(f, "factory", "d_buf", cfg.d_buf);
        if (cfg.d_buf < 1) bad("factory.d_buf", "must be >= 1");
        if (f.contains("rotations") && !f["rotations"].is_null()) {
            if (!f["rotations"].is_array())
                bad("factory.rotations", "expected an array of supports");
            int id = 1;
            for (const auto& sup : f["rotations"]) {
                if (!sup.is_array() || sup.empty())
                    bad("factory.rotations", "each support is a nonempty array of qubit indices");
                Rotation rot;
                rot.id = id++;
                for (const auto& q : sup) {
                    if (!q.is_number_integer()) bad("factory.rotations", "expected integers");
                    rot.support.push_back(q.get<int>());
                }
                cfg.rotations.push_back(std::move(rot));
            }
        }
    }

    cfg.expansion = default_expansion_policy();
    if (j.contains("baselines")) {
        const json& b = j["baselines"];
        check_keys(b, "baselines", {"epsilon", "d_extra_direct", "distributed_codes"});
        cfg.epsilon = get_num(b, "baselines", "epsilon", cfg.epsilon);
        if (!(cfg.epsilon > 0 && cfg.epsilon < 1)) bad("baselines.epsilon", "must lie in (0, 1)");
        if (b.contains("d_extra_direct")) {
            cfg.expansion.direct_table.clear();
            for (const auto& e : b["d_extra_direct"]) {
                check_keys(e, "baselines.d_extra_direct[]", {"r_cre", "f_t1", "d_extra"});
                double r = get_num(e, "baselines.d_extra_direct[]", "r_cre", -1);
                double f = get_num(e, "baselines.d_extra_direct[]", "f_t1", -1);
                double dx = get_num(e, "baselines.d_extra_direct[]", "d_extra", -1);
                if (r <= 0 || f <= 0 || dx < 0)
                    bad("baselines.d_extra_direct[]", "r_cre, f_t1 positive; d_extra >= 0");
                cfg.expansion.direct_table[{r, f}] = dx;
            }
        }
        if (b.contains("distributed_codes")) {
            cfg.codes.clear();
            for (const auto& c : b["distributed_codes"]) {
                check_keys(c, "baselines.distributed_codes[]", {"n", "d", "ancilla"});
                DistributedCode code;
                code.n = get_int(c, "baselines.distributed_codes[]", "n", 0);
                code.d = get_int(c, "baselines.distributed_codes[]", "d", 0);
                code.ancilla = get_int(c, "baselines.distributed_codes[]", "ancilla", 1);
                if (code.n < 1 || code.d < 2 || code.ancilla < 1)
                    bad("baselines.distributed_codes[]", "need n >= 1, d >= 2, ancilla >= 1");
                cfg.codes.push_back(code);
            }
        }
    }

    // sweep defaults inherit the shared sections
    cfg.sweep.models = {cfg.ray.model};
    cfg.sweep.t_offline = cfg.t_offline;
    cfg.sweep.epsilon = cfg.epsilon;
    cfg.sweep.d_buf = cfg.d_buf;
    cfg.sweep.coverage = cfg.coverage;
    cfg.sweep.dist = cfg.noise;
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        check_keys(s, "sweep",
                   {"models", "f_t1", "r_cre", "gamma_toffline", "methods", "detection",
                    "trials"});
        if (s.contains("models")) {
            cfg.sweep.models.clear();
            for (const auto& m : s["models"])
                cfg.sweep.models.push_back(ray_model_from_string(m.get<std::string>()));
        }
        cfg.sweep.f_t1_values = get_num_list(s, "sweep", "f_t1", cfg.sweep.f_t1_values);
        cfg.sweep.r_cre_values = get_num_list(s, "sweep", "r_cre", cfg.sweep.r_cre_values);
        cfg.sweep.gamma_toffline_values =
            get_num_list(s, "sweep", "gamma_toffline", cfg.sweep.gamma_toffline_values);
        if (s.contains("methods")) {
            cfg.sweep.methods.clear();
            for (const auto& m : s["methods"]) cfg.sweep.methods.push_back(m.get<std::string>());
        }
        cfg.sweep.detection =
            detection_mode_from_string(get_str(s, "sweep", "detection", "ideal"));
        cfg.sweep.trials = get_int(s, "sweep", "trials", cfg.sweep.trials);
        if (cfg.sweep.trials < 1) bad("sweep.trials", "must be >= 1");
        for (double v : cfg.sweep.gamma_toffline_values)
            if (v < 0) bad("sweep.gamma_toffline", "values must be >= 0");
        for (double v : cfg.sweep.r_cre_values)
            if (v <= 0) bad("sweep.r_cre", "values must be positive");
    }
    cfg.sweep.expansion = cfg.expansion;
    cfg.sweep.codes = cfg.codes;

    if (j.contains("per_ray")) {
        const json& p = j["per_ray"];
        check_keys(p, "per_ray", {"trials", "detection"});
        cfg.per_ray.trials = get_int(p, "per_ray", "trials", cfg.per_ray.trials);
        cfg.per_ray.detection =
            detection_mode_from_string(get_str(p, "per_ray", "detection", "ideal"));
        if (cfg.per_ray.trials < 1) bad("per_ray.trials", "must be >= 1");
    }

    if (j.contains("detect_latency")) {
        const json& d = j["detect_latency"];
        check_keys(d, "detect_latency",
                   {"models", "radii", "f_t1", "mode", "rays_per_radius", "mc_trials"});
        if (d.contains("models")) {
            cfg.latency.models.clear();
            for (const auto& m : d["models"])
                cfg.latency.models.push_back(ray_model_from_string(m.get<std::string>()));
        }
        cfg.latency.radii = get_num_list(d, "detect_latency", "radii", cfg.latency.radii);
        cfg.latency.f_t1_values =
            get_num_list(d, "detect_latency", "f_t1", cfg.latency.f_t1_values);
        std::string mode = get_str(d, "detect_latency", "mode", "analytic");
        if (mode == "analytic")
            cfg.latency.mode = LatencyMode::Analytic;
        else if (mode == "montecarlo")
            cfg.latency.mode = LatencyMode::MonteCarlo;
        else
            bad("detect_latency.mode", "expected analytic|montecarlo");
        cfg.latency.rays_per_radius =
            get_int(d, "detect_latency", "rays_per_radius", cfg.latency.rays_per_radius);
        cfg.latency.mc_trials = get_int(d, "detect_latency", "mc_trials", cfg.latency.mc_trials);
        if (cfg.latency.rays_per_radius < 1) bad("detect_latency.rays_per_radius", "must be >= 1");
    }

    if (j.contains("remap_demo")) {
        const json& r = j["remap_demo"];
        check_keys(r, "remap_demo", {"offline_tiles"});
        if (r.contains("offline_tiles")) {
            for (const auto& t : r["offline_tiles"]) {
                if (!t.is_array() || t.size() != 2)
                    bad("remap_demo.offline_tiles", "entries are [row, col] pairs");
                cfg.remap_demo.offline_tiles.emplace_back(t[0].get<int>(), t[1].get<int>());
            }
        }
    }

    if (j.contains("output")) {
        const json& o = j["output"];
        check_keys(o, "output", {"prefix"});
        cfg.output_prefix = get_str(o, "output", "prefix", cfg.output_prefix);
    }

    // canonical effective config (defaults applied)
    json eff;
    eff["seed"] = cfg.seed;
    eff["distances"] = {{"d_x", cfg.distances.d_x},
                        {"d_z", cfg.distances.d_z},
                        {"d_m", cfg.distances.d_m}};
    eff["footprint"] = footprint_to_json(cfg.footprint);
    eff["noise"] = {{"t1_mean", cfg.noise.t1_mean},   {"t1_std", cfg.noise.t1_std},
                    {"t2_mean", cfg.noise.t2_mean},   {"t2_std", cfg.noise.t2_std},
                    {"p1_mean", cfg.noise.p1_mean},   {"p1_std", cfg.noise.p1_std},
                    {"p2_mean", cfg.noise.p2_mean},   {"p2_std", cfg.noise.p2_std},
                    {"pmr_mean", cfg.noise.pmr_mean}, {"pmr_std", cfg.noise.pmr_std},
                    {"t_cycle", cfg.noise.t_cycle}};
    eff["ray"] = {{"model", to_string(cfg.ray.model)},
                  {"r_cre", cfg.ray.r_cre},
                  {"f_t1", cfg.ray.f_t1},
                  {"gamma_toffline", cfg.gamma_toffline},
                  {"t_offline", cfg.t_offline}};
    eff["detector"] = {{"fpr", cfg.detector.fpr},
                       {"w_s", cfg.detector.w_s},
                       {"w_t", cfg.detector.w_t},
                       {"r_off", cfg.detector.r_off},
                       {"coverage", cfg.coverage}};
    {
        json rots = json::array();
        const std::vector<Rotation>& rlist =
            cfg.rotations.empty() ? default_rotations() : cfg.rotations;
        for (const Rotation& r : rlist) rots.push_back(r.support);
        eff["factory"] = {{"rotations", rots}, {"d_buf", cfg.d_buf}};
    }
    {
        json table = json::array();
        for (const auto& [key, val] : cfg.expansion.direct_table)
            table.push_back({{"r_cre", key.r_cre}, {"f_t1", key.f_t1}, {"d_extra", val}});
        json codes = json::array();
        for (const DistributedCode& c : cfg.codes)
            codes.push_back({{"n", c.n}, {"d", c.d}, {"ancilla", c.ancilla}});
        eff["baselines"] = {{"epsilon", cfg.epsilon},
                            {"d_extra_direct", table},
                            {"distributed_codes", codes}};
    }
    {
        json models = json::array();
        for (RayModel m : cfg.sweep.models) models.push_back(to_string(m));
        eff["sweep"] = {{"models", models},
                        {"f_t1", cfg.sweep.f_t1_values},
                        {"r_cre", cfg.sweep.r_cre_values},
                        {"gamma_toffline", cfg.sweep.gamma_toffline_values},
                        {"methods", cfg.sweep.methods},
                        {"detection", to_string(cfg.sweep.detection)},
                        {"trials", cfg.sweep.trials}};
    }
    eff["per_ray"] = {{"trials", cfg.per_ray.trials},
                      {"detection", to_string(cfg.per_ray.detection)}};
    {
        json models = json::array();
        for (RayModel m : cfg.latency.models) models.push_back(to_string(m));
        eff["detect_latency"] = {
            {"models", models},
            {"radii", cfg.latency.radii},
            {"f_t1", cfg.latency.f_t1_values},
            {"mode", cfg.latency.mode == LatencyMode::Analytic ? "analytic" : "montecarlo"},
            {"rays_per_radius", cfg.latency.rays_per_radius},
            {"mc_trials", cfg.latency.mc_trials}};
    }
    {
        json tiles = json::array();
        for (const auto& [r, c] : cfg.remap_demo.offline_tiles) tiles.push_back({r, c});
        eff["remap_demo"] = {{"offline_tiles", tiles}};
    }
    eff["output"] = {{"prefix", cfg.output_prefix}};

    cfg.canonical_text = eff.dump(2);
    cfg.config_hash = hex64(fnv1a64(cfg.canonical_text));
    return cfg;
}

RunConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("config file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace raysim
