#include "raysim/noise.hpp"

#include <algorithm>
#include <cmath>

#include "raysim/errors.hpp"

namespace raysim {

RayModel ray_model_from_string(const std::string& s) {
    if (s == "direct") return RayModel::Direct;
    if (s == "scrambling") return RayModel::Scrambling;
    throw config_error("unknown ray model '" + s + "' (expected direct|scrambling)");
}

std::string to_string(RayModel m) {
    return m == RayModel::Direct ? "direct" : "scrambling";
}

namespace {

double sample_positive_normal(Rng& rng, double mean, double std) {
    if (std <= 0.0) return mean;
    for (int i = 0; i < 1000; ++i) {
        double v = rng.normal(mean, std);
        if (v > 0.0) return v;
    }
    return mean;  // pathological spec; fall back to the mean
}

double sample_probability(Rng& rng, double mean, double std) {
    for (int i = 0; i < 1000; ++i) {
        double v = rng.lognormal_mean_std(mean, std);
        if (v <= 1.0) return v;
    }
    return mean;
}

}  // namespace

PhysicalParams sample_baseline_params(const ChipLattice& chip, const ParamDistributions& dist,
                                      Rng& rng, std::vector<std::string>* warnings) {
    if (dist.t1_mean <= 0 || dist.t2_mean <= 0 || dist.p1_mean <= 0 || dist.p2_mean <= 0 ||
        dist.pmr_mean <= 0 || dist.t_cycle <= 0)
        throw config_error("noise distribution means and t_cycle must be positive");

    PhysicalParams p;
    p.t_cycle = dist.t_cycle;
    p.qubit.resize(chip.qubits().size());
    p.t1_baseline.resize(chip.qubits().size());

    int t2_violations = 0;
    for (size_t i = 0; i < chip.qubits().size(); ++i) {
        QubitParams& q = p.qubit[i];
        q.t1 = sample_positive_normal(rng, dist.t1_mean, dist.t1_std);
        q.t2 = sample_positive_normal(rng, dist.t2_mean, dist.t2_std);
        q.p1 = sample_probability(rng, dist.p1_mean, dist.p1_std);
        q.p_mr = sample_probability(rng, dist.pmr_mean, dist.pmr_std);
        p.t1_baseline[i] = q.t1;
        if (q.t2 > 2.0 * q.t1) ++t2_violations;
    }
    if (warnings && t2_violations > 0)
        warnings->push_back(std::to_string(t2_violations) + " qubits sampled with T2 > 2*T1");

    // two-qubit rates for every measure qubit / support-data pair
    const auto& qubits = chip.qubits();
    for (size_t i = 0; i < qubits.size(); ++i) {
        if (qubits[i].role != QubitRole::Measure) continue;
        for (int dr : {-1, 1}) {
            for (int dc : {-1, 1}) {
                QubitCoord n{qubits[i].coord.row + dr, qubits[i].coord.col + dc};
                int j = chip.qubit_index(n);
                if (j < 0 || chip.qubits()[j].role != QubitRole::Data) continue;
                uint64_t key = qubit_pair_key(static_cast<int>(i), j);
                if (!p.p2.count(key))
                    p.p2[key] = sample_probability(rng, dist.p2_mean, dist.p2_std);
            }
        }
    }
    return p;
}

double direct_ray_t1(double dist, double r_cre, double f_t1, double t1_init) {
    constexpr double kProbe = 3e-6;  // 3 us decoherence probe window
    if (dist <= 0.0) return f_t1 * t1_init;
    if (dist >= r_cre) return t1_init;
    double p_center = -std::expm1(-kProbe / (f_t1 * t1_init));
    double p_edge = -std::expm1(-kProbe / t1_init);
    double p = p_center + (p_edge - p_center) * (dist / r_cre);
    return -kProbe / std::log1p(-p);
}

void apply_ray_in_place(PhysicalParams& params, const ChipLattice& chip, const RayEvent& ray,
                        double t) {
    if (t < ray.t_start || t >= ray.t_start + ray.t_offline) return;

    // only sites within the ray's bounding box can be affected
    int r0 = static_cast<int>(std::floor(ray.center.row - ray.r_cre));
    int r1 = static_cast<int>(std::ceil(ray.center.row + ray.r_cre));
    int c0 = static_cast<int>(std::floor(ray.center.col - ray.r_cre));
    int c1 = static_cast<int>(std::ceil(ray.center.col + ray.r_cre));

    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            int qi = chip.qubit_index({r, c});
            if (qi < 0) continue;
            double dist = euclidean_distance({r, c}, ray.center);
            if (dist >= ray.r_cre) continue;  // strict boundary, inclusive center
            double t1_init = params.t1_baseline[qi];
            double t1_ray;
            if (ray.model == RayModel::Direct) {
                t1_ray = direct_ray_t1(dist, ray.r_cre, ray.f_t1, t1_init);
            } else {
                uint64_t h = hash_mix(ray.scramble_seed,
                                      (static_cast<uint64_t>(static_cast<uint32_t>(r)) << 32) |
                                          static_cast<uint32_t>(c));
                double u = 0.01 + 0.99 * u64_to_unit_double(splitmix64(h));
                t1_ray = u * t1_init;
            }
            QubitParams& q = params.qubit[qi];
            q.t1 = std::min(q.t1, t1_ray);
            q.t2 = std::min(q.t2, 2.0 * q.t1);
        }
    }
}

PhysicalParams apply_ray(const PhysicalParams& params, const ChipLattice& chip,
                         const RayEvent& ray, double t) {
    PhysicalParams out = params;
    apply_ray_in_place(out, chip, ray, t);
    return out;
}

std::vector<RayEvent> sample_arrivals(const RayProcess& proc, double duration,
                                      const ChipLattice& chip, const RayEvent& proto, Rng& rng) {
    if (duration <= 0.0) throw config_error("arrival duration must be positive");
    std::vector<RayEvent> events;
    double rate = proc.gamma * proc.n_q;
    if (rate <= 0.0) return events;
    double t = 0.0;
    uint64_t n_sites = static_cast<uint64_t>(chip.width()) * chip.height();
    while (true) {
        t += rng.exponential(rate);
        if (t >= duration) break;
        RayEvent e = proto;
        e.t_start = t;
        e.t_offline = proc.t_offline;
        uint64_t site = rng.uniform_index(n_sites);
        e.center = {static_cast<int>(site / chip.width()), static_cast<int>(site % chip.width())};
        e.scramble_seed = rng.next_u64();
        events.push_back(e);
    }
    return events;
}

std::vector<double> occupancy_distribution(const RayProcess& proc, int k_cap) {
    if (k_cap < 0) throw config_error("k_cap must be >= 0");
    double lambda = proc.lambda();
    std::vector<double> p(static_cast<size_t>(k_cap) + 1, 0.0);
    double pk = std::exp(-lambda);
    double cum = 0.0;
    for (int k = 0; k < k_cap; ++k) {
        p[k] = pk;
        cum += pk;
        pk *= lambda / (k + 1);
    }
    p[k_cap] = std::max(0.0, 1.0 - cum);  // tail mass
    return p;
}

}  // namespace raysim
