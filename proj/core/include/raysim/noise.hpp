#ifndef RAYSIM_NOISE_HPP_
#define RAYSIM_NOISE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "raysim/geometry.hpp"
#include "raysim/rng.hpp"

namespace raysim {

/// Per-qubit noise figures. Times in seconds, error rates as probabilities.
struct QubitParams {
    double t1 = 0.0;
    double t2 = 0.0;
    double p1 = 0.0;
    double p_mr = 0.0;
};

/// Sampling spec for baseline qubit parameters. T1/T2 are normal draws,
/// error rates are lognormal draws with the same mean/std.
struct ParamDistributions {
    double t1_mean, t1_std;
    double t2_mean, t2_std;
    double p1_mean, p1_std;
    double p2_mean, p2_std;
    double pmr_mean, pmr_std;
    double t_cycle;  // seconds per stabilizer cycle

    /// Sycamore-derived figures improved 10x.
    static ParamDistributions defaults() {
        return ParamDistributions{200e-6, 20e-6, 300e-6, 50e-6, 0.8e-4, 0.5e-4,
                                  5e-4,   3e-4,  2e-3,   0.5e-3, 1e-6};
    }

    /// Same means, zero spread. Handy for deterministic studies.
    ParamDistributions means_only() const {
        ParamDistributions d = *this;
        d.t1_std = d.t2_std = d.p1_std = d.p2_std = d.pmr_std = 0.0;
        return d;
    }
};

inline uint64_t qubit_pair_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<uint64_t>(static_cast<uint32_t>(a)) << 32) | static_cast<uint32_t>(b);
}

/// Full chip noise state: per-qubit params (indexed like ChipLattice::qubits())
/// plus two-qubit gate error rates for adjacent measure/data pairs.
/// `t1_baseline` is kept separately so that ray effects always derive from the
/// undisturbed coherence time and overlapping rays compose by min(T1).
struct PhysicalParams {
    std::vector<QubitParams> qubit;
    std::vector<double> t1_baseline;
    std::unordered_map<uint64_t, double> p2;
    double t_cycle = 1e-6;

    double p2_for(int a, int b) const {
        auto it = p2.find(qubit_pair_key(a, b));
        return it == p2.end() ? 0.0 : it->second;
    }
};

enum class RayModel { Direct, Scrambling };

RayModel ray_model_from_string(const std::string& s);
std::string to_string(RayModel m);

/// One impact event.
struct RayEvent {
    RayModel model = RayModel::Direct;
    QubitCoord center;
    double r_cre = 3.0;
    double f_t1 = 0.01;  // Direct only
    double t_start = 0.0;
    double t_offline = 0.05;
    uint64_t scramble_seed = 0;  // Scrambling only
};

/// Poisson arrival process of ray impacts.
struct RayProcess {
    double gamma = 0.0;  // events per qubit per second
    int n_q = 1;
    double t_offline = 0.05;

    double lambda() const { return gamma * n_q * t_offline; }
};

/// Draws baseline parameters for every qubit of the chip. T1/T2 are resampled
/// until positive; error rates are resampled until <= 1.
/// Throws config_error on nonpositive means.
PhysicalParams sample_baseline_params(const ChipLattice& chip, const ParamDistributions& dist,
                                      Rng& rng, std::vector<std::string>* warnings = nullptr);

/// Direct-model T1 profile. The 3 µs error probability, not T1 itself, falls
/// linearly from its center value to the baseline value at dist = r_cre.
double direct_ray_t1(double dist, double r_cre, double f_t1, double t1_init);

/// Applies one ray to the params at time t (no-op outside the ray's active
/// window). Effects compose with whatever is already applied via per-qubit
/// min(T1); T2 is capped at 2*T1 afterwards.
PhysicalParams apply_ray(const PhysicalParams& params, const ChipLattice& chip,
                         const RayEvent& ray, double t);

/// In-place variant used by the simulation loops.
void apply_ray_in_place(PhysicalParams& params, const ChipLattice& chip, const RayEvent& ray,
                        double t);

/// Homogeneous Poisson process of rate gamma*n_q over [0, duration); centers
/// are uniform over the lattice grid sites. `proto` supplies the model kind
/// and per-event parameters; scramble seeds are drawn from rng.
std::vector<RayEvent> sample_arrivals(const RayProcess& proc, double duration,
                                      const ChipLattice& chip, const RayEvent& proto, Rng& rng);

/// Stationary M/D/inf occupancy: K ~ Poisson(gamma*n_q*t_offline).
/// Returns P(K=k) for k < k_cap and the full tail mass at index k_cap.
std::vector<double> occupancy_distribution(const RayProcess& proc, int k_cap);

}  // namespace raysim

#endif
