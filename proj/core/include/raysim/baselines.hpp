#ifndef RAYSIM_BASELINES_HPP_
#define RAYSIM_BASELINES_HPP_

#include <map>
#include <span>
#include <vector>

#include "raysim/geometry.hpp"
#include "raysim/noise.hpp"

namespace raysim {

/// Extra code distance needed to ride out a ray, per (model, radius, strength).
/// Direct-model entries come from a config table; Scrambling uses
/// d_extra = 2*r_cre (worst case: a chain of disabled qubits spanning the
/// anomaly).
struct ExpansionPolicy {
    struct Key {
        double r_cre;
        double f_t1;
        bool operator<(const Key& o) const {
            return r_cre != o.r_cre ? r_cre < o.r_cre : f_t1 < o.f_t1;
        }
    };
    std::map<Key, double> direct_table;

    /// Throws config_error for Direct entries missing from the table
    /// (no extrapolation).
    double d_extra_for(RayModel model, double r_cre, double f_t1) const;
};

/// Higher-level [[n,1,d]] erasure code over surface-code patches; overhead is
/// n data patches plus the ancilla patches.
struct DistributedCode {
    int n = 4;
    int k = 1;
    int d = 2;
    int ancilla = 1;

    int overhead() const { return n + ancilla; }
};

/// The code ladder considered: [[4,1,2]] (5x), [[7,1,3]] (8x), [[11,1,4]]
/// (12x), [[17,1,5]] (18x).
std::vector<DistributedCode> default_distributed_codes();

/// Smallest k such that P(K > k) < epsilon under the stationary ray
/// occupancy, floored at 1 (the ray that triggered mitigation must always be
/// tolerated).
int k_max_simultaneous(const RayProcess& proc, double epsilon);

/// Relative qubitcycle cost of the code-expansion baseline: space factor
/// ((d_X + 2 d_extra k)(d_Z + 2 d_extra k)) / (d_X d_Z) times the
/// ray-occupancy-weighted cycle factor (5/6 with no ray, 1 during a ray).
double expansion_relative_cost(const ExpansionPolicy& policy, const CodeDistances& d,
                               RayModel model, double r_cre, double f_t1, int k_max,
                               std::span<const double> occupancy);

/// Smallest ladder code with d-1 >= k_max; throws config_error when no code
/// is available (k_max exceeds the ladder).
DistributedCode select_distributed_code(int k_max,
                                        std::span<const DistributedCode> codes = {});

/// Space multiplier of the distributed baseline; time is unchanged and the
/// cost is independent of ray radius.
double distributed_relative_cost(const DistributedCode& code, std::span<const double> occupancy);

}  // namespace raysim

#endif
