#include "raysim/baselines.hpp"

#include <cmath>

#include "raysim/errors.hpp"

namespace raysim {

double ExpansionPolicy::d_extra_for(RayModel model, double r_cre, double f_t1) const {
    if (model == RayModel::Scrambling) return 2.0 * r_cre;
    auto it = direct_table.find(Key{r_cre, f_t1});
    if (it == direct_table.end())
        throw config_error("no d_extra table entry for direct ray r_cre=" +
                           std::to_string(r_cre) + ", f_t1=" + std::to_string(f_t1));
    return it->second;
}

std::vector<DistributedCode> default_distributed_codes() {
    return {{4, 1, 2, 1}, {7, 1, 3, 1}, {11, 1, 4, 1}, {17, 1, 5, 1}};
}

int k_max_simultaneous(const RayProcess& proc, double epsilon) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw config_error("epsilon must lie in (0, 1)");
    const double lambda = proc.lambda();
    // P(K > k) = 1 - CDF(k); accumulate the pmf until the tail dips below eps
    double pk = std::exp(-lambda);
    double cdf = pk;
    int k = 0;
    while (1.0 - cdf >= epsilon && k < 10000) {
        ++k;
        pk *= lambda / k;
        cdf += pk;
    }
    return std::max(1, k);
}

double expansion_relative_cost(const ExpansionPolicy& policy, const CodeDistances& d,
                               RayModel model, double r_cre, double f_t1, int k_max,
                               std::span<const double> occupancy) {
    if (k_max < 1) throw config_error("k_max must be >= 1");
    if (occupancy.empty()) throw config_error("occupancy distribution is empty");
    const double d_extra = policy.d_extra_for(model, r_cre, f_t1);
    const double grow = 2.0 * d_extra * k_max;
    const double s = ((d.d_x + grow) * (d.d_z + grow)) / (static_cast<double>(d.d_x) * d.d_z);
    const double p_no_ray = occupancy[0];
    const double time_factor = (5.0 / 6.0) * p_no_ray + (1.0 - p_no_ray);
    return s * time_factor;
}

DistributedCode select_distributed_code(int k_max, std::span<const DistributedCode> codes) {
    if (k_max < 1) throw config_error("k_max must be >= 1");
    std::vector<DistributedCode> ladder;
    if (codes.empty())
        ladder = default_distributed_codes();
    else
        ladder.assign(codes.begin(), codes.end());

    const DistributedCode* best = nullptr;
    for (const DistributedCode& c : ladder) {
        if (c.d - 1 < k_max) continue;
        if (!best || c.overhead() < best->overhead()) best = &c;
    }
    if (!best)
        throw config_error("no distributed code available for k_max = " + std::to_string(k_max));
    return *best;
}

double distributed_relative_cost(const DistributedCode& code,
                                 std::span<const double> occupancy) {
    (void)occupancy;  // radius- and occupancy-independent by construction
    return static_cast<double>(code.overhead());
}

}  // namespace raysim
