#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "raysim/errors.hpp"
#include "raysim/noise.hpp"

using namespace raysim;

namespace {

ChipLattice small_chip() { return build_chip({5, 5, 3}, FootprintSpec::single_tile()); }

}  // namespace

TEST_CASE("zero spread gives exactly the means") {
    ChipLattice chip = small_chip();
    ParamDistributions d = ParamDistributions::defaults().means_only();
    Rng rng(7);
    PhysicalParams p = sample_baseline_params(chip, d, rng);
    for (const QubitParams& q : p.qubit) {
        CHECK(q.t1 == d.t1_mean);
        CHECK(q.t2 == d.t2_mean);
        CHECK(q.p1 == d.p1_mean);
        CHECK(q.p_mr == d.pmr_mean);
    }
    for (const auto& [k, v] : p.p2) CHECK(v == d.p2_mean);
}

TEST_CASE("defaults are the 10x-improved figures") {
    ParamDistributions d = ParamDistributions::defaults();
    CHECK(d.t1_mean == doctest::Approx(200e-6));
    CHECK(d.t2_mean == doctest::Approx(300e-6));
    CHECK(d.p1_mean == doctest::Approx(8e-5));
    CHECK(d.p2_mean == doctest::Approx(5e-4));
    CHECK(d.pmr_mean == doctest::Approx(2e-3));
}

TEST_CASE("lognormal sampling hits the requested population mean") {
    // mean of 1e5 draws within 3 standard errors of the target mean
    const double mean = 2e-3, std = 5e-4;
    Rng rng(12345);
    const int n = 100000;
    double acc = 0;
    for (int i = 0; i < n; ++i) acc += rng.lognormal_mean_std(mean, std);
    double sample_mean = acc / n;
    double se = std / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(sample_mean - mean) < 3 * se);
}

TEST_CASE("nonpositive means are rejected") {
    ChipLattice chip = small_chip();
    ParamDistributions d = ParamDistributions::defaults();
    d.t1_mean = 0.0;
    Rng rng(1);
    CHECK_THROWS_AS(sample_baseline_params(chip, d, rng), config_error);
}

TEST_CASE("direct ray T1 profile endpoints and midpoint") {
    const double r = 3.0, f = 0.01, t1 = 200e-6;
    CHECK(direct_ray_t1(0.0, r, f, t1) == f * t1);   // exact by construction
    CHECK(direct_ray_t1(r, r, f, t1) == t1);
    CHECK(direct_ray_t1(r + 1.0, r, f, t1) == t1);

    // independent midpoint computation: p3 at r/2 is the mean of the endpoint
    // 3us error probabilities
    const double probe = 3e-6;
    double p_center = 1.0 - std::exp(-probe / (f * t1));
    double p_edge = 1.0 - std::exp(-probe / t1);
    double p_mid = 0.5 * (p_center + p_edge);
    double expect = -probe / std::log(1.0 - p_mid);
    CHECK(direct_ray_t1(r / 2.0, r, f, t1) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("3us error probability is linear in distance to 1e-12") {
    const double r = 3.7, f = 0.001, t1 = 200e-6, probe = 3e-6;
    double p0 = 1.0 - std::exp(-probe / (f * t1));
    double p1 = 1.0 - std::exp(-probe / t1);
    for (int i = 0; i <= 10; ++i) {
        double dist = r * i / 10.0;
        double t = direct_ray_t1(dist, r, f, t1);
        double p = 1.0 - std::exp(-probe / t);
        double linear = p0 + (p1 - p0) * (dist / r);
        CHECK(std::abs(p - linear) < 1e-12);
    }
}

TEST_CASE("direct ray T1 is monotone in distance and continuous at the edge") {
    const double r = 2.5, f = 0.01, t1 = 180e-6;
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
        double t = direct_ray_t1(r * i / 200.0, r, f, t1);
        CHECK(t >= prev);
        prev = t;
    }
    CHECK(direct_ray_t1(r - 1e-9, r, f, t1) == doctest::Approx(t1).epsilon(1e-6));
}

TEST_CASE("apply_ray outside its active window changes nothing") {
    ChipLattice chip = small_chip();
    ParamDistributions d = ParamDistributions::defaults().means_only();
    Rng rng(3);
    PhysicalParams p = sample_baseline_params(chip, d, rng);

    RayEvent ray;
    ray.model = RayModel::Direct;
    ray.center = chip.qubits()[12].coord;
    ray.r_cre = 3.0;
    ray.f_t1 = 0.01;
    ray.t_start = 1.0;
    ray.t_offline = 0.05;

    PhysicalParams before = apply_ray(p, chip, ray, 0.5);
    for (size_t i = 0; i < p.qubit.size(); ++i) CHECK(before.qubit[i].t1 == p.qubit[i].t1);
    PhysicalParams after = apply_ray(p, chip, ray, 1.0 + 0.05);
    for (size_t i = 0; i < p.qubit.size(); ++i) CHECK(after.qubit[i].t1 == p.qubit[i].t1);
}

TEST_CASE("direct ray hits the center qubit exactly") {
    ChipLattice chip = small_chip();
    ParamDistributions d = ParamDistributions::defaults().means_only();
    Rng rng(3);
    PhysicalParams p = sample_baseline_params(chip, d, rng);

    RayEvent ray;
    ray.model = RayModel::Direct;
    ray.center = chip.qubits()[12].coord;
    ray.r_cre = 2.0;
    ray.f_t1 = 0.05;
    ray.t_start = 0.0;
    ray.t_offline = 0.05;

    PhysicalParams hit = apply_ray(p, chip, ray, 0.0);
    int ci = chip.qubit_index(ray.center);
    REQUIRE(ci >= 0);
    CHECK(hit.qubit[ci].t1 == doctest::Approx(0.05 * d.t1_mean));
    CHECK(hit.qubit[ci].t2 <= 2.0 * hit.qubit[ci].t1);
}

TEST_CASE("apply_ray is idempotent and ray order does not matter") {
    ChipLattice chip = small_chip();
    ParamDistributions d = ParamDistributions::defaults().means_only();
    Rng rng(3);
    PhysicalParams p = sample_baseline_params(chip, d, rng);

    RayEvent a;
    a.model = RayModel::Scrambling;
    a.center = chip.qubits()[5].coord;
    a.r_cre = 3.0;
    a.scramble_seed = 99;
    a.t_start = 0.0;
    a.t_offline = 1.0;
    RayEvent b = a;
    b.center = chip.qubits()[20].coord;
    b.scramble_seed = 1234;

    PhysicalParams ab = apply_ray(apply_ray(p, chip, a, 0.0), chip, b, 0.0);
    PhysicalParams ba = apply_ray(apply_ray(p, chip, b, 0.0), chip, a, 0.0);
    PhysicalParams aab = apply_ray(ab, chip, a, 0.0);
    for (size_t i = 0; i < p.qubit.size(); ++i) {
        CHECK(ab.qubit[i].t1 == ba.qubit[i].t1);
        CHECK(aab.qubit[i].t1 == ab.qubit[i].t1);
    }
}

TEST_CASE("scrambling draws are uniform on [0.01, 1] (KS test)") {
    // one scrambled qubit per ray realization, 1e4 realizations
    ChipLattice chip = small_chip();
    int ci = chip.qubit_index(chip.qubits()[12].coord);
    ParamDistributions d = ParamDistributions::defaults().means_only();
    Rng rng(3);
    PhysicalParams p = sample_baseline_params(chip, d, rng);

    const int n = 10000;
    std::vector<double> ratios;
    for (int s = 0; s < n; ++s) {
        RayEvent ray;
        ray.model = RayModel::Scrambling;
        ray.center = chip.qubits()[12].coord;
        ray.r_cre = 1.0;  // only the center qubit
        ray.scramble_seed = 777000 + s;
        ray.t_start = 0.0;
        ray.t_offline = 1.0;
        PhysicalParams hit = apply_ray(p, chip, ray, 0.0);
        ratios.push_back(hit.qubit[ci].t1 / d.t1_mean);
    }
    std::sort(ratios.begin(), ratios.end());
    double dmax = 0.0;
    for (int i = 0; i < n; ++i) {
        double cdf = (ratios[i] - 0.01) / 0.99;
        dmax = std::max(dmax, std::abs(cdf - (i + 1.0) / n));
        dmax = std::max(dmax, std::abs(cdf - static_cast<double>(i) / n));
    }
    // KS critical value at alpha = 0.01
    CHECK(dmax < 1.628 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("poisson arrivals: rate zero, count concentration, McEwen rate") {
    ChipLattice chip = small_chip();
    RayEvent proto;
    proto.model = RayModel::Direct;

    RayProcess none{0.0, chip.num_qubits(), 0.05};
    Rng rng(5);
    CHECK(sample_arrivals(none, 100.0, chip, proto, rng).empty());

    // gamma*n_q*duration = 1000 => count within 3*sqrt(1000)
    RayProcess proc{1.0 / chip.num_qubits(), chip.num_qubits(), 0.05};
    Rng rng2(6);
    auto events = sample_arrivals(proc, 1000.0, chip, proto, rng2);
    CHECK(std::abs(static_cast<double>(events.size()) - 1000.0) < 3.0 * std::sqrt(1000.0));
    for (const RayEvent& e : events) {
        CHECK(e.t_start >= 0.0);
        CHECK(e.t_start < 1000.0);
        CHECK(e.center.row >= 0);
        CHECK(e.center.row < chip.height());
        CHECK(e.center.col >= 0);
        CHECK(e.center.col < chip.width());
    }

    // 1 impact / 10 s on a 27-qubit chip
    RayProcess mcewen{1.0 / 270.0, 27, 0.05};
    Rng rng3(7);
    auto ev = sample_arrivals(mcewen, 200000.0, chip, proto, rng3);
    double mean_gap = 200000.0 / static_cast<double>(ev.size());
    CHECK(mean_gap == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("occupancy distribution") {
    RayProcess zero{0.0, 100, 0.05};
    auto p0 = occupancy_distribution(zero, 4);
    CHECK(p0[0] == doctest::Approx(1.0));

    RayProcess one{1.0, 1, 1.0};  // lambda = 1
    auto p1 = occupancy_distribution(one, 8);
    CHECK(p1[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

    RayProcess tenth{0.1, 1, 1.0};  // lambda = 0.1
    auto pt = occupancy_distribution(tenth, 8);
    double p_ge2 = 1.0 - pt[0] - pt[1];
    CHECK(p_ge2 == doctest::Approx(1.0 - std::exp(-0.1) * 1.1).epsilon(1e-9));
    CHECK(p_ge2 == doctest::Approx(0.00467884).epsilon(1e-3));

    // sums to 1 including the tail bucket
    double total = 0;
    for (double v : pt) total += v;
    CHECK(std::abs(total - 1.0) < 1e-12);
}
