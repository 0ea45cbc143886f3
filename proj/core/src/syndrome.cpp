#include "raysim/syndrome.hpp"

#include <cmath>

#include "raysim/errors.hpp"

namespace raysim {

std::vector<Stabilizer> build_stabilizers(const ChipLattice& chip) {
    std::vector<Stabilizer> stabs;
    const auto& qubits = chip.qubits();
    for (size_t i = 0; i < qubits.size(); ++i) {
        const Qubit& mq = qubits[i];
        if (mq.role != QubitRole::Measure) continue;
        Stabilizer s;
        s.id = static_cast<int>(stabs.size());
        s.tile = mq.tile;
        s.measure_index = static_cast<int>(i);
        s.measure_qubit = mq.coord;
        s.grid_row = mq.local_row / 2;
        s.grid_col = mq.local_col / 2;
        s.basis = ((s.grid_row + s.grid_col) % 2 == 0) ? StabilizerBasis::Z : StabilizerBasis::X;
        for (int dr : {-1, 1}) {
            for (int dc : {-1, 1}) {
                int j = chip.qubit_index({mq.coord.row + dr, mq.coord.col + dc});
                if (j < 0) continue;
                const Qubit& dq = qubits[j];
                if (dq.role != QubitRole::Data || dq.tile != mq.tile) continue;
                s.support.push_back(j);
            }
        }
        stabs.push_back(std::move(s));
    }
    return stabs;
}

namespace {

inline double idle_prob(double t_cycle, double t1) {
    return 0.5 * -std::expm1(-t_cycle / t1);
}

}  // namespace

double syndrome_prob(const PhysicalParams& params, const Stabilizer& stab) {
    double prod = 1.0;
    auto fold = [&prod](double p) { prod *= (1.0 - 2.0 * p); };

    for (int q : stab.support) {
        fold(idle_prob(params.t_cycle, params.qubit[q].t1));
        fold(0.5 * params.p2_for(stab.measure_index, q));
    }
    fold(params.qubit[stab.measure_index].p_mr);
    fold(idle_prob(params.t_cycle, params.qubit[stab.measure_index].t1));

    return 0.5 * (1.0 - prod);
}

SyndromeModel build_syndrome_model(const PhysicalParams& params,
                                   std::span<const Stabilizer> stabs,
                                   std::vector<std::string>* warnings) {
    SyndromeModel model;
    model.p_syn.reserve(stabs.size());
    int hi_sources = 0;
    for (const Stabilizer& s : stabs) {
        for (int q : s.support)
            if (idle_prob(params.t_cycle, params.qubit[q].t1) > 0.5 ||
                params.qubit[s.measure_index].p_mr > 0.5)
                ++hi_sources;
        model.p_syn.push_back(syndrome_prob(params, s));
    }
    if (warnings && hi_sources > 0)
        warnings->push_back("flip sources above 1/2 encountered in " +
                            std::to_string(hi_sources) + " stabilizer inputs");
    return model;
}

void sample_cycle(const SyndromeModel& model, Rng& rng, std::span<uint8_t> out) {
    for (size_t i = 0; i < model.p_syn.size(); ++i)
        out[i] = rng.uniform() < model.p_syn[i] ? 1 : 0;
}

SyndromeHistory sample_stream(const SyndromeModel& model, int cycles, Rng& rng) {
    if (cycles < 1) throw config_error("cycles must be >= 1");
    SyndromeHistory h;
    h.n_stabilizers = static_cast<int>(model.p_syn.size());
    h.cycles = cycles;
    h.bits.resize(static_cast<size_t>(cycles) * h.n_stabilizers);
    for (int c = 0; c < cycles; ++c)
        sample_cycle(model, rng,
                     std::span<uint8_t>(h.bits.data() + static_cast<size_t>(c) * h.n_stabilizers,
                                        h.n_stabilizers));
    return h;
}

}  // namespace raysim
