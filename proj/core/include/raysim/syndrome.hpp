#ifndef RAYSIM_SYNDROME_HPP_
#define RAYSIM_SYNDROME_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "raysim/geometry.hpp"
#include "raysim/noise.hpp"
#include "raysim/rng.hpp"

namespace raysim {

enum class StabilizerBasis { X, Z };

struct Stabilizer {
    int id = 0;
    int tile = -1;
    int measure_index = -1;  // index into ChipLattice::qubits()
    QubitCoord measure_qubit;
    std::vector<int> support;  // data qubit indices, weight 2 or 4
    StabilizerBasis basis = StabilizerBasis::Z;
    // position on the tile's dual grid: measure qubit sits at local (2i, 2j)
    int grid_row = 0;
    int grid_col = 0;
};

/// One stabilizer per measure qubit; weight-4 in the bulk, weight-2 on patch
/// boundaries. A d x d patch yields d^2 - 1 stabilizers.
std::vector<Stabilizer> build_stabilizers(const ChipLattice& chip);

/// Per-cycle probability of a nontrivial syndrome, composing independent flip
/// sources with the XOR rule p = (1 - prod(1 - 2 p_j)) / 2. Sources: idle
/// decay of each support data qubit, half the two-qubit gate error per CNOT,
/// and the measure qubit's readout error plus its own idle decay.
double syndrome_prob(const PhysicalParams& params, const Stabilizer& stab);

struct SyndromeModel {
    std::vector<double> p_syn;  // indexed by stabilizer id
};

SyndromeModel build_syndrome_model(const PhysicalParams& params,
                                   std::span<const Stabilizer> stabs,
                                   std::vector<std::string>* warnings = nullptr);

/// Bit array, stabilizer-major per cycle.
struct SyndromeHistory {
    int n_stabilizers = 0;
    int cycles = 0;
    std::vector<uint8_t> bits;

    uint8_t bit(int stab, int cycle) const {
        return bits[static_cast<size_t>(cycle) * n_stabilizers + stab];
    }
};

/// Independent Bernoulli(p_syn_i) bits per stabilizer per cycle.
SyndromeHistory sample_stream(const SyndromeModel& model, int cycles, Rng& rng);

/// Samples a single cycle into `out` (out.size() == p_syn.size()).
void sample_cycle(const SyndromeModel& model, Rng& rng, std::span<uint8_t> out);

}  // namespace raysim

#endif
