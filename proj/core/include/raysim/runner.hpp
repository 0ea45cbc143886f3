#ifndef RAYSIM_RUNNER_HPP_
#define RAYSIM_RUNNER_HPP_

#include <string>

#include "raysim/config.hpp"

namespace raysim {

enum class Subcommand { DetectLatency, PerRay, Sweep, RemapDemo };

Subcommand subcommand_from_string(const std::string& s);

struct RunOptions {
    std::string out_dir = "out";
    int threads = 1;
};

/// Executes one subcommand: writes the run manifest plus the subcommand's
/// CSV/JSON artifacts under out_dir. Artifacts are byte-identical for equal
/// (config, seed) regardless of thread count. Returns 0 on success.
int run_subcommand(Subcommand cmd, const RunConfig& cfg, const RunOptions& opts);

}  // namespace raysim

#endif
