#pragma once

#include "vps/precoder.hpp"

namespace vps {

enum class BaseSolver { hpd, lc_hpd };

/// Row-blocks of f_opt, q equal slices of n_tx/q rows each.
std::vector<MatC> partition_target(const MatC& f_opt, int q);

/// Group-connected solver: runs the chosen base solver on each row block
/// with per-group dimensions (n_tx/q, n_rf/q, n_ps) and seed
/// opts.rng_seed + k, assembles S_t and P_t block-diagonally and F_BB by
/// row stacking, then normalizes once.
HybridPrecoder gc_vps(const MatC& f_opt, const SystemConfig& cfg,
                      BaseSolver solver, const SolverOptions& opts);

}  // namespace vps
