#include "vps/gc_vps.hpp"

#include "vps/vps_hpd.hpp"
#include "vps/vps_lc_hpd.hpp"

namespace vps {

std::vector<MatC> partition_target(const MatC& f_opt, int q) {
  if (q < 1 || f_opt.rows() % q != 0)
    throw std::invalid_argument("partition_target: q must divide the row count");
  const Eigen::Index rows = f_opt.rows() / q;
  std::vector<MatC> blocks;
  blocks.reserve(q);
  for (int k = 0; k < q; ++k)
    blocks.push_back(f_opt.middleRows(k * rows, rows));
  return blocks;
}

HybridPrecoder gc_vps(const MatC& f_opt, const SystemConfig& cfg,
                      BaseSolver solver, const SolverOptions& opts) {
  cfg.validate();
  opts.validate();
  if (f_opt.rows() != cfg.n_tx || f_opt.cols() != cfg.n_streams)
    throw std::invalid_argument("gc_vps: f_opt dimensions disagree with config");

  const int q = cfg.groups;
  SystemConfig sub = cfg;
  sub.n_tx = cfg.n_tx / q;
  sub.n_rf = cfg.n_rf / q;
  sub.groups = 1;
  sub.group_subproblem = q > 1;  // n_rf/q may drop below n_streams

  const auto targets = partition_target(f_opt, q);

  HybridPrecoder pre;
  pre.switches = SwitchMatrix(cfg.n_tx, cfg.n_ps * cfg.n_rf);
  pre.phases = PhaseMatrix(cfg.n_ps, cfg.n_rf);
  pre.digital = MatC::Zero(cfg.n_rf, cfg.n_streams);

  for (int k = 0; k < q; ++k) {
    SolverOptions group_opts = opts;
    group_opts.rng_seed = opts.rng_seed + static_cast<std::uint64_t>(k);
    Rng rng(group_opts.rng_seed);
    HybridPrecoder part =
        solver == BaseSolver::hpd
            ? vps_hpd(targets[k], sub, group_opts, rng)
            : vps_lc_hpd(targets[k], sub, group_opts, rng);
    if (q == 1) return part;  // single group: already the base solver output

    pre.switches.entries.block(k * sub.n_tx, k * cfg.n_ps * sub.n_rf,
                               sub.n_tx, cfg.n_ps * sub.n_rf) =
        part.switches.entries;
    pre.phases.entries.block(k * cfg.n_ps * sub.n_rf, k * sub.n_rf,
                             cfg.n_ps * sub.n_rf, sub.n_rf) =
        part.phases.entries;
    pre.digital.middleRows(k * sub.n_rf, sub.n_rf) = part.digital;
    pre.used_pseudo_inverse |= part.used_pseudo_inverse;
    pre.degenerate |= part.degenerate;
  }

  normalize_digital(pre);
  return pre;
}

}  // namespace vps
