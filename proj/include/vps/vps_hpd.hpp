#pragma once

#include "vps/precoder.hpp"

namespace vps {

/// State of one per-RF-chain analog subproblem.
struct SubproblemState {
  MatI q_i;           // n_tx x n_ps binary
  VecC p_i;           // n_ps, each entry of magnitude 1/sqrt(n_ps)
  double objective;   // || f_col - Q_i p_i ||^2
};

/// F_opt F_BB^H (F_BB F_BB^H)^-1. Falls back to the pseudo-inverse on a
/// rank-deficient Gram matrix, setting *pinv_flag.
MatC ls_analog_estimate(const MatC& f_opt, const MatC& f_bb,
                        bool* pinv_flag = nullptr);

/// Riemannian gradient descent on the product of circles of radius
/// 1/sqrt(n_ps), minimizing || f_col - Q p ||^2 from p_init. Monotone in
/// the objective; returns p_init unchanged when q_i is all zero.
VecC optimize_phase_vector(const VecC& f_col, const MatI& q_i,
                           const VecC& p_init);

/// Exhaustive search over the 2^n_ps binary rows minimizing
/// |f_mi - row * p|; ties go to the smaller binary value (entry k is bit
/// k of the value). Guarded at n_ps <= 20.
Eigen::RowVectorXi optimize_switch_row(Cplx f_mi, const VecC& p);

/// Inner alternation of the phase vector and switch rows for one column
/// of the analog estimate. half_step_trace, when given, records the
/// objective after every phase step and every switch step.
SubproblemState solve_subproblem(const VecC& f_col, const SystemConfig& cfg,
                                 const SolverOptions& opts, Rng& rng,
                                 std::vector<double>* half_step_trace = nullptr);

/// Least-squares digital factor (P^H S^H S P)^-1 P^H S^H F_opt, with a
/// pseudo-inverse fallback on singular Gram matrices.
MatC digital_ls(const SwitchMatrix& s, const PhaseMatrix& p, const MatC& f_opt,
                bool* pinv_flag = nullptr);

/// Full alternating solver: analog estimate, per-chain subproblems with
/// continuous phases, one quantization pass, digital least squares, until
/// the outer stop rule; then power normalization. trace, when given,
/// records the residual after each outer iteration.
HybridPrecoder vps_hpd(const MatC& f_opt, const SystemConfig& cfg,
                       const SolverOptions& opts, Rng& rng,
                       std::vector<double>* trace = nullptr);

}  // namespace vps
