#include "vps/vps_hpd.hpp"

#include <bit>
#include <cmath>
#include <limits>

namespace vps {

namespace {

constexpr int kManifoldMaxIter = 200;
constexpr double kManifoldGradTol = 1e-6;
constexpr double kArmijoSlope = 1e-4;
constexpr double kMinStep = 1e-14;

// sums[m] = sum of p[k] over set bits k of m, for all m < 2^n
std::vector<Cplx> subset_sums(const VecC& p) {
  const int n = static_cast<int>(p.size());
  std::vector<Cplx> sums(std::size_t(1) << n);
  sums[0] = Cplx(0.0, 0.0);
  for (std::uint32_t m = 1; m < sums.size(); ++m) {
    const int low = std::countr_zero(m);
    sums[m] = sums[m & (m - 1)] + p(low);
  }
  return sums;
}

std::uint32_t best_row_mask(Cplx f_mi, const std::vector<Cplx>& sums) {
  std::uint32_t best = 0;
  double best_dist = std::abs(f_mi - sums[0]);
  for (std::uint32_t m = 1; m < sums.size(); ++m) {
    const double d = std::abs(f_mi - sums[m]);
    if (d < best_dist) {  // strict: ties keep the smaller binary value
      best = m;
      best_dist = d;
    }
  }
  return best;
}

void retract(VecC& p, double radius) {
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double m = std::abs(p(k));
    p(k) = m > 0.0 ? p(k) * (radius / m) : Cplx(radius, 0.0);
  }
}

}  // namespace

MatC ls_analog_estimate(const MatC& f_opt, const MatC& f_bb, bool* pinv_flag) {
  if (f_opt.cols() != f_bb.cols())
    throw std::invalid_argument("ls_analog_estimate: dimension mismatch");
  const MatC gram = f_bb * f_bb.adjoint();
  Eigen::FullPivLU<MatC> lu(gram);
  if (lu.isInvertible()) {
    if (pinv_flag) *pinv_flag = false;
    return f_opt * f_bb.adjoint() * lu.inverse();
  }
  if (pinv_flag) *pinv_flag = true;
  Eigen::CompleteOrthogonalDecomposition<MatC> cod(gram);
  return f_opt * f_bb.adjoint() * cod.pseudoInverse();
}

VecC optimize_phase_vector(const VecC& f_col, const MatI& q_i,
                           const VecC& p_init) {
  if (q_i.rows() != f_col.size() || q_i.cols() != p_init.size())
    throw std::invalid_argument("optimize_phase_vector: dimension mismatch");
  if (q_i.isZero()) return p_init;

  const double radius = std::abs(p_init(0));
  const MatC q = q_i.cast<Cplx>();
  VecC p = p_init;
  double obj = (f_col - q * p).squaredNorm();

  for (int it = 0; it < kManifoldMaxIter; ++it) {
    const VecC resid = f_col - q * p;
    const VecC grad = -2.0 * (q.adjoint() * resid);
    // project out the radial component on each circle
    VecC dir = grad;
    for (Eigen::Index k = 0; k < dir.size(); ++k) {
      const double radial = (grad(k) * std::conj(p(k))).real();
      dir(k) -= radial * p(k) / (radius * radius);
    }
    const double dir_norm2 = dir.squaredNorm();
    if (std::sqrt(dir_norm2) < kManifoldGradTol) break;

    double step = 1.0;
    bool accepted = false;
    while (step > kMinStep) {
      VecC trial = p - step * dir;
      retract(trial, radius);
      const double trial_obj = (f_col - q * trial).squaredNorm();
      if (trial_obj <= obj - kArmijoSlope * step * dir_norm2) {
        p = trial;
        obj = trial_obj;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
  }
  return p;
}

Eigen::RowVectorXi optimize_switch_row(Cplx f_mi, const VecC& p) {
  const int n = static_cast<int>(p.size());
  if (n < 1 || n > 20)
    throw std::invalid_argument("optimize_switch_row: n_ps out of range (1..20)");
  const std::uint32_t mask = best_row_mask(f_mi, subset_sums(p));
  Eigen::RowVectorXi row(n);
  for (int k = 0; k < n; ++k) row(k) = (mask >> k) & 1;
  return row;
}

SubproblemState solve_subproblem(const VecC& f_col, const SystemConfig& cfg,
                                 const SolverOptions& opts, Rng& rng,
                                 std::vector<double>* half_step_trace) {
  cfg.validate();
  opts.validate();
  if (cfg.n_ps > 20)
    throw std::invalid_argument("solve_subproblem: n_ps above enumeration guard");

  const int n_tx = static_cast<int>(f_col.size());
  SubproblemState st;
  st.q_i.resize(n_tx, cfg.n_ps);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int r = 0; r < n_tx; ++r)
    for (int c = 0; c < cfg.n_ps; ++c) st.q_i(r, c) = coin(rng);

  const double radius = 1.0 / std::sqrt(static_cast<double>(cfg.n_ps));
  st.p_i = VecC::Constant(cfg.n_ps, Cplx(radius, 0.0));
  st.objective = (f_col - st.q_i.cast<Cplx>() * st.p_i).squaredNorm();

  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < opts.max_inner; ++it) {
    st.p_i = optimize_phase_vector(f_col, st.q_i, st.p_i);
    if (opts.quantize_each_inner) {
      for (Eigen::Index k = 0; k < st.p_i.size(); ++k)
        st.p_i(k) = std::polar(radius,
                               quantize_phase(std::arg(st.p_i(k)), cfg.phase_bits));
    }
    st.objective = (f_col - st.q_i.cast<Cplx>() * st.p_i).squaredNorm();
    if (half_step_trace) half_step_trace->push_back(st.objective);

    const auto sums = subset_sums(st.p_i);
    for (int m = 0; m < n_tx; ++m) {
      const std::uint32_t mask = best_row_mask(f_col(m), sums);
      for (int k = 0; k < cfg.n_ps; ++k) st.q_i(m, k) = (mask >> k) & 1;
    }
    st.objective = (f_col - st.q_i.cast<Cplx>() * st.p_i).squaredNorm();
    if (half_step_trace) half_step_trace->push_back(st.objective);

    if (prev > 0.0 && std::isfinite(prev) &&
        std::abs(prev - st.objective) / prev < opts.rel_tol)
      break;
    if (st.objective <= 0.0) break;
    prev = st.objective;
  }

  // an all-off PSN disconnects its RF chain entirely; keep the one switch
  // whose phasor fits best
  if (st.q_i.isZero()) {
    int best_m = 0, best_k = 0;
    double best_delta = std::numeric_limits<double>::infinity();
    for (int m = 0; m < n_tx; ++m)
      for (int k = 0; k < cfg.n_ps; ++k) {
        const double delta =
            std::norm(f_col(m) - st.p_i(k)) - std::norm(f_col(m));
        if (delta < best_delta) {
          best_delta = delta;
          best_m = m;
          best_k = k;
        }
      }
    st.q_i(best_m, best_k) = 1;
    st.objective = (f_col - st.q_i.cast<Cplx>() * st.p_i).squaredNorm();
  }
  return st;
}

MatC digital_ls(const SwitchMatrix& s, const PhaseMatrix& p, const MatC& f_opt,
                bool* pinv_flag) {
  const MatC f_rf = assemble_analog(s, p);
  if (f_rf.rows() != f_opt.rows())
    throw std::invalid_argument("digital_ls: dimension mismatch");
  const MatC gram = f_rf.adjoint() * f_rf;
  Eigen::FullPivLU<MatC> lu(gram);
  if (lu.isInvertible()) {
    if (pinv_flag) *pinv_flag = false;
    return lu.inverse() * f_rf.adjoint() * f_opt;
  }
  if (pinv_flag) *pinv_flag = true;
  Eigen::CompleteOrthogonalDecomposition<MatC> cod(gram);
  return cod.pseudoInverse() * f_rf.adjoint() * f_opt;
}

HybridPrecoder vps_hpd(const MatC& f_opt, const SystemConfig& cfg,
                       const SolverOptions& opts, Rng& rng,
                       std::vector<double>* trace) {
  cfg.validate();
  opts.validate();
  const int n_tx = static_cast<int>(f_opt.rows());
  const int n_s = static_cast<int>(f_opt.cols());
  if (n_tx != cfg.n_tx || n_s != cfg.n_streams)
    throw std::invalid_argument("vps_hpd: f_opt dimensions disagree with config");

  HybridPrecoder pre;
  pre.switches = SwitchMatrix(n_tx, cfg.n_ps * cfg.n_rf);
  pre.phases = PhaseMatrix(cfg.n_ps, cfg.n_rf);

  // random full-rank digital start; resample on numerical rank deficiency
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  MatC f_bb(cfg.n_rf, n_s);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (int r = 0; r < cfg.n_rf; ++r)
      for (int c = 0; c < n_s; ++c)
        f_bb(r, c) = Cplx(gauss(rng) * inv_sqrt2, gauss(rng) * inv_sqrt2);
    Eigen::JacobiSVD<MatC> svd(f_bb);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) > 1e-8 * sv(0)) break;
  }

  double prev = std::numeric_limits<double>::infinity();
  for (int outer = 0; outer < opts.max_outer; ++outer) {
    const MatC f_rf_hat = ls_analog_estimate(f_opt, f_bb, &pre.used_pseudo_inverse);
    for (int i = 0; i < cfg.n_rf; ++i) {
      SubproblemState sub = solve_subproblem(f_rf_hat.col(i), cfg, opts, rng);
      pre.switches.entries.middleCols(i * cfg.n_ps, cfg.n_ps) = sub.q_i;
      pre.phases.set_column_slots(i, sub.p_i);
    }
    for (int i = 0; i < cfg.n_rf; ++i)
      for (int l = 0; l < cfg.n_ps; ++l)
        pre.phases.set_slot(i, l,
                            quantize_phase(std::arg(pre.phases.slot(i, l)),
                                           cfg.phase_bits));

    bool pinv = false;
    f_bb = digital_ls(pre.switches, pre.phases, f_opt, &pinv);
    pre.used_pseudo_inverse = pre.used_pseudo_inverse || pinv;

    const double obj = residual(f_opt, pre.switches, pre.phases, f_bb);
    if (trace) trace->push_back(obj);
    if (std::isfinite(prev) && prev > 0.0 &&
        std::abs(prev - obj) / prev < opts.rel_tol) {
      prev = obj;
      break;
    }
    if (obj <= 0.0) break;
    prev = obj;
  }

  pre.digital = f_bb;
  normalize_digital(pre);
  return pre;
}

}  // namespace vps
