#include "vps/metrics.hpp"

#include <cmath>

namespace vps {

double spectral_efficiency(const MatC& h, const MatC& f_eff, const MatC& w_eff,
                           double p_tx, double noise_var) {
  if (h.rows() != w_eff.rows() || h.cols() != f_eff.rows() ||
      f_eff.cols() != w_eff.cols())
    throw std::invalid_argument("spectral_efficiency: dimension mismatch");
  const int n_s = static_cast<int>(f_eff.cols());

  const MatC r = noise_var * (w_eff.adjoint() * w_eff);
  Eigen::FullPivLU<MatC> lu(r);
  if (!lu.isInvertible())
    throw std::runtime_error("spectral_efficiency: rank-deficient combiner");

  const MatC whf = w_eff.adjoint() * h * f_eff;
  const MatC a = MatC::Identity(n_s, n_s) +
                 (p_tx / n_s) * lu.solve(whf * whf.adjoint());
  const Cplx det = a.determinant();
  return std::log2(det.real());
}

HardwareCounts hardware_counts(Architecture arch, const SystemConfig& cfg,
                               int sides) {
  if (sides != 1 && sides != 2)
    throw std::invalid_argument("hardware_counts: sides must be 1 or 2");
  cfg.validate();
  const long ants = cfg.n_tx + (sides == 2 ? cfg.n_rx : 0);
  HardwareCounts c;
  switch (arch) {
    case Architecture::fully_connected:
      c.n_ps = ants * cfg.n_rf;
      break;
    case Architecture::partially_connected:
      c.n_ps = ants;
      break;
    case Architecture::fps_vps:
      c.n_ps = static_cast<long>(sides) * cfg.n_ps * cfg.n_rf;
      c.n_sw = ants * cfg.n_rf * cfg.n_ps;
      break;
    case Architecture::gc_vps:
      c.n_ps = static_cast<long>(sides) * cfg.n_ps * cfg.n_rf;
      c.n_sw = ants * cfg.n_rf * cfg.n_ps / cfg.groups;
      break;
  }
  return c;
}

double total_hw_power(const HardwareCounts& counts, const PowerModel& pm) {
  return counts.n_ps * pm.p_phase_shifter + counts.n_sw * pm.p_switch;
}

double energy_efficiency(double se, double p_tx, const SystemConfig& cfg,
                         const HardwareCounts& counts, const PowerModel& pm) {
  const double denom = p_tx + cfg.n_rf * pm.p_rf_chain +
                       cfg.n_tx * pm.p_amplifier + total_hw_power(counts, pm);
  if (denom <= 0.0)
    throw std::invalid_argument("energy_efficiency: nonpositive total power");
  return se / denom;
}

}  // namespace vps
