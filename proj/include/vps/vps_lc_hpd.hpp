#pragma once

#include "vps/precoder.hpp"

namespace vps {

/// Iterate of the three-stage low-complexity solver.
struct LcState {
  double alpha = 1.0;
  MatC f_dd;             // n_rf x n_streams partial isometry
  SwitchMatrix switches;
  PhaseMatrix phases;
  double surrogate = 0.0;
};

/// Knobs for the low-complexity solver reused by the frozen-phase
/// baseline.
struct LcOptions {
  bool freeze_phases = false;   // keep P_t at its initial grid, skip stage 2
  // phase of the l-th shifter in every PSN at initialization, as a
  // multiple of 2*pi/n_ps; 1 gives 2*pi*l/n_ps (l = 1..n_ps), 0 gives the
  // fixed-phase grid 2*pi*(l-1)/n_ps
  int init_phase_offset = 1;
};

/// Semi-unitary factor maximizing alpha*Re(tr(F_DD F_opt^H S P)): from the
/// thin SVD alpha F_opt^H S P = Phi Theta Omega^H, returns Omega Phi^H.
MatC design_semi_unitary(const MatC& f_opt, const SwitchMatrix& s,
                         const PhaseMatrix& p, double alpha,
                         bool* degenerate = nullptr);

/// Per-slot quantized phase alignment maximizing
/// 2*alpha*Re(f_tilde^H x) over the b-bit phase set; adds pi when
/// alpha < 0. Zero slots are flagged degenerate and set to phase 2*pi.
PhaseMatrix design_phase_matrix(const MatC& f_opt, const MatC& f_dd,
                                const SwitchMatrix& s, double alpha, int bits,
                                bool* degenerate = nullptr);

/// Joint switch/scale stage: minimizes ||Re(F_opt F_DD^H P^H) - alpha S||_F^2
/// over binary S and real alpha by enumerating the sorted-value interval
/// vertices plus boundary candidates, then thresholding.
std::pair<SwitchMatrix, double> design_switch_and_scale(
    const MatC& f_opt, const MatC& f_dd, const PhaseMatrix& p,
    bool* degenerate = nullptr);

/// Surrogate objective alpha^2 ||S||_F^2 - 2 alpha Re(tr(F_DD F_opt^H S P)).
double lc_surrogate(const MatC& f_opt, const LcState& st);

/// Three-stage alternating solver. trace, when given, records the
/// surrogate after each full cycle.
HybridPrecoder vps_lc_hpd(const MatC& f_opt, const SystemConfig& cfg,
                          const SolverOptions& opts, Rng& rng,
                          std::vector<double>* trace = nullptr,
                          const LcOptions& lc = {});

}  // namespace vps
