#pragma once

#include "vps/types.hpp"

namespace vps {

/// Nearest element of the b-bit phase set {2*pi*i / 2^b : i = 1..2^b}
/// under circular angular distance. Ties go to the smaller set index.
/// The returned value lies in (0, 2*pi].
double quantize_phase(double theta, int bits);

/// Binary switch network state, n_tx x (n_ps * n_rf), entries in {0,1}.
struct SwitchMatrix {
  MatI entries;

  SwitchMatrix() = default;
  SwitchMatrix(int n_tx, int n_slots) : entries(MatI::Zero(n_tx, n_slots)) {}

  bool is_binary() const {
    return ((entries.array() == 0) || (entries.array() == 1)).all();
  }
};

/// Generalized block-diagonal phase matrix, (n_ps * n_rf) x n_rf. Column
/// i carries the n_ps phasors of PSN i in rows i*n_ps .. (i+1)*n_ps - 1,
/// each of magnitude 1/sqrt(n_ps); everything off that mask is zero.
struct PhaseMatrix {
  MatC entries;
  int n_ps = 0;

  PhaseMatrix() = default;
  PhaseMatrix(int n_ps_, int n_rf)
      : entries(MatC::Zero(n_ps_ * n_rf, n_rf)), n_ps(n_ps_) {}

  int n_rf() const { return static_cast<int>(entries.cols()); }

  // nonzero slot l of PSN i (0-based)
  Cplx slot(int i, int l) const { return entries(i * n_ps + l, i); }
  void set_slot(int i, int l, double phase) {
    entries(i * n_ps + l, i) = std::polar(1.0 / std::sqrt(double(n_ps)), phase);
  }

  // the p_i view: the n_ps nonzero entries of column i
  VecC column_slots(int i) const { return entries.col(i).segment(i * n_ps, n_ps); }
  void set_column_slots(int i, const VecC& p) {
    entries.col(i).segment(i * n_ps, n_ps) = p;
  }

  /// Mask and magnitude invariants; angle membership in the phase set is
  /// checked only when bits > 0.
  bool valid(int bits = 0, double tol = 1e-12) const;
};

/// The (S_t, P_t, F_BB) bundle produced by every solver.
struct HybridPrecoder {
  SwitchMatrix switches;
  PhaseMatrix phases;
  MatC digital;  // n_rf x n_streams

  // diagnostics
  bool used_pseudo_inverse = false;
  bool degenerate = false;

  MatC analog() const;            // S_t * P_t
  MatC effective() const;         // S_t * P_t * F_BB
};

/// F_RF = S_t * P_t.
MatC assemble_analog(const SwitchMatrix& s, const PhaseMatrix& p);

/// Scales the digital factor so that ||S P F_BB||_F^2 equals n_streams.
/// Throws on a zero effective precoder.
void normalize_digital(HybridPrecoder& pre);

/// ||F_opt - S P F_BB||_F^2.
double residual(const MatC& f_opt, const SwitchMatrix& s, const PhaseMatrix& p,
                const MatC& f_bb);

}  // namespace vps
