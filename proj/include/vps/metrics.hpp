#pragma once

#include "vps/precoder.hpp"

namespace vps {

enum class Architecture { fully_connected, partially_connected, fps_vps, gc_vps };

struct HardwareCounts {
  long n_ps = 0;
  long n_sw = 0;
};

/// log2 det (I + (P/N_s) R^-1 W^H H F F^H H^H W) with R = sigma^2 W^H W.
/// Throws when the combiner is rank deficient.
double spectral_efficiency(const MatC& h, const MatC& f_eff, const MatC& w_eff,
                           double p_tx, double noise_var);

/// Phase-shifter and switch counts per architecture; sides = 1 counts the
/// transmitter only, sides = 2 adds the receiver (n_rx in place of n_tx).
HardwareCounts hardware_counts(Architecture arch, const SystemConfig& cfg,
                               int sides);

/// n_ps * P_PS + n_sw * P_SW.
double total_hw_power(const HardwareCounts& counts, const PowerModel& pm);

/// se / (P + N_RF*P_RF + N_t*P_PA + N_PS*P_PS + N_SW*P_SW), with
/// transmitter-side counts.
double energy_efficiency(double se, double p_tx, const SystemConfig& cfg,
                         const HardwareCounts& counts, const PowerModel& pm);

}  // namespace vps
