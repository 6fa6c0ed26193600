#pragma once

#include "vps/types.hpp"

namespace vps {

/// One clustered-channel draw: per-path complex gains, departure and
/// arrival angles, and the assembled n_rx x n_tx matrix.
struct ChannelRealization {
  VecC gains;
  VecR aod;
  VecR aoa;
  MatC matrix;
};

/// Unitary-column precoder/combiner targets taken from the channel SVD.
struct DigitalTarget {
  MatC f_opt;                 // n_tx x n_streams
  MatC w_opt;                 // n_rx x n_streams
  VecR singular_values;       // the n_streams selected ones, descending
  bool degenerate = false;    // rank(H) < n_streams
};

/// ULA array response, entry k = exp(j*pi*k*sin(angle))/sqrt(n).
VecC steering_vector(int n, double angle);

/// Draws gains then angles for each path in turn, then assembles the
/// matrix. Deterministic for a given generator state.
ChannelRealization generate_channel(const SystemConfig& cfg,
                                    const ChannelParams& params, Rng& rng);

/// Top n_streams right/left singular vectors of h, descending. Each
/// selected column is rotated so its largest-magnitude entry is real
/// positive.
DigitalTarget optimal_precoder_combiner(const MatC& h, int n_streams);

}  // namespace vps
