#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace vps {

using Cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;
using MatI = Eigen::MatrixXi;
using Rng = std::mt19937_64;

/// Transceiver dimensions shared by all solvers.
/// n_ps is the number of phase shifters per PSN, groups is the
/// group-connected partition count (1 for the plain VPS architecture).
struct SystemConfig {
  int n_tx = 64;
  int n_rx = 16;
  int n_rf = 4;
  int n_streams = 4;
  int n_ps = 8;
  int phase_bits = 3;
  int groups = 1;
  // set on the per-group configs built by the group-connected solver,
  // where n_rf/q may legitimately drop below n_streams
  bool group_subproblem = false;

  void validate() const {
    if (n_tx < 1 || n_rx < 1 || n_rf < 1 || n_streams < 1 || n_ps < 1 ||
        phase_bits < 1 || groups < 1)
      throw std::invalid_argument("SystemConfig: all dimensions must be positive");
    if (n_streams > n_rf && !group_subproblem)
      throw std::invalid_argument("SystemConfig: n_streams must not exceed n_rf");
    if (n_rf > n_tx || n_rf > n_rx)
      throw std::invalid_argument("SystemConfig: n_rf must not exceed n_tx and n_rx");
    if (groups > n_rf)
      throw std::invalid_argument("SystemConfig: groups must not exceed n_rf");
    if (n_tx % groups != 0 || n_rf % groups != 0)
      throw std::invalid_argument("SystemConfig: groups must divide n_tx and n_rf");
  }
};

/// Path-count and per-path gain variances of the clustered channel.
struct ChannelParams {
  int n_paths = 4;
  std::vector<double> gain_variances = {1.0, 0.1, 0.1, 0.1};

  void validate() const {
    if (n_paths < 1) throw std::invalid_argument("ChannelParams: n_paths must be >= 1");
    if (static_cast<int>(gain_variances.size()) != n_paths)
      throw std::invalid_argument("ChannelParams: need one gain variance per path");
    for (double v : gain_variances)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw std::invalid_argument("ChannelParams: variances must be finite and nonnegative");
  }
};

/// Iteration caps and the relative-change stop threshold shared by the
/// alternating solvers.
struct SolverOptions {
  int max_outer = 30;
  int max_inner = 10;
  double rel_tol = 1e-3;
  std::uint64_t rng_seed = 0;
  // quantize p_i inside every inner iteration instead of once per outer
  // iteration (ablation switch; deferred quantization is the default)
  bool quantize_each_inner = false;

  void validate() const {
    if (max_outer < 1 || max_inner < 1)
      throw std::invalid_argument("SolverOptions: iteration caps must be positive");
    if (!(rel_tol >= 0.0))
      throw std::invalid_argument("SolverOptions: rel_tol must be nonnegative");
  }
};

/// Per-component power figures, all in watts.
struct PowerModel {
  double p_rf_chain = 0.1;
  double p_amplifier = 0.1;
  double p_phase_shifter = 0.03;
  double p_switch = 0.001;
  double p_transmit = 1.0;

  void validate() const {
    if (p_rf_chain < 0 || p_amplifier < 0 || p_phase_shifter < 0 ||
        p_switch < 0 || p_transmit < 0)
      throw std::invalid_argument("PowerModel: powers must be nonnegative");
  }
};

}  // namespace vps
