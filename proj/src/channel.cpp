#include "vps/channel.hpp"

#include <cmath>
#include <numbers>

namespace vps {

VecC steering_vector(int n, double angle) {
  if (n < 1) throw std::invalid_argument("steering_vector: n must be >= 1");
  VecC a(n);
  const double step = std::numbers::pi * std::sin(angle);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k)
    a(k) = std::polar(scale, step * static_cast<double>(k));
  return a;
}

ChannelRealization generate_channel(const SystemConfig& cfg,
                                    const ChannelParams& params, Rng& rng) {
  cfg.validate();
  params.validate();

  const int n_paths = params.n_paths;
  ChannelRealization ch;
  ch.gains.resize(n_paths);
  ch.aod.resize(n_paths);
  ch.aoa.resize(n_paths);

  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * std::numbers::pi);
  for (int l = 0; l < n_paths; ++l) {
    // CN(0, v): real and imaginary parts each N(0, v/2)
    const double sigma = std::sqrt(params.gain_variances[l] / 2.0);
    ch.gains(l) = Cplx(sigma * gauss(rng), sigma * gauss(rng));
    ch.aod(l) = uni(rng);
    ch.aoa(l) = uni(rng);
  }

  ch.matrix = MatC::Zero(cfg.n_rx, cfg.n_tx);
  for (int l = 0; l < n_paths; ++l) {
    ch.matrix += ch.gains(l) * steering_vector(cfg.n_rx, ch.aoa(l)) *
                 steering_vector(cfg.n_tx, ch.aod(l)).adjoint();
  }
  ch.matrix *= std::sqrt(static_cast<double>(cfg.n_tx) * cfg.n_rx / n_paths);
  return ch;
}

namespace {

// Rotate each column so its largest-magnitude entry is real positive.
void fix_column_phases(MatC& m) {
  for (int c = 0; c < m.cols(); ++c) {
    Eigen::Index imax;
    m.col(c).cwiseAbs().maxCoeff(&imax);
    const Cplx pivot = m(imax, c);
    if (std::abs(pivot) > 0.0) m.col(c) *= std::conj(pivot) / std::abs(pivot);
  }
}

}  // namespace

DigitalTarget optimal_precoder_combiner(const MatC& h, int n_streams) {
  if (n_streams < 1 || n_streams > std::min(h.rows(), h.cols()))
    throw std::invalid_argument("optimal_precoder_combiner: bad n_streams");

  Eigen::JacobiSVD<MatC> svd(h, Eigen::ComputeThinU | Eigen::ComputeThinV);
  DigitalTarget t;
  t.f_opt = svd.matrixV().leftCols(n_streams);
  t.w_opt = svd.matrixU().leftCols(n_streams);
  t.singular_values = svd.singularValues().head(n_streams);
  fix_column_phases(t.f_opt);
  fix_column_phases(t.w_opt);

  const double s0 = svd.singularValues()(0);
  t.degenerate =
      s0 <= 0.0 || t.singular_values(n_streams - 1) < 1e-12 * s0;
  return t;
}

}  // namespace vps
