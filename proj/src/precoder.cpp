#include "vps/precoder.hpp"

#include <cmath>
#include <numbers>

namespace vps {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double circular_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  return std::min(d, kTwoPi - d);
}

}  // namespace

double quantize_phase(double theta, int bits) {
  if (bits < 1) throw std::invalid_argument("quantize_phase: bits must be >= 1");
  if (!std::isfinite(theta)) throw std::invalid_argument("quantize_phase: theta not finite");
  const int levels = 1 << bits;
  double best = kTwoPi / levels;
  double best_dist = circular_distance(theta, best);
  for (int i = 2; i <= levels; ++i) {
    const double cand = kTwoPi * i / levels;
    const double d = circular_distance(theta, cand);
    if (d < best_dist) {  // strict: ties keep the smaller index
      best = cand;
      best_dist = d;
    }
  }
  return best;
}

bool PhaseMatrix::valid(int bits, double tol) const {
  if (n_ps < 1 || entries.cols() < 1) return false;
  if (entries.rows() != static_cast<Eigen::Index>(n_ps) * entries.cols()) return false;
  const double mag = 1.0 / std::sqrt(static_cast<double>(n_ps));
  for (int c = 0; c < entries.cols(); ++c) {
    for (int r = 0; r < entries.rows(); ++r) {
      const bool on_mask = r >= c * n_ps && r < (c + 1) * n_ps;
      if (on_mask) {
        if (std::abs(std::abs(entries(r, c)) - mag) > tol) return false;
        if (bits > 0) {
          const double ang = std::arg(entries(r, c));
          const double q = quantize_phase(ang, bits);
          if (circular_distance(ang, q) > tol) return false;
        }
      } else if (entries(r, c) != Cplx(0.0, 0.0)) {
        return false;
      }
    }
  }
  return true;
}

MatC assemble_analog(const SwitchMatrix& s, const PhaseMatrix& p) {
  if (s.entries.cols() != p.entries.rows())
    throw std::invalid_argument("assemble_analog: dimension mismatch");
  return s.entries.cast<Cplx>() * p.entries;
}

MatC HybridPrecoder::analog() const { return assemble_analog(switches, phases); }

MatC HybridPrecoder::effective() const { return analog() * digital; }

void normalize_digital(HybridPrecoder& pre) {
  const double norm = pre.effective().norm();
  if (norm <= 0.0)
    throw std::runtime_error("normalize_digital: zero effective precoder");
  const double n_s = static_cast<double>(pre.digital.cols());
  pre.digital *= std::sqrt(n_s) / norm;
}

double residual(const MatC& f_opt, const SwitchMatrix& s, const PhaseMatrix& p,
                const MatC& f_bb) {
  if (f_opt.rows() != s.entries.rows() || p.entries.cols() != f_bb.rows() ||
      f_opt.cols() != f_bb.cols() || s.entries.cols() != p.entries.rows())
    throw std::invalid_argument("residual: dimension mismatch");
  return (f_opt - s.entries.cast<Cplx>() * p.entries * f_bb).squaredNorm();
}

}  // namespace vps
