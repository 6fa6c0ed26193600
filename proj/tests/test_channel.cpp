#include "vps/channel.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <numbers>

using namespace vps;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("steering vector basics") {
  CHECK(steering_vector(1, 1.234)(0) == Cplx(1.0, 0.0));

  const VecC a4 = steering_vector(4, 0.0);
  for (int k = 0; k < 4; ++k) CHECK(std::abs(a4(k) - Cplx(0.5, 0.0)) < 1e-12);

  const VecC a2 = steering_vector(2, pi / 2.0);
  CHECK(std::abs(a2(0) - Cplx(1.0 / std::sqrt(2.0), 0.0)) < 1e-12);
  CHECK(std::abs(a2(1) - Cplx(-1.0 / std::sqrt(2.0), 0.0)) < 1e-12);

  CHECK_THROWS_AS(steering_vector(0, 0.0), std::invalid_argument);
}

TEST_CASE("steering vectors have unit norm") {
  Rng rng(7);
  std::uniform_real_distribution<double> uni(0.0, 2.0 * pi);
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(rng() % 128);
    CHECK(steering_vector(n, uni(rng)).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("single deterministic path gives a rank-1 all-equal-magnitude matrix") {
  SystemConfig cfg;
  cfg.n_tx = 8;
  cfg.n_rx = 4;
  cfg.n_rf = 2;
  cfg.n_streams = 2;
  // force alpha_1 = 1, theta_1 = phi_1 = 0 by assembling directly
  const MatC h = std::sqrt(8.0 * 4.0) * steering_vector(4, 0.0) *
                 steering_vector(8, 0.0).adjoint();
  CHECK(h.cwiseAbs().maxCoeff() == doctest::Approx(h.cwiseAbs().minCoeff()));
  Eigen::JacobiSVD<MatC> svd(h);
  CHECK(svd.singularValues()(1) < 1e-12 * svd.singularValues()(0));
  CHECK(h.squaredNorm() == doctest::Approx(32.0));
}

TEST_CASE("channel matrix matches the path sum and the seed contract") {
  SystemConfig cfg;
  cfg.n_tx = 16;
  cfg.n_rx = 8;
  cfg.n_rf = 2;
  cfg.n_streams = 2;
  ChannelParams params;
  params.n_paths = 3;
  params.gain_variances = {1.0, 0.5, 0.1};

  Rng rng(42);
  const ChannelRealization ch = generate_channel(cfg, params, rng);

  MatC rebuilt = MatC::Zero(cfg.n_rx, cfg.n_tx);
  for (int l = 0; l < params.n_paths; ++l)
    rebuilt += ch.gains(l) * steering_vector(cfg.n_rx, ch.aoa(l)) *
               steering_vector(cfg.n_tx, ch.aod(l)).adjoint();
  rebuilt *= std::sqrt(16.0 * 8.0 / 3.0);
  CHECK((rebuilt - ch.matrix).norm() / ch.matrix.norm() < 1e-12);

  Rng rng_a(123), rng_b(123);
  const ChannelRealization a = generate_channel(cfg, params, rng_a);
  const ChannelRealization b = generate_channel(cfg, params, rng_b);
  CHECK(a.matrix == b.matrix);
  CHECK(a.gains == b.gains);
  CHECK(a.aod == b.aod);
  CHECK(a.aoa == b.aoa);
}

TEST_CASE("mean channel energy matches the analytic expectation") {
  // E ||H||_F^2 = (n_tx n_rx / L) * sum of gain variances = 332.8 for the
  // 64x16, L=4, variances {1, .1, .1, .1} setup
  SystemConfig cfg;  // defaults are that setup
  ChannelParams params;
  Rng rng(2024);
  double sum = 0.0;
  const int n_draws = 10000;
  for (int i = 0; i < n_draws; ++i)
    sum += generate_channel(cfg, params, rng).matrix.squaredNorm();
  CHECK(sum / n_draws == doctest::Approx(332.8).epsilon(0.05));
}

TEST_CASE("optimal precoder/combiner of a diagonal channel") {
  MatC h = MatC::Zero(3, 3);
  h(0, 0) = 3.0;
  h(1, 1) = 2.0;
  h(2, 2) = 1.0;
  const DigitalTarget t = optimal_precoder_combiner(h, 2);
  MatC expect = MatC::Zero(3, 2);
  expect(0, 0) = 1.0;
  expect(1, 1) = 1.0;
  CHECK(vps::test::subspace_distance(t.f_opt, expect) < 1e-10);
  CHECK(t.singular_values(0) == doctest::Approx(3.0));
  CHECK(t.singular_values(1) == doctest::Approx(2.0));
  CHECK_FALSE(t.degenerate);
}

TEST_CASE("rank-1 channel: precoder equals the transmit steering vector") {
  const int n_tx = 16, n_rx = 8;
  const double theta = 0.7, phi = 2.1;
  const MatC h = std::sqrt(double(n_tx * n_rx)) * steering_vector(n_rx, phi) *
                 steering_vector(n_tx, theta).adjoint();
  const DigitalTarget t = optimal_precoder_combiner(h, 1);

  // independent oracle: top eigenvector of H^H H
  Eigen::SelfAdjointEigenSolver<MatC> eig(h.adjoint() * h);
  const VecC lead = eig.eigenvectors().col(n_tx - 1);
  CHECK(vps::test::subspace_distance(t.f_opt, lead) < 1e-8);
  CHECK(vps::test::subspace_distance(t.f_opt, steering_vector(n_tx, theta)) < 1e-8);
  CHECK_FALSE(t.degenerate);

  // asking for a second stream of a rank-1 channel trips the flag
  CHECK(optimal_precoder_combiner(h, 2).degenerate);
}

TEST_CASE("digital targets are semi-unitary with descending singular values") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const MatC h = vps::test::random_complex(8, 12, rng);
    const DigitalTarget t = optimal_precoder_combiner(h, 4);
    CHECK((t.f_opt.adjoint() * t.f_opt - MatC::Identity(4, 4)).norm() < 1e-10);
    CHECK((t.w_opt.adjoint() * t.w_opt - MatC::Identity(4, 4)).norm() < 1e-10);
    for (int k = 1; k < 4; ++k)
      CHECK(t.singular_values(k) <= t.singular_values(k - 1) + 1e-12);
    // phase convention: largest entry of each column real positive
    for (int c = 0; c < 4; ++c) {
      Eigen::Index imax;
      t.f_opt.col(c).cwiseAbs().maxCoeff(&imax);
      CHECK(t.f_opt(imax, c).imag() == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(t.f_opt(imax, c).real() > 0.0);
    }
  }
}
