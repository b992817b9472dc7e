#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "mgcp/errors.hpp"
#include "mgcp/kernel.hpp"
#include "oracles.hpp"

using namespace mgcp;

namespace {

Hyperparameters random_theta(std::mt19937_64 &rng, Eigen::Index n) {
  std::uniform_real_distribution<double> pos(0.5, 4.0), amp(-2.0, 2.0);
  Hyperparameters th;
  th.length_scale = pos(rng);
  th.width.resize(n);
  th.scale.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    th.width[i] = pos(rng);
    th.scale[i] = amp(rng);
  }
  return th;
}

}  // namespace

TEST(LatentKernel, ClosedFormValues) {
  EXPECT_EQ(latent_kernel(3.0, 3.0, 0.7), 1.0);
  EXPECT_NEAR(latent_kernel(0.0, 1.0, 1.0), 0.6065306597126334, 1e-15);
  EXPECT_EQ(latent_kernel(0.0, 2.0, 1.3), latent_kernel(2.0, 0.0, 1.3));
  EXPECT_THROW(latent_kernel_checked(0.0, 1.0, 0.0), ValidationError);
  EXPECT_THROW(latent_kernel_checked(0.0, 1.0, -1.0), ValidationError);
}

TEST(OutputKernel, MatchesConvolutionQuadrature) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    const auto th = random_theta(rng, 2);
    const double t = 10 * unit(rng);
    const double eta = std::sqrt(th.width.squaredNorm() + th.length_scale * th.length_scale);
    const double u = t + eta * (4 * unit(rng) - 2);
    const double closed = output_cross_kernel(0, 1, t, u, th);
    const double quad = oracle::convolution_covariance(t, u, th.length_scale, th.width[0],
                                                       th.width[1], th.scale[0], th.scale[1], 401);
    EXPECT_NEAR(closed, quad, 1e-6 * std::abs(quad) + 1e-14);
    const double z = t + 3 * (unit(rng) - 0.5);
    EXPECT_NEAR(output_latent_cross_kernel(0, t, z, th),
                oracle::convolution_latent_covariance(t, z, th.length_scale, th.width[0],
                                                      th.scale[0]),
                1e-8);
  }
}

TEST(OutputKernel, SymmetryAndPriorVariance) {
  std::mt19937_64 rng(4);
  const auto th = random_theta(rng, 3);
  EXPECT_DOUBLE_EQ(output_cross_kernel(0, 2, 1.0, 4.0, th), output_cross_kernel(2, 0, 4.0, 1.0, th));
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(output_prior_variance(i, th), output_cross_kernel(i, i, 5.0, 5.0, th));
    EXPECT_NEAR(output_prior_variance(i, th),
                th.scale[i] * th.scale[i] * th.length_scale /
                    std::sqrt(2 * th.width[i] * th.width[i] + th.length_scale * th.length_scale),
                1e-14);
  }
  EXPECT_THROW(output_cross_kernel(0, 3, 1.0, 1.0, th), ValidationError);
  EXPECT_THROW(output_prior_variance(-1, th), ValidationError);
}

TEST(Hyperparameters, Validation) {
  Hyperparameters th;
  th.length_scale = 1.0;
  th.width = Eigen::VectorXd::Ones(2);
  th.scale = Eigen::VectorXd::Ones(2);
  EXPECT_NO_THROW(validate(th));
  th.scale = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(validate(th), ValidationError);
  th.scale = Eigen::VectorXd::Ones(2);
  th.width[1] = 0.0;
  EXPECT_THROW(validate(th), ValidationError);
  th.width[1] = 1.0;
  th.length_scale = std::nan("");
  EXPECT_THROW(validate(th), ValidationError);
}

TEST(JointCovariance, PositiveSemidefiniteOnRandomConfigurations) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> time(0.0, 20.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto th = random_theta(rng, 3);
    std::vector<LatentPoint> pts;
    for (int k = 0; k < 20; ++k) pts.push_back({k % 3, time(rng)});
    Eigen::VectorXd z(5);
    for (int k = 0; k < 5; ++k) z[k] = time(rng);
    const Eigen::MatrixXd c = joint_covariance(pts, z, th);
    EXPECT_TRUE(c.isApprox(c.transpose(), 0.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * c.trace());
  }
}

TEST(Gram, BundleMatchesPieces) {
  std::mt19937_64 rng(2);
  const auto th = random_theta(rng, 2);
  std::vector<LatentPoint> pts{{0, 1.0}, {1, 2.5}, {0, 7.0}};
  const Eigen::VectorXd z = equally_spaced(0, 10, 4);
  const GramBundle g = build_gram(pts, z, th);
  EXPECT_TRUE(g.kxx.isApprox(latent_gram(z, th.length_scale)));
  EXPECT_TRUE(g.kfx.isApprox(cross_gram(pts, z, th)));
  for (std::size_t p = 0; p < pts.size(); ++p)
    EXPECT_DOUBLE_EQ(g.kff_diag[p], output_prior_variance(pts[p].unit, th));
  EXPECT_NEAR(g.jitter, JitterPolicy{}.initial * g.kxx.diagonal().mean(), 1e-24);
}

TEST(Gram, JitterLadderHandlesDuplicates) {
  Eigen::VectorXd z(3);
  z << 1.0, 1.0, 2.0;
  double jitter = -1.0;
  const auto llt = factor_with_jitter(latent_gram(z, 1.0), jitter);
  EXPECT_GT(jitter, 0.0);
  EXPECT_LE(jitter, 1e-4);
  EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(Gram, IllConditionedAfterLadder) {
  Eigen::MatrixXd k(2, 2);
  k << 1.0, 2.0, 2.0, 1.0;  // indefinite
  double jitter = 0.0;
  try {
    factor_with_jitter(k, jitter);
    FAIL();
  } catch (const IllConditionedError &e) {
    EXPECT_GT(e.condition_estimate(), 1.0);
  }
}

TEST(EquallySpaced, CoversWindow) {
  const Eigen::VectorXd z = equally_spaced(0, 100, 10);
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[9], 100.0);
  EXPECT_EQ(equally_spaced(0, 10, 1)[0], 5.0);
  EXPECT_THROW(equally_spaced(0, 10, 0), ValidationError);
}
