#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracle.hpp"
#include "rsp/protocol.hpp"

namespace rsp {
namespace {

constexpr double kPi = std::numbers::pi;

// alpha |n,n-1> + beta e^{i theta} |n-1,n> as a plain vector on bob_basis(n).
Eigen::Vector2cd closed_form(double alpha, double beta, double theta) {
  return Eigen::Vector2cd(alpha, std::polar(beta, theta));
}

double overlap_with(const DensityOperator& rho, const Eigen::Vector2cd& v) {
  return (v.adjoint() * rho.matrix() * v)(0, 0).real() / v.squaredNorm();
}

TEST(BuildSource, Kets) {
  const auto s2 = build_source(2);
  EXPECT_EQ(s2.modes(), source_modes());
  EXPECT_EQ(s2.amplitude({2, 2}), Complex(1.0, 0.0));
  EXPECT_EQ(build_source(1).amplitude({1, 1}), Complex(1.0, 0.0));
  EXPECT_NEAR(build_source(3).norm_squared(), 1.0, 1e-15);
  EXPECT_EQ(build_source(3).total_photons(), 6);
  EXPECT_THROW(build_source(0), std::invalid_argument);
}

TEST(SharedState, MatchesGeneralFormAndOracle) {
  for (int n = 1; n <= 4; ++n) {
    const auto shared = shared_state(n);
    EXPECT_NEAR(shared.probability, oracle::herald_probability(n), 1e-12) << n;
    const double r = 1.0 / std::sqrt(2.0);
    const FockState expected(merge_modes(alice_modes(), bob_modes()),
                             {{{1, 0, n - 1, n}, r}, {{0, 1, n, n - 1}, r}});
    EXPECT_NEAR(std::abs(inner_product(shared.conditional, expected)), 1.0, 1e-12) << n;
  }
  EXPECT_NEAR(shared_state(2).probability, 0.25, 1e-12);
}

TEST(SharedState, BranchesShareOnePhase) {
  // The residual global phase under the beam-splitter convention is i.
  const auto s = shared_state(2).conditional;
  const Complex i{0.0, 1.0};
  EXPECT_LT(std::abs(s.amplitude({1, 0, 1, 2}) - i / std::sqrt(2.0)), 1e-12);
  EXPECT_LT(std::abs(s.amplitude({0, 1, 2, 1}) - i / std::sqrt(2.0)), 1e-12);
}

TEST(AliceAnalyzer, CaptionBasis) {
  const auto k = alice_analyzer(0.3, 1.1).target();
  EXPECT_LT(std::abs(k.amplitude({1, 0}) - std::cos(0.6)), 1e-15);
  EXPECT_LT(std::abs(k.amplitude({0, 1}) - std::polar(std::sin(0.6), 1.1)), 1e-15);
}

TEST(RspPure, EqualSuperposition) {
  const auto out = rsp_pure({2, kPi / 8, 0.0});
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(overlap_with(out.bob_state, closed_form(r, r, 0.0)), 1.0, 1e-12);
  EXPECT_NEAR(out.alice_probability, 0.5, 1e-12);
  EXPECT_NEAR(out.herald_probability, 0.25, 1e-12);
  EXPECT_EQ(out.bob_basis(), bob_basis(2));
}

TEST(RspPure, QuarterTurnGivesTwoOne) {
  const auto out = rsp_pure({2, kPi / 4, 0.0});
  EXPECT_NEAR(out.bob_state.matrix()(0, 0).real(), 1.0, 1e-12);
  EXPECT_NEAR(out.bob_state.matrix()(1, 1).real(), 0.0, 1e-12);
}

TEST(RspPure, SixPhotonSourceWithPhase) {
  const auto out = rsp_pure({3, kPi / 8, kPi / 2});
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_EQ(out.bob_basis().front(), (Occupation{3, 2}));
  EXPECT_NEAR(overlap_with(out.bob_state, closed_form(r, r, kPi / 2)), 1.0, 1e-12);
}

TEST(RspPure, Preconditions) {
  EXPECT_THROW(rsp_pure({2, 0.1, 0.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(rsp_pure({0, 0.1, 0.0}), std::invalid_argument);
  EXPECT_THROW(rsp_mixed({2, 0.1, 0.0, 1.5}), std::invalid_argument);
}

TEST(RspPure, PipelineMatchesClosedForm) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  for (int n = 1; n <= 4; ++n) {
    for (int i = 0; i < 50; ++i) {
      const double g = u(rng), th = u(rng);
      const auto out = rsp_pure({n, g, th});
      EXPECT_NEAR(overlap_with(out.bob_state, closed_form(std::sin(2 * g), std::cos(2 * g), th)), 1.0,
                  1e-10);
      const auto ket = remote_ket({n, g, th});
      EXPECT_NEAR(std::abs(inner_product(ket, ideal_remote_state(n, std::sin(2 * g), std::cos(2 * g), th))),
                  1.0, 1e-10);
    }
  }
}

TEST(RspPure, NoThreeZeroOrZeroThreeComponent) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 2 * kPi);
  for (int i = 0; i < 50; ++i) {
    const auto ket = remote_ket({2, u(rng), u(rng)});
    EXPECT_EQ(ket.amplitude({3, 0}), Complex{});
    EXPECT_EQ(ket.amplitude({0, 3}), Complex{});
  }
}

TEST(RspMixed, LimitsAndPurity) {
  const auto pure = rsp_pure({2, 0.37, 0.9});
  const auto full = rsp_mixed({2, 0.37, 0.9, 1.0});
  EXPECT_LT((pure.bob_state.matrix() - full.bob_state.matrix()).cwiseAbs().maxCoeff(), 1e-12);

  const auto none = rsp_mixed({2, 0.37, 0.9, 0.0});
  EXPECT_LT((none.bob_state.matrix() - 0.5 * Eigen::MatrixXcd::Identity(2, 2)).cwiseAbs().maxCoeff(),
            1e-12);

  EXPECT_NEAR(rsp_mixed({2, kPi / 8, 0.0, 0.6}).bob_state.purity(), 0.68, 1e-12);
}

TEST(RspMixed, MatchesWernerFormForAllN) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 1; n <= 4; ++n) {
    for (int i = 0; i < 50; ++i) {
      const double g = 2 * kPi * u(rng), th = 2 * kPi * u(rng), p = u(rng);
      const auto out = rsp_mixed({n, g, th, p});
      const auto expected = oracle::werner(closed_form(std::sin(2 * g), std::cos(2 * g), th), p);
      EXPECT_LT((out.bob_state.matrix() - expected).cwiseAbs().maxCoeff(), 1e-10);
      const auto lib = ideal_mixed_state(n, std::sin(2 * g), std::cos(2 * g), th, p);
      EXPECT_LT((lib.matrix() - expected).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_NEAR(out.alice_probability, 0.5, 1e-12);
    }
  }
}

TEST(Distinguishability, IndistinguishableLimit) {
  const auto r = distinguishability_demo({2, kPi / 8, 0.0, 1.0, 1.0});
  EXPECT_EQ(r.tilde_population, 0.0);
  EXPECT_NEAR(r.principal_population, 1.0, 1e-12);
}

TEST(Distinguishability, HalfOverlapPopulatesTildeModes) {
  const auto r = distinguishability_demo({2, kPi / 8, 0.0, 1.0, 0.5});
  // |2,1>: one V photon, P(aux) = 1 - d; |1,2>: two, P(any aux) = 1 - d^2.
  EXPECT_NEAR(r.tilde_population, 0.5 * 0.5 + 0.5 * 0.75, 1e-12);
  EXPECT_GT(r.tilde_population, 0.1);
  // |2_H, 1~_V>
  EXPECT_NEAR(r.populations.at({2, 0, 1}), 0.25, 1e-12);
  double total = 0.0;
  for (const auto& [occ, p] : r.populations) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Distinguishability, PartialPolarizerStaysInSupport) {
  for (double p : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto r = distinguishability_demo({2, kPi / 8, 0.0, p, 0.5});
    EXPECT_LT(r.mixed_outside_support, 1e-12);
  }
}

}  // namespace
}  // namespace rsp
