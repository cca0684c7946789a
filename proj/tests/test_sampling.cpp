#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rsp/sampling.hpp"

namespace rsp {
namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> phase_grid(int points) {
  std::vector<double> g;
  for (int k = 0; k < points; ++k) g.push_back(2 * kPi * k / points);
  return g;
}

TEST(SampleCounts, CertainOutcome) {
  const auto c = sample_counts({1.0, 0.0, 0.0, 0.0}, 1000, 3);
  EXPECT_EQ(c.pp, 1000.0);
  EXPECT_EQ(c.pm + c.mp + c.mm, 0.0);
}

TEST(SampleCounts, ZeroWidthCellsNeverDrawn) {
  const std::vector<double> p{0.0, 0.5, 0.0, 0.5, 0.0};
  const auto c = sample_multinomial(p, 5000, 9);
  EXPECT_EQ(c[0] + c[2] + c[4], 0u);
  EXPECT_EQ(c[1] + c[3], 5000u);
}

TEST(SampleCounts, DeterministicPerSeed) {
  const CountTable p{0.4, 0.1, 0.2, 0.3};
  const auto a = sample_counts(p, 10000, 42);
  const auto b = sample_counts(p, 10000, 42);
  EXPECT_EQ(a.pp, b.pp);
  EXPECT_EQ(a.pm, b.pm);
  EXPECT_EQ(a.mp, b.mp);
  EXPECT_EQ(a.mm, b.mm);
  const auto c = sample_counts(p, 10000, 43);
  EXPECT_TRUE(a.pp != c.pp || a.pm != c.pm || a.mp != c.mp);
  EXPECT_EQ(a.total(), 10000.0);
}

TEST(SampleCounts, ConvergesToExpectation) {
  const CountTable p{0.4, 0.1, 0.2, 0.3};
  const auto c = sample_counts(p, 1000000, 1);
  EXPECT_NEAR(c.correlation(), p.correlation(), 0.005);
}

TEST(SampleCounts, Errors) {
  EXPECT_THROW(sample_counts({0.5, 0.5, 0, 0}, 0, 1), std::invalid_argument);
  EXPECT_THROW(sample_counts({0, 0, 0, 0}, 10, 1), std::invalid_argument);
  EXPECT_THROW(sample_counts({-0.5, 1.5, 0, 0}, 10, 1), std::invalid_argument);
}

TEST(SampleFringe, MillionShotsRecoverVisibility) {
  const auto exact = fringe_scan(RspSettings{2, kPi / 8, 0.0}, FringeAxis::phase_phi, phase_grid(24));
  const auto sampled = sample_fringe(exact, 1000000, 2024);
  EXPECT_NEAR(sampled.scan.fitted_visibility, 1.0, 0.01);
  EXPECT_EQ(sampled.counts.size(), 24u);
}

TEST(SampleFringe, Deterministic) {
  const auto exact = fringe_scan(RspSettings{2, kPi / 8, 1.0, 0.9}, FringeAxis::phase_phi, phase_grid(12));
  const auto a = sample_fringe(exact, 500, 7);
  const auto b = sample_fringe(exact, 500, 7);
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_EQ(a.scan.fitted_visibility, b.scan.fitted_visibility);
}

}  // namespace
}  // namespace rsp
