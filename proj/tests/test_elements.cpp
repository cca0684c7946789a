#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracle.hpp"
#include "rsp/elements.hpp"
#include "rsp/measurement.hpp"
#include "test_util.hpp"

namespace rsp {
namespace {

constexpr double kPi = std::numbers::pi;
const Complex kI{0.0, 1.0};
const auto kSource = polarization_pair(Location::Source);
const auto kAlice = polarization_pair(Location::Alice);
const auto kBob = polarization_pair(Location::Bob);

ModeUnitary random_unitary(std::mt19937_64& rng, const ModeList& modes) {
  std::normal_distribution<double> g;
  const auto m = static_cast<Eigen::Index>(modes.size());
  Eigen::MatrixXcd a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = {g(rng), g(rng)};
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  return {modes, q};
}

double unitarity_defect(const ModeUnitary& u) {
  const auto m = u.matrix().rows();
  return (u.matrix().adjoint() * u.matrix() - Eigen::MatrixXcd::Identity(m, m))
      .cwiseAbs()
      .maxCoeff();
}

TEST(BeamSplitter, SinglePhotonSplits) {
  const auto out = apply(bs_5050(kSource, kAlice, kBob), make_fock({{kSource.h, 1}}));
  // modes: Source.H, Source.V, Alice.H, Alice.V, Bob.H, Bob.V
  ASSERT_EQ(out.modes().size(), 6u);
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_LT(std::abs(out.amplitude({0, 0, 0, 0, 1, 0}) - r), 1e-15);
  EXPECT_LT(std::abs(out.amplitude({0, 0, 1, 0, 0, 0}) - kI * r), 1e-15);
  EXPECT_EQ(out.terms().size(), 2u);
}

TEST(BeamSplitter, SourceSplitMatchesBruteForce) {
  for (int n = 1; n <= 4; ++n) {
    const auto out = apply(bs_5050(kSource, kAlice, kBob), make_fock({{kSource.h, n}, {kSource.v, n}}))
                         .without_modes({kSource.h, kSource.v});
    const auto expected = oracle::brute_force_split(n);
    ASSERT_EQ(out.terms().size(), expected.size()) << "n=" << n;
    for (const auto& [c, amp] : expected) {
      EXPECT_LT(std::abs(out.amplitude({c[0], c[1], c[2], c[3]}) - amp), 1e-12) << "n=" << n;
    }
  }
}

TEST(BeamSplitter, HeraldOneAliceThreeBob) {
  const auto out = apply(bs_5050(kSource, kAlice, kBob), make_fock({{kSource.h, 2}, {kSource.v, 2}}));
  const auto h = herald(out.without_modes({kSource.h, kSource.v}),
                        HeraldPattern{{{{kAlice.h, kAlice.v}, 1}, {{kBob.h, kBob.v}, 3}}});
  EXPECT_NEAR(h.probability, 0.25, 1e-12);
  EXPECT_NEAR(oracle::herald_probability(2), 0.25, 1e-15);
  // Both branches carry the same phase (i/sqrt2 before renormalization).
  const Complex a = h.conditional.amplitude({1, 0, 1, 2});
  const Complex b = h.conditional.amplitude({0, 1, 2, 1});
  EXPECT_NEAR(std::abs(a), 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_LT(std::abs(a - b), 1e-12);
}

TEST(BeamSplitter, Unitary) {
  EXPECT_LT(unitarity_defect(bs_5050(kSource, kAlice, kBob)), 1e-12);
  EXPECT_LT(unitarity_defect(pbs(kSource, kAlice, kBob)), 1e-12);
}

TEST(BeamSplitter, MismatchedPolarizations) {
  EXPECT_THROW(bs_5050({kSource.v, kSource.h}, kAlice, kBob), std::invalid_argument);
  EXPECT_THROW(bs_5050(kSource, {kAlice.h, kBob.v}, kBob), std::invalid_argument);
  EXPECT_THROW(bs_5050(kSource, kAlice, kAlice), std::invalid_argument);
}

TEST(BeamSplitter, AdjointUndoesSplit) {
  std::mt19937_64 rng(5);
  const auto bs = bs_5050(kSource, kAlice, kBob);
  const ModeList src{kSource.h, kSource.v};
  for (int i = 0; i < 50; ++i) {
    const auto in = test::random_state(rng, src, 1 + i % 4);
    const auto back = apply(bs.adjoint(), apply(bs, in)).without_modes(
        {kAlice.h, kAlice.v, kBob.h, kBob.v});
    EXPECT_NEAR(std::abs(inner_product(back, in)), 1.0, 1e-12);
  }
}

TEST(Pbs, RoutesPolarizations) {
  const auto out = apply(pbs(kSource, kAlice, kBob), make_fock({{kSource.h, 1}, {kSource.v, 1}}));
  // Source.H, Source.V, Alice.H, Bob.V
  ASSERT_EQ(out.terms().size(), 1u);
  EXPECT_EQ(out.terms().begin()->first, (Occupation{0, 0, 1, 1}));
}

TEST(HalfWavePlate, QuarterTurnRotatesHToV) {
  const auto out = apply(hwp(kPi / 4, kAlice), make_fock({{kAlice.h, 1}, {kAlice.v, 0}}));
  EXPECT_LT(std::abs(out.amplitude({0, 1}) - 1.0), 1e-15);
  EXPECT_EQ(out.terms().size(), 1u);
}

TEST(HalfWavePlate, ZeroAngleKeepsH) {
  const auto out = apply(hwp(0.0, kAlice), make_fock({{kAlice.h, 1}, {kAlice.v, 0}}));
  EXPECT_LT(std::abs(out.amplitude({1, 0}) - 1.0), 1e-15);
}

TEST(HalfWavePlate, EighthTurnMakesDiagonal) {
  const auto out = apply(hwp(kPi / 8, kAlice), make_fock({{kAlice.h, 1}, {kAlice.v, 0}}));
  const double r = 1.0 / std::sqrt(2.0);
  EXPECT_LT(std::abs(out.amplitude({1, 0}) - r), 1e-15);
  EXPECT_LT(std::abs(out.amplitude({0, 1}) - r), 1e-15);
}

TEST(HalfWavePlate, RequiresPair) {
  EXPECT_THROW(hwp(0.1, {kAlice.h, kBob.v}), std::invalid_argument);
  EXPECT_THROW(hwp(0.1, {kAlice.h, kAlice.h}), std::invalid_argument);
}

TEST(PhaseShifter, ZeroIsIdentity) {
  EXPECT_EQ(phase_shifter(0.0, kAlice.v).matrix()(0, 0), Complex(1.0, 0.0));
}

TEST(PhaseShifter, PiFlipsSign) {
  const double r = 1.0 / std::sqrt(2.0);
  const FockState plus({kAlice.h, kAlice.v}, {{{1, 0}, r}, {{0, 1}, r}});
  const auto out = apply(phase_shifter(kPi, kAlice.v), plus);
  EXPECT_LT(std::abs(out.amplitude({1, 0}) - r), 1e-15);
  EXPECT_LT(std::abs(out.amplitude({0, 1}) + r), 1e-15);
}

TEST(PhaseShifter, QuarterPhase) {
  const auto out = apply(phase_shifter(kPi / 2, kAlice.v), make_fock({{kAlice.h, 0}, {kAlice.v, 1}}));
  EXPECT_LT(std::abs(out.amplitude({0, 1}) - kI), 1e-15);
}

TEST(PhaseShifter, MultiPhotonPhaseScalesWithCount) {
  const auto out = apply(phase_shifter(0.3, kBob.v), make_fock({{kBob.h, 1}, {kBob.v, 2}}));
  EXPECT_LT(std::abs(out.amplitude({1, 2}) - std::polar(1.0, 0.6)), 1e-15);
}

TEST(Apply, IdentityLeavesStateUnchanged) {
  std::mt19937_64 rng(3);
  const auto s = test::random_state(rng, test::four_modes(), 3);
  const ModeUnitary id(test::four_modes(), Eigen::MatrixXcd::Identity(4, 4));
  const auto out = apply(id, s);
  for (const auto& [occ, amp] : s.terms()) EXPECT_LT(std::abs(out.amplitude(occ) - amp), 1e-15);
}

TEST(Apply, PreservesNorm) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; ++i) {
    const auto s = test::random_state(rng, test::four_modes(), 1 + i % 6);
    const auto u = random_unitary(rng, test::four_modes());
    EXPECT_NEAR(apply(u, s).norm_squared(), 1.0, 1e-12);
  }
}

TEST(Apply, CompositionHomomorphism) {
  std::mt19937_64 rng(123);
  for (int i = 0; i < 200; ++i) {
    const auto s = test::random_state(rng, test::four_modes(), 1 + i % 6);
    const auto u = random_unitary(rng, test::four_modes());
    const auto v = random_unitary(rng, test::four_modes());
    const auto twice = apply(u, apply(v, s));
    const auto once = apply(compose(u, v), s);
    double worst = 0.0;
    for (const auto& occ : weak_compositions(s.total_photons(), 4)) {
      worst = std::max(worst, std::abs(twice.amplitude(occ) - once.amplitude(occ)));
    }
    EXPECT_LT(worst, 1e-12);
  }
}

TEST(Apply, HongOuMandelBunching) {
  // One photon in each input of a 50:50 splitter never exits one per port.
  const ModeId a = kAlice.h, b = kBob.h;
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXcd m(2, 2);
  m << r, r, r, -r;
  const auto out = apply(ModeUnitary({a, b}, m), make_fock({{a, 1}, {b, 1}}));
  EXPECT_EQ(out.amplitude({1, 1}), Complex{});
  EXPECT_NEAR(std::norm(out.amplitude({2, 0})), 0.5, 1e-15);
}

TEST(Apply, AnalyzerChainSelectsCaptionBasis) {
  // PS and H2 followed by the H port of PBS2 pick out
  // cos2g |1_H,0_V> + e^{i theta} sin2g |0_H,1_V>.
  std::mt19937_64 rng(77);
  const ModeList alice{kAlice.h, kAlice.v};
  for (int i = 0; i < 50; ++i) {
    const double gamma = std::uniform_real_distribution<double>(0, kPi)(rng);
    const double theta = std::uniform_real_distribution<double>(0, 2 * kPi)(rng);
    const auto psi = test::random_state(rng, alice, 1);
    const auto chain = compose(hwp(gamma, kAlice), phase_shifter(-theta, kAlice.v));
    // Ports of PBS2 relabelled as Bob (transmitted) and Source (reflected);
    // modes are Source.V, Alice.H, Alice.V, Bob.H.
    const auto ported = apply(pbs(kAlice, kBob, kSource), apply(chain, psi));
    const Complex click = ported.amplitude({0, 0, 0, 1});
    const Complex expected = std::cos(2 * gamma) * psi.amplitude({1, 0}) +
                             std::polar(std::sin(2 * gamma), -theta) * psi.amplitude({0, 1});
    EXPECT_LT(std::abs(click - expected), 1e-12);
  }
}

TEST(MakeElement, DispatchesOnKind) {
  ElementSetting e{ElementKind::HWP, kPi / 8, {kAlice.h, kAlice.v}, {kAlice.h, kAlice.v}};
  EXPECT_LT((make_element(e).matrix() - hwp(kPi / 8, kAlice).matrix()).cwiseAbs().maxCoeff(), 1e-15);
  ElementSetting ps{ElementKind::PS, 0.4, {kBob.v}, {kBob.v}};
  EXPECT_EQ(make_element(ps).matrix()(0, 0), std::polar(1.0, 0.4));
  ElementSetting bs{ElementKind::BS5050, 0.0, {kSource.h, kSource.v},
                    {kAlice.h, kAlice.v, kBob.h, kBob.v}};
  EXPECT_EQ(make_element(bs).modes().size(), 6u);
  ElementSetting bad{ElementKind::PS, 0.4, {kBob.h, kBob.v}, {}};
  EXPECT_THROW(make_element(bad), std::invalid_argument);
}

TEST(ModeUnitary, RejectsNonUnitary) {
  Eigen::MatrixXcd m(2, 2);
  m << 1, 1, 0, 1;
  EXPECT_THROW(ModeUnitary({kAlice.h, kAlice.v}, m), std::invalid_argument);
  EXPECT_THROW(ModeUnitary({kAlice.h, kAlice.h}, Eigen::MatrixXcd::Identity(2, 2)),
               std::invalid_argument);
}

}  // namespace
}  // namespace rsp
