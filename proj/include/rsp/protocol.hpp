#pragma once

// Remote state preparation pipelines. Everything downstream of the source
// ket is simulated: the shared Alice/Bob state comes out of the beam
// splitter and the herald, never from a hard-coded formula.

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "rsp/elements.hpp"
#include "rsp/fock.hpp"
#include "rsp/measurement.hpp"

namespace rsp {

inline const ModeList& source_modes() {
  static const ModeList m{mode(Location::Source, Polarization::H),
                          mode(Location::Source, Polarization::V)};
  return m;
}
inline const ModeList& alice_modes() {
  static const ModeList m{mode(Location::Alice, Polarization::H),
                          mode(Location::Alice, Polarization::V)};
  return m;
}
inline const ModeList& bob_modes() {
  static const ModeList m{mode(Location::Bob, Polarization::H),
                          mode(Location::Bob, Polarization::V)};
  return m;
}

struct RspSettings {
  int n_pairs = 2;
  double gamma = 0.0;               // H2 angle
  double theta = 0.0;               // PS1 phase
  double p_strength = 1.0;          // partial polarizer strength
  double distinguishability = 1.0;  // per-photon overlap d, 1 = indistinguishable

  void validate() const {
    if (n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
    if (!std::isfinite(gamma) || !std::isfinite(theta)) {
      throw std::invalid_argument("angles must be finite");
    }
    if (!(p_strength >= 0.0 && p_strength <= 1.0)) {
      throw std::invalid_argument("p_strength outside [0, 1]");
    }
    if (!(distinguishability >= 0.0 && distinguishability <= 1.0)) {
      throw std::invalid_argument("distinguishability outside [0, 1]");
    }
  }
};

struct RspOutcome {
  double herald_probability;
  double alice_probability;
  DensityOperator bob_state;  // on bob_basis(n), rank 1 when pure

  const std::vector<Occupation>& bob_basis() const { return bob_state.basis(); }
};

/// {|n_H,(n-1)_V>, |(n-1)_H,n_V>} on Bob's modes, in that order.
inline std::vector<Occupation> bob_basis(int n) {
  if (n < 1) throw std::invalid_argument("n_pairs must be >= 1");
  return {{n, n - 1}, {n - 1, n}};
}

/// |n_H, n_V> at the source.
inline FockState build_source(int n) {
  if (n < 1) throw std::invalid_argument("n_pairs must be >= 1");
  return make_fock({{source_modes()[0], n}, {source_modes()[1], n}});
}

/// Splits the source on a 50:50 beam splitter and heralds one photon at
/// Alice and 2n-1 at Bob. Probability is that of the herald.
inline HeraldResult shared_state(int n) {
  const FockState source = build_source(n);
  const auto split = apply(bs_5050(polarization_pair(Location::Source),
                                   polarization_pair(Location::Alice),
                                   polarization_pair(Location::Bob)),
                           source)
                         .without_modes(source_modes());
  return herald(split, HeraldPattern{{{alice_modes(), 1}, {bob_modes(), 2 * n - 1}}});
}

/// Ket selected by a click behind PS1(theta), H2(gamma) and the H port of
/// PBS2: cos2g |1_H,0_V> + e^{i theta} sin2g |0_H,1_V>.
/// The PS dial is oriented so that positive theta advances the V phase of
/// the selected ket, i.e. the analyzer evolves the photon by
/// HWP(gamma) * PS(-theta) before the H port.
inline Projector alice_analyzer(double gamma, double theta) {
  const auto pair = polarization_pair(Location::Alice);
  const ModeUnitary analyzer = compose(hwp(gamma, pair), phase_shifter(-theta, pair.v));
  const FockState port = make_fock({{pair.h, 1}, {pair.v, 0}});
  return Projector(apply(analyzer.adjoint(), port));
}

/// cos2d |n_H,(n-1)_V> + e^{i phi} sin2d |(n-1)_H,n_V> on Bob's modes.
inline Projector bob_analyzer(int n, double delta, double phi) {
  const auto basis = bob_basis(n);
  FockState::Terms terms;
  const double c = std::cos(2.0 * delta);
  const double s = std::sin(2.0 * delta);
  if (c != 0.0) terms[basis[0]] = c;
  if (s != 0.0) terms[basis[1]] = std::polar(s, phi);
  return Projector(FockState(bob_modes(), std::move(terms)));
}

/// alpha |n,(n-1)> + beta e^{i theta} |(n-1),n>; the closed form Bob should
/// hold after a pure analyzer click.
inline FockState ideal_remote_state(int n, double alpha, double beta, double theta) {
  const auto basis = bob_basis(n);
  FockState::Terms terms;
  if (alpha != 0.0) terms[basis[0]] = alpha;
  if (beta != 0.0) terms[basis[1]] = std::polar(beta, theta);
  return FockState(bob_modes(), std::move(terms)).normalized();
}

/// p |psi><psi| + (1 - p) I/2 on bob_basis(n).
inline DensityOperator ideal_mixed_state(int n, double alpha, double beta, double theta,
                                         double p) {
  const auto basis = bob_basis(n);
  const FockState psi = ideal_remote_state(n, alpha, beta, theta);
  Eigen::Vector2cd v(psi.amplitude(basis[0]), psi.amplitude(basis[1]));
  Eigen::MatrixXcd m = p * (v * v.adjoint()) +
                       (1.0 - p) * 0.5 * Eigen::MatrixXcd::Identity(2, 2);
  return {bob_modes(), basis, m};
}

namespace detail {

struct PureRun {
  double herald_probability;
  ProjectionResult alice;
};

inline PureRun run_pure(const RspSettings& s) {
  const auto shared = shared_state(s.n_pairs);
  return {shared.probability,
          project(shared.conditional, alice_analyzer(s.gamma, s.theta), alice_modes())};
}

}  // namespace detail

/// Bob's ket after Alice's projective click; equals ideal_remote_state with
/// alpha = sin2g, beta = cos2g up to a global phase.
inline FockState remote_ket(const RspSettings& s) {
  s.validate();
  return detail::run_pure(s).alice.remote;
}

inline RspOutcome rsp_pure(const RspSettings& s) {
  s.validate();
  if (s.p_strength != 1.0) {
    throw std::invalid_argument("rsp_pure requires p_strength = 1");
  }
  const auto run = detail::run_pure(s);
  return {run.herald_probability, run.alice.probability,
          to_density(run.alice.remote).in_basis(bob_basis(s.n_pairs))};
}

/// Alice measures with the partial polarizer of strength p.
inline RspOutcome rsp_mixed(const RspSettings& s) {
  s.validate();
  const auto shared = shared_state(s.n_pairs);
  const auto e = partial_polarizer_povm(alice_analyzer(s.gamma, s.theta), s.p_strength);
  const auto cond = condition_on_povm(shared.conditional, e, alice_modes());
  return {shared.probability, cond.probability,
          cond.state.in_basis(bob_basis(s.n_pairs))};
}

struct DistinguishabilityReport {
  ModeList modes;  // Bob.H, Bob.V, Bob.V~1
  std::map<Occupation, double> populations;
  double tilde_population;      // any photon in the auxiliary mode
  double principal_population;  // on bob_basis with no auxiliary photon
  double mixed_outside_support; // rsp_mixed at the same settings, outside bob_basis
};

/// Contrast between distinguishability decoherence and the partial
/// polarizer. Each of Bob's V photons is split into the principal mode with
/// amplitude sqrt(d) and an auxiliary (tag 1) mode with sqrt(1 - d).
inline DistinguishabilityReport distinguishability_demo(const RspSettings& s) {
  s.validate();
  RspSettings pure = s;
  pure.p_strength = 1.0;
  const FockState bob = remote_ket(pure);

  const double d = s.distinguishability;
  const ModeId principal = mode(Location::Bob, Polarization::V, 0);
  const ModeId auxiliary = mode(Location::Bob, Polarization::V, 1);
  Eigen::MatrixXcd split(2, 2);
  split << std::sqrt(d), -std::sqrt(1.0 - d),
           std::sqrt(1.0 - d), std::sqrt(d);
  const FockState decohered = apply(ModeUnitary({principal, auxiliary}, split), bob);

  DistinguishabilityReport report{decohered.modes(), {}, 0.0, 0.0, 0.0};
  const auto aux_index = *find_mode(decohered.modes(), auxiliary);
  const auto basis = bob_basis(s.n_pairs);
  for (const auto& occ : weak_compositions(decohered.total_photons(),
                                           decohered.modes().size())) {
    const double pop = std::norm(decohered.amplitude(occ));
    report.populations[occ] = pop;
    if (occ[aux_index] > 0) {
      report.tilde_population += pop;
    } else if (Occupation{occ[0], occ[1]} == basis[0] ||
               Occupation{occ[0], occ[1]} == basis[1]) {
      report.principal_population += pop;
    }
  }

  const auto shared = shared_state(s.n_pairs);
  const auto e = partial_polarizer_povm(alice_analyzer(s.gamma, s.theta), s.p_strength);
  const auto mixed = condition_on_povm(shared.conditional, e, alice_modes()).state;
  double inside = 0.0;
  for (const auto& b : basis) {
    if (auto i = mixed.index_of(b)) {
      inside += mixed.matrix()(static_cast<Eigen::Index>(*i),
                               static_cast<Eigen::Index>(*i)).real();
    }
  }
  report.mixed_outside_support = std::max(0.0, 1.0 - inside);
  return report;
}

}  // namespace rsp
