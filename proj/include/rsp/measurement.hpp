#pragma once

// Conditioning: photon-number heralds, projective measurement on a mode
// subset, and POVM conditioning of density operators.

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rsp/fock.hpp"

namespace rsp {

struct HeraldConstraint {
  ModeList modes;
  int count = 0;
};

/// Photon-number conditions on disjoint mode subsets; ideal number-resolving
/// detection.
struct HeraldPattern {
  std::vector<HeraldConstraint> constraints;
};

struct HeraldResult {
  double probability;
  FockState conditional;
};

inline HeraldResult herald(const FockState& s, const HeraldPattern& pattern) {
  std::vector<std::vector<std::size_t>> index_sets;
  std::vector<bool> used(s.modes().size(), false);
  for (const auto& c : pattern.constraints) {
    if (c.modes.empty()) throw std::invalid_argument("herald constraint without modes");
    if (c.count < 0 || c.count > s.total_photons()) {
      throw std::invalid_argument("herald count outside [0, total photons]");
    }
    std::vector<std::size_t> idx;
    for (const auto& m : c.modes) {
      auto i = find_mode(s.modes(), m);
      if (!i) throw std::invalid_argument("herald on inactive mode " + to_string(m));
      if (used[*i]) throw std::invalid_argument("herald constraints overlap");
      used[*i] = true;
      idx.push_back(*i);
    }
    index_sets.push_back(std::move(idx));
  }

  FockState::Terms kept;
  double probability = 0.0;
  for (const auto& [occ, amp] : s.terms()) {
    bool match = true;
    for (std::size_t c = 0; c < index_sets.size() && match; ++c) {
      int n = 0;
      for (auto i : index_sets[c]) n += occ[i];
      match = n == pattern.constraints[c].count;
    }
    if (match) {
      kept.emplace(occ, amp);
      probability += std::norm(amp);
    }
  }
  if (probability < kZeroProbability) {
    throw ZeroProbability("impossible herald", probability);
  }
  return {probability, FockState(s.modes(), std::move(kept)).normalized()};
}

/// Normalized ket defining a rank-1 projective outcome.
class Projector {
 public:
  explicit Projector(FockState target) : target_(std::move(target)) {
    if (std::abs(target_.norm_squared() - 1.0) > kAmplitudeTol) {
      throw std::invalid_argument("projector target is not normalized");
    }
  }

  const FockState& target() const noexcept { return target_; }

 private:
  FockState target_;
};

struct ProjectionResult {
  double probability;
  FockState remote;
};

/// (<phi| (x) I)|s>, renormalized, on the modes of s outside `on`.
inline ProjectionResult project(const FockState& s, const Projector& proj,
                                ModeList on) {
  on = canonical_modes(std::move(on));
  if (proj.target().modes() != on) {
    throw std::invalid_argument("projector is not supported on the measured modes");
  }
  std::vector<bool> measured(s.modes().size(), false);
  for (const auto& m : on) {
    auto i = find_mode(s.modes(), m);
    if (!i) throw std::invalid_argument("projection on inactive mode " + to_string(m));
    measured[*i] = true;
  }
  ModeList rest;
  for (std::size_t i = 0; i < s.modes().size(); ++i) {
    if (!measured[i]) rest.push_back(s.modes()[i]);
  }
  if (rest.empty()) throw std::invalid_argument("projection leaves no modes");

  FockState::Terms out;
  for (const auto& [occ, amp] : s.terms()) {
    Occupation a, r;
    for (std::size_t i = 0; i < occ.size(); ++i) (measured[i] ? a : r).push_back(occ[i]);
    const Complex overlap = std::conj(proj.target().amplitude(a));
    if (overlap != Complex{}) out[r] += overlap * amp;
  }
  double probability = 0.0;
  for (const auto& [occ, amp] : out) probability += std::norm(amp);
  if (probability < kZeroProbability) {
    throw ZeroProbability("projection outcome has zero probability", probability);
  }
  return {probability, FockState(std::move(rest), std::move(out)).normalized()};
}

/// Positive operator 0 <= E <= I on an explicit occupation basis.
class PovmElement {
 public:
  PovmElement(ModeList modes, std::vector<Occupation> basis, Eigen::MatrixXcd op,
              double strength)
      : modes_(std::move(modes)),
        basis_(std::move(basis)),
        op_(std::move(op)),
        strength_(strength) {
    const auto n = static_cast<Eigen::Index>(basis_.size());
    if (op_.rows() != n || op_.cols() != n) {
      throw std::invalid_argument("POVM operator shape does not match basis");
    }
    if ((op_ - op_.adjoint()).cwiseAbs().maxCoeff() > kAmplitudeTol) {
      throw std::invalid_argument("POVM element is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(op_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < kEigenvalueFloor ||
        solver.eigenvalues().maxCoeff() > 1.0 + kAmplitudeTol) {
      throw std::invalid_argument("POVM element eigenvalues outside [0, 1]");
    }
  }

  const ModeList& modes() const noexcept { return modes_; }
  const std::vector<Occupation>& basis() const noexcept { return basis_; }
  const Eigen::MatrixXcd& op() const noexcept { return op_; }
  double strength() const noexcept { return strength_; }

  /// <a|E|b> for arbitrary occupations; zero outside the basis.
  Complex element(const Occupation& a, const Occupation& b) const {
    auto ia = std::find(basis_.begin(), basis_.end(), a);
    auto ib = std::find(basis_.begin(), basis_.end(), b);
    if (ia == basis_.end() || ib == basis_.end()) return {};
    return op_(ia - basis_.begin(), ib - basis_.begin());
  }

 private:
  ModeList modes_;
  std::vector<Occupation> basis_;
  Eigen::MatrixXcd op_;
  double strength_;
};

/// p |phi><phi| + (1 - p) I/2 on the single-photon polarization space of
/// phi's H/V pair.
inline PovmElement partial_polarizer_povm(const Projector& phi, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("strength p outside [0, 1]");
  const FockState& t = phi.target();
  const auto& modes = t.modes();
  if (modes.size() != 2 || modes[0].polarization != Polarization::H ||
      modes[1].polarization != Polarization::V ||
      modes[0].location != modes[1].location || modes[0].tag != modes[1].tag) {
    throw std::invalid_argument("partial polarizer acts on one H/V mode pair");
  }
  if (t.total_photons() != 1) {
    throw std::invalid_argument("partial polarizer target must be a single photon");
  }
  std::vector<Occupation> basis{{1, 0}, {0, 1}};
  Eigen::Vector2cd v(t.amplitude(basis[0]), t.amplitude(basis[1]));
  Eigen::MatrixXcd op = p * (v * v.adjoint()) +
                        (1.0 - p) * 0.5 * Eigen::MatrixXcd::Identity(2, 2);
  return {modes, std::move(basis), std::move(op), p};
}

struct ConditionalState {
  double probability;
  DensityOperator state;
};

/// Tr_on(E rho) / Tr(E rho) on the modes outside `on`.
inline ConditionalState condition_on_povm(const DensityOperator& rho,
                                          const PovmElement& e, ModeList on) {
  on = canonical_modes(std::move(on));
  if (e.modes() != on) {
    throw std::invalid_argument("POVM element is not supported on the measured modes");
  }
  ModeList keep;
  for (const auto& m : rho.modes()) {
    if (!find_mode(on, m)) keep.push_back(m);
  }
  for (const auto& m : on) {
    if (!find_mode(rho.modes(), m)) {
      throw std::invalid_argument("POVM on inactive mode " + to_string(m));
    }
  }
  // out(r, r') = sum E(a', a) rho((a, r), (a', r'))
  auto c = detail::contract(rho.modes(), rho.basis(), rho.matrix(), keep,
                            [&e](const Occupation& ai, const Occupation& aj) {
                              return e.element(aj, ai);
                            });
  const double probability = c.matrix.trace().real();
  if (probability < kZeroProbability) {
    throw ZeroProbability("POVM outcome has zero probability", probability);
  }
  return {probability,
          DensityOperator(std::move(c.kept_modes), std::move(c.kept_basis),
                          c.matrix / probability)};
}

inline ConditionalState condition_on_povm(const FockState& s, const PovmElement& e,
                                          ModeList on) {
  return condition_on_povm(to_density(s), e, std::move(on));
}

}  // namespace rsp
