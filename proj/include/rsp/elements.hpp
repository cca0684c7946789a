#pragma once

// Passive linear optics acting on creation operators:
//   a_j^dagger -> sum_k U(k, j) a_k^dagger
// Column j of a ModeUnitary is the image of mode j.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rsp/fock.hpp"

namespace rsp {

inline constexpr double kPruneTol = 1e-15;

class ModeUnitary {
 public:
  ModeUnitary(ModeList modes, Eigen::MatrixXcd matrix)
      : modes_(std::move(modes)), matrix_(std::move(matrix)) {
    for (const auto& m : modes_) {
      if (!is_valid(m)) throw std::invalid_argument("unknown ModeId");
    }
    auto sorted = modes_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("unitary lists a mode twice");
    }
    const auto m = static_cast<Eigen::Index>(modes_.size());
    if (m == 0 || matrix_.rows() != m || matrix_.cols() != m) {
      throw std::invalid_argument("unitary shape does not match its modes");
    }
    const Eigen::MatrixXcd defect =
        matrix_.adjoint() * matrix_ - Eigen::MatrixXcd::Identity(m, m);
    if (defect.cwiseAbs().maxCoeff() > kAmplitudeTol) {
      throw std::invalid_argument("matrix is not unitary");
    }
  }

  const ModeList& modes() const noexcept { return modes_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }

  ModeUnitary adjoint() const { return {modes_, matrix_.adjoint()}; }

  /// Matrix on `target` (a superset of modes()), identity elsewhere.
  Eigen::MatrixXcd extended(const ModeList& target) const {
    const auto n = static_cast<Eigen::Index>(target.size());
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(n, n);
    std::vector<Eigen::Index> pos(modes_.size());
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      auto idx = find_mode(target, modes_[i]);
      if (!idx) throw std::invalid_argument("extension target misses a mode");
      pos[i] = static_cast<Eigen::Index>(*idx);
    }
    for (std::size_t r = 0; r < pos.size(); ++r) {
      for (std::size_t c = 0; c < pos.size(); ++c) {
        out(pos[r], pos[c]) = matrix_(static_cast<Eigen::Index>(r),
                                      static_cast<Eigen::Index>(c));
      }
    }
    return out;
  }

 private:
  ModeList modes_;
  Eigen::MatrixXcd matrix_;
};

/// `after` applied to the output of `before`.
inline ModeUnitary compose(const ModeUnitary& after, const ModeUnitary& before) {
  ModeList all = merge_modes(canonical_modes(after.modes()),
                             canonical_modes(before.modes()));
  return {all, after.extended(all) * before.extended(all)};
}

/// H and V modes of one location/tag.
struct PolarizationPair {
  ModeId h;
  ModeId v;
};

inline PolarizationPair polarization_pair(Location loc, int tag = 0) {
  return {mode(loc, Polarization::H, tag), mode(loc, Polarization::V, tag)};
}

inline void check_pair(const PolarizationPair& p) {
  if (!is_valid(p.h) || !is_valid(p.v)) throw std::invalid_argument("unknown ModeId");
  if (p.h.polarization != Polarization::H || p.v.polarization != Polarization::V ||
      p.h.location != p.v.location || p.h.tag != p.v.tag) {
    throw std::invalid_argument("modes are not an H/V pair of one location");
  }
}

/// Non-polarizing 50:50 splitter with one used input port. For each
/// polarization: in -> (bob + i alice)/sqrt2; the reflected (Alice) arm
/// carries the factor i. The Alice/Bob modes act as the unused port so the
/// map is unitary on the six modes.
inline ModeUnitary bs_5050(const PolarizationPair& in, const PolarizationPair& alice,
                           const PolarizationPair& bob) {
  check_pair(in);
  check_pair(alice);
  check_pair(bob);
  const double r = 1.0 / std::sqrt(2.0);
  const Complex i{0.0, 1.0};
  // Per polarization, ordering (in, alice, bob).
  Eigen::Matrix3cd block;
  block << 0.0, 0.0, 1.0,
           i * r, r, 0.0,
           r, i * r, 0.0;
  ModeList modes{in.h, alice.h, bob.h, in.v, alice.v, bob.v};
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(6, 6);
  u.topLeftCorner<3, 3>() = block;
  u.bottomRightCorner<3, 3>() = block;
  return {std::move(modes), u};
}

/// Transmits H into `transmitted.h`, reflects V into `reflected.v`.
inline ModeUnitary pbs(const PolarizationPair& in, const PolarizationPair& transmitted,
                       const PolarizationPair& reflected) {
  check_pair(in);
  check_pair(transmitted);
  check_pair(reflected);
  // Swaps in.h <-> transmitted.h and in.v <-> reflected.v.
  ModeList modes{in.h, transmitted.h, in.v, reflected.v};
  Eigen::MatrixXcd u(4, 4);
  u << 0, 1, 0, 0,
       1, 0, 0, 0,
       0, 0, 0, 1,
       0, 0, 1, 0;
  return {std::move(modes), u};
}

/// Jones matrix [[cos2a, sin2a], [sin2a, -cos2a]] on (H, V).
inline ModeUnitary hwp(double angle, const PolarizationPair& pair) {
  check_pair(pair);
  const double c = std::cos(2.0 * angle);
  const double s = std::sin(2.0 * angle);
  Eigen::MatrixXcd u(2, 2);
  u << c, s,
       s, -c;
  return {{pair.h, pair.v}, u};
}

/// a^dagger -> e^{i theta} a^dagger on one mode.
inline ModeUnitary phase_shifter(double theta, const ModeId& m) {
  Eigen::MatrixXcd u(1, 1);
  u(0, 0) = std::polar(1.0, theta);
  return {{m}, u};
}

enum class ElementKind { BS5050, PBS, HWP, PS };

struct ElementSetting {
  ElementKind kind = ElementKind::HWP;
  double angle_or_phase = 0.0;
  ModeList input_modes;
  ModeList output_modes;
};

inline ModeUnitary make_element(const ElementSetting& e) {
  auto pair_at = [](const ModeList& list, std::size_t first) {
    if (list.size() < first + 2) throw std::invalid_argument("element needs an H/V pair");
    return PolarizationPair{list[first], list[first + 1]};
  };
  switch (e.kind) {
    case ElementKind::BS5050:
    case ElementKind::PBS: {
      if (e.input_modes.size() != 2 || e.output_modes.size() != 4) {
        throw std::invalid_argument("splitter takes 2 input and 4 output modes");
      }
      auto in = pair_at(e.input_modes, 0);
      auto first = pair_at(e.output_modes, 0);
      auto second = pair_at(e.output_modes, 2);
      return e.kind == ElementKind::BS5050 ? bs_5050(in, first, second)
                                           : pbs(in, first, second);
    }
    case ElementKind::HWP:
      if (e.input_modes.size() != 2) throw std::invalid_argument("wave plate takes 2 modes");
      return hwp(e.angle_or_phase, pair_at(e.input_modes, 0));
    case ElementKind::PS:
      if (e.input_modes.size() != 1) throw std::invalid_argument("phase shifter takes 1 mode");
      return phase_shifter(e.angle_or_phase, e.input_modes.front());
  }
  throw std::invalid_argument("unknown element kind");
}

namespace detail {

inline double sqrt_factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return std::sqrt(f);
}

}  // namespace detail

/// Evolves s by u. Modes of u that are not active in s enter as vacuum, so
/// the result lives on the union of both mode sets.
inline FockState apply(const ModeUnitary& u, const FockState& s) {
  const ModeList all = merge_modes(s.modes(), canonical_modes(u.modes()));
  const FockState wide = s.embedded(all);
  const auto m = u.modes().size();
  std::vector<std::size_t> pos(m);
  for (std::size_t j = 0; j < m; ++j) pos[j] = *find_mode(all, u.modes()[j]);
  const auto& mat = u.matrix();

  using Poly = std::map<std::vector<int>, Complex>;
  FockState::Terms out;
  for (const auto& [occ, amp] : wide.terms()) {
    // prod_j (a_j^dag)^{n_j} / sqrt(n_j!) expanded as a polynomial in the
    // image creation operators.
    Complex prefactor = amp;
    for (std::size_t j = 0; j < m; ++j) prefactor /= detail::sqrt_factorial(occ[pos[j]]);
    Poly poly{{std::vector<int>(m, 0), prefactor}};
    for (std::size_t j = 0; j < m; ++j) {
      for (int rep = 0; rep < occ[pos[j]]; ++rep) {
        Poly next;
        for (const auto& [exps, coef] : poly) {
          for (std::size_t k = 0; k < m; ++k) {
            const Complex entry = mat(static_cast<Eigen::Index>(k),
                                      static_cast<Eigen::Index>(j));
            if (entry == Complex{}) continue;
            auto e = exps;
            ++e[k];
            next[e] += coef * entry;
          }
        }
        poly = std::move(next);
      }
    }
    Occupation base = occ;
    for (std::size_t j = 0; j < m; ++j) base[pos[j]] = 0;
    for (const auto& [exps, coef] : poly) {
      Occupation target = base;
      Complex a = coef;
      for (std::size_t k = 0; k < m; ++k) {
        target[pos[k]] = exps[k];
        a *= detail::sqrt_factorial(exps[k]);
      }
      out[target] += a;
    }
  }
  std::erase_if(out, [](const auto& t) { return std::abs(t.second) < kPruneTol; });
  return {all, std::move(out)};
}

}  // namespace rsp
