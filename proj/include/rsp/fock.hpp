#pragma once

// Multimode bosonic Fock states in the occupation-number basis, density
// operators over a truncated occupation basis, and the contractions
// (inner product, partial trace) the rest of the library is built on.

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rsp/errors.hpp"

namespace rsp {

using Complex = std::complex<double>;

inline constexpr double kAmplitudeTol = 1e-12;
inline constexpr double kEigenvalueFloor = -1e-10;

enum class Location { Source, Alice, Bob };
enum class Polarization { H, V };

/// One optical mode. The member order fixes the global mode ordering:
/// Source < Alice < Bob, then H < V, then tag ascending. Tag 0 is the
/// principal temporal/spectral mode; tag > 0 marks a distinguishable copy.
struct ModeId {
  Location location = Location::Source;
  Polarization polarization = Polarization::H;
  int tag = 0;

  friend auto operator<=>(const ModeId&, const ModeId&) = default;
};

inline constexpr ModeId mode(Location location, Polarization pol,
                             int tag = 0) {
  return ModeId{location, pol, tag};
}

inline bool is_valid(const ModeId& m) {
  const auto loc = static_cast<int>(m.location);
  const auto pol = static_cast<int>(m.polarization);
  return loc >= 0 && loc <= 2 && pol >= 0 && pol <= 1 && m.tag >= 0;
}

inline std::string to_string(const ModeId& m) {
  static constexpr const char* kLocations[] = {"Source", "Alice", "Bob"};
  std::string out = kLocations[static_cast<int>(m.location)];
  out += m.polarization == Polarization::H ? ".H" : ".V";
  if (m.tag > 0) out += "~" + std::to_string(m.tag);
  return out;
}

/// Active modes of a state, strictly ascending.
using ModeList = std::vector<ModeId>;

/// Photon counts, one entry per mode of the owning ModeList.
using Occupation = std::vector<int>;

inline int photon_count(const Occupation& occ) {
  int total = 0;
  for (int c : occ) total += c;
  return total;
}

/// Sorted, deduplicated copy; throws on invalid ids.
inline ModeList canonical_modes(ModeList modes) {
  for (const auto& m : modes) {
    if (!is_valid(m)) throw std::invalid_argument("unknown ModeId");
  }
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  return modes;
}

inline ModeList merge_modes(const ModeList& a, const ModeList& b) {
  ModeList out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

inline std::optional<std::size_t> find_mode(const ModeList& modes,
                                            const ModeId& m) {
  auto it = std::lower_bound(modes.begin(), modes.end(), m);
  if (it == modes.end() || *it != m) return std::nullopt;
  return static_cast<std::size_t>(it - modes.begin());
}

/// "Bob.H=2,Bob.V=1"
inline std::string format_occupation(const ModeList& modes,
                                     const Occupation& occ) {
  std::string out;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i) out += ',';
    out += to_string(modes[i]) + "=" + std::to_string(occ[i]);
  }
  return out;
}

/// Sparse superposition of occupation kets with a fixed photon number.
/// Immutable after construction.
class FockState {
 public:
  using Terms = std::map<Occupation, Complex>;

  FockState(ModeList modes, Terms terms)
      : modes_(std::move(modes)), terms_(std::move(terms)) {
    for (const auto& m : modes_) {
      if (!is_valid(m)) throw std::invalid_argument("unknown ModeId");
    }
    if (!std::is_sorted(modes_.begin(), modes_.end()) ||
        std::adjacent_find(modes_.begin(), modes_.end()) != modes_.end()) {
      throw std::invalid_argument("mode list must be strictly ascending");
    }
    std::erase_if(terms_, [](const auto& t) { return t.second == Complex{}; });
    if (terms_.empty()) throw std::invalid_argument("state has no support");
    total_photons_ = photon_count(terms_.begin()->first);
    for (const auto& [occ, amp] : terms_) {
      if (occ.size() != modes_.size()) {
        throw std::invalid_argument("occupation length differs from mode count");
      }
      if (std::any_of(occ.begin(), occ.end(), [](int c) { return c < 0; })) {
        throw std::invalid_argument("negative photon count");
      }
      if (photon_count(occ) != total_photons_) {
        throw std::invalid_argument("terms carry different photon numbers");
      }
    }
  }

  const ModeList& modes() const noexcept { return modes_; }
  const Terms& terms() const noexcept { return terms_; }
  int total_photons() const noexcept { return total_photons_; }

  Complex amplitude(const Occupation& occ) const {
    auto it = terms_.find(occ);
    return it == terms_.end() ? Complex{} : it->second;
  }

  double norm_squared() const {
    double sum = 0.0;
    for (const auto& [occ, amp] : terms_) sum += std::norm(amp);
    return sum;
  }

  FockState normalized() const {
    const double norm = std::sqrt(norm_squared());
    return scaled(Complex{1.0 / norm, 0.0});
  }

  FockState scaled(Complex factor) const {
    Terms out;
    for (const auto& [occ, amp] : terms_) out.emplace(occ, amp * factor);
    return {modes_, std::move(out)};
  }

  /// Same state on a larger mode set; new modes are vacuum.
  FockState embedded(const ModeList& superset) const {
    if (superset == modes_) return *this;
    std::vector<std::size_t> position(modes_.size());
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      auto idx = find_mode(superset, modes_[i]);
      if (!idx) throw std::invalid_argument("embedding target misses a mode");
      position[i] = *idx;
    }
    Terms out;
    for (const auto& [occ, amp] : terms_) {
      Occupation wide(superset.size(), 0);
      for (std::size_t i = 0; i < occ.size(); ++i) wide[position[i]] = occ[i];
      out.emplace(std::move(wide), amp);
    }
    return {superset, std::move(out)};
  }

  /// Drops modes that are empty in every term.
  FockState without_modes(const ModeList& vacant) const {
    ModeList kept;
    std::vector<std::size_t> keep_idx;
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      if (std::find(vacant.begin(), vacant.end(), modes_[i]) != vacant.end()) {
        for (const auto& [occ, amp] : terms_) {
          if (occ[i] != 0) {
            throw std::invalid_argument("cannot drop occupied mode " +
                                        to_string(modes_[i]));
          }
        }
      } else {
        kept.push_back(modes_[i]);
        keep_idx.push_back(i);
      }
    }
    Terms out;
    for (const auto& [occ, amp] : terms_) {
      Occupation narrow;
      narrow.reserve(keep_idx.size());
      for (auto i : keep_idx) narrow.push_back(occ[i]);
      out[narrow] += amp;
    }
    return {std::move(kept), std::move(out)};
  }

 private:
  ModeList modes_;
  Terms terms_;
  int total_photons_ = 0;
};

/// Single occupation ket with amplitude 1. Modes not listed are not active.
inline FockState make_fock(std::span<const std::pair<ModeId, int>> occupations) {
  std::vector<std::pair<ModeId, int>> sorted(occupations.begin(),
                                             occupations.end());
  for (const auto& [m, count] : sorted) {
    if (!is_valid(m)) throw std::invalid_argument("unknown ModeId");
    if (count < 0) throw std::invalid_argument("negative photon count");
  }
  std::sort(sorted.begin(), sorted.end());
  ModeList modes;
  Occupation occ;
  for (const auto& [m, count] : sorted) {
    if (!modes.empty() && modes.back() == m) {
      throw std::invalid_argument("mode listed twice: " + to_string(m));
    }
    modes.push_back(m);
    occ.push_back(count);
  }
  if (photon_count(occ) < 1) {
    throw std::invalid_argument("a Fock state needs at least one photon");
  }
  return {std::move(modes), {{std::move(occ), Complex{1.0, 0.0}}}};
}

inline FockState make_fock(std::initializer_list<std::pair<ModeId, int>> occ) {
  return make_fock(std::span<const std::pair<ModeId, int>>(occ.begin(), occ.size()));
}

/// <a|b>. Occupation kets are orthonormal.
inline Complex inner_product(const FockState& a, const FockState& b) {
  if (a.modes() != b.modes()) {
    throw std::invalid_argument("inner product of states on different modes");
  }
  if (a.total_photons() != b.total_photons()) {
    throw std::invalid_argument("inner product of states with different photon numbers");
  }
  Complex sum{};
  for (const auto& [occ, amp] : a.terms()) {
    auto it = b.terms().find(occ);
    if (it != b.terms().end()) sum += std::conj(amp) * it->second;
  }
  return sum;
}

/// |a> (x) |b> on disjoint mode sets.
inline FockState tensor(const FockState& a, const FockState& b) {
  ModeList modes = merge_modes(a.modes(), b.modes());
  if (modes.size() != a.modes().size() + b.modes().size()) {
    throw std::invalid_argument("tensor product of overlapping mode sets");
  }
  const FockState wa = a.embedded(modes);
  const FockState wb = b.embedded(modes);
  FockState::Terms out;
  for (const auto& [oa, xa] : wa.terms()) {
    for (const auto& [ob, xb] : wb.terms()) {
      Occupation occ(modes.size());
      for (std::size_t i = 0; i < occ.size(); ++i) occ[i] = oa[i] + ob[i];
      out.emplace(std::move(occ), xa * xb);
    }
  }
  return {std::move(modes), std::move(out)};
}

/// Hermitian, unit-trace, positive operator on an explicit occupation basis.
class DensityOperator {
 public:
  DensityOperator(ModeList modes, std::vector<Occupation> basis,
                  Eigen::MatrixXcd matrix)
      : modes_(std::move(modes)),
        basis_(std::move(basis)),
        matrix_(std::move(matrix)) {
    check_shape();
    if ((matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff() > kAmplitudeTol) {
      throw std::invalid_argument("density operator is not Hermitian");
    }
    if (std::abs(matrix_.trace() - Complex{1.0, 0.0}) > kAmplitudeTol) {
      throw std::invalid_argument("density operator trace differs from 1");
    }
    // Symmetrize so the eigen solver sees an exactly Hermitian input.
    matrix_ = 0.5 * (matrix_ + matrix_.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        matrix_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < kEigenvalueFloor) {
      throw std::invalid_argument("density operator has a negative eigenvalue");
    }
  }

  /// Rescales a positive operator to unit trace.
  static DensityOperator from_unnormalized(ModeList modes,
                                           std::vector<Occupation> basis,
                                           const Eigen::MatrixXcd& matrix) {
    const double trace = matrix.trace().real();
    if (!(trace > kZeroProbability)) {
      throw ZeroProbability("operator has vanishing trace", trace);
    }
    return {std::move(modes), std::move(basis), matrix / trace};
  }

  const ModeList& modes() const noexcept { return modes_; }
  const std::vector<Occupation>& basis() const noexcept { return basis_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
  std::size_t dimension() const noexcept { return basis_.size(); }

  std::optional<std::size_t> index_of(const Occupation& occ) const {
    auto it = std::find(basis_.begin(), basis_.end(), occ);
    if (it == basis_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - basis_.begin());
  }

  double purity() const { return (matrix_ * matrix_).trace().real(); }

  Eigen::VectorXd eigenvalues() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
        matrix_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
  }

  /// <psi|rho|psi>; psi may have support outside the basis (that part
  /// contributes nothing).
  double expectation(const FockState& psi) const {
    const FockState wide = psi.modes() == modes_ ? psi : psi.embedded(modes_);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(basis_.size());
    for (std::size_t i = 0; i < basis_.size(); ++i) v[i] = wide.amplitude(basis_[i]);
    return (v.adjoint() * matrix_ * v)(0, 0).real();
  }

  /// Re-expresses the operator on another basis over the same modes.
  /// Throws if population outside the new basis exceeds kAmplitudeTol.
  DensityOperator in_basis(std::vector<Occupation> target) const {
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(target.size(), target.size());
    std::vector<std::optional<std::size_t>> src(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) src[i] = index_of(target[i]);
    double kept = 0.0;
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (!src[i]) continue;
      kept += matrix_(*src[i], *src[i]).real();
      for (std::size_t j = 0; j < target.size(); ++j) {
        if (src[j]) out(i, j) = matrix_(*src[i], *src[j]);
      }
    }
    if (1.0 - kept > kAmplitudeTol) {
      throw std::invalid_argument("target basis drops population of the operator");
    }
    return {modes_, std::move(target), out};
  }

 private:
  void check_shape() const {
    for (const auto& m : modes_) {
      if (!is_valid(m)) throw std::invalid_argument("unknown ModeId");
    }
    if (!std::is_sorted(modes_.begin(), modes_.end()) ||
        std::adjacent_find(modes_.begin(), modes_.end()) != modes_.end()) {
      throw std::invalid_argument("mode list must be strictly ascending");
    }
    if (basis_.empty()) throw std::invalid_argument("empty basis");
    const auto n = static_cast<Eigen::Index>(basis_.size());
    if (matrix_.rows() != n || matrix_.cols() != n) {
      throw std::invalid_argument("matrix shape does not match basis");
    }
    for (const auto& occ : basis_) {
      if (occ.size() != modes_.size()) {
        throw std::invalid_argument("basis occupation length differs from mode count");
      }
    }
    auto sorted = basis_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("duplicate basis vector");
    }
  }

  ModeList modes_;
  std::vector<Occupation> basis_;
  Eigen::MatrixXcd matrix_;
};

/// |s><s| on the span of the occupation vectors of s.
inline DensityOperator to_density(const FockState& s) {
  std::vector<Occupation> basis;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(s.terms().size()));
  Eigen::Index i = 0;
  for (const auto& [occ, amp] : s.terms()) {
    basis.push_back(occ);
    v[i++] = amp;
  }
  return {s.modes(), std::move(basis), v * v.adjoint()};
}

namespace detail {

/// Splits each basis vector into the part on `keep` and the rest, then
/// accumulates out[k_i, k_j] += weight(rest_i, rest_j) * matrix(i, j).
/// With weight = delta this is the partial trace.
struct Contraction {
  ModeList kept_modes;
  ModeList traced_modes;
  std::vector<Occupation> kept_basis;
  Eigen::MatrixXcd matrix;
};

template <class Weight>
Contraction contract(const ModeList& modes, const std::vector<Occupation>& basis,
                     const Eigen::MatrixXcd& matrix, const ModeList& keep,
                     Weight&& weight) {
  Contraction out;
  std::vector<bool> is_kept(modes.size(), false);
  for (const auto& m : keep) {
    auto idx = find_mode(modes, m);
    if (!idx) throw std::invalid_argument("mode " + to_string(m) + " is not active");
    is_kept[*idx] = true;
  }
  for (std::size_t i = 0; i < modes.size(); ++i) {
    (is_kept[i] ? out.kept_modes : out.traced_modes).push_back(modes[i]);
  }
  if (out.kept_modes.empty() || out.traced_modes.empty()) {
    throw std::invalid_argument("kept modes must be a nonempty strict subset");
  }

  std::vector<Occupation> kept_part(basis.size()), traced_part(basis.size());
  for (std::size_t b = 0; b < basis.size(); ++b) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      (is_kept[i] ? kept_part[b] : traced_part[b]).push_back(basis[b][i]);
    }
  }
  out.kept_basis = kept_part;
  std::sort(out.kept_basis.begin(), out.kept_basis.end());
  out.kept_basis.erase(std::unique(out.kept_basis.begin(), out.kept_basis.end()),
                       out.kept_basis.end());
  std::vector<Eigen::Index> row(basis.size());
  for (std::size_t b = 0; b < basis.size(); ++b) {
    row[b] = std::lower_bound(out.kept_basis.begin(), out.kept_basis.end(),
                              kept_part[b]) -
             out.kept_basis.begin();
  }

  const auto dim = static_cast<Eigen::Index>(out.kept_basis.size());
  out.matrix = Eigen::MatrixXcd::Zero(dim, dim);
  for (std::size_t i = 0; i < basis.size(); ++i) {
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const Complex w = weight(traced_part[i], traced_part[j]);
      if (w != Complex{}) out.matrix(row[i], row[j]) += w * matrix(i, j);
    }
  }
  return out;
}

}  // namespace detail

/// Reduced operator on `keep`, which must be a nonempty strict subset of the
/// active modes.
inline DensityOperator partial_trace(const DensityOperator& rho, ModeList keep) {
  keep = canonical_modes(std::move(keep));
  auto c = detail::contract(rho.modes(), rho.basis(), rho.matrix(), keep,
                            [](const Occupation& a, const Occupation& b) {
                              return a == b ? Complex{1.0, 0.0} : Complex{};
                            });
  return {std::move(c.kept_modes), std::move(c.kept_basis), c.matrix};
}

/// All occupation vectors of `photons` over `mode_count` modes, ascending.
inline std::vector<Occupation> weak_compositions(int photons, std::size_t mode_count) {
  std::vector<Occupation> out;
  if (mode_count == 0) return out;
  Occupation cur(mode_count, 0);
  auto recurse = [&](auto&& self, std::size_t pos, int left) -> void {
    if (pos + 1 == mode_count) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      cur[pos] = c;
      self(self, pos + 1, left - c);
    }
  };
  recurse(recurse, 0, photons);
  return out;
}

}  // namespace rsp
