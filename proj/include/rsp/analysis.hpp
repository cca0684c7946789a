#pragma once

// Observables and figures of merit on the single-photon (x) (2n-1)-photon
// qubit subspace, fringe scans with a fixed-frequency sinusoid fit, and
// population / purity / fidelity reports.

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsp/fock.hpp"
#include "rsp/protocol.hpp"

namespace rsp {

inline constexpr double kLeakTol = 1e-9;

enum class ObservableKind {
  sigma_z_single,
  sigma_x_single,
  sigma_z_triple,
  sigma_x_triple,
  mu_s,
  pi_s,
  mu_t,
  pi_t,
};

inline std::string to_string(ObservableKind k) {
  static constexpr const char* kNames[] = {
      "sigma_z_single", "sigma_x_single", "sigma_z_triple", "sigma_x_triple",
      "mu_s",           "pi_s",           "mu_t",           "pi_t"};
  return kNames[static_cast<int>(k)];
}

/// 2x2 observable on either the single-photon qubit {|1,0>_A, |0,1>_A}
/// or the Bob qubit {|n,n-1>_B, |n-1,n>_B}.
struct ObservableSpec {
  ObservableKind kind;
  Eigen::Matrix2cd matrix;

  bool on_single() const {
    switch (kind) {
      case ObservableKind::sigma_z_single:
      case ObservableKind::sigma_x_single:
      case ObservableKind::mu_s:
      case ObservableKind::pi_s:
        return true;
      default:
        return false;
    }
  }
};

inline ObservableSpec observable(ObservableKind kind) {
  Eigen::Matrix2cd z, x;
  z << 1, 0, 0, -1;
  x << 0, 1, 1, 0;
  const double r = 1.0 / std::sqrt(2.0);
  switch (kind) {
    case ObservableKind::sigma_z_single:
    case ObservableKind::sigma_z_triple:
    case ObservableKind::mu_t:
      return {kind, z};
    case ObservableKind::sigma_x_single:
    case ObservableKind::sigma_x_triple:
    case ObservableKind::pi_t:
      return {kind, x};
    case ObservableKind::mu_s:
      return {kind, r * (z + x)};
    case ObservableKind::pi_s:
      // Sign fixed by the H2 settings that realize it (+ at 3pi/16, - at
      // 7pi/16); the opposite sign cancels the CHSH sum on the shared state.
      return {kind, r * (x - z)};
  }
  throw std::invalid_argument("unknown observable");
}

enum class Waveplate { H2, H3 };

/// Wave plate angles whose analyzer clicks realize the + and - outcomes of
/// an observable (phase shifters removed).
struct InstrumentSetting {
  ObservableKind kind;
  Waveplate waveplate;
  double plus_angle;
  double minus_angle;
};

inline InstrumentSetting instrument_setting(ObservableKind kind) {
  constexpr double pi = std::numbers::pi;
  switch (kind) {
    case ObservableKind::sigma_z_single: return {kind, Waveplate::H2, 0.0, pi / 4};
    case ObservableKind::sigma_x_single: return {kind, Waveplate::H2, pi / 8, 3 * pi / 8};
    case ObservableKind::mu_s: return {kind, Waveplate::H2, pi / 16, 5 * pi / 16};
    case ObservableKind::pi_s: return {kind, Waveplate::H2, 3 * pi / 16, 7 * pi / 16};
    case ObservableKind::sigma_z_triple:
    case ObservableKind::mu_t: return {kind, Waveplate::H3, 0.0, pi / 4};
    case ObservableKind::sigma_x_triple:
    case ObservableKind::pi_t: return {kind, Waveplate::H3, pi / 8, 3 * pi / 8};
  }
  throw std::invalid_argument("unknown observable");
}

/// The four CHSH observables in the order mu_s, pi_s, mu_t, pi_t.
inline std::array<InstrumentSetting, 4> chsh_angle_settings() {
  return {instrument_setting(ObservableKind::mu_s), instrument_setting(ObservableKind::pi_s),
          instrument_setting(ObservableKind::mu_t), instrument_setting(ObservableKind::pi_t)};
}

struct CountTable {
  double pp = 0.0;
  double pm = 0.0;
  double mp = 0.0;
  double mm = 0.0;

  double total() const { return pp + pm + mp + mm; }

  double correlation() const {
    const double t = total();
    if (!(t > 0.0)) throw std::invalid_argument("empty count table");
    return (pp + mm - pm - mp) / t;
  }
};

/// Bob photon number of a state on Alice + Bob modes: 2n - 1.
inline int bob_photons_of(const DensityOperator& rho) {
  if (rho.modes() != merge_modes(alice_modes(), bob_modes())) {
    throw std::invalid_argument("state must live on Alice.H, Alice.V, Bob.H, Bob.V");
  }
  const int total = photon_count(rho.basis().front());
  if (total < 2 || total % 2 != 0) {
    throw std::invalid_argument("state photon number is not 2n");
  }
  return total - 1;
}

/// 4x4 block on {|H>,|V>}_A (x) {|n,n-1>,|n-1,n>}_B; throws SubspaceLeak when
/// more than kLeakTol of the population lies outside.
inline Eigen::Matrix4cd qubit_block(const DensityOperator& rho) {
  const int bob = bob_photons_of(rho);
  const int n = (bob + 1) / 2;
  const std::array<Occupation, 4> sub{Occupation{1, 0, n, n - 1}, Occupation{1, 0, n - 1, n},
                                      Occupation{0, 1, n, n - 1}, Occupation{0, 1, n - 1, n}};
  std::array<std::optional<std::size_t>, 4> idx;
  for (int i = 0; i < 4; ++i) idx[i] = rho.index_of(sub[i]);
  Eigen::Matrix4cd block = Eigen::Matrix4cd::Zero();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      if (idx[i] && idx[j]) {
        block(i, j) = rho.matrix()(static_cast<Eigen::Index>(*idx[i]),
                                   static_cast<Eigen::Index>(*idx[j]));
      }
    }
  }
  const double leaked = 1.0 - block.trace().real();
  if (leaked > kLeakTol) {
    throw SubspaceLeak("state has population outside the qubit subspace", leaked);
  }
  return block;
}

/// <s (x) t> = Tr(rho (S (x) T)).
inline double correlation(const DensityOperator& rho, const ObservableSpec& s,
                          const ObservableSpec& t) {
  if (!s.on_single() || t.on_single()) {
    throw std::invalid_argument("correlation expects a single-photon and a Bob observable");
  }
  const Eigen::Matrix4cd block = qubit_block(rho);
  Eigen::Matrix4cd op;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) op.block<2, 2>(2 * a, 2 * b) = s.matrix(a, b) * t.matrix;
  }
  return (block * op).trace().real();
}

/// Probabilities of the four joint outcomes when Alice's H2 and Bob's H3 sit
/// at the instrument angles. Computed in the Fock basis from the analyzer
/// kets.
inline CountTable expected_counts(const DensityOperator& rho, const InstrumentSetting& s,
                                  const InstrumentSetting& t) {
  if (s.waveplate != Waveplate::H2 || t.waveplate != Waveplate::H3) {
    throw std::invalid_argument("expected an H2 setting and an H3 setting");
  }
  const int bob = bob_photons_of(rho);
  qubit_block(rho);  // leak check
  const int n = (bob + 1) / 2;
  auto prob = [&](double gamma, double delta) {
    const FockState ket = tensor(alice_analyzer(gamma, 0.0).target(),
                                 bob_analyzer(n, delta, 0.0).target());
    return rho.expectation(ket);
  };
  return {prob(s.plus_angle, t.plus_angle), prob(s.plus_angle, t.minus_angle),
          prob(s.minus_angle, t.plus_angle), prob(s.minus_angle, t.minus_angle)};
}

inline double correlation_from_counts(const DensityOperator& rho, ObservableKind s,
                                      ObservableKind t) {
  return expected_counts(rho, instrument_setting(s), instrument_setting(t)).correlation();
}

struct ChshResult {
  // <mu_s mu_t>, <mu_s pi_t>, <pi_s mu_t>, <pi_s pi_t>
  std::array<double, 4> correlations;
  double s;
};

inline double chsh_combination(const std::array<double, 4>& c) {
  return std::abs(-c[0] + c[1] + c[2] + c[3]);
}

/// Operator route.
inline ChshResult chsh(const DensityOperator& rho) {
  using K = ObservableKind;
  const auto mu_s = observable(K::mu_s), pi_s = observable(K::pi_s);
  const auto mu_t = observable(K::mu_t), pi_t = observable(K::pi_t);
  ChshResult r{{correlation(rho, mu_s, mu_t), correlation(rho, mu_s, pi_t),
                correlation(rho, pi_s, mu_t), correlation(rho, pi_s, pi_t)},
               0.0};
  r.s = chsh_combination(r.correlations);
  return r;
}

/// Instrument-angle counts route.
inline ChshResult chsh_from_counts(const DensityOperator& rho) {
  using K = ObservableKind;
  ChshResult r{{correlation_from_counts(rho, K::mu_s, K::mu_t),
                correlation_from_counts(rho, K::mu_s, K::pi_t),
                correlation_from_counts(rho, K::pi_s, K::mu_t),
                correlation_from_counts(rho, K::pi_s, K::pi_t)},
               0.0};
  r.s = chsh_combination(r.correlations);
  return r;
}

/// p rho + (1 - p) I/d on rho's own basis.
inline DensityOperator white_noise(const DensityOperator& rho, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("noise parameter outside [0, 1]");
  const auto d = static_cast<Eigen::Index>(rho.dimension());
  Eigen::MatrixXcd m = p * rho.matrix() +
                       (1.0 - p) / static_cast<double>(d) * Eigen::MatrixXcd::Identity(d, d);
  return {rho.modes(), rho.basis(), m};
}

/// y = mean + amplitude cos(frequency (x - offset)), fit by linear least
/// squares on (1, cos, sin).
struct SinusoidFit {
  double mean = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;  // in [0, 2pi / frequency)
  double visibility = 0.0;
  bool flat = false;    // amplitude below tolerance; offset is meaningless
};

namespace detail {

inline Eigen::MatrixXd sinusoid_design(std::span<const double> x, double frequency) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd design(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = std::cos(frequency * x[static_cast<std::size_t>(i)]);
    design(i, 2) = std::sin(frequency * x[static_cast<std::size_t>(i)]);
  }
  return design;
}

}  // namespace detail

/// True when the grid determines mean, amplitude and phase uniquely.
inline bool resolves_sinusoid(std::span<const double> x, double frequency) {
  if (x.size() < 3) return false;
  return Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(detail::sinusoid_design(x, frequency))
             .rank() == 3;
}

inline SinusoidFit fit_sinusoid(std::span<const double> x, std::span<const double> y,
                                double frequency) {
  if (x.size() != y.size()) throw std::invalid_argument("fit inputs differ in length");
  if (x.size() < 3) throw std::invalid_argument("sinusoid fit needs at least 3 points");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(detail::sinusoid_design(x, frequency));
  if (qr.rank() < 3) {
    throw std::invalid_argument("grid does not resolve the sinusoid (degenerate design)");
  }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(y.data(),
                                                                static_cast<Eigen::Index>(y.size()));
  const Eigen::Vector3d c = qr.solve(rhs);
  SinusoidFit fit;
  fit.mean = c[0];
  fit.amplitude = std::hypot(c[1], c[2]);
  if (!(fit.mean > 0.0)) throw std::invalid_argument("fringe mean is not positive");
  fit.flat = fit.amplitude < 1e-12;
  if (!fit.flat) {
    const double period = 2.0 * std::numbers::pi / frequency;
    fit.offset = std::fmod(std::atan2(c[2], c[1]) / frequency + period, period);
  }
  fit.visibility = fit.flat ? 0.0 : fit.amplitude / fit.mean;
  return fit;
}

enum class FringeAxis { phase_phi, angle_delta };

inline std::string to_string(FringeAxis a) {
  return a == FringeAxis::phase_phi ? "phase_phi" : "angle_delta";
}

/// Frequency of the fringe along an axis: cos(phi - theta) or cos 4(delta + gamma).
inline double fringe_frequency(FringeAxis a) {
  return a == FringeAxis::phase_phi ? 1.0 : 4.0;
}

struct FringeScan {
  FringeAxis axis;
  std::vector<double> grid;
  std::vector<double> probabilities;
  double fitted_visibility;
  double fitted_offset;  // location of the fitted maximum
  bool flat;
};

inline FringeScan fit_fringe(FringeAxis axis, std::vector<double> grid,
                             std::vector<double> probabilities) {
  const auto fit = fit_sinusoid(grid, probabilities, fringe_frequency(axis));
  return {axis, std::move(grid), std::move(probabilities), fit.visibility, fit.offset,
          fit.flat};
}

/// Bob's projection probabilities along the axis: onto
/// (|n,n-1> + e^{i phi}|n-1,n>)/sqrt2 for phase_phi, onto
/// cos2d|n,n-1> + sin2d|n-1,n> for angle_delta.
inline FringeScan fringe_scan(const DensityOperator& bob, int n, FringeAxis axis,
                              std::vector<double> grid) {
  if (grid.empty()) throw std::invalid_argument("empty scan grid");
  std::vector<double> prob;
  prob.reserve(grid.size());
  for (double g : grid) {
    const Projector k = axis == FringeAxis::phase_phi
                            ? bob_analyzer(n, std::numbers::pi / 8, g)
                            : bob_analyzer(n, g, 0.0);
    prob.push_back(bob.expectation(k.target()));
  }
  return fit_fringe(axis, std::move(grid), std::move(prob));
}

inline FringeScan fringe_scan(const RspSettings& s, FringeAxis axis, std::vector<double> grid) {
  return fringe_scan(rsp_mixed(s).bob_state, s.n_pairs, axis, std::move(grid));
}

/// Diagonal populations over every occupation of the state's photon number.
inline std::map<Occupation, double> component_populations(const DensityOperator& rho) {
  const int photons = photon_count(rho.basis().front());
  for (const auto& b : rho.basis()) {
    if (photon_count(b) != photons) {
      throw std::invalid_argument("populations need a fixed photon number");
    }
  }
  std::map<Occupation, double> out;
  for (const auto& occ : weak_compositions(photons, rho.modes().size())) out[occ] = 0.0;
  for (std::size_t i = 0; i < rho.dimension(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out[rho.basis()[i]] = rho.matrix()(k, k).real();
  }
  return out;
}

inline std::map<Occupation, double> component_populations(const FockState& s) {
  std::map<Occupation, double> out;
  const double norm = s.norm_squared();
  for (const auto& occ : weak_compositions(s.total_photons(), s.modes().size())) {
    out[occ] = std::norm(s.amplitude(occ)) / norm;
  }
  return out;
}

struct PurityFidelity {
  double purity;
  double fidelity;
};

/// Purity Tr(rho^2) and fidelity <psi|rho|psi>.
inline PurityFidelity purity_and_fidelity(const DensityOperator& rho, const FockState& psi) {
  if (psi.modes() != rho.modes()) throw std::invalid_argument("basis mismatch: modes differ");
  for (const auto& [occ, amp] : psi.terms()) {
    if (!rho.index_of(occ)) throw std::invalid_argument("basis mismatch: target outside basis");
  }
  return {rho.purity(), rho.expectation(psi.normalized())};
}

namespace detail {

inline Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
  // Roundoff-level eigenvalues would otherwise contribute ~1e-8 after the root.
  const double floor = 1e-14 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd ev = es.eigenvalues().unaryExpr([floor](double x) {
    return x > floor ? std::sqrt(x) : 0.0;
  });
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace detail

/// Purity of rho and Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
inline PurityFidelity purity_and_fidelity(const DensityOperator& rho,
                                          const DensityOperator& sigma) {
  if (rho.modes() != sigma.modes()) throw std::invalid_argument("basis mismatch: modes differ");
  const DensityOperator aligned = sigma.in_basis(rho.basis());
  const Eigen::MatrixXcd root = detail::psd_sqrt(rho.matrix());
  const Eigen::MatrixXcd inner = root * aligned.matrix() * root;
  const Eigen::MatrixXcd herm = 0.5 * (inner + inner.adjoint());
  const double f = detail::psd_sqrt(herm).trace().real();
  return {rho.purity(), f * f};
}

}  // namespace rsp
