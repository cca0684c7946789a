#pragma once

// Seeded count sampling for error-bar emulation. Each call owns its own
// generator; identical (input, shots, seed) give identical draws.

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "rsp/analysis.hpp"

namespace rsp {

namespace detail {

/// Uniform in [0, 1) from the top 53 bits; independent of the standard
/// library's distribution implementations.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Multinomial draw of `shots` outcomes over `probabilities` (renormalized).
inline std::vector<std::uint64_t> sample_multinomial(std::span<const double> probabilities,
                                                     std::uint64_t shots,
                                                     std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  if (probabilities.empty()) throw std::invalid_argument("empty probability vector");
  std::vector<double> cdf;
  double acc = 0.0;
  for (double p : probabilities) {
    if (!(p >= -kAmplitudeTol)) throw std::invalid_argument("negative probability");
    acc += std::max(p, 0.0);
    cdf.push_back(acc);
  }
  if (!(acc > 0.0)) throw std::invalid_argument("probabilities sum to zero");
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> counts(probabilities.size(), 0);
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = detail::unit_uniform(rng) * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    // Skip zero-width cells sharing the same cumulative value.
    while (it != cdf.begin() && probabilities[static_cast<std::size_t>(it - cdf.begin())] <= 0.0) {
      --it;
    }
    ++counts[static_cast<std::size_t>(it - cdf.begin())];
  }
  return counts;
}

/// Sampled joint-outcome table with `shots` total events.
inline CountTable sample_counts(const CountTable& expected, std::uint64_t shots,
                                std::uint64_t seed) {
  const std::array<double, 4> p{expected.pp, expected.pm, expected.mp, expected.mm};
  const auto c = sample_multinomial(p, shots, seed);
  return {static_cast<double>(c[0]), static_cast<double>(c[1]), static_cast<double>(c[2]),
          static_cast<double>(c[3])};
}

/// Poisson counts with mean shots * p at every grid point, then refit on
/// counts / shots. Throws ZeroProbability when every draw is empty.
struct SampledFringe {
  std::vector<std::uint64_t> counts;
  FringeScan scan;
};

inline SampledFringe sample_fringe(const FringeScan& exact, std::uint64_t shots,
                                   std::uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("shots must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> counts;
  std::vector<double> freq;
  std::uint64_t total = 0;
  for (double p : exact.probabilities) {
    const double mean = static_cast<double>(shots) * std::max(p, 0.0);
    std::uint64_t k = 0;
    if (mean > 0.0) {
      std::poisson_distribution<std::uint64_t> dist(mean);
      k = dist(rng);
    }
    counts.push_back(k);
    freq.push_back(static_cast<double>(k) / static_cast<double>(shots));
    total += k;
  }
  if (total == 0) throw ZeroProbability("no sampled counts on the grid", 0.0);
  return {counts, fit_fringe(exact.axis, exact.grid, std::move(freq))};
}

}  // namespace rsp
