#pragma once

#include <stdexcept>
#include <string>

namespace rsp {

// Conditioning event with no support: a herald, projection or POVM outcome
// whose probability falls below kZeroProbability.
class ZeroProbability : public std::runtime_error {
 public:
  ZeroProbability(const std::string& what, double probability)
      : std::runtime_error(what), probability_(probability) {}

  double probability() const noexcept { return probability_; }

 private:
  double probability_;
};

// A state handed to a qubit-subspace observable has population outside the
// declared 2x2 subspace.
class SubspaceLeak : public std::runtime_error {
 public:
  SubspaceLeak(const std::string& what, double leaked)
      : std::runtime_error(what), leaked_(leaked) {}

  double leaked() const noexcept { return leaked_; }

 private:
  double leaked_;
};

inline constexpr double kZeroProbability = 1e-15;

}  // namespace rsp
