#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lsbound {

struct VerifyCheck {
  std::string name;
  bool pass = false;
  bool informational = false;  // reported, never gates the exit code
  double lhs = 0.0;
  double rhs = 0.0;
  double diff = 0.0;
  double tol = 0.0;
  std::string details;
};

// The identity suite: Herbst equality, Gaussian/Rademacher LSI, entropy
// decomposition, Gaussian-integral cross-check and the balance statistic.
std::vector<VerifyCheck> run_verify_suite(std::uint64_t seed, std::size_t n);

}  // namespace lsbound
