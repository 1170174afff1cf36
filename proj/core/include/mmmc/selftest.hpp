#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mmmc {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestOptions {
  std::uint64_t seed = 20160601;
  std::uint64_t toy_steps = 1000000;
  std::size_t random_pairs = 10000;
  std::size_t gradient_points = 1000;
};

/// Invariant suite: Metropolis-Hastings ratio identities, gradient checks,
/// toy stationarity, the AR(1) autocorrelation oracle, quadrature free
/// energies against closed forms and table node exactness. Independent of
/// any published numbers.
std::vector<SelftestCheck> run_selftest(const SelftestOptions& options = {});

}  // namespace mmmc
