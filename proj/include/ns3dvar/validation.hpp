#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ns3dvar/spectral.hpp"

namespace ns3dvar {

/// Direct convolution-sum evaluation of B(u, u) on the retained lattice,
/// O(n^4). Independent of the FFT path; meant for small grids.
SpectralField reference_nonlinear(const SpectralField& u);

struct CheckResult {
  explicit CheckResult(std::string name = {}) : id(std::move(name)) {}

  std::string id;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Solver order, steady-state return and the exact oracle equivalences.
std::vector<CheckResult> solver_battery(std::ostream* log = nullptr);

struct AcceptanceOptions {
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  unsigned workers = 0;  // 0: hardware concurrency
  std::ostream* log = nullptr;
};

/// Solver battery plus every filter-regime, scaling and performance
/// criterion, one CheckResult per criterion in order A1..A12.
std::vector<CheckResult> acceptance_suite(const AcceptanceOptions& opts);

/// "A3 PASS  <detail>  (1.2 s)"
std::string format_check(const CheckResult& c);

/// Peak resident set size of this process in MB.
double peak_rss_mb();

}  // namespace ns3dvar
