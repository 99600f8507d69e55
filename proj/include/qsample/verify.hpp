#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qsample/kernels.hpp"

namespace qsample {

/// One named check: passed iff measured <= tolerance (and measured is finite).
/// Yes/no properties report the number of violations against a tolerance of 0.
struct Invariant {
  std::string suite;
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

struct VerifyConfig {
  KernelSpec spec = Sinc1D{3.14159265358979323846, 1.0};
  /// Nodes per axis of the main grid; 0 picks 64 in 1D and 24 in 2D.
  std::size_t nodes = 0;
  std::uint64_t seed = 1;
  double retention_floor = 1e-12;
  /// Random signals in the concentration suite.
  std::size_t trials = 1000;
  /// Planted normal matrices in the spectral suite.
  std::size_t spectral_trials = 50;
  /// Replaces the default tolerance of the named invariant.
  std::map<std::string, double> tolerance_overrides;
};

struct VerifyReport {
  VerifyConfig config;
  std::size_t nodes = 0;
  std::vector<Invariant> invariants;
  /// Suites not run, with the reason.
  std::vector<std::pair<std::string, std::string>> skipped;

  bool passed() const;
  const Invariant* find(const std::string& name) const;
  /// Deterministic JSON: no timings, doubles printed to round-trip.
  std::string to_json() const;
};

struct ToleranceInfo {
  std::string name;
  double value;
  std::string description;
};

/// Every overridable tolerance with its default.
const std::vector<ToleranceInfo>& default_tolerances();

/// Runs the suites algebra, spectral, admissibility, eigensystem (plus tensor
/// cross-validation for QftSeparable2D), expansion, sampling (built-in
/// kernels only) and concentration. A failed admissibility check skips
/// everything after it. Throws std::invalid_argument for an unknown
/// tolerance name or an invalid configuration.
VerifyReport run_verify(const VerifyConfig& cfg);

}  // namespace qsample
