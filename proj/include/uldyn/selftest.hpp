// The property suites behind `selftest`: every module's invariants block as a
// named, seeded check.  Checks are independent and deterministically seeded
// per task, so serial and concurrent runs produce identical reports.
#pragma once

#include <cstdint>
#include <vector>

#include "uldyn/report.hpp"

namespace uldyn {

struct SelftestOptions {
  uint64_t seed = 1;
  std::vector<size_t> sizes = {2, 3, 4};  // matrix sizes for the linalg/dynamics suites
  int matrices_per_size = 5;              // planted matrices per field per size
  int vectors_per_matrix = 50;
  int lattice_trials = 25;                // tidiness perturbations per matrix
  int jobs = 1;                           // > 1 fans tasks out concurrently
  int64_t precision = 40;
  int64_t orbit_precision = 120;          // headroom for 20-step orbit checks
};

struct PropertyResult {
  std::string name;
  bool pass = false;
  long long checks = 0;   // individual assertions evaluated
  std::string detail;     // failure description or empty
};

std::vector<PropertyResult> run_selftest(const SelftestOptions& opts);

// stable-keyed report; byte-identical for equal (options, seed) regardless of jobs
Json selftest_report(const SelftestOptions& opts);

}  // namespace uldyn
