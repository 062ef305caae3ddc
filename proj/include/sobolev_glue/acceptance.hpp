#pragma once

// The acceptance suite: ten numbered end-to-end checks, each producing one
// pass/fail line.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sobolev_glue/core.hpp"
#include "sobolev_glue/cone.hpp"

namespace sobolev_glue {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;  // space-separated key=value measurements
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 0;
  std::vector<int> only;  // empty: all criteria
};

inline constexpr int kCriterionCount = 10;

std::string criterion_name(int id);
CriterionResult run_criterion(int id, std::uint64_t seed = 0);
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& options = {},
    const std::function<void(const CriterionResult&)>& on_result = {});

/// `PASS 3 fold-energy-constant max_ratio=... (1.20 s)`
std::string format_criterion_line(const CriterionResult& result);
/// `criterion_<id>_<key>=value` lines plus `passed=` and `failed=` totals.
std::string format_acceptance_report(const std::vector<CriterionResult>& results);

/// Random smooth pair on the unit square sharing the bottom trace.
std::pair<GridMap, GridMap> random_fold_pair(int n, int nu, std::uint64_t seed);

/// Random closed F and open G on [-1,1]^2 with F ∩ ∂B_1 inside G.
std::pair<SampledSet, SampledSet> random_cone_instance(int res, std::uint64_t seed);

/// theta -> (cos(k theta), sin(k theta)) on a circle grid of n nodes.
TraceMap circle_degree_trace(int n, int degree);

/// Degree-0 circle trace exp(i phi) with phi a random trigonometric polynomial of order <= 3.
TraceMap random_degree_zero_trace(int n, std::uint64_t seed);

}  // namespace sobolev_glue
