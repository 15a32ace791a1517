#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

namespace rfts {

struct Violation {
  std::vector<double> x;
  std::vector<double> x_other;  // second state for pairwise conditions
  double t = 0.0;
  double margin = 0.0;
};

// Result of a sampled inequality check. Margin > 0 means slack; the check
// passes when the worst margin is >= -tolerance.
struct ConditionReport {
  std::string name;
  std::size_t n_samples = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  std::size_t n_violations = 0;
  std::vector<Violation> violations;  // first few, see defaults::kMaxReportedViolations
  bool pass = true;

  ConditionReport() = default;
  ConditionReport(std::string n, double tol) : name(std::move(n)), tolerance(tol) {}

  void record(double margin, const std::vector<double>& x, double t,
              const std::vector<double>& x_other = {});

  // Order-insensitive merge of two reports over disjoint samples.
  void merge(const ConditionReport& other);
};

nlohmann::json to_json(const ConditionReport& report);

}  // namespace rfts
