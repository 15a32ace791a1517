#include "rfts/report.hpp"

#include <algorithm>

#include "rfts/defaults.hpp"

namespace rfts {

void ConditionReport::record(double margin, const std::vector<double>& x, double t,
                             const std::vector<double>& x_other) {
  ++n_samples;
  worst_margin = std::min(worst_margin, margin);
  if (margin < -tolerance) {
    ++n_violations;
    pass = false;
    if (violations.size() < static_cast<std::size_t>(defaults::kMaxReportedViolations)) {
      violations.push_back({x, x_other, t, margin});
    }
  }
}

void ConditionReport::merge(const ConditionReport& other) {
  n_samples += other.n_samples;
  worst_margin = std::min(worst_margin, other.worst_margin);
  n_violations += other.n_violations;
  pass = pass && other.pass;
  for (const auto& v : other.violations) {
    if (violations.size() >= static_cast<std::size_t>(defaults::kMaxReportedViolations)) break;
    violations.push_back(v);
  }
}

nlohmann::json to_json(const ConditionReport& report) {
  nlohmann::json j;
  j["name"] = report.name;
  j["n_samples"] = report.n_samples;
  j["worst_margin"] = report.n_samples == 0 ? 0.0 : report.worst_margin;
  j["tolerance"] = report.tolerance;
  j["n_violations"] = report.n_violations;
  j["pass"] = report.pass;
  auto& points = j["violations"] = nlohmann::json::array();
  for (const auto& v : report.violations) {
    nlohmann::json p;
    p["x"] = v.x;
    if (!v.x_other.empty()) p["x_other"] = v.x_other;
    p["t"] = v.t;
    p["margin"] = v.margin;
    points.push_back(std::move(p));
  }
  return j;
}

}  // namespace rfts
