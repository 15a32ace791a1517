#pragma once

// Central table of default thresholds. Documented in README.md.

namespace rfts::defaults {

inline constexpr double kStep = 1e-3;
inline constexpr double kEpsSettle = 1e-4;
inline constexpr double kEpsAbsorb = 1e-6;
inline constexpr double kBlowupThreshold = 1e12;

inline constexpr double kSettledFraction = 0.99;
inline constexpr double kIdentityTol = 1e-9;
inline constexpr double kInequalityTol = 1e-6;

inline constexpr double kConfidenceZ = 1.959963984540054;  // two-sided 95%

// Divergence verdict for the Osgood integrals: min increment / max increment.
inline constexpr double kDivergenceRatio = 0.05;

inline constexpr double kThetaInverseRelTol = 1e-10;
inline constexpr double kThetaInverseMax = 1e12;

// Violations kept in a ConditionReport (the count is always exact).
inline constexpr int kMaxReportedViolations = 32;

}  // namespace rfts::defaults
