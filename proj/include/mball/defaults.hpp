#pragma once

namespace mball {

/// Acceptance thresholds shared by the CLI summaries and the acceptance suite.
struct Thresholds {
  static constexpr const char* version = "1";

  static constexpr double worst_slope_lo = 1.85;
  static constexpr double worst_slope_hi = 2.05;
  static constexpr double worst_ratio_spread = 10.0;

  static constexpr double lifted_slope_lo = 1.9;
  static constexpr double lifted_slope_hi = 2.1;
  static constexpr double lifted_vs_worst_tol = 1e-6;

  static constexpr double average_slope_max = 1.6;
  static constexpr double trace_ratio_lo = 0.2;
  static constexpr double trace_ratio_hi = 5.0;

  static constexpr double trace_identity = 1e-8;

  static constexpr double christoffel_window_l2 = 50.0;
  static constexpr double christoffel_window_l1 = 1e3;

  static constexpr double reproducing = 1e-8;
  static constexpr double reproducing_derivative = 1e-7;

  static constexpr double l1_growth_spread = 20.0;

  static constexpr double needle_nonnegative = -1e-9;
  static constexpr double needle_window = 1e3;

  static constexpr double chord_identity = 1e-12;
  static constexpr double hand_value = 1e-10;

  static constexpr double kernel_sum = 1e-7;
  static constexpr double bounded_over_n = 50.0;
  static constexpr double diagnostic_ceiling = 1e3;
};

}  // namespace mball
