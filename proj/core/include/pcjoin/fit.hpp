#pragma once

#include <span>

namespace pcj {

/// Least-squares fit of log y = intercept + exponent · log x.
struct PowerFit {
  double exponent = 0;
  double intercept = 0;
  double residual = 0;  // root mean square in log space
};

/// Needs at least two points with distinct positive x; y must be positive.
PowerFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace pcj
