#pragma once

#include <span>

namespace ksfrac {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares of y on x. Needs at least two distinct x values.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// fit_line on (log x, log y).
LinearFit fit_log_log(std::span<const double> x, std::span<const double> y);

}  // namespace ksfrac
