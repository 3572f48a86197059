#pragma once

#include <functional>

#include "remse/matrix.hpp"

namespace remse {

/// Central-difference gradient of a scalar function, entry by entry:
/// (f(x + h e) - f(x - h e)) / (2h). Oracle for the analytic gradients.
/// Throws NumericError if any evaluation is non-finite, ConfigError if h <= 0.
Matrix finite_difference_grad(const std::function<double(const Matrix&)>& f, const Matrix& x,
                              double h);

/// max |a - b| / max(1, |a|, |b|) over entries; the comparison metric used
/// by every gradient check.
double max_relative_error(const Matrix& a, const Matrix& b);

}  // namespace remse
