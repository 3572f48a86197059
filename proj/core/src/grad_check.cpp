#include "remse/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "remse/error.hpp"

namespace remse {

Matrix finite_difference_grad(const std::function<double(const Matrix&)>& f, const Matrix& x,
                              double h) {
  if (!(h > 0.0)) throw ConfigError("finite_difference_grad: h must be positive");
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      const double original = probe(r, c);
      probe(r, c) = original + h;
      const double f_plus = f(probe);
      probe(r, c) = original - h;
      const double f_minus = f(probe);
      probe(r, c) = original;
      if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
        throw NumericError("finite_difference_grad: non-finite evaluation at entry (" +
                           std::to_string(r) + "," + std::to_string(c) + ")");
      }
      grad(r, c) = (f_plus - f_minus) / (2.0 * h);
    }
  }
  return grad;
}

double max_relative_error(const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("max_relative_error: shape mismatch " + shape_string(a) + " vs " +
                     shape_string(b));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a.data()[i];
    const double y = b.data()[i];
    const double scale = std::max({1.0, std::abs(x), std::abs(y)});
    worst = std::max(worst, std::abs(x - y) / scale);
  }
  return worst;
}

}  // namespace remse
