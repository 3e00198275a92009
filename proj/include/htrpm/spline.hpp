#pragma once

#include <Eigen/Dense>
#include <vector>

namespace htrpm {

// Clamped cubic B-spline basis on [0,1] with Q - 4 equally spaced interior
// knots. Immutable after construction; evaluation is re-entrant.
class SplineBasis {
 public:
  explicit SplineBasis(int q);

  int size() const { return q_; }
  const std::vector<double>& knots() const { return knots_; }

  // Basis row at t via the Cox-de Boor recursion. Nonnegative, sums to 1.
  Eigen::VectorXd evaluate(double t) const;

  Eigen::MatrixXd design_matrix(const std::vector<double>& times) const;

  // Integrals of each basis function over [0,1]; dot with coefficients to
  // get the curve's average level.
  Eigen::VectorXd integral_weights() const;

  static constexpr int kDegree = 3;

 private:
  int q_;
  std::vector<double> knots_;  // full clamped knot vector, size q + degree + 1
};

}  // namespace htrpm
