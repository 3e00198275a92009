#include "htrpm/spline.hpp"

#include <stdexcept>

namespace htrpm {

SplineBasis::SplineBasis(int q) : q_(q) {
  if (q < 4) throw std::invalid_argument("SplineBasis: need Q >= 4 for a cubic basis");
  int interior = q - kDegree - 1;
  knots_.reserve(q + kDegree + 1);
  for (int i = 0; i <= kDegree; ++i) knots_.push_back(0.0);
  for (int i = 1; i <= interior; ++i) {
    knots_.push_back(static_cast<double>(i) / (interior + 1));
  }
  for (int i = 0; i <= kDegree; ++i) knots_.push_back(1.0);
}

Eigen::VectorXd SplineBasis::evaluate(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("SplineBasis::evaluate: t outside [0,1]");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(q_);

  // Knot span containing t; the last basis function owns t = 1.
  int span = q_ - 1;
  if (t < 1.0) {
    span = kDegree;
    while (span < q_ - 1 && t >= knots_[span + 1]) ++span;
  }

  // Cox-de Boor over the kDegree+1 functions with support on this span.
  double nd[kDegree + 1];
  nd[0] = 1.0;
  double left[kDegree + 1], right[kDegree + 1];
  for (int j = 1; j <= kDegree; ++j) {
    left[j] = t - knots_[span + 1 - j];
    right[j] = knots_[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      double tmp = nd[r] / (right[r + 1] + left[j - r]);
      nd[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    nd[j] = saved;
  }
  for (int j = 0; j <= kDegree; ++j) out[span - kDegree + j] = nd[j];
  return out;
}

Eigen::MatrixXd SplineBasis::design_matrix(const std::vector<double>& times) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(times.size()), q_);
  for (std::size_t m = 0; m < times.size(); ++m) {
    out.row(static_cast<Eigen::Index>(m)) = evaluate(times[m]).transpose();
  }
  return out;
}

Eigen::VectorXd SplineBasis::integral_weights() const {
  // For a degree-k B-spline, the integral over its support is
  // (t_{q+k+1} - t_q) / (k + 1).
  Eigen::VectorXd w(q_);
  for (int q = 0; q < q_; ++q) {
    w[q] = (knots_[q + kDegree + 1] - knots_[q]) / (kDegree + 1);
  }
  return w;
}

}  // namespace htrpm
