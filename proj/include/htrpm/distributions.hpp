#pragma once

#include <Eigen/Dense>
#include <vector>

#include "htrpm/rng.hpp"

namespace htrpm {

// Exact draw from the Polya-Gamma distribution PG(1, z) via the alternating
// series rejection sampler of Polson, Scott & Windle (2013). E[PG(1,z)] =
// tanh(z/2)/(2z); the distribution is symmetric in z.
double sample_pg1(double z, RngStream& rng);

double sample_gamma(double shape, RngStream& rng);

// Density proportional to x^{-shape-1} exp(-scale/x).
double sample_inverse_gamma(double shape, double scale, RngStream& rng);

// Draw from N(mean, covariance) via Cholesky. Throws on non-SPD input.
Eigen::VectorXd sample_mvn_cov(const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& covariance, RngStream& rng);

// Draw from N(precision^{-1} linear, precision^{-1}) without forming the
// inverse. Throws on non-SPD precision.
Eigen::VectorXd sample_mvn_precision(const Eigen::MatrixXd& precision,
                                     const Eigen::VectorXd& linear, RngStream& rng);

// Index draw with probability softmax(log_weights); stabilized by max
// subtraction. -inf entries carry zero mass; throws if all are -inf.
int sample_categorical_log(const std::vector<double>& log_weights, RngStream& rng);

}  // namespace htrpm
