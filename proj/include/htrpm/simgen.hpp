#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "htrpm/dataset.hpp"

namespace htrpm {

// Ground truth attached to a simulated dataset.
struct ScenarioTruth {
  int scenario = 1;
  double mu_eta = 0.0;
  std::vector<int> cluster;                  // N*J, 0-based function index
  std::vector<std::vector<double>> smooth;   // per cell, values at the cell's times
  std::vector<unsigned char> gamma;          // N*J, scenario 2 only, period 0 unused
  Eigen::MatrixXd theta;                     // d_z x J
  Eigen::MatrixXd eta;                       // d_x x J, scenario 2 only, column 0 unused
};

// The six functional trends: f1 = 4 sin(3t) - 2, f2 = -3 sin(3t) + 1.5,
// f3 = 3 cos(3t) - 0.5, f4 = -3 cos(3t) + 0.5, f5 = 3t, f6 = 3(t-1)^2 - 1.
double library_function(int k, double t);

// Independent clusters between periods: N=50, J=5, M=30, t ~ U(0,1),
// functions uniform over f1..f4, two standard-normal baseline covariates
// plus intercept, theta_j = (0.5, -0.5, 0.3), intercept-only transition
// covariate.
std::pair<PanelDataset, ScenarioTruth> generate_scenario1(std::uint64_t seed);

// Temporally dependent clusters: initial clusters f1/f2, per-period
// transition coefficients with fixed-participant fraction targeting
// logistic(mu_eta), flexible participants reallocated by cluster size or
// concentration, new clusters drawn from f1..f6.
std::pair<PanelDataset, ScenarioTruth> generate_scenario2(std::uint64_t seed,
                                                          double mu_eta);

// Intercept location solving E[logistic(c + noise)] = logistic(mu_eta) for
// the scenario-2 transition design (deterministic quadrature + bisection).
double scenario2_calibrated_intercept(double mu_eta);

}  // namespace htrpm
