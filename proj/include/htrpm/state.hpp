#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "htrpm/hyperparams.hpp"

namespace htrpm {

// Sampled quantities attached to one global dish.
struct DishParams {
  Eigen::VectorXd beta;       // Q spline coefficients
  double tau2 = 1.0;          // global horseshoe scale (squared)
  double nu_tau = 1.0;
  Eigen::VectorXd lambda2;    // local scales (squared)
  Eigen::VectorXd nu_lambda;
};

// One retained MCMC draw. Dish labels are canonicalized by order of first
// appearance scanning (period, participant) lexicographically.
struct Draw {
  int iteration = 0;
  std::vector<int> dish;                 // N*J, layout i * J + j
  std::vector<unsigned char> gamma;      // N*J, period 0 entries unused
  std::vector<Eigen::VectorXd> beta;     // per canonical dish label
  Eigen::MatrixXd theta;                 // d_z x J
  Eigen::MatrixXd eta;                   // d_x x J, column 0 unused
  std::vector<double> loglik;            // per-cell log P(Y_ij | draw), i * J + j
  int n_dishes = 0;
};

struct ChainArchive {
  int n_participants = 0;
  int n_periods = 0;
  int q = 0;
  int d_z = 0;
  int d_x = 0;
  ModelVariant variant = ModelVariant::htRPM;
  std::uint64_t seed = 0;
  std::string fingerprint;
  int iterations = 0, burnin = 0, thinning = 0;
  std::vector<Draw> draws;

  // Global partition of the N*J cells for one draw (canonical labels).
  const std::vector<int>& global_labels(int s) const { return draws[s].dish; }

  // Within-period partition of the N participants for one draw.
  std::vector<int> period_labels(int s, int j) const {
    std::vector<int> out(n_participants);
    for (int i = 0; i < n_participants; ++i) out[i] = draws[s].dish[i * n_periods + j];
    return out;
  }
};

}  // namespace htrpm
