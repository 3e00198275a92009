#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace htrpm {

enum class ModelVariant { htRPM, tRPM, HDP, DP };

// Variants with temporal fixed/flexible flags (gamma and eta machinery).
inline bool has_gamma(ModelVariant v) {
  return v == ModelVariant::htRPM || v == ModelVariant::tRPM;
}

// Variants sharing dishes across periods through the global level.
inline bool is_hierarchical(ModelVariant v) {
  return v == ModelVariant::htRPM || v == ModelVariant::HDP;
}

std::string variant_name(ModelVariant v);
ModelVariant variant_from_name(const std::string& name);  // throws on unknown

struct McmcControls {
  int iterations = 5000;
  int burnin = 3000;
  int thinning = 10;
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // sweeps; 0 disables

  int retained() const { return (iterations - burnin) / thinning; }
};

struct Hyperparameters {
  ModelVariant variant = ModelVariant::htRPM;
  int q = 10;           // spline basis dimension
  double alpha = 0.1;   // within-period DP concentration
  double alpha0 = 1.0;  // global DP concentration (hierarchical variants)
  Eigen::MatrixXd sigma_theta;  // d_z x d_z
  Eigen::VectorXd mu_eta;       // d_x
  Eigen::MatrixXd sigma_eta;    // d_x x d_x
  int aux_dishes = 3;           // auxiliary fresh dishes per reallocation draw
  double waic_fraction = 0.10;
  McmcControls mcmc;

  // Throws std::invalid_argument on any violated constraint (Q < 4,
  // nonpositive concentrations, non-SPD covariances, bad MCMC controls).
  void validate(int d_z, int d_x) const;
};

// Simulation-study defaults: alpha = 0.1, alpha0 = 1, Sigma_theta = I,
// mu_eta = 0, Sigma_eta = 5I, Q = 10, WAIC fraction 0.10.
Hyperparameters default_hyperparameters(ModelVariant variant, int d_z, int d_x);

bool is_spd(const Eigen::MatrixXd& m);

}  // namespace htrpm
