#include "htrpm/hyperparams.hpp"

#include <stdexcept>

namespace htrpm {

std::string variant_name(ModelVariant v) {
  switch (v) {
    case ModelVariant::htRPM: return "htrpm";
    case ModelVariant::tRPM: return "trpm";
    case ModelVariant::HDP: return "hdp";
    case ModelVariant::DP: return "dp";
  }
  return "?";
}

ModelVariant variant_from_name(const std::string& name) {
  if (name == "htrpm") return ModelVariant::htRPM;
  if (name == "trpm") return ModelVariant::tRPM;
  if (name == "hdp") return ModelVariant::HDP;
  if (name == "dp") return ModelVariant::DP;
  throw std::invalid_argument("unknown model variant: " + name);
}

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  if (!m.isApprox(m.transpose(), 1e-10)) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

void Hyperparameters::validate(int d_z, int d_x) const {
  if (q < 4) throw std::invalid_argument("hyperparameters: Q must be >= 4");
  if (!(alpha > 0.0)) throw std::invalid_argument("hyperparameters: alpha must be > 0");
  if (is_hierarchical(variant) && !(alpha0 > 0.0)) {
    throw std::invalid_argument("hyperparameters: alpha0 must be > 0");
  }
  if (aux_dishes < 1) throw std::invalid_argument("hyperparameters: aux_dishes must be >= 1");
  if (!(waic_fraction > 0.0 && waic_fraction <= 1.0)) {
    throw std::invalid_argument("hyperparameters: waic_fraction must be in (0,1]");
  }
  if (sigma_theta.rows() != d_z || !is_spd(sigma_theta)) {
    throw std::invalid_argument("hyperparameters: sigma_theta must be SPD of dimension d_z");
  }
  if (has_gamma(variant)) {
    if (mu_eta.size() != d_x) {
      throw std::invalid_argument("hyperparameters: mu_eta must have dimension d_x");
    }
    if (sigma_eta.rows() != d_x || !is_spd(sigma_eta)) {
      throw std::invalid_argument("hyperparameters: sigma_eta must be SPD of dimension d_x");
    }
  }
  if (mcmc.iterations < 1 || mcmc.burnin < 0 || mcmc.burnin >= mcmc.iterations) {
    throw std::invalid_argument("hyperparameters: require 0 <= burnin < iterations");
  }
  if (mcmc.thinning < 1) throw std::invalid_argument("hyperparameters: thinning must be >= 1");
}

Hyperparameters default_hyperparameters(ModelVariant variant, int d_z, int d_x) {
  Hyperparameters h;
  h.variant = variant;
  h.sigma_theta = Eigen::MatrixXd::Identity(d_z, d_z);
  h.mu_eta = Eigen::VectorXd::Zero(d_x);
  h.sigma_eta = 5.0 * Eigen::MatrixXd::Identity(d_x, d_x);
  return h;
}

}  // namespace htrpm
