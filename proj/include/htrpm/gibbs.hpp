#pragma once

#include <Eigen/Dense>
#include <functional>
#include <nlohmann/json_fwd.hpp>
#include <vector>

#include "htrpm/crf.hpp"
#include "htrpm/dataset.hpp"
#include "htrpm/hyperparams.hpp"
#include "htrpm/rng.hpp"
#include "htrpm/spline.hpp"
#include "htrpm/state.hpp"

namespace htrpm {

// Full Gibbs sampler: gamma updates, constrained CRF cluster reassignment,
// Polya-Gamma augmented Gaussian updates for beta*/theta/eta, horseshoe
// hyperparameter updates. One sampler instance runs one chain.
class GibbsSampler {
 public:
  GibbsSampler(PanelDataset data, Hyperparameters hyper);

  // beta = 0, every participant in one cluster (one per period for
  // non-hierarchical variants), gamma = 0, theta = eta = 0.
  void init();

  void sweep();

  // Runs remaining sweeps, recording retained draws. checkpoint_cb, when
  // set, fires after every mcmc.checkpoint_every-th sweep.
  using CheckpointCallback = std::function<void(const GibbsSampler&, int iteration)>;
  ChainArchive run(const CheckpointCallback& checkpoint_cb = nullptr);

  // Individual conditional updates (exposed for testing). Period indices are
  // 0-based; gamma/eta updates require j >= 1.
  void update_gamma(int i, int j);
  void update_cluster(int i, int j);
  void update_beta_star(int dish);
  void update_horseshoe(int dish);
  void update_theta(int j);
  void update_eta(int j);

  // Bernoulli-logit log-likelihood of cell (i,j) under spline coefficients
  // `beta` and the current theta.
  double cell_loglik(int i, int j, const Eigen::VectorXd& beta) const;

  // Compatibility of the reduced partitions across every transition under
  // the current gamma flags.
  bool check_compatibility() const;

  // True if some dish occupies more than one period (hierarchical sharing).
  bool has_cross_period_dish() const;

  Draw record_draw(int iteration) const;

  nlohmann::json snapshot() const;  // state + rng + retained draws, versioned
  void restore(const nlohmann::json& snap);

  const CrfState& crf() const { return crf_; }
  CrfState& crf() { return crf_; }
  const DishParams& dish_params(int dish) const { return dishes_[dish]; }
  DishParams& dish_params(int dish) { return dishes_[dish]; }
  // Installs parameters for a (possibly freshly minted) dish id.
  void store_dish(int id, DishParams params);
  unsigned char gamma(int i, int j) const { return gamma_[i * n_periods_ + j]; }
  void set_gamma(int i, int j, unsigned char g) { gamma_[i * n_periods_ + j] = g; }
  const Eigen::MatrixXd& theta() const { return theta_; }
  Eigen::MatrixXd& theta() { return theta_; }
  const Eigen::MatrixXd& eta() const { return eta_; }
  Eigen::MatrixXd& eta() { return eta_; }
  RngStream& rng() { return rng_; }
  const PanelDataset& data() const { return data_; }
  const Hyperparameters& hyper() const { return hyper_; }
  const SplineBasis& basis() const { return basis_; }
  int completed_sweeps() const { return completed_sweeps_; }
  long clamp_count() const { return clamp_count_; }

  DishParams draw_prior_dish();

  static constexpr double kPsiClamp = 35.0;
  static constexpr int kSnapshotVersion = 1;

 private:
  double clamp_psi(double psi) const;
  Eigen::ArrayXd cell_psi(int i, int j, const Eigen::VectorXd& beta) const;
  double transition_prob(int i, int j) const;  // phi_ij = logistic(X_ij eta_j)
  int last_occupied_period(int dish) const;

  PanelDataset data_;
  Hyperparameters hyper_;
  SplineBasis basis_;
  int n_participants_, n_periods_;

  std::vector<Eigen::MatrixXd> design_;  // per cell, M x Q
  std::vector<Eigen::ArrayXd> y_;        // per cell, outcomes as doubles

  CrfState crf_;
  std::vector<DishParams> dishes_;       // indexed by dish id; stale slots ignored
  std::vector<unsigned char> gamma_;     // N*J, period 0 unused
  Eigen::MatrixXd theta_;                // d_z x J
  Eigen::MatrixXd eta_;                  // d_x x J, column 0 unused
  Eigen::MatrixXd sigma_theta_inv_;
  Eigen::MatrixXd sigma_eta_inv_;
  Eigen::VectorXd eta_prior_linear_;     // sigma_eta^{-1} mu_eta

  RngStream rng_;
  int completed_sweeps_ = 0;
  mutable long clamp_count_ = 0;
  std::vector<Draw> retained_;
};

}  // namespace htrpm
