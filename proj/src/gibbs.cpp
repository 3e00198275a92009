#include "htrpm/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "htrpm/distributions.hpp"
#include "htrpm/partition.hpp"
#include "htrpm/serialize.hpp"

namespace htrpm {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

GibbsSampler::GibbsSampler(PanelDataset data, Hyperparameters hyper)
    : data_(std::move(data)),
      hyper_(std::move(hyper)),
      basis_(hyper_.q),
      n_participants_(data_.n_participants),
      n_periods_(data_.n_periods),
      crf_(data_.n_participants, data_.n_periods, is_hierarchical(hyper_.variant),
           hyper_.alpha, hyper_.alpha0),
      rng_(hyper_.mcmc.seed) {
  hyper_.validate(data_.d_z(), data_.d_x());
  if (has_gamma(hyper_.variant) && !data_.has_x()) {
    throw std::invalid_argument("gibbs: variant needs transition covariates X");
  }
  design_.reserve(data_.cells.size());
  y_.reserve(data_.cells.size());
  for (const auto& c : data_.cells) {
    design_.push_back(basis_.design_matrix(c.times));
    Eigen::ArrayXd y(c.size());
    for (int m = 0; m < c.size(); ++m) y[m] = static_cast<double>(c.y[m]);
    y_.push_back(std::move(y));
  }
  sigma_theta_inv_ = hyper_.sigma_theta.llt().solve(
      Eigen::MatrixXd::Identity(data_.d_z(), data_.d_z()));
  if (has_gamma(hyper_.variant)) {
    sigma_eta_inv_ = hyper_.sigma_eta.llt().solve(
        Eigen::MatrixXd::Identity(data_.d_x(), data_.d_x()));
    eta_prior_linear_ = sigma_eta_inv_ * hyper_.mu_eta;
  }
  init();
}

void GibbsSampler::store_dish(int id, DishParams params) {
  if (id >= static_cast<int>(dishes_.size())) dishes_.resize(id + 1);
  dishes_[id] = std::move(params);
}

void GibbsSampler::init() {
  crf_ = CrfState(n_participants_, n_periods_, is_hierarchical(hyper_.variant),
                  hyper_.alpha, hyper_.alpha0);
  dishes_.clear();
  gamma_.assign(static_cast<std::size_t>(n_participants_) * n_periods_, 0);
  theta_ = Eigen::MatrixXd::Zero(data_.d_z(), n_periods_);
  eta_ = Eigen::MatrixXd::Zero(data_.d_x(), n_periods_);
  completed_sweeps_ = 0;
  clamp_count_ = 0;
  retained_.clear();

  auto null_dish = [this]() {
    DishParams d;
    d.beta = Eigen::VectorXd::Zero(hyper_.q);
    d.lambda2 = Eigen::VectorXd::Ones(hyper_.q);
    d.nu_lambda = Eigen::VectorXd::Ones(hyper_.q);
    return d;
  };
  if (is_hierarchical(hyper_.variant)) {
    int id = crf_.mint_dish();
    store_dish(id, null_dish());
    for (int i = 0; i < n_participants_; ++i) {
      for (int j = 0; j < n_periods_; ++j) crf_.assign(i, j, id);
    }
  } else {
    for (int j = 0; j < n_periods_; ++j) {
      int id = crf_.mint_dish();
      store_dish(id, null_dish());
      for (int i = 0; i < n_participants_; ++i) crf_.assign(i, j, id);
    }
  }
}

double GibbsSampler::clamp_psi(double psi) const {
  if (psi > kPsiClamp) {
    ++clamp_count_;
    return kPsiClamp;
  }
  if (psi < -kPsiClamp) {
    ++clamp_count_;
    return -kPsiClamp;
  }
  return psi;
}

Eigen::ArrayXd GibbsSampler::cell_psi(int i, int j, const Eigen::VectorXd& beta) const {
  int c = i * n_periods_ + j;
  double offset = data_.cells[c].z.dot(theta_.col(j));
  Eigen::ArrayXd psi = (design_[c] * beta).array() + offset;
  for (Eigen::Index m = 0; m < psi.size(); ++m) psi[m] = clamp_psi(psi[m]);
  return psi;
}

double GibbsSampler::cell_loglik(int i, int j, const Eigen::VectorXd& beta) const {
  int c = i * n_periods_ + j;
  if (data_.cells[c].size() == 0) return 0.0;
  Eigen::ArrayXd psi = cell_psi(i, j, beta);
  double ll = 0.0;
  for (Eigen::Index m = 0; m < psi.size(); ++m) {
    ll += y_[c][m] * psi[m] - softplus(psi[m]);
  }
  return ll;
}

double GibbsSampler::transition_prob(int i, int j) const {
  double psi = clamp_psi(data_.cell(i, j).x.dot(eta_.col(j)));
  return logistic(psi);
}

DishParams GibbsSampler::draw_prior_dish() {
  DishParams d;
  int q = hyper_.q;
  d.nu_tau = sample_inverse_gamma(0.5, 1.0, rng_);
  d.tau2 = sample_inverse_gamma(0.5, 1.0 / d.nu_tau, rng_);
  d.nu_lambda.resize(q);
  d.lambda2.resize(q);
  d.beta.resize(q);
  for (int k = 0; k < q; ++k) {
    d.nu_lambda[k] = sample_inverse_gamma(0.5, 1.0, rng_);
    d.lambda2[k] = sample_inverse_gamma(0.5, 1.0 / d.nu_lambda[k], rng_);
    d.beta[k] = std::sqrt(d.tau2 * d.lambda2[k]) * rng_.normal();
  }
  return d;
}

void GibbsSampler::update_gamma(int i, int j) {
  if (j < 1) throw std::invalid_argument("update_gamma: gamma undefined at the first period");

  // Fixing i is admissible iff i sits with the same fixed peers before and
  // after the transition.
  bool compatible = true;
  for (int k = 0; k < n_participants_ && compatible; ++k) {
    if (k == i || gamma_[k * n_periods_ + j] == 0) continue;
    bool together_prev = crf_.dish_of(k, j - 1) == crf_.dish_of(i, j - 1);
    bool together_curr = crf_.dish_of(k, j) == crf_.dish_of(i, j);
    compatible = together_prev == together_curr;
  }
  double phi = transition_prob(i, j);
  double w1 = compatible ? phi : 0.0;

  auto removal = crf_.remove(i, j);
  double mass = crf_.predictive_prob(j, removal.dish_freed ? -1 : removal.dish);
  if (removal.dish_freed) {
    int id = crf_.mint_dish();  // LIFO free list returns the same id
    crf_.assign(i, j, id);
  } else {
    crf_.assign(i, j, removal.dish);
  }
  double w0 = (1.0 - phi) * mass;

  double total = w0 + w1;
  unsigned char g = 0;
  if (total > 0.0) g = rng_.uniform() * total < w1 ? 1 : 0;
  gamma_[i * n_periods_ + j] = g;
}

void GibbsSampler::update_cluster(int i, int j) {
  bool gamma_on = has_gamma(hyper_.variant);
  if (gamma_on && j >= 1 && gamma_[i * n_periods_ + j] == 1) return;  // fixed

  auto removal = crf_.remove(i, j);
  int n_aux = hyper_.aux_dishes;
  std::vector<CrfState::Candidate> candidates = crf_.predictive_logweights(j, n_aux);

  // Auxiliary dish parameters; a freed singleton keeps its current values as
  // the first auxiliary (Neal's algorithm 8).
  std::vector<DishParams> aux(n_aux);
  for (int a = 0; a < n_aux; ++a) {
    if (a == 0 && removal.dish_freed) {
      aux[a] = dishes_[removal.dish];
    } else {
      aux[a] = draw_prior_dish();
    }
  }

  // Looking ahead: if i is fixed into period j+1, its move here must keep the
  // reduced partitions at that transition equal.
  if (gamma_on && j + 1 < n_periods_ && gamma_[i * n_periods_ + j + 1] == 1) {
    int required = -2;
    std::vector<int> forbidden;
    for (int k = 0; k < n_participants_; ++k) {
      if (k == i || gamma_[k * n_periods_ + j + 1] == 0) continue;
      if (crf_.dish_of(k, j + 1) == crf_.dish_of(i, j + 1)) {
        required = crf_.dish_of(k, j);  // fixed peers share one period-j dish
      } else {
        forbidden.push_back(crf_.dish_of(k, j));
      }
    }
    if (required != -2) {
      crf_.assign(i, j, required);
      return;
    }
    std::erase_if(candidates, [&](const CrfState::Candidate& c) {
      return c.dish >= 0 &&
             std::find(forbidden.begin(), forbidden.end(), c.dish) != forbidden.end();
    });
  }

  std::vector<double> log_weights;
  log_weights.reserve(candidates.size());
  int aux_seen = 0;
  for (auto& c : candidates) {
    const Eigen::VectorXd& beta =
        c.dish >= 0 ? dishes_[c.dish].beta : aux[aux_seen++].beta;
    log_weights.push_back(c.log_weight + cell_loglik(i, j, beta));
  }

  int pick = sample_categorical_log(log_weights, rng_);
  if (candidates[pick].dish >= 0) {
    crf_.assign(i, j, candidates[pick].dish);
  } else {
    int a = 0;
    for (int k = 0; k < pick; ++k) a += candidates[k].dish < 0;
    int id = crf_.mint_dish();
    store_dish(id, std::move(aux[a]));
    crf_.assign(i, j, id);
  }
}

void GibbsSampler::update_beta_star(int dish) {
  if (crf_.global_table_count(dish) == 0) {
    throw std::logic_error("update_beta_star: dish has no members");
  }
  DishParams& d = dishes_[dish];
  int q = hyper_.q;
  Eigen::MatrixXd precision =
      (1.0 / (d.tau2 * d.lambda2.array())).matrix().asDiagonal();
  Eigen::VectorXd linear = Eigen::VectorXd::Zero(q);

  for (int i = 0; i < n_participants_; ++i) {
    for (int j = 0; j < n_periods_; ++j) {
      if (crf_.dish_of(i, j) != dish) continue;
      int c = i * n_periods_ + j;
      if (data_.cells[c].size() == 0) continue;
      double offset = data_.cells[c].z.dot(theta_.col(j));
      Eigen::ArrayXd psi = cell_psi(i, j, d.beta);
      Eigen::ArrayXd omega(psi.size());
      for (Eigen::Index m = 0; m < psi.size(); ++m) omega[m] = sample_pg1(psi[m], rng_);
      Eigen::ArrayXd kappa = (y_[c] - 0.5) - omega * offset;
      precision.noalias() +=
          design_[c].transpose() * omega.matrix().asDiagonal() * design_[c];
      linear.noalias() += design_[c].transpose() * kappa.matrix();
    }
  }
  d.beta = sample_mvn_precision(precision, linear, rng_);
}

void GibbsSampler::update_horseshoe(int dish) {
  DishParams& d = dishes_[dish];
  int q = hyper_.q;
  for (int k = 0; k < q; ++k) {
    double b2 = d.beta[k] * d.beta[k];
    d.lambda2[k] =
        sample_inverse_gamma(1.0, 1.0 / d.nu_lambda[k] + b2 / (2.0 * d.tau2), rng_);
  }
  double scale = 1.0 / d.nu_tau;
  for (int k = 0; k < q; ++k) scale += 0.5 * d.beta[k] * d.beta[k] / d.lambda2[k];
  d.tau2 = sample_inverse_gamma(0.5 * (q + 1), scale, rng_);
  for (int k = 0; k < q; ++k) {
    d.nu_lambda[k] = sample_inverse_gamma(1.0, 1.0 + 1.0 / d.lambda2[k], rng_);
  }
  d.nu_tau = sample_inverse_gamma(1.0, 1.0 + 1.0 / d.tau2, rng_);
}

void GibbsSampler::update_theta(int j) {
  int dz = data_.d_z();
  Eigen::MatrixXd precision = sigma_theta_inv_;
  Eigen::VectorXd linear = Eigen::VectorXd::Zero(dz);
  for (int i = 0; i < n_participants_; ++i) {
    int c = i * n_periods_ + j;
    if (data_.cells[c].size() == 0) continue;
    const Eigen::VectorXd& z = data_.cells[c].z;
    const Eigen::VectorXd& beta = dishes_[crf_.dish_of(i, j)].beta;
    Eigen::ArrayXd spline_part = (design_[c] * beta).array();
    Eigen::ArrayXd psi = cell_psi(i, j, beta);
    double omega_sum = 0.0, kappa_sum = 0.0;
    for (Eigen::Index m = 0; m < psi.size(); ++m) {
      double omega = sample_pg1(psi[m], rng_);
      omega_sum += omega;
      kappa_sum += (y_[c][m] - 0.5) - omega * spline_part[m];
    }
    precision.noalias() += omega_sum * z * z.transpose();
    linear.noalias() += kappa_sum * z;
  }
  theta_.col(j) = sample_mvn_precision(precision, linear, rng_);
}

void GibbsSampler::update_eta(int j) {
  if (j < 1) throw std::invalid_argument("update_eta: eta undefined at the first period");
  int dx = data_.d_x();
  Eigen::MatrixXd precision = sigma_eta_inv_;
  Eigen::VectorXd linear = eta_prior_linear_;
  for (int i = 0; i < n_participants_; ++i) {
    const Eigen::VectorXd& x = data_.cell(i, j).x;
    double psi = clamp_psi(x.dot(eta_.col(j)));
    double omega = sample_pg1(psi, rng_);
    precision.noalias() += omega * x * x.transpose();
    linear.noalias() += (gamma_[i * n_periods_ + j] - 0.5) * x;
  }
  eta_.col(j) = sample_mvn_precision(precision, linear, rng_);
}

int GibbsSampler::last_occupied_period(int dish) const {
  for (int j = n_periods_ - 1; j >= 0; --j) {
    if (crf_.period_count(j, dish) > 0) return j;
  }
  return -1;
}

void GibbsSampler::sweep() {
  bool gamma_on = has_gamma(hyper_.variant);
  for (int j = 0; j < n_periods_; ++j) {
    if (gamma_on && j >= 1) {
      for (int i = 0; i < n_participants_; ++i) update_gamma(i, j);
    }
    for (int i = 0; i < n_participants_; ++i) update_cluster(i, j);
    // Each dish is refreshed once per sweep, at the last period it occupies;
    // the full conditional always pools all of the dish's observations.
    for (int d : crf_.active_dishes()) {
      if (crf_.period_count(j, d) > 0 && last_occupied_period(d) == j) {
        update_beta_star(d);
        update_horseshoe(d);
      }
    }
    update_theta(j);
    if (gamma_on && j >= 1) update_eta(j);
  }
  ++completed_sweeps_;
}

Draw GibbsSampler::record_draw(int iteration) const {
  Draw d;
  d.iteration = iteration;
  d.dish.assign(static_cast<std::size_t>(n_participants_) * n_periods_, -1);
  std::vector<int> canonical(dishes_.size(), -1);
  int next = 0;
  for (int j = 0; j < n_periods_; ++j) {  // (period, participant) scan order
    for (int i = 0; i < n_participants_; ++i) {
      int id = crf_.dish_of(i, j);
      if (canonical[id] < 0) canonical[id] = next++;
      d.dish[i * n_periods_ + j] = canonical[id];
    }
  }
  d.n_dishes = next;
  d.beta.resize(next);
  for (std::size_t id = 0; id < canonical.size(); ++id) {
    if (canonical[id] >= 0) d.beta[canonical[id]] = dishes_[id].beta;
  }
  d.gamma = gamma_;
  d.theta = theta_;
  d.eta = eta_;

  // The overall level of the dish curves is not identified against the
  // period intercepts theta_j0 (shifting every curve by c and every
  // intercept by -c leaves all likelihoods unchanged). Recorded draws adopt
  // the random-effects convention: curves carry no average level, the
  // intercepts carry it. Per-period for unshared dish menus, global when a
  // dish can span periods. Sampler state is left untouched.
  Eigen::VectorXd w = basis_.integral_weights();
  if (is_hierarchical(hyper_.variant)) {
    double level = 0.0;
    for (int lab : d.dish) level += w.dot(d.beta[lab]);
    level /= static_cast<double>(d.dish.size());
    for (auto& beta : d.beta) beta.array() -= level;
    d.theta.row(0).array() += level;
  } else {
    for (int j = 0; j < n_periods_; ++j) {
      double level = 0.0;
      for (int i = 0; i < n_participants_; ++i) {
        level += w.dot(d.beta[d.dish[i * n_periods_ + j]]);
      }
      level /= static_cast<double>(n_participants_);
      // dish menus are per-period here, so each dish belongs to exactly one
      // period; shift each once
      std::vector<char> seen(d.beta.size(), 0);
      for (int i = 0; i < n_participants_; ++i) {
        int lab = d.dish[i * n_periods_ + j];
        if (!seen[lab]) {
          d.beta[lab].array() -= level;
          seen[lab] = 1;
        }
      }
      d.theta(0, j) += level;
    }
  }
  d.loglik.resize(static_cast<std::size_t>(n_participants_) * n_periods_);
  for (int i = 0; i < n_participants_; ++i) {
    for (int j = 0; j < n_periods_; ++j) {
      d.loglik[i * n_periods_ + j] =
          cell_loglik(i, j, dishes_[crf_.dish_of(i, j)].beta);
    }
  }
  return d;
}

ChainArchive GibbsSampler::run(const CheckpointCallback& checkpoint_cb) {
  const McmcControls& mc = hyper_.mcmc;
  for (int iter = completed_sweeps_ + 1; iter <= mc.iterations; ++iter) {
    sweep();
    if (iter > mc.burnin && (iter - mc.burnin) % mc.thinning == 0) {
      retained_.push_back(record_draw(iter));
    }
    if (checkpoint_cb && mc.checkpoint_every > 0 && iter % mc.checkpoint_every == 0 &&
        iter < mc.iterations) {
      checkpoint_cb(*this, iter);
    }
  }
  ChainArchive archive;
  archive.n_participants = n_participants_;
  archive.n_periods = n_periods_;
  archive.q = hyper_.q;
  archive.d_z = data_.d_z();
  archive.d_x = data_.d_x();
  archive.variant = hyper_.variant;
  archive.seed = mc.seed;
  archive.iterations = mc.iterations;
  archive.burnin = mc.burnin;
  archive.thinning = mc.thinning;
  archive.draws = retained_;
  return archive;
}

bool GibbsSampler::check_compatibility() const {
  for (int j = 1; j < n_periods_; ++j) {
    std::vector<int> fixed;
    for (int i = 0; i < n_participants_; ++i) {
      if (gamma_[i * n_periods_ + j] == 1) fixed.push_back(i);
    }
    if (!is_compatible(crf_.period_labels(j - 1), crf_.period_labels(j), fixed)) {
      return false;
    }
  }
  return true;
}

bool GibbsSampler::has_cross_period_dish() const {
  for (int d : crf_.active_dishes()) {
    int periods = 0;
    for (int j = 0; j < n_periods_; ++j) periods += crf_.period_count(j, d) > 0;
    if (periods > 1) return true;
  }
  return false;
}

nlohmann::json GibbsSampler::snapshot() const {
  using nlohmann::json;
  json dishes = json::object();
  for (int id : crf_.active_dishes()) dishes[std::to_string(id)] = to_json(dishes_[id]);
  json draws = json::array();
  for (const auto& d : retained_) draws.push_back(to_json(d));
  return json{{"version", kSnapshotVersion},
              {"completed_sweeps", completed_sweeps_},
              {"rng_key", rng_.key()},
              {"rng_counter", rng_.counter()},
              {"assignments", crf_.assignments()},
              {"free_list", crf_.free_list()},
              {"next_id", crf_.next_id()},
              {"dishes", std::move(dishes)},
              {"gamma", gamma_},
              {"theta", to_json(theta_)},
              {"eta", to_json(eta_)},
              {"clamp_count", clamp_count_},
              {"draws", std::move(draws)}};
}

void GibbsSampler::restore(const nlohmann::json& snap) {
  if (snap.at("version").get<int>() != kSnapshotVersion) {
    throw std::runtime_error("snapshot version mismatch");
  }
  completed_sweeps_ = snap.at("completed_sweeps").get<int>();
  rng_ = RngStream::restore(snap.at("rng_key").get<std::uint64_t>(),
                            snap.at("rng_counter").get<std::uint64_t>());
  crf_.restore(snap.at("assignments").get<std::vector<int>>(),
               snap.at("free_list").get<std::vector<int>>(),
               snap.at("next_id").get<int>());
  dishes_.clear();
  for (const auto& [key, value] : snap.at("dishes").items()) {
    store_dish(std::stoi(key), dish_from_json(value));
  }
  gamma_ = snap.at("gamma").get<std::vector<unsigned char>>();
  theta_ = matrix_from_json(snap.at("theta"));
  eta_ = matrix_from_json(snap.at("eta"));
  clamp_count_ = snap.at("clamp_count").get<long>();
  retained_.clear();
  for (const auto& d : snap.at("draws")) retained_.push_back(draw_from_json(d));
}

}  // namespace htrpm
