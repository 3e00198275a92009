#include "htrpm/simgen.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "htrpm/rng.hpp"

namespace htrpm {

namespace {

constexpr int kParticipants = 50;
constexpr int kPeriods = 5;
constexpr int kObsPerCell = 30;
constexpr double kGeneratorAlpha = 0.1;  // matches the fit-side default

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

double library_function(int k, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("library_function: t outside [0,1]");
  switch (k) {
    case 1: return 4.0 * std::sin(3.0 * t) - 2.0;
    case 2: return -3.0 * std::sin(3.0 * t) + 1.5;
    case 3: return 3.0 * std::cos(3.0 * t) - 0.5;
    case 4: return -3.0 * std::cos(3.0 * t) + 0.5;
    case 5: return 3.0 * t;
    case 6: return 3.0 * (t - 1.0) * (t - 1.0) - 1.0;
    default: throw std::invalid_argument("library_function: k outside 1..6");
  }
}

std::pair<PanelDataset, ScenarioTruth> generate_scenario1(std::uint64_t seed) {
  RngStream rng(seed);
  PanelDataset data;
  data.n_participants = kParticipants;
  data.n_periods = kPeriods;
  data.cells.resize(kParticipants * kPeriods);

  ScenarioTruth truth;
  truth.scenario = 1;
  truth.cluster.resize(kParticipants * kPeriods);
  truth.smooth.resize(kParticipants * kPeriods);
  truth.theta.resize(3, kPeriods);
  for (int j = 0; j < kPeriods; ++j) truth.theta.col(j) << 0.5, -0.5, 0.3;
  truth.eta.resize(0, kPeriods);

  for (int i = 0; i < kParticipants; ++i) {
    for (int j = 0; j < kPeriods; ++j) {
      int c = i * kPeriods + j;
      PanelCell& cell = data.cells[c];
      cell.z.resize(3);
      cell.z << 1.0, rng.normal(), rng.normal();
      cell.x = Eigen::VectorXd::Ones(1);
      int fn = 1 + static_cast<int>(rng.uniform() * 4.0);
      truth.cluster[c] = fn - 1;
      cell.times.resize(kObsPerCell);
      cell.y.resize(kObsPerCell);
      truth.smooth[c].resize(kObsPerCell);
      for (int m = 0; m < kObsPerCell; ++m) {
        double t = rng.uniform();
        double smooth = library_function(fn, t);
        double p = logistic(smooth + cell.z.dot(truth.theta.col(j)));
        cell.times[m] = t;
        cell.y[m] = rng.uniform() < p ? 1 : 0;
        truth.smooth[c][m] = smooth;
      }
    }
  }
  return {std::move(data), std::move(truth)};
}

double scenario2_calibrated_intercept(double mu_eta) {
  static std::mutex mu;
  static std::map<double, double> cache;
  static std::vector<double> noise;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(mu_eta);
  if (it != cache.end()) return it->second;

  if (noise.empty()) {
    // linear-predictor noise of the transition design: intercept jitter plus
    // two centered slope-times-covariate products
    RngStream rng(0x5ca1ab1eULL);
    double sd = std::sqrt(0.5);
    noise.resize(200000);
    for (double& e : noise) {
      e = sd * rng.normal() + sd * rng.normal() * sd * rng.normal() +
          sd * rng.normal() * sd * rng.normal();
    }
  }
  auto mean_prob = [&](double c) {
    double acc = 0.0;
    for (double e : noise) acc += logistic(c + e);
    return acc / noise.size();
  };
  double target = logistic(mu_eta);
  double lo = mu_eta - 6.0, hi = mu_eta + 6.0;
  for (int step = 0; step < 60; ++step) {
    double mid = 0.5 * (lo + hi);
    (mean_prob(mid) < target ? lo : hi) = mid;
  }
  double c = 0.5 * (lo + hi);
  cache[mu_eta] = c;
  return c;
}

std::pair<PanelDataset, ScenarioTruth> generate_scenario2(std::uint64_t seed,
                                                          double mu_eta) {
  if (!std::isfinite(mu_eta)) throw std::invalid_argument("generate_scenario2: nonfinite mu_eta");
  RngStream rng(seed);
  double sd = std::sqrt(0.5);
  double intercept_mean = scenario2_calibrated_intercept(mu_eta);

  PanelDataset data;
  data.n_participants = kParticipants;
  data.n_periods = kPeriods;
  data.cells.resize(kParticipants * kPeriods);

  ScenarioTruth truth;
  truth.scenario = 2;
  truth.mu_eta = mu_eta;
  truth.cluster.assign(kParticipants * kPeriods, -1);
  truth.smooth.resize(kParticipants * kPeriods);
  truth.gamma.assign(kParticipants * kPeriods, 0);
  truth.theta.resize(3, kPeriods);
  for (int j = 0; j < kPeriods; ++j) truth.theta.col(j) << 0.5, -0.5, 0.3;
  truth.eta = Eigen::MatrixXd::Zero(3, kPeriods);
  for (int j = 1; j < kPeriods; ++j) {
    truth.eta(0, j) = intercept_mean + sd * rng.normal();
    truth.eta(1, j) = sd * rng.normal();
    truth.eta(2, j) = sd * rng.normal();
  }

  // covariates
  for (int i = 0; i < kParticipants; ++i) {
    for (int j = 0; j < kPeriods; ++j) {
      PanelCell& cell = data.cells[i * kPeriods + j];
      cell.z.resize(3);
      cell.z << 1.0, sd * rng.normal(), sd * rng.normal();
      cell.x.resize(3);
      cell.x << 1.0, sd * rng.normal(), sd * rng.normal();
    }
  }

  // cluster sequence: labels are functions, so staying means keeping the
  // same trend
  for (int i = 0; i < kParticipants; ++i) {
    truth.cluster[i * kPeriods] = rng.uniform() < 0.5 ? 0 : 1;
  }
  for (int j = 1; j < kPeriods; ++j) {
    std::vector<int> counts(6, 0);
    for (int i = 0; i < kParticipants; ++i) {
      int c = i * kPeriods + j;
      double phi = logistic(data.cells[c].x.dot(truth.eta.col(j)));
      bool fixed = rng.uniform() < phi;
      truth.gamma[c] = fixed ? 1 : 0;
      if (fixed) {
        truth.cluster[c] = truth.cluster[i * kPeriods + j - 1];
        ++counts[truth.cluster[c]];
      }
    }
    for (int i = 0; i < kParticipants; ++i) {
      int c = i * kPeriods + j;
      if (truth.gamma[c] == 1) continue;
      double total = kGeneratorAlpha;
      for (int k = 0; k < 6; ++k) total += counts[k];
      double u = rng.uniform() * total;
      int pick = -1;
      for (int k = 0; k < 6 && pick < 0; ++k) {
        u -= counts[k];
        if (u <= 0.0 && counts[k] > 0) pick = k;
      }
      if (pick < 0) {
        // open a new cluster: uniform over unused functions, or any if all used
        std::vector<int> pool;
        for (int k = 0; k < 6; ++k) {
          if (counts[k] == 0) pool.push_back(k);
        }
        if (pool.empty()) {
          for (int k = 0; k < 6; ++k) pool.push_back(k);
        }
        pick = pool[static_cast<int>(rng.uniform() * pool.size())];
      }
      truth.cluster[c] = pick;
      ++counts[pick];
    }
  }

  // observations
  for (int i = 0; i < kParticipants; ++i) {
    for (int j = 0; j < kPeriods; ++j) {
      int c = i * kPeriods + j;
      PanelCell& cell = data.cells[c];
      int fn = truth.cluster[c] + 1;
      cell.times.resize(kObsPerCell);
      cell.y.resize(kObsPerCell);
      truth.smooth[c].resize(kObsPerCell);
      for (int m = 0; m < kObsPerCell; ++m) {
        double t = rng.uniform();
        double smooth = library_function(fn, t);
        double p = logistic(smooth + cell.z.dot(truth.theta.col(j)));
        cell.times[m] = t;
        cell.y[m] = rng.uniform() < p ? 1 : 0;
        truth.smooth[c][m] = smooth;
      }
    }
  }
  return {std::move(data), std::move(truth)};
}

}  // namespace htrpm
