#include "htrpm/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace htrpm {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTrunc = 0.64;  // series crossover point of the J* sampler

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// CDF at x of an inverse-Gaussian with mean 1/z and shape 1, parameterized by
// z so that z = 0 (infinite mean) is handled without division.
double inv_gauss_cdf(double x, double z) {
  double rx = 1.0 / std::sqrt(x);
  double b = rx * (x * z - 1.0);
  double a = -rx * (x * z + 1.0);
  return std_normal_cdf(b) + std::exp(2.0 * z) * std_normal_cdf(a);
}

// Inverse-Gaussian(mean 1/z, shape 1) truncated to (0, t].
double sample_trunc_inv_gauss(double z, double t, RngStream& rng) {
  if (z < 1.0 / t) {
    // large/infinite mean: rejection against a scaled inverse-chi-square
    while (true) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  double mu = 1.0 / z;
  while (true) {
    double y = rng.normal();
    y *= y;
    double x = mu + 0.5 * mu * mu * y -
               0.5 * mu * std::sqrt(4.0 * mu * y + mu * mu * y * y);
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    if (x <= t) return x;
  }
}

// Alternating-series coefficients a_n(x) of the J*(1,z) density.
double series_coef(int n, double x) {
  double a = n + 0.5;
  if (x <= kTrunc) {
    return kPi * a * std::pow(2.0 / (kPi * x), 1.5) * std::exp(-2.0 * a * a / x);
  }
  return kPi * a * std::exp(-0.5 * a * a * kPi * kPi * x);
}

}  // namespace

double RngStream::exponential() { return -std::log(uniform()); }

double RngStream::normal() {
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

double sample_pg1(double z, RngStream& rng) {
  if (!std::isfinite(z)) throw std::invalid_argument("sample_pg1: nonfinite z");
  z = 0.5 * std::fabs(z);
  double k = kPi * kPi / 8.0 + 0.5 * z * z;
  double p = (0.5 * kPi / k) * std::exp(-k * kTrunc);
  double q = 2.0 * std::exp(-z) * inv_gauss_cdf(kTrunc, z);
  while (true) {
    double x;
    if (rng.uniform() < p / (p + q)) {
      x = kTrunc + rng.exponential() / k;  // exponential right tail
    } else {
      x = sample_trunc_inv_gauss(z, kTrunc, rng);
    }
    double s = series_coef(0, x);
    double y = rng.uniform() * s;
    int n = 0;
    while (true) {
      ++n;
      if (n & 1) {
        s -= series_coef(n, x);
        if (y <= s) return 0.25 * x;  // PG(1,z) = J*(1, z/2) / 4
      } else {
        s += series_coef(n, x);
        if (y > s) break;  // reject, draw a new proposal
      }
    }
  }
}

double sample_gamma(double shape, RngStream& rng) {
  if (!(shape > 0.0)) throw std::invalid_argument("sample_gamma: shape <= 0");
  if (shape < 1.0) {
    // boost: Gamma(a) = Gamma(a+1) * U^{1/a}
    double g = sample_gamma(shape + 1.0, rng);
    return g * std::pow(rng.uniform(), 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze
  double d = shape - 1.0 / 3.0;
  double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = rng.normal();
    double v = 1.0 + c * x;
    if (v <= 0.0) continue;
    v = v * v * v;
    double u = rng.uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_inverse_gamma(double shape, double scale, RngStream& rng) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw std::invalid_argument("sample_inverse_gamma: nonpositive parameter");
  }
  return scale / sample_gamma(shape, rng);
}

Eigen::VectorXd sample_mvn_cov(const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& covariance, RngStream& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("sample_mvn_cov: covariance is not SPD");
  }
  Eigen::VectorXd u(mean.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
  return mean + llt.matrixL() * u;
}

Eigen::VectorXd sample_mvn_precision(const Eigen::MatrixXd& precision,
                                     const Eigen::VectorXd& linear, RngStream& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("sample_mvn_precision: precision is not SPD");
  }
  Eigen::VectorXd mean = llt.solve(linear);
  Eigen::VectorXd u(linear.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) u[i] = rng.normal();
  // solve L^T x = u so that x ~ N(0, precision^{-1})
  return mean + llt.matrixU().solve(u);
}

int sample_categorical_log(const std::vector<double>& log_weights, RngStream& rng) {
  double best = -std::numeric_limits<double>::infinity();
  for (double w : log_weights) best = std::max(best, w);
  if (!std::isfinite(best)) {
    throw std::invalid_argument("sample_categorical_log: all weights are -inf");
  }
  double total = 0.0;
  for (double w : log_weights) total += std::exp(w - best);
  double target = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    acc += std::exp(log_weights[i] - best);
    if (target <= acc) return static_cast<int>(i);
  }
  return static_cast<int>(log_weights.size()) - 1;
}

}  // namespace htrpm
