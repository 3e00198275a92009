#include "htrpm/metrics.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace htrpm {

namespace {

using Contingency = std::map<std::pair<int, int>, int>;

Contingency build_contingency(const std::vector<int>& p1, const std::vector<int>& p2,
                              std::map<int, int>& rows, std::map<int, int>& cols) {
  if (p1.size() != p2.size() || p1.empty()) {
    throw std::invalid_argument("partition metrics: mismatched or empty ground sets");
  }
  Contingency cells;
  for (std::size_t k = 0; k < p1.size(); ++k) {
    ++cells[{p1[k], p2[k]}];
    ++rows[p1[k]];
    ++cols[p2[k]];
  }
  return cells;
}

}  // namespace

double variation_of_information(const std::vector<int>& p1, const std::vector<int>& p2) {
  std::map<int, int> rows, cols;
  Contingency cells = build_contingency(p1, p2, rows, cols);
  double n = static_cast<double>(p1.size());

  double h1 = 0.0, h2 = 0.0, mi = 0.0;
  for (const auto& [lab, c] : rows) h1 -= (c / n) * std::log(c / n);
  for (const auto& [lab, c] : cols) h2 -= (c / n) * std::log(c / n);
  for (const auto& [rc, c] : cells) {
    double p = c / n;
    mi += p * std::log(p * n * n / (static_cast<double>(rows[rc.first]) * cols[rc.second]));
  }
  double vi = h1 + h2 - 2.0 * mi;
  return vi < 0.0 ? 0.0 : vi;  // clip rounding noise at exact equality
}

double adjusted_rand_index(const std::vector<int>& p1, const std::vector<int>& p2) {
  std::map<int, int> rows, cols;
  Contingency cells = build_contingency(p1, p2, rows, cols);
  double n = static_cast<double>(p1.size());

  auto choose2 = [](double c) { return c * (c - 1.0) / 2.0; };
  double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [rc, c] : cells) sum_cells += choose2(c);
  for (const auto& [lab, c] : rows) sum_rows += choose2(c);
  for (const auto& [lab, c] : cols) sum_cols += choose2(c);
  double total = choose2(n);

  double expected = sum_rows * sum_cols / total;
  double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;  // both partitions degenerate
  return (sum_cells - expected) / (max_index - expected);
}

double mse_smooth(const std::vector<std::vector<double>>& estimates,
                  const std::vector<std::vector<double>>& truth) {
  if (estimates.size() != truth.size()) {
    throw std::invalid_argument("mse_smooth: mismatched shapes");
  }
  double sum = 0.0;
  long count = 0;
  for (std::size_t c = 0; c < estimates.size(); ++c) {
    if (estimates[c].size() != truth[c].size()) {
      throw std::invalid_argument("mse_smooth: mismatched shapes");
    }
    for (std::size_t m = 0; m < estimates[c].size(); ++m) {
      double d = estimates[c][m] - truth[c][m];
      sum += d * d;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("mse_smooth: empty input");
  return sum / count;
}

double gamma_accuracy(const std::vector<std::vector<unsigned char>>& gamma_draws,
                      const std::vector<unsigned char>& truth, int n_participants,
                      int n_periods) {
  if (gamma_draws.empty()) throw std::invalid_argument("gamma_accuracy: no draws");
  long hits = 0, total = 0;
  for (const auto& draw : gamma_draws) {
    if (draw.size() != truth.size() ||
        static_cast<int>(draw.size()) != n_participants * n_periods) {
      throw std::invalid_argument("gamma_accuracy: shape mismatch");
    }
    for (int i = 0; i < n_participants; ++i) {
      for (int j = 1; j < n_periods; ++j) {
        hits += draw[i * n_periods + j] == truth[i * n_periods + j];
        ++total;
      }
    }
  }
  return static_cast<double>(hits) / total;
}

}  // namespace htrpm
