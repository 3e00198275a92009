#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "htrpm/metrics.hpp"

using namespace htrpm;

namespace {

// All set-partitions of {0..n-1} as canonical label vectors (restricted
// growth strings).
std::vector<std::vector<int>> all_partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> labels(n, 0);
  auto rec = [&](auto&& self, int pos, int max_used) -> void {
    if (pos == n) {
      out.push_back(labels);
      return;
    }
    for (int lab = 0; lab <= max_used + 1; ++lab) {
      labels[pos] = lab;
      self(self, pos + 1, std::max(max_used, lab));
    }
  };
  rec(rec, 1, 0);
  return out;
}

// Independent VI oracle: entropies from label-count maps.
double vi_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  int n = static_cast<int>(a.size());
  std::map<int, int> ca, cb;
  std::map<std::pair<int, int>, int> cab;
  for (int i = 0; i < n; ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++cab[{a[i], b[i]}];
  }
  auto entropy = [n](const auto& counts) {
    double h = 0.0;
    for (const auto& [_, c] : counts) {
      double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
    return h;
  };
  double mi = 0.0;
  for (const auto& [key, c] : cab) {
    double pxy = static_cast<double>(c) / n;
    double px = static_cast<double>(ca[key.first]) / n;
    double py = static_cast<double>(cb[key.second]) / n;
    mi += pxy * std::log(pxy / (px * py));
  }
  return entropy(ca) + entropy(cb) - 2.0 * mi;
}

// Independent ARI oracle: explicit iteration over all item pairs.
double ari_oracle(const std::vector<int>& a, const std::vector<int>& b) {
  int n = static_cast<int>(a.size());
  double n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      bool sa = a[i] == a[k], sb = b[i] == b[k];
      if (sa && sb) ++n11;
      else if (sa) ++n10;
      else if (sb) ++n01;
      else ++n00;
    }
  }
  double total = n11 + n10 + n01 + n00;
  double expected = (n11 + n10) * (n11 + n01) / total;
  double max_index = 0.5 * ((n11 + n10) + (n11 + n01));
  if (max_index == expected) return 1.0;
  return (n11 - expected) / (max_index - expected);
}

std::vector<int> random_partition(int n, int max_labels, std::mt19937& gen) {
  std::uniform_int_distribution<int> pick(0, max_labels - 1);
  std::vector<int> p(n);
  for (int& lab : p) lab = pick(gen);
  return p;
}

}  // namespace

TEST_CASE("pinned VI values") {
  CHECK(variation_of_information({1, 1, 2}, {1, 1, 2}) == doctest::Approx(0.0));
  CHECK(variation_of_information({1, 1, 2}, {1, 2, 2}) ==
        doctest::Approx(0.9243).epsilon(1e-4));
  CHECK(variation_of_information({1, 2, 3}, {1, 1, 1}) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("pinned ARI values") {
  CHECK(adjusted_rand_index({4, 4, 9, 9}, {4, 4, 9, 9}) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index({1, 1, 2, 2}, {1, 1, 2, 3}) ==
        doctest::Approx(4.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("exhaustive oracle equality for all partition pairs of n <= 5") {
  for (int n = 1; n <= 5; ++n) {
    auto parts = all_partitions(n);
    if (n == 5) REQUIRE(parts.size() == 52);
    for (const auto& a : parts) {
      for (const auto& b : parts) {
        CHECK(variation_of_information(a, b) ==
              doctest::Approx(vi_oracle(a, b)).epsilon(1e-12));
        if (n >= 2) {
          CHECK(adjusted_rand_index(a, b) ==
                doctest::Approx(ari_oracle(a, b)).epsilon(1e-12));
        }
        CHECK(variation_of_information(a, b) <= std::log(n) + 1e-12);
      }
    }
  }
}

TEST_CASE("VI symmetry, label invariance, triangle inequality") {
  std::mt19937 gen(42);
  for (int trial = 0; trial < 1000; ++trial) {
    auto a = random_partition(8, 4, gen);
    auto b = random_partition(8, 4, gen);
    auto c = random_partition(8, 4, gen);
    CHECK(variation_of_information(a, b) ==
          doctest::Approx(variation_of_information(b, a)).epsilon(1e-12));
    CHECK(variation_of_information(a, c) <=
          variation_of_information(a, b) + variation_of_information(b, c) + 1e-10);
    auto b_relab = b;
    for (int& lab : b_relab) lab = 17 - 3 * lab;
    CHECK(variation_of_information(a, b_relab) ==
          doctest::Approx(variation_of_information(a, b)).epsilon(1e-12));
    CHECK(adjusted_rand_index(a, b_relab) ==
          doctest::Approx(adjusted_rand_index(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("ARI of independent random partitions centers on zero") {
  std::mt19937 gen(7);
  int trials = 1000, n = 200;
  double sum = 0.0, sum_sq = 0.0;
  for (int t = 0; t < trials; ++t) {
    double ari = adjusted_rand_index(random_partition(n, 4, gen),
                                     random_partition(n, 4, gen));
    sum += ari;
    sum_sq += ari * ari;
  }
  double mean = sum / trials;
  double sd = std::sqrt((sum_sq / trials - mean * mean) / (trials - 1));
  CHECK(std::abs(mean) <= 3.0 * sd);
}

TEST_CASE("mismatched ground sets are rejected") {
  CHECK_THROWS_AS(variation_of_information({1, 2}, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(adjusted_rand_index({1, 2}, {1}), std::invalid_argument);
}

TEST_CASE("smooth MSE basics") {
  std::vector<std::vector<double>> truth = {{1.0, 2.0}, {3.0}};
  CHECK(mse_smooth(truth, truth) == doctest::Approx(0.0));
  std::vector<std::vector<double>> offset = {{1.1, 2.1}, {3.1}};
  CHECK(mse_smooth(offset, truth) == doctest::Approx(0.01).epsilon(1e-12));
  std::vector<std::vector<double>> wrong_shape = {{1.0}, {3.0}};
  CHECK_THROWS_AS(mse_smooth(wrong_shape, truth), std::invalid_argument);
}

TEST_CASE("gamma accuracy endpoints") {
  int n = 3, j_count = 3;
  std::vector<unsigned char> truth = {9, 1, 0, 9, 0, 1, 9, 1, 1};  // period 0 ignored
  std::vector<std::vector<unsigned char>> pinned = {
      {0, 1, 0, 0, 0, 1, 0, 1, 1}, {1, 1, 0, 1, 0, 1, 1, 1, 1}};
  CHECK(gamma_accuracy(pinned, truth, n, j_count) == doctest::Approx(1.0));
  std::vector<unsigned char> ones(9, 1), zeros(9, 0);
  CHECK(gamma_accuracy({zeros}, ones, n, j_count) == doctest::Approx(0.0));
  // half right
  std::vector<unsigned char> est = {0, 1, 0, 0, 0, 1, 0, 1, 1};
  std::vector<unsigned char> half = {0, 1, 1, 0, 0, 0, 0, 1, 0};
  CHECK(gamma_accuracy({est}, half, n, j_count) == doctest::Approx(0.5));
}
