#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "htrpm/spline.hpp"

using htrpm::SplineBasis;

TEST_CASE("basis rows are nonnegative and sum to one") {
  for (int q : {4, 5, 7, 10, 13}) {
    SplineBasis basis(q);
    for (int g = 0; g <= 1000; ++g) {
      Eigen::VectorXd row = basis.evaluate(g / 1000.0);
      CHECK(row.minCoeff() >= 0.0);
      CHECK(row.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("Q=4 is the Bernstein basis on [0,1]") {
  SplineBasis basis(4);
  Eigen::VectorXd mid = basis.evaluate(0.5);
  CHECK(mid[0] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(mid[1] == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(mid[2] == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(mid[3] == doctest::Approx(0.125).epsilon(1e-12));
  for (int g = 0; g <= 100; ++g) {
    double t = g / 100.0;
    Eigen::VectorXd row = basis.evaluate(t);
    for (int k = 0; k < 4; ++k) {
      double binom = (k == 0 || k == 3) ? 1.0 : 3.0;
      double bernstein = binom * std::pow(t, k) * std::pow(1.0 - t, 3 - k);
      CHECK(row[k] == doctest::Approx(bernstein).epsilon(1e-10));
    }
  }
}

TEST_CASE("endpoint interpolation") {
  for (int q : {4, 6, 10}) {
    SplineBasis basis(q);
    Eigen::VectorXd at0 = basis.evaluate(0.0), at1 = basis.evaluate(1.0);
    CHECK(at0[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(at1[q - 1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(at0.tail(q - 1).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(at1.head(q - 1).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }
}

TEST_CASE("local support: at most 4 nonzero basis functions, contiguous") {
  SplineBasis basis(10);
  for (int g = 0; g <= 997; ++g) {
    Eigen::VectorXd row = basis.evaluate(g / 997.0);
    int nnz = 0, first = -1, last = -1;
    for (int k = 0; k < 10; ++k) {
      if (row[k] > 0.0) {
        ++nnz;
        if (first < 0) first = k;
        last = k;
      }
    }
    CHECK(nnz <= 4);
    CHECK(last - first + 1 == nnz);  // contiguous block
  }
}

TEST_CASE("curves are C2 across interior knots") {
  SplineBasis basis(10);
  const double h = 1e-4;
  // random-ish but fixed coefficients
  Eigen::VectorXd beta(10);
  beta << 1.3, -0.7, 2.1, 0.4, -1.9, 0.8, 1.1, -2.3, 0.6, -0.2;
  auto f = [&](double t) { return basis.evaluate(t).dot(beta); };
  auto second = [&](double t) { return (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h); };
  const auto& knots = basis.knots();
  for (std::size_t k = 4; k + 4 < knots.size(); ++k) {
    double t = knots[k];
    // f'' is piecewise linear, so extrapolating one-sided centered estimates
    // to the knot recovers the one-sided limits exactly (cubic pieces have
    // zero fourth derivative)
    double left = 2.0 * second(t - 2 * h) - second(t - 4 * h);
    double right = 2.0 * second(t + 2 * h) - second(t + 4 * h);
    CHECK(left == doctest::Approx(right).epsilon(1e-6));
  }
}

TEST_CASE("design matrix stacks evaluate rows") {
  SplineBasis basis(7);
  std::vector<double> times = {0.0, 0.25, 0.6, 1.0};
  Eigen::MatrixXd design = basis.design_matrix(times);
  REQUIRE(design.rows() == 4);
  REQUIRE(design.cols() == 7);
  for (int m = 0; m < 4; ++m) {
    CHECK((design.row(m).transpose() - basis.evaluate(times[m])).cwiseAbs().maxCoeff() ==
          doctest::Approx(0.0));
  }
}

TEST_CASE("integral weights match quadrature and sum to one") {
  for (int q : {4, 6, 10}) {
    SplineBasis basis(q);
    Eigen::VectorXd w = basis.integral_weights();
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-12));
    // Simpson's rule on a fine grid
    int n = 2000;
    Eigen::VectorXd quad = Eigen::VectorXd::Zero(q);
    for (int g = 0; g <= n; ++g) {
      double coef = (g == 0 || g == n) ? 1.0 : (g % 2 ? 4.0 : 2.0);
      quad += coef * basis.evaluate(static_cast<double>(g) / n);
    }
    quad *= 1.0 / (3.0 * n);
    CHECK((w - quad).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-10));
  }
}

TEST_CASE("domain and dimension errors") {
  CHECK_THROWS_AS(SplineBasis(3), std::invalid_argument);
  SplineBasis basis(6);
  CHECK_THROWS_AS(basis.evaluate(-1e-9), std::invalid_argument);
  CHECK_THROWS_AS(basis.evaluate(1.0 + 1e-9), std::invalid_argument);
}
