#include <cmath>

#include "doctest.h"
#include "zwf/diagnostics.hpp"
#include "zwf/errors.hpp"
#include "zwf/rng.hpp"

using namespace zwf;

TEST_CASE("normal_quantile round-trips the normal CDF") {
  // Phi(z) via erfc, an independent route.
  auto phi = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
  for (double p : {0.001, 0.025, 0.2, 0.5, 0.8, 0.975, 0.999}) {
    const double z = normal_quantile(p);
    CHECK(phi(z) == doctest::Approx(p).epsilon(1e-9));
  }
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK_THROWS_AS(normal_quantile(0.0), validation_error);
}

TEST_CASE("iid chains give rhat near 1") {
  Rng rng(2021);
  const int n = 10000;
  std::vector<Eigen::VectorXd> chains(2, Eigen::VectorXd(n));
  for (auto& c : chains)
    for (int i = 0; i < n; ++i) c[i] = rng.rnorm();
  const double r = split_rhat(chains);
  CHECK(r >= 0.99);
  CHECK(r <= 1.02);
  const double ess = bulk_ess(chains);
  CHECK(ess > 0.5 * 2 * n);
}

TEST_CASE("separated chains give rhat above 1.5") {
  Rng rng(55);
  const int n = 10000;
  std::vector<Eigen::VectorXd> chains(2, Eigen::VectorXd(n));
  for (int i = 0; i < n; ++i) {
    chains[0][i] = rng.rnorm();
    chains[1][i] = rng.rnorm() + 10.0;
  }
  CHECK(split_rhat(chains) > 1.5);
}

TEST_CASE("autocorrelated chains shrink the ESS") {
  Rng rng(66);
  const int n = 5000;
  std::vector<Eigen::VectorXd> chains(2, Eigen::VectorXd(n));
  for (auto& c : chains) {
    double x = 0.0;
    const double rho = 0.9;
    for (int i = 0; i < n; ++i) {
      x = rho * x + std::sqrt(1 - rho * rho) * rng.rnorm();
      c[i] = x;
    }
  }
  const double ess = bulk_ess(chains);
  // AR(1) with rho = 0.9 has tau ~ (1+rho)/(1-rho) = 19.
  CHECK(ess < 0.25 * 2 * n);
  CHECK(ess > 0.01 * 2 * n);
}

TEST_CASE("diagnostics input validation") {
  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK_THROWS_AS(split_rhat({one, one}), validation_error);
  Eigen::VectorXd a(3), b(4);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(split_rhat({a, b}), validation_error);
  CHECK_THROWS_AS(split_rhat({a}), validation_error);
}

TEST_CASE("diagnostics table shape") {
  Rng rng(5);
  const int n = 200;
  std::vector<std::vector<Eigen::VectorXd>> per_param;
  std::vector<std::string> names{"a", "b"};
  for (int p = 0; p < 2; ++p) {
    std::vector<Eigen::VectorXd> chains(3, Eigen::VectorXd(n));
    for (auto& c : chains)
      for (int i = 0; i < n; ++i) c[i] = rng.rnorm();
    per_param.push_back(std::move(chains));
  }
  const auto rows = diagnostics(names, per_param);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].name == "a");
  CHECK(rows[0].rhat == doctest::Approx(1.0).epsilon(0.05));
  CHECK(rows[0].ess > 50);
}
