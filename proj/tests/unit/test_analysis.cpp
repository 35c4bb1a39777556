#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "zwf/analysis.hpp"
#include "zwf/errors.hpp"
#include "zwf/rng.hpp"

using namespace zwf;

namespace {

// Brute-force oracles, kept independent of the implementations.
Interval hpd_brute(std::vector<double> s, double mass) {
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  std::size_t m = static_cast<std::size_t>(std::ceil(mass * n));
  m = std::max<std::size_t>(2, std::min(m, n));
  Interval best{s[0], s[m - 1]};
  for (std::size_t i = 0; i + m <= n; ++i)
    if (s[i + m - 1] - s[i] < best.hi - best.lo) best = {s[i], s[i + m - 1]};
  return best;
}

double crps_brute(const std::vector<double>& s, double y) {
  double t1 = 0.0, t2 = 0.0;
  for (double a : s) t1 += std::abs(a - y);
  for (double a : s)
    for (double b : s) t2 += std::abs(a - b);
  const double n = static_cast<double>(s.size());
  return t1 / n - 0.5 * t2 / (n * n);
}

}  // namespace

TEST_CASE("hpd golden values") {
  std::vector<double> ladder;
  for (int i = 1; i <= 100; ++i) ladder.push_back(i);
  const Interval h = hpd_interval(ladder, 0.95);
  CHECK(h.lo == doctest::Approx(1.0));
  CHECK(h.hi == doctest::Approx(95.0));

  std::vector<double> flat(10, 3.25);
  const Interval f = hpd_interval(flat, 0.95);
  CHECK(f.lo == doctest::Approx(3.25));
  CHECK(f.hi == doctest::Approx(3.25));

  std::vector<double> spike(95, 0.0);
  spike.insert(spike.end(), 5, 100.0);
  const Interval s = hpd_interval(spike, 0.95);
  CHECK(s.lo == doctest::Approx(0.0));
  CHECK(s.hi == doctest::Approx(0.0));

  CHECK_THROWS_AS(hpd_interval({1.0}, 0.95), validation_error);
  CHECK_THROWS_AS(hpd_interval({1.0, 2.0}, 1.0), validation_error);
}

TEST_CASE("hpd equals brute force on random instances") {
  Rng rng(42);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 5 + static_cast<int>(rng.rint(60));
    std::vector<double> s(n);
    for (double& v : s)
      v = rep % 3 == 0 ? std::round(rng.rnorm() * 3) : std::exp(rng.rnorm());
    const double mass = 0.5 + 0.45 * rng.runif();
    const Interval got = hpd_interval(s, mass);
    const Interval want = hpd_brute(s, mass);
    CHECK(got.lo == doctest::Approx(want.lo).epsilon(1e-12));
    CHECK(got.hi == doctest::Approx(want.hi).epsilon(1e-12));
  }
}

TEST_CASE("hpd is no wider than the equal-tailed interval") {
  Rng rng(43);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 20 + static_cast<int>(rng.rint(200));
    std::vector<double> s(n);
    for (double& v : s) v = rng.rnorm() + (rep % 2 ? std::exp(rng.rnorm()) : 0.0);
    const Interval h = hpd_interval(s, 0.9);
    std::sort(s.begin(), s.end());
    const std::size_t lo_idx = static_cast<std::size_t>(0.05 * n);
    const std::size_t hi_idx =
        std::min<std::size_t>(n - 1, static_cast<std::size_t>(0.95 * n));
    const double et_width = s[hi_idx] - s[lo_idx];
    CHECK(h.hi - h.lo <= et_width + 1e-12);
  }
}

TEST_CASE("crps golden values") {
  std::vector<double> perfect(7, 2.5);
  CHECK(crps(perfect, 2.5) == doctest::Approx(0.0));
  std::vector<double> pair{0.0, 1.0};
  CHECK(crps(pair, 0.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(crps(pair, 0.5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK_THROWS_AS(crps({}, 0.0), validation_error);
}

TEST_CASE("crps equals brute-force double sum on random instances") {
  Rng rng(44);
  for (int rep = 0; rep < 300; ++rep) {
    const int n = 1 + static_cast<int>(rng.rint(50));
    std::vector<double> s(n);
    for (double& v : s) v = rng.rnorm(0.0, 2.0);
    const double y = rng.rnorm();
    CHECK(crps(s, y) == doctest::Approx(crps_brute(s, y)).epsilon(1e-10));
  }
}

TEST_CASE("crps permutation invariance and translation equivariance") {
  Rng rng(45);
  std::vector<double> s(40);
  for (double& v : s) v = rng.rnorm();
  const double y = 0.3;
  const double base = crps(s, y);
  std::vector<double> shuffled = s;
  for (std::size_t i = shuffled.size() - 1; i > 0; --i)
    std::swap(shuffled[i], shuffled[rng.rint(i + 1)]);
  CHECK(crps(shuffled, y) == doctest::Approx(base).epsilon(1e-12));
  std::vector<double> shifted = s;
  for (double& v : shifted) v += 11.5;
  CHECK(crps(shifted, y + 11.5) == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("rmse_field golden values") {
  const Grid g = testutil::square_grid(4, 4);
  ScalarField a(g, 2.0), b(g, 2.0);
  CHECK(rmse_field(a, b) == doctest::Approx(0.0));
  ScalarField c(g, 3.0);
  CHECK(rmse_field(a, c) == doctest::Approx(1.0));
  ScalarField d(g);
  for (int i = 0; i < g.n_active(); ++i) d.values[i] = (i % 2 ? 1.0 : -1.0);
  ScalarField zero(g);
  CHECK(rmse_field(d, zero) == doctest::Approx(1.0));
  const Grid g2 = testutil::square_grid(2, 2);
  ScalarField other(g2);
  CHECK_THROWS_AS(rmse_field(a, other), validation_error);
}

TEST_CASE("abundance golden values") {
  // Constant Z = 100 across draws.
  std::vector<Eigen::VectorXd> logz(
      20, Eigen::VectorXd::Constant(6, std::log(100.0)));
  std::vector<int> region{0, 1, 2, 3, 4, 5};
  const AbundanceSummary z =
      abundance(logz, region, AbundanceKind::zoop_average, 1.0);
  CHECK(z.med == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(z.hpd.lo == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(z.hpd.hi == doctest::Approx(100.0).epsilon(1e-12));

  // Constant lambda = 0.1 over 2000 one-km cells: total 200 per draw.
  std::vector<Eigen::VectorXd> loglam(
      10, Eigen::VectorXd::Constant(2000, std::log(0.1)));
  std::vector<int> all;
  for (int i = 0; i < 2000; ++i) all.push_back(i);
  const AbundanceSummary w =
      abundance(loglam, all, AbundanceKind::whale_total, 1.0);
  CHECK(w.med == doctest::Approx(200.0).epsilon(1e-9));

  // Monotonicity: a subregion total never exceeds the full-domain total.
  std::vector<int> sub;
  for (int i = 0; i < 700; ++i) sub.push_back(i);
  const AbundanceSummary ws =
      abundance(loglam, sub, AbundanceKind::whale_total, 1.0);
  CHECK(ws.med <= w.med);

  CHECK_THROWS_AS(abundance(loglam, {}, AbundanceKind::whale_total, 1.0),
                  validation_error);
}

TEST_CASE("whatif_scaling golden behavior") {
  std::vector<double> totals{100.0, 150.0, 80.0};
  std::vector<double> beta{1.5, 1.5, 1.5};

  Rng r1(7);
  const ScalingResult identity = whatif_scaling(totals, beta, 1.0, r1);
  for (std::size_t i = 0; i < totals.size(); ++i)
    CHECK(identity.expected[i] == doctest::Approx(totals[i]).epsilon(1e-15));

  Rng r2(7);
  const ScalingResult half = whatif_scaling(totals, beta, 0.5, r2);
  for (std::size_t i = 0; i < totals.size(); ++i)
    CHECK(half.expected[i] ==
          doctest::Approx(0.3535533905932738 * totals[i]).epsilon(1e-12));

  // Monotone in k when beta_zoop > 0.
  double prev = 0.0;
  for (double k : {0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2}) {
    Rng r(3);
    const ScalingResult step = whatif_scaling(totals, beta, k, r);
    CHECK(step.expected[0] > prev);
    prev = step.expected[0];
  }
  Rng r3(1);
  CHECK_THROWS_AS(whatif_scaling(totals, beta, 0.0, r3), validation_error);
}

TEST_CASE("loglik_summary golden values") {
  std::vector<double> constant(12, -140.25);
  const LoglikSummary c = loglik_summary(constant);
  CHECK(c.med == doctest::Approx(-140.25));
  CHECK(c.hpd.lo == doctest::Approx(-140.25));
  CHECK(c.hpd.hi == doctest::Approx(-140.25));

  std::vector<double> ladder;
  for (int i = 1; i <= 100; ++i) ladder.push_back(i);
  const LoglikSummary l = loglik_summary(ladder);
  CHECK(l.med == doctest::Approx(50.5));
  CHECK(l.hpd.lo == doctest::Approx(1.0));
  CHECK(l.hpd.hi == doctest::Approx(95.0));

  CHECK_THROWS_AS(loglik_summary({}), validation_error);
}
