#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "zwf/errors.hpp"
#include "zwf/whale.hpp"
#include "zwf/rng.hpp"

using namespace zwf;

namespace {

WhaleParams base_params() {
  WhaleParams p;
  p.beta0[3] = -4.0;
  p.beta_bath = -0.26;
  p.beta_zoop = 1.5;
  p.surface_prob[3] = 0.31;
  p.call_rate[3] = 2.46;
  p.duration_hours[3] = 6.58;
  p.log_z_bar = 0.0;
  return p;
}

}  // namespace

TEST_CASE("whale_intensity golden values") {
  const Grid g = testutil::square_grid(3, 3);
  const ScalarField zero(g);
  WhaleParams p = base_params();
  p.beta_bath = 0.0;
  p.beta_zoop = 0.0;

  ScalarField lam = whale_intensity(p, 3, zero, zero, zero);
  CHECK(lam.values[0] == doctest::Approx(0.01831563888873418).epsilon(1e-12));

  p.beta_zoop = 1.5;
  ScalarField logz(g, 1.0);  // logZ - logzbar = 1
  lam = whale_intensity(p, 3, zero, logz, zero);
  CHECK(lam.values[0] == doctest::Approx(0.0820849986238988).epsilon(1e-12));
}

TEST_CASE("scaling Z by k multiplies the intensity by k^beta_zoop") {
  const Grid g = testutil::square_grid(3, 2);
  WhaleParams p = base_params();
  Rng rng(4);
  ScalarField bath(g), logz(g), psi(g);
  for (int i = 0; i < g.n_active(); ++i) {
    bath.values[i] = rng.rnorm();
    logz.values[i] = rng.rnorm(5.5, 1.0);
    psi.values[i] = 0.3 * rng.rnorm();
  }
  const double k = 0.5;
  const ScalarField lam = whale_intensity(p, 3, bath, logz, psi);
  ScalarField scaled(g, Eigen::VectorXd(logz.values.array() + std::log(k)));
  const ScalarField lam_k = whale_intensity(p, 3, bath, scaled, psi);
  const double factor = std::pow(k, p.beta_zoop);
  CHECK(factor == doctest::Approx(0.3535533905932738).epsilon(1e-12));
  for (int i = 0; i < g.n_active(); ++i)
    CHECK(lam_k.values[i] ==
          doctest::Approx(factor * lam.values[i]).epsilon(1e-12));
}

TEST_CASE("whale_intensity reparameterization invariance") {
  const Grid g = testutil::square_grid(2, 2);
  WhaleParams p = base_params();
  Rng rng(9);
  ScalarField bath(g), logz(g), psi(g);
  for (int i = 0; i < g.n_active(); ++i) {
    bath.values[i] = rng.rnorm();
    logz.values[i] = rng.rnorm(5.0, 1.0);
  }
  const ScalarField lam = whale_intensity(p, 3, bath, logz, psi);
  const double delta = 0.8;
  WhaleParams q = p;
  q.beta0[3] += p.beta_zoop * delta;
  q.log_z_bar += delta;
  const ScalarField lam2 = whale_intensity(q, 3, bath, logz, psi);
  CHECK((lam.values - lam2.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("whale_intensity overflow is an invalid state") {
  const Grid g = testutil::square_grid(2, 2);
  WhaleParams p = base_params();
  p.beta0[3] = 800.0;
  const ScalarField zero(g);
  CHECK_THROWS_AS(whale_intensity(p, 3, zero, zero, zero), numerical_error);
}

TEST_CASE("dist_detection golden values and boundary") {
  const WhaleParams p = base_params();
  const Transect t{0, {{0, 0}, {10, 0}}};
  CHECK(dist_detection(p, 3, {5.0, 0.5}, t) == doctest::Approx(0.31));
  WhaleParams p1 = p;
  p1.surface_prob[3] = 1.0;
  CHECK(dist_detection(p1, 3, {5.0, 1.75}, t) ==
        doctest::Approx(0.36787944117144233).epsilon(1e-12));
  CHECK(dist_detection_profile(0.75) == doctest::Approx(1.0));
  const double just_above = dist_detection_profile(0.75 + 1e-9);
  CHECK(just_above == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("dist_detection is monotone, bounded, continuous on a d-sweep") {
  double prev = 1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double d = i * 5.0 / 10000.0;
    const double f = dist_detection_profile(d);
    CHECK(f <= 1.0);
    CHECK(f >= 0.0);
    CHECK(f <= prev + 1e-12);
    if (i > 0) CHECK(std::abs(f - prev) < 2e-3);  // no jumps on the grid
    prev = f;
  }
}

TEST_CASE("dist_loglik golden values") {
  // Build lambda so the degraded intensity pi * f * lambda is exactly 0.1
  // in every cell of a 100 km^2 domain: integral 10, log at a point ln 0.1.
  const Grid g = testutil::square_grid(10, 10);
  const Transect t{0, {{0, 5}, {10, 5}}};
  WhaleParams p = base_params();
  p.surface_prob[3] = 1.0;

  ScalarField lam(g);
  for (int a = 0; a < g.n_active(); ++a) {
    const double f = dist_detection_profile(
        dist_to_transect(g.centroid(g.active_ids()[a]), t));
    lam.values[a] = 0.1 / f;
  }
  std::map<int, ScalarField> intensity;
  intensity.emplace(3, std::move(lam));

  std::map<std::pair<int, int>, PointPattern> patterns;
  patterns[{3, 0}] = PointPattern{3, {}, {}};
  const double empty_ll = dist_loglik(p, intensity, {t}, patterns);
  CHECK(empty_ll == doctest::Approx(-10.0).epsilon(1e-10));

  patterns[{3, 0}].points.push_back({0.5, 5.2});
  const double one_ll = dist_loglik(p, intensity, {t}, patterns);
  CHECK(one_ll == doctest::Approx(-12.302585092994045).epsilon(1e-10));

  // Duplicating the transect doubles everything exactly.
  Transect t2 = t;
  t2.id = 1;
  patterns[{3, 1}] = patterns[{3, 0}];
  const double two_ll = dist_loglik(p, intensity, {t, t2}, patterns);
  CHECK(two_ll == doctest::Approx(2.0 * one_ll).epsilon(1e-12));

  // Multiplicity weighting: a count-3 record contributes three log terms.
  std::map<std::pair<int, int>, PointPattern> weighted;
  weighted[{3, 0}] = PointPattern{3, {{0.5, 5.2}}, {3}};
  CHECK(dist_loglik(p, intensity, {t}, weighted) ==
        doctest::Approx(-10.0 + 3.0 * std::log(0.1)).epsilon(1e-10));
}

TEST_CASE("dist_loglik flags zero-detection sightings") {
  const Grid g = testutil::square_grid(40, 1);
  const Transect t{0, {{0.0, 0.5}, {0.1, 0.5}}};
  WhaleParams p = base_params();
  p.surface_prob[3] = 0.0;  // nothing is detectable
  std::map<int, ScalarField> intensity;
  intensity.emplace(3, ScalarField(g, 0.1));
  std::map<std::pair<int, int>, PointPattern> patterns;
  patterns[{3, 0}] = PointPattern{3, {{0.5, 0.5}}, {}};
  CHECK_THROWS_AS(dist_loglik(p, intensity, {t}, patterns), validation_error);
}

TEST_CASE("pam_detection golden values and kinks") {
  CHECK(pam_detection(115.0, 1.0) == doctest::Approx(1.0));
  CHECK(pam_detection(100.0, 10000.0) ==
        doctest::Approx(0.23214285714285715).epsilon(1e-12));
  CHECK(pam_detection(171.0, 10.0) == doctest::Approx(0.0));

  // Exactly at u = 141 and u = 197 both branches agree.
  // u = 14.5 log10(d) + noise + 26; choose d = 100 -> u = noise + 55.
  CHECK(pam_detection(86.0, 100.0) == doctest::Approx(1.0));   // u = 141
  CHECK(pam_detection(142.0, 100.0) == doctest::Approx(0.0));  // u = 197
  const double eps = 1e-9;
  CHECK(pam_detection(86.0 + eps, 100.0) ==
        doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pam_detection(142.0 - eps, 100.0) ==
        doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("pam_detection monotone in noise and distance") {
  double prev = 1.0;
  for (int i = 0; i <= 500; ++i) {
    const double noise = 60.0 + i * 0.3;
    const double v = pam_detection(noise, 500.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
  prev = 1.0;
  for (int i = 0; i <= 500; ++i) {
    const double d = 1.0 + i * 100.0;
    const double v = pam_detection(110.0, d);
    CHECK(v >= 0.0);
    CHECK(v <= prev + 1e-15);
    prev = v;
  }
}

TEST_CASE("pam_mean golden values") {
  // One 10x10 km cell (area 100 km^2) with the hydrophone 1 km from the
  // centroid and noise 99.5 gives u = 14.5*3 + 99.5 + 26 = 169, p = 0.5
  // exactly: the constant-field arithmetic c * d * p * lambda * area.
  const Grid g = Grid::build({0, 0, 10, 10}, 10.0);
  REQUIRE(g.n_active() == 1);
  WhaleParams p = base_params();
  p.call_rate[3] = 2.0;
  p.duration_hours[3] = 3.0;
  const Hydrophone k{0, {4.0, 5.0}};  // 1000 m from centroid (5, 5)
  ScalarField lam(g, 0.1);
  CHECK(pam_mean(p, 3, k, 99.5, lam) ==
        doctest::Approx(2.0 * 3.0 * 0.5 * 0.1 * 100.0).epsilon(1e-12));

  // Survey-protocol rates: c = 2.46, d = 6.58 rescale the same integral.
  WhaleParams real_rates = p;
  real_rates.call_rate[3] = 2.46;
  real_rates.duration_hours[3] = 6.58;
  CHECK(pam_mean(real_rates, 3, k, 99.5, lam) ==
        doctest::Approx(80.934).epsilon(1e-12));

  // c = 0 silences everything.
  WhaleParams silent = p;
  silent.call_rate[3] = 0.0;
  CHECK(pam_mean(silent, 3, k, 105.0, lam) == doctest::Approx(0.0));
}

TEST_CASE("pam_mean matches an independent per-cell summation") {
  const Grid g = testutil::square_grid(8, 6);
  WhaleParams p = base_params();
  const Hydrophone k{0, {3.2, 2.9}};
  Rng rng(21);
  ScalarField lam(g);
  for (int i = 0; i < g.n_active(); ++i)
    lam.values[i] = std::exp(rng.rnorm(-3.0, 0.5));
  const double noise = 121.0;
  double expect = 0.0;
  for (int a = 0; a < g.n_active(); ++a) {
    const Point c = g.centroid(g.active_ids()[a]);
    expect += pam_detection(noise, dist_to_hydrophone(c, k)) * lam.values[a];
  }
  expect *= p.call_rate.at(3) * p.duration_hours.at(3) * g.cell_area();
  CHECK(pam_mean(p, 3, k, noise, lam) ==
        doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("pam_mean constant-detection arithmetic via synthetic band") {
  // One cell 100 m from the hydrophone: u = 14.5*2 + noise + 26. Noise
  // 140 puts u = 195 -> p = 2/56; the integral reduces to one term.
  const Grid g = Grid::build({0, 0, 1, 1}, 1.0);
  WhaleParams p = base_params();
  p.call_rate[3] = 2.0;
  p.duration_hours[3] = 3.0;
  const Hydrophone k{0, {0.4, 0.5}};  // 100 m from centroid (0.5, 0.5)
  ScalarField lam(g, 0.1);
  const double u = 14.5 * std::log10(100.0) + 140.0 + 26.0;
  const double expect_p = 1.0 - (u - 141.0) / 56.0;
  CHECK(pam_mean(p, 3, k, 140.0, lam) ==
        doctest::Approx(2.0 * 3.0 * expect_p * 0.1).epsilon(1e-12));
}

TEST_CASE("pam_loglik golden values") {
  std::map<std::pair<int, int>, double> means;
  means[{3, 0}] = 30.0;
  std::vector<CallCount> zero{{3, 0, 0}};
  CHECK(pam_loglik(means, zero) == doctest::Approx(-30.0).epsilon(1e-12));

  std::vector<CallCount> thirty{{3, 0, 30}};
  CHECK(pam_loglik(means, thirty) ==
        doctest::Approx(-2.622314898965513).epsilon(1e-10));

  means[{3, 1}] = 30.0;
  std::vector<CallCount> pair{{3, 0, 30}, {3, 1, 30}};
  CHECK(pam_loglik(means, pair) ==
        doctest::Approx(2.0 * -2.622314898965513).epsilon(1e-12));
}

TEST_CASE("pam_loglik inconsistency and additivity") {
  std::map<std::pair<int, int>, double> means;
  means[{3, 0}] = 0.0;
  std::vector<CallCount> impossible{{3, 0, 2}};
  CHECK_THROWS_AS(pam_loglik(means, impossible), validation_error);
  std::vector<CallCount> fine{{3, 0, 0}};
  CHECK(pam_loglik(means, fine) == doctest::Approx(0.0));

  // Additivity across hydrophones and days at 1e-12.
  std::map<std::pair<int, int>, double> m2;
  m2[{3, 0}] = 4.2;
  m2[{4, 1}] = 9.9;
  std::vector<CallCount> both{{3, 0, 3}, {4, 1, 12}};
  std::vector<CallCount> first{{3, 0, 3}};
  std::vector<CallCount> second{{4, 1, 12}};
  CHECK(pam_loglik(m2, both) ==
        doctest::Approx(pam_loglik(m2, first) + pam_loglik(m2, second))
            .epsilon(1e-12));
}
