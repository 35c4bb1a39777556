#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "zwf/diagnostics.hpp"
#include "zwf/errors.hpp"
#include "zwf/mcmc.hpp"
#include "zwf/simulate.hpp"

using namespace zwf;
using namespace zwf::testutil;

namespace {

// A small simulated joint dataset shared by several tests.
const SimOutput& shared_sim() {
  static const SimOutput out = [] {
    ScenarioSpec spec = default_config().scenario;
    spec.bounds = {0, 0, 10, 6};
    spec.mask.clear();
    spec.zoop_days = {1, 2, 3};
    spec.whale_days = {2, 3};
    spec.zoop_sampling = "moderate";
    spec.whale_sampling = "low";
    spec.surface_prob.clear();
    spec.duration_hours.clear();
    return simulate_scenario(spec, PsiMode::shared, 4242);
  }();
  return out;
}

double gamma_moment_quadrature(double shape, double scale, int power) {
  // Simpson's rule over [0, 80]; the far tail is negligible here.
  const int n = 40000;
  const double h = 80.0 / n;
  auto f = [&](double x) {
    if (x <= 0.0) return 0.0;
    return std::pow(x, power) *
           std::exp((shape - 1.0) * std::log(x) - x / scale -
                    std::lgamma(shape) - shape * std::log(scale));
  };
  double acc = f(0.0) + f(80.0);
  for (int i = 1; i < n; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("prior density helpers: golden values") {
  double five_zeros = 0.0;
  for (int i = 0; i < 5; ++i) five_zeros += normal_logpdf(0.0, 0.0, 100.0);
  CHECK(five_zeros == doctest::Approx(-16.107618130993593).epsilon(1e-12));
  CHECK(invgamma_logpdf(1.0, 2.0, 2.0) ==
        doctest::Approx(-0.6137056388801094).epsilon(1e-12));
  CHECK(invgamma_logpdf(-0.5, 2.0, 2.0) ==
        -std::numeric_limits<double>::infinity());

  // Gamma(9/4, scale 4/3): mean 3, variance 4, checked by quadrature.
  const double m1 = gamma_moment_quadrature(2.25, 4.0 / 3.0, 1);
  const double m2 = gamma_moment_quadrature(2.25, 4.0 / 3.0, 2);
  CHECK(m1 == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(m2 - m1 * m1 == doctest::Approx(4.0).epsilon(1e-5));
  // The normalizer integrates to one with these parameters.
  CHECK(gamma_moment_quadrature(2.25, 4.0 / 3.0, 0) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("model prior_logdensity sums the block priors") {
  const SimOutput& sim = shared_sim();
  RunConfig cfg = quick_config(10, 5, 1);
  JointModel model(sim.dataset, cfg);
  ChainState s = model.init_state(0);

  double manual = 0.0;
  for (int i = 0; i < s.alpha.size(); ++i)
    manual += normal_logpdf(s.alpha[i], 0.0, 100.0);
  manual += normal_logpdf(s.lam0, 0.0, 100.0);
  manual += normal_logpdf(s.lam1, 0.0, 100.0);
  manual += invgamma_logpdf(s.sig2_sur, 2.0, 2.0);
  manual += invgamma_logpdf(s.kappa_eta, 2.0, 2.0);
  for (int i = 0; i < s.beta.size(); ++i)
    manual += normal_logpdf(s.beta[i], 0.0, 100.0);
  manual += invgamma_logpdf(s.kappa_psi, 2.0, 2.0);
  for (double c : s.c) manual += gamma_logpdf(c, 2.25, 4.0 / 3.0);
  CHECK(model.prior_logdensity(s) == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("posterior kernel equals the independent re-summation") {
  const SimOutput& sim = shared_sim();
  const SurveyDataset& data = sim.dataset;
  RunConfig cfg = quick_config(40, 20, 1);
  JointModel model(data, cfg);
  ChainState s = model.init_state(1);
  for (int i = 0; i < 40; ++i) {
    ++s.iteration;
    model.update_scalars(s);
    model.update_fields(s);
  }

  // Route B: public per-module operations on exported parameters.
  const ZoopParams zp = model.zoop_params(s);
  const WhaleParams wp = model.whale_params(s);
  const Grid& g = data.grid;
  GpFactor gp_eta(g, {s.kappa_eta, model.decay()});
  GpFactor gp_psi(g, {s.kappa_psi, model.decay()});

  double manual = model.prior_logdensity(s);
  std::map<int, ScalarField> log_z;
  for (int d = 0; d < model.n_zoop_days(); ++d) {
    const int day = model.zoop_days()[d];
    ScalarField eta(g, s.eta[d]);
    manual += gp_eta.logpdf(eta);
    log_z.emplace(day,
                  latent_log_field(zp, day, data.temperature.at(day), eta));
  }
  for (const Eigen::VectorXd& psi : s.psi)
    manual += gp_psi.logpdf(ScalarField(g, psi));

  manual += oblique_loglik(zp, log_z, data.tows);
  manual += surface_loglik(zp, log_z, data.tows);

  std::map<int, ScalarField> intensity;
  std::map<std::pair<int, int>, double> pam_means;
  for (int w = 0; w < model.n_whale_days(); ++w) {
    const int day = model.whale_days()[w];
    const ScalarField psi(
        g, s.psi[model.psi_mode() == PsiMode::shared ? 0 : w]);
    intensity.emplace(day, whale_intensity(wp, day, data.bathymetry,
                                           log_z.at(day), psi));
    for (const Hydrophone& h : data.hydrophones)
      pam_means[{day, h.id}] = pam_mean(wp, day, h, data.noise.noise(day, h.id),
                                        intensity.at(day));
  }
  manual += dist_loglik(wp, intensity, data.transects, data.sightings);
  manual += pam_loglik(pam_means, data.calls);

  CHECK(model.log_posterior(s) ==
        doctest::Approx(manual).epsilon(1e-10));
}

TEST_CASE("updates are deterministic given the seed") {
  const SimOutput& sim = shared_sim();
  RunConfig cfg = quick_config(60, 30, 3);
  JointModel model(sim.dataset, cfg);
  MemorySink a, b;
  model.run_chain(0, a);
  model.run_chain(0, b);
  REQUIRE(a.draws.size() == b.draws.size());
  REQUIRE(!a.draws.empty());
  for (std::size_t i = 0; i < a.draws.size(); ++i) {
    for (std::size_t k = 0; k < a.draws[i].scalars.size(); ++k)
      CHECK(a.draws[i].scalars[k] == b.draws[i].scalars[k]);
    CHECK(a.draws[i].loglik == b.draws[i].loglik);
  }
  MemorySink c;
  model.run_chain(1, c);
  CHECK(c.draws.back().scalars[0] != a.draws.back().scalars[0]);
}

TEST_CASE("iterations = 0 returns the initialization draw only") {
  const SimOutput& sim = shared_sim();
  RunConfig cfg = quick_config(0, 0, 1);
  JointModel model(sim.dataset, cfg);
  MemorySink sink;
  const ChainState s = model.run_chain(0, sink);
  CHECK(sink.draws.size() == 1);
  CHECK(s.iteration == 0);
  CHECK(sink.draws[0].scalars.size() == model.scalar_names().size());
}

TEST_CASE("checkpoint resume reproduces identical draws") {
  const SimOutput& sim = shared_sim();
  RunConfig cfg = quick_config(300, 100, 10);
  cfg.mcmc.checkpoint_every = 140;
  cfg.mcmc.audit_every = 100;
  JointModel model(sim.dataset, cfg);

  struct CapturingSink : MemorySink {
    std::vector<std::pair<long, std::string>> checkpoints;
    const JointModel* model = nullptr;
    void on_checkpoint(const ChainState& s) override {
      checkpoints.emplace_back(s.iteration, model->checkpoint_json(s));
    }
  };
  CapturingSink full;
  full.model = &model;
  model.run_chain(2, full);
  REQUIRE(full.checkpoints.size() >= 2);
  REQUIRE(full.checkpoints[0].first == 140);

  ChainState resumed = model.restore_checkpoint(full.checkpoints[0].second);
  MemorySink tail;
  model.run_chain(std::move(resumed), tail);

  // Draws after iteration 140 must match the uninterrupted run exactly.
  std::size_t offset = 0;
  while (offset < full.draws.size() && full.draws[offset].iteration <= 140)
    ++offset;
  REQUIRE(full.draws.size() - offset == tail.draws.size());
  for (std::size_t i = 0; i < tail.draws.size(); ++i) {
    const PosteriorDraw& x = full.draws[offset + i];
    const PosteriorDraw& y = tail.draws[i];
    CHECK(x.iteration == y.iteration);
    for (std::size_t k = 0; k < x.scalars.size(); ++k)
      CHECK(x.scalars[k] == y.scalars[k]);
    CHECK(x.loglik == y.loglik);
    for (std::size_t d = 0; d < x.log_z.size(); ++d)
      CHECK((x.log_z[d] - y.log_z[d]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("cache audit passes after live sweeps") {
  const SimOutput& sim = shared_sim();
  RunConfig cfg = quick_config(50, 25, 5);
  JointModel model(sim.dataset, cfg);
  ChainState s = model.init_state(0);
  for (int i = 0; i < 50; ++i) {
    ++s.iteration;
    model.update_scalars(s);
    model.update_fields(s);
  }
  CHECK_NOTHROW(model.audit(s));
}

TEST_CASE("acceptance rates sit in the adapted window") {
  const SimOutput& sim = shared_sim();
  RunConfig cfg = quick_config(4000, 2000, 10);
  JointModel model(sim.dataset, cfg);
  MemorySink sink;
  const ChainState s = model.run_chain(0, sink);
  const auto rates = model.acceptance_rates(s);
  REQUIRE(!rates.empty());
  for (const auto& [name, rate] : rates) {
    INFO(name, " acceptance ", rate);
    CHECK(rate >= 0.1);
    CHECK(rate <= 0.6);
  }
}

TEST_CASE("ESS under a constant likelihood samples the GP prior") {
  SurveyDataset ds = skeleton_dataset(3, 3, {1}, {});
  RunConfig cfg = quick_config(10, 5, 1, Component::zoop_only);
  JointModel model(ds, cfg);
  ChainState s = model.init_state(0);
  const double kappa = 0.7;
  s.kappa_eta = kappa;
  model.refresh(s);

  const int n = 10000;
  Eigen::MatrixXd draws(n, ds.grid.n_active());
  for (int i = 0; i < n; ++i) {
    model.update_fields(s);
    draws.row(i) = s.eta[0];
  }
  for (int cell = 0; cell < ds.grid.n_active(); ++cell) {
    const double mean = draws.col(cell).mean();
    const double var =
        (draws.col(cell).array() - mean).square().sum() / (n - 1);
    CHECK(var == doctest::Approx(kappa).epsilon(0.10));
  }
}

TEST_CASE("conjugate oracle: field posterior on a 4-cell grid") {
  // Only oblique data, all scalars fixed: the log Z posterior is Gaussian
  // with a closed form.
  SurveyDataset ds = skeleton_dataset(2, 2, {1}, {});
  const double alpha0 = 5.5, kappa = 0.8, sig2 = 1.0;
  Rng obs_rng(808);
  std::vector<int> obs_cells{0, 0, 1, 2, 3, 3, 3};
  for (int cell : obs_cells) {
    const Point c = ds.grid.centroid(ds.grid.active_ids()[cell]);
    ds.tows.push_back({1, c, TowKind::oblique,
                       std::exp(obs_rng.rnorm(alpha0, 1.2))});
  }

  RunConfig cfg = quick_config(10, 5, 1, Component::zoop_only);
  JointModel model(ds, cfg);

  // Closed form in eta: Sigma = (R^-1/kappa + D/sig2)^-1.
  const int m = 4;
  Eigen::MatrixXd corr(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      corr(i, j) = std::exp(
          -std::hypot(ds.grid.centroid(i).x - ds.grid.centroid(j).x,
                      ds.grid.centroid(i).y - ds.grid.centroid(j).y) /
          model.decay());
  Eigen::MatrixXd prec = corr.inverse() / kappa;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < obs_cells.size(); ++i) {
    prec(obs_cells[i], obs_cells[i]) += 1.0 / sig2;
    rhs[obs_cells[i]] += (std::log(ds.tows[i].value) - alpha0) / sig2;
  }
  const Eigen::MatrixXd cov_post = prec.inverse();
  const Eigen::VectorXd mean_logz =
      (cov_post * rhs).array() + alpha0;  // log Z = alpha0 + eta

  // MCMC: fields only, scalars pinned at the oracle's values.
  auto run = [&](int chain) {
    ChainState s = model.init_state(chain);
    s.alpha.setZero();
    s.alpha[0] = alpha0;
    s.kappa_eta = kappa;
    model.refresh(s);
    Eigen::MatrixXd draws(10000, m);
    for (int i = 0; i < 10000; ++i) {
      model.update_fields(s);
      draws.row(i) = s.log_z[0];
    }
    return draws;
  };
  const Eigen::MatrixXd c1 = run(0), c2 = run(1);

  for (int cell = 0; cell < m; ++cell) {
    const double ess =
        bulk_ess({Eigen::VectorXd(c1.col(cell)), Eigen::VectorXd(c2.col(cell))});
    const double sd_true = std::sqrt(cov_post(cell, cell));
    const double mc_mean = 0.5 * (c1.col(cell).mean() + c2.col(cell).mean());
    const double se_mean = sd_true / std::sqrt(ess);
    INFO("cell ", cell, " ess ", ess);
    CHECK(std::abs(mc_mean - mean_logz[cell]) < 3.0 * se_mean);

    auto sd_of = [&](const Eigen::MatrixXd& d) {
      const double mu = d.col(cell).mean();
      return std::sqrt((d.col(cell).array() - mu).square().sum() /
                       (d.rows() - 1));
    };
    const double mc_sd = 0.5 * (sd_of(c1) + sd_of(c2));
    const double se_sd = sd_true / std::sqrt(2.0 * ess);
    CHECK(std::abs(mc_sd - sd_true) < 3.0 * se_sd);
  }
}

TEST_CASE("prior recovery on an empty dataset (reduced sweep)") {
  SurveyDataset ds = skeleton_dataset(2, 2, {1, 2, 3}, {2, 3});
  RunConfig cfg = quick_config(30000, 10000, 5);
  JointModel model(ds, cfg);
  MemorySink sink;
  model.run_chain(0, sink);
  const std::size_t n = sink.draws.size();
  REQUIRE(n == 4000);

  const auto names = model.scalar_names();
  const auto col = [&](const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    REQUIRE(it != names.end());
    const std::size_t k = it - names.begin();
    Eigen::VectorXd v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = sink.draws[i].scalars[k];
    return v;
  };

  const Eigen::VectorXd bz = col("beta_zoop");
  const Eigen::VectorXd half1 = bz.head(n / 2), half2 = bz.tail(n / 2);
  const double ess = bulk_ess({half1, half2});
  const double mean = bz.mean();
  const double sd = std::sqrt((bz.array() - mean).square().sum() / (n - 1));
  INFO("beta_zoop ess ", ess);
  CHECK(std::abs(mean - 0.0) < 3.0 * 10.0 / std::sqrt(ess));
  CHECK(std::abs(sd - 10.0) < 3.0 * 10.0 / std::sqrt(2.0 * ess));

  // c_2 has the gamma prior: mean 3, variance 4.
  const Eigen::VectorXd c2 = col("c_2");
  const double c_ess = bulk_ess({c2.head(n / 2), c2.tail(n / 2)});
  CHECK(std::abs(c2.mean() - 3.0) < 3.0 * 2.0 / std::sqrt(c_ess));

  // sig2_sur ~ IG(2, 2) has no finite variance; check E[1/x] = 1 instead.
  const Eigen::VectorXd s2 = col("sig2_sur");
  Eigen::VectorXd inv = s2.array().inverse();
  const double inv_ess = bulk_ess({inv.head(n / 2), inv.tail(n / 2)});
  // 1/x ~ Gamma(2, rate 2): mean 1, sd 1/sqrt(2).
  CHECK(std::abs(inv.mean() - 1.0) <
        3.0 * (1.0 / std::sqrt(2.0)) / std::sqrt(inv_ess));
}

TEST_CASE("daily-psi model degenerates to shared at kappa_psi -> 0") {
  const SimOutput& sim = shared_sim();
  RunConfig shared_cfg = quick_config(10, 5, 1, Component::joint, PsiMode::shared);
  RunConfig daily_cfg = quick_config(10, 5, 1, Component::joint, PsiMode::daily);
  JointModel shared_model(sim.dataset, shared_cfg);
  JointModel daily_model(sim.dataset, daily_cfg);

  ChainState a = shared_model.init_state(0);
  ChainState b = daily_model.init_state(0);
  a.kappa_psi = 1e-8;
  b.kappa_psi = 1e-8;
  for (auto& f : a.psi) f.setZero();
  for (auto& f : b.psi) f.setZero();
  shared_model.refresh(a);
  daily_model.refresh(b);

  CHECK(a.data_loglik() == doctest::Approx(b.data_loglik()).epsilon(1e-12));

  // The posteriors differ only by a parameter-free constant (the extra
  // zero-field GP normalizers), so the gap is flat across random states.
  Rng rng(15);
  const double gap0 = shared_model.log_posterior(a) - daily_model.log_posterior(b);
  for (int rep = 0; rep < 20; ++rep) {
    ChainState a2 = a;
    ChainState b2 = b;
    const double shift = rng.rnorm(0.0, 0.5);
    a2.beta[0] += shift;
    b2.beta[0] += shift;
    const double c_scale = std::exp(0.3 * rng.rnorm());
    a2.c[0] *= c_scale;
    b2.c[0] *= c_scale;
    a2.alpha[1] += 0.2 * rng.rnorm();
    b2.alpha[1] = a2.alpha[1];
    shared_model.refresh(a2);
    daily_model.refresh(b2);
    const double gap = shared_model.log_posterior(a2) - daily_model.log_posterior(b2);
    CHECK(gap == doctest::Approx(gap0).epsilon(1e-4));
  }
}

TEST_CASE("restore_checkpoint rejects mismatched models") {
  const SimOutput& sim = shared_sim();
  RunConfig cfg = quick_config(10, 5, 1);
  JointModel model(sim.dataset, cfg);
  ChainState s = model.init_state(0);
  const std::string ck = model.checkpoint_json(s);

  RunConfig other = quick_config(10, 5, 1, Component::zoop_only);
  JointModel other_model(sim.dataset, other);
  CHECK_THROWS_AS(other_model.restore_checkpoint(ck), validation_error);
}
