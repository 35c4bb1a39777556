#include "zwf/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "zwf/errors.hpp"

#include "json.hpp"

namespace zwf {

using nlohmann::json;

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr long kEssMaxShrink = 10000;
constexpr long kCovRebuild = 200;
}  // namespace

double normal_logpdf(double x, double mean, double variance) {
  const double r = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * variance) -
         0.5 * r * r / variance;
}

double invgamma_logpdf(double x, double shape, double rate) {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - rate / x;
}

double gamma_logpdf(double x, double shape, double scale) {
  if (!(x > 0.0)) return kNegInf;
  return -std::lgamma(shape) - shape * std::log(scale) +
         (shape - 1.0) * std::log(x) - x / scale;
}

double ChainState::data_loglik() const {
  double ll = 0.0;
  for (double v : ll_obl_day) ll += v;
  for (double v : ll_sur_day) ll += v;
  for (double v : ll_dist_day) ll += v;
  for (double v : ll_pam_day) ll += v;
  return ll;
}

// ---------------------------------------------------------------------------
// Model preparation
// ---------------------------------------------------------------------------

JointModel::JointModel(const SurveyDataset& data, const RunConfig& cfg)
    : data_(&data), cfg_(cfg) {
  const Grid& grid = data.grid;
  n_active_ = grid.n_active();
  cell_area_ = grid.cell_area();
  domain_area_ = n_active_ * cell_area_;

  const double range = cfg.fixed.effective_range_km > 0.0
                           ? cfg.fixed.effective_range_km
                           : default_effective_range(grid.bounds());
  phi_ = decay_from_effective_range(range);
  factor_ = std::make_unique<GpFactor>(grid, GpSpec{1.0, phi_});

  zoop_days_ = data.zoop_days;
  whale_days_ = data.whale_days;

  for (int day : zoop_days_) temp_.push_back(data.temperature.at(day).values);
  bath_ = data.bathymetry.values;

  // Tow observations resolved to active cells, indexed by day.
  obl_.by_day.resize(zoop_days_.size());
  sur_.by_day.resize(zoop_days_.size());
  for (const TowObservation& o : data.tows) {
    const int d = data.zoop_day_index(o.day);
    if (d < 0)
      throw validation_error("tow on day " + std::to_string(o.day) +
                             " which is not a zooplankton day");
    const int cell = grid.active_cell_at(o.location);
    if (cell < 0) throw validation_error("tow outside the active domain");
    if (!(o.value > 0.0)) throw validation_error("tow value must be > 0");
    TowIndex& ti = o.kind == TowKind::oblique ? obl_ : sur_;
    ti.by_day[d].push_back(static_cast<int>(ti.logy.size()));
    ti.day_idx.push_back(d);
    ti.cell.push_back(cell);
    ti.logy.push_back(std::log(o.value));
  }

  // Whale-day detection geometry: per-transect profiles are folded into a
  // per-day sum for the integral, and point terms keep their data-fixed
  // detection factor as a constant.
  for (std::size_t w = 0; w < whale_days_.size(); ++w) {
    WhaleDay wd;
    wd.day = whale_days_[w];
    wd.zoop_idx = data.zoop_day_index(wd.day);
    if (wd.zoop_idx < 0)
      throw validation_error("whale day " + std::to_string(wd.day) +
                             " is not a zooplankton day");
    wd.pi = data.surface_prob.at(wd.day);
    auto dur = data.duration_hours.find(wd.day);
    wd.duration = dur != data.duration_hours.end() ? dur->second : 0.0;
    wd.det_sum = Eigen::VectorXd::Zero(n_active_);

    for (const Transect& t : data.transects) {
      auto pat = data.sightings.find({wd.day, t.id});
      if (pat == data.sightings.end()) continue;  // not flown that day
      Eigen::VectorXd prof(n_active_);
      for (int a = 0; a < n_active_; ++a)
        prof[a] = dist_detection_profile(
            dist_to_transect(grid.centroid(grid.active_ids()[a]), t));
      wd.det_sum += prof;
      const PointPattern& pp = pat->second;
      for (std::size_t i = 0; i < pp.points.size(); ++i) {
        const int cell = grid.active_cell_at(pp.points[i]);
        if (cell < 0)
          throw validation_error("sighting outside the active domain on day " +
                                 std::to_string(wd.day));
        const double p = wd.pi * prof[cell];
        if (!(p > 0.0))
          throw validation_error(
              "sighting with zero detection probability on day " +
              std::to_string(wd.day) + ", transect " + std::to_string(t.id));
        const double weight = pp.weight(i);
        wd.point_const += weight * std::log(p);
        wd.point_cells.emplace_back(cell, weight);
      }
    }

    for (const CallCount& cc : data.calls) {
      if (cc.day != wd.day) continue;
      const Hydrophone* hydro = nullptr;
      for (const Hydrophone& h : data.hydrophones)
        if (h.id == cc.hydrophone) hydro = &h;
      if (hydro == nullptr)
        throw validation_error("call count for unknown hydrophone " +
                               std::to_string(cc.hydrophone));
      const double noise = data.noise.noise(cc.day, cc.hydrophone);
      Eigen::VectorXd p(n_active_);
      for (int a = 0; a < n_active_; ++a)
        p[a] = pam_detection(
            noise, dist_to_hydrophone(grid.centroid(grid.active_ids()[a]), *hydro));
      if (cc.calls > 0 && p.maxCoeff() <= 0.0)
        throw validation_error(
            "positive call count but zero detection probability everywhere "
            "for hydrophone " + std::to_string(cc.hydrophone));
      if (cc.calls > 0 && !(wd.duration > 0.0))
        throw validation_error("missing survey duration for whale day " +
                               std::to_string(wd.day));
      wd.hydro_ids.push_back(cc.hydrophone);
      wd.pam_p.push_back(std::move(p));
      wd.pam_w.push_back(static_cast<double>(cc.calls));
      wd.pam_const -= std::lgamma(static_cast<double>(cc.calls) + 1.0);
    }
    wd.has_data = wd.det_sum.size() > 0 && (wd.det_sum.maxCoeff() > 0.0 ||
                                            !wd.point_cells.empty() ||
                                            !wd.pam_p.empty());
    wdays_.push_back(std::move(wd));
  }

  if (has_zoop()) {
    for (int day : zoop_days_) scalar_names_.push_back("alpha0_" + std::to_string(day));
    scalar_names_.push_back("alpha_temp");
    scalar_names_.push_back("lam0_sur");
    scalar_names_.push_back("lam1_sur");
    scalar_names_.push_back("sig2_sur");
    scalar_names_.push_back("kappa_eta");
  }
  if (has_whale()) {
    for (int day : whale_days_) scalar_names_.push_back("beta0_" + std::to_string(day));
    scalar_names_.push_back("beta_bath");
    if (beta_has_zoop()) scalar_names_.push_back("beta_zoop");
    scalar_names_.push_back("kappa_psi");
    for (int day : whale_days_) scalar_names_.push_back("c_" + std::to_string(day));
  }

  block_names_ = {"alpha", "lam_sur", "sig2_sur", "kappa_eta",
                  "beta", "kappa_psi"};
  for (int day : whale_days_) block_names_.push_back("c_" + std::to_string(day));
  block_names_.push_back("kappa_eta_scale");
  block_names_.push_back("kappa_psi_scale");
  block_names_.push_back("beta_zoop_ridge");
  for (int day : whale_days_)
    block_names_.push_back("scale_tradeoff_" + std::to_string(day));

  ones_white_ = factor_->whiten(Eigen::VectorXd::Ones(n_active_));
  ones_quad_ = ones_white_.squaredNorm();
  for (const Eigen::VectorXd& t : temp_) temp_white_.push_back(factor_->whiten(t));
  bath_white_ = factor_->whiten(bath_);
}

int JointModel::n_psi() const {
  if (!has_whale()) return 0;
  return cfg_.psi_mode == PsiMode::shared ? 1
                                          : static_cast<int>(whale_days_.size());
}

// ---------------------------------------------------------------------------
// Derived caches: always whole-day recomputation, one code path each.
// ---------------------------------------------------------------------------

void JointModel::recompute_zoop_day(ChainState& s, int d) const {
  s.log_z[d] = s.alpha[d] + (s.alpha[alpha_dim() - 1] * temp_[d].array() +
                             s.eta[d].array());
  s.log_z_mean[d] = s.log_z[d].mean();
}

void JointModel::recompute_log_z_bar(ChainState& s) const {
  double sum = 0.0;
  for (double m : s.log_z_mean) sum += m;
  s.log_z_bar = sum / static_cast<double>(s.log_z_mean.size());
}

void JointModel::recompute_whale_day(ChainState& s, int w) const {
  const WhaleDay& wd = wdays_[w];
  const int nw = n_whale_days();
  const double beta0 = s.beta[w];
  const double beta_bath = s.beta[nw];
  Eigen::ArrayXd ex = beta0 + beta_bath * bath_.array();
  if (beta_has_zoop())
    ex += s.beta[nw + 1] * (s.log_z[wd.zoop_idx].array() - s.log_z_bar);
  const Eigen::VectorXd& psi =
      s.psi[cfg_.psi_mode == PsiMode::shared ? 0 : w];
  ex += psi.array();
  s.log_lambda[w] = ex;
  s.lambda[w] = ex.exp();
  if (!wd.has_data) {
    // Flat likelihood in lambda: keep the caches inert.
    s.dist_dot[w] = 0.0;
    s.point_logsum[w] = 0.0;
    return;
  }
  s.dist_dot[w] = wd.det_sum.dot(s.lambda[w]);
  for (std::size_t k = 0; k < wd.pam_p.size(); ++k)
    s.pam_dot[w][k] = wd.pam_p[k].dot(s.lambda[w]);
  double plog = 0.0;
  for (const auto& [cell, weight] : wd.point_cells)
    plog += weight * s.log_lambda[w][cell];
  s.point_logsum[w] = plog;
}

bool JointModel::try_recompute_whale(ChainState& s) const {
  for (int w = 0; w < n_whale_days(); ++w) {
    const WhaleDay& wd = wdays_[w];
    if (!wd.has_data) continue;
    const int nw = n_whale_days();
    Eigen::ArrayXd ex = s.beta[w] + s.beta[nw] * bath_.array();
    if (beta_has_zoop())
      ex += s.beta[nw + 1] * (s.log_z[wd.zoop_idx].array() - s.log_z_bar);
    ex += s.psi[cfg_.psi_mode == PsiMode::shared ? 0 : w].array();
    if ((ex > 700.0).any()) return false;
  }
  for (int w = 0; w < n_whale_days(); ++w) recompute_whale_day(s, w);
  for (int w = 0; w < n_whale_days(); ++w) {
    recompute_ll_dist_day(s, w);
    recompute_ll_pam_day(s, w);
  }
  return true;
}

void JointModel::recompute_ll_obl_day(ChainState& s, int d) const {
  const double sig2 = cfg_.fixed.sig2_obl;
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * sig2);
  double ll = 0.0;
  for (int i : obl_.by_day[d]) {
    const double r = obl_.logy[i] - s.log_z[d][obl_.cell[i]];
    ll += log_norm - 0.5 * r * r / sig2;
  }
  s.ll_obl_day[d] = ll;
}

void JointModel::recompute_ll_sur_day(ChainState& s, int d) const {
  const double log_norm =
      -0.5 * std::log(2.0 * std::numbers::pi * s.sig2_sur);
  double ll = 0.0;
  for (int i : sur_.by_day[d]) {
    const double r =
        sur_.logy[i] - (s.lam0 + s.lam1 * s.log_z[d][sur_.cell[i]]);
    ll += log_norm - 0.5 * r * r / s.sig2_sur;
  }
  s.ll_sur_day[d] = ll;
}

void JointModel::recompute_ll_dist_day(ChainState& s, int w) const {
  const WhaleDay& wd = wdays_[w];
  s.ll_dist_day[w] = -wd.pi * cell_area_ * s.dist_dot[w] + wd.point_const +
                     s.point_logsum[w];
}

void JointModel::recompute_ll_pam_day(ChainState& s, int w) const {
  const WhaleDay& wd = wdays_[w];
  double ll = wd.pam_const;
  const double cd = s.c[w] * wd.duration;
  for (std::size_t k = 0; k < wd.pam_p.size(); ++k) {
    const double mean = cd * cell_area_ * s.pam_dot[w][k];
    if (mean <= 0.0) {
      if (wd.pam_w[k] > 0.0)
        throw numerical_error("PAM mean collapsed to zero at day " +
                              std::to_string(wd.day));
      continue;
    }
    ll += -mean + wd.pam_w[k] * std::log(mean);
  }
  s.ll_pam_day[w] = ll;
}

void JointModel::refresh(ChainState& s) const {
  const int nz = has_zoop() ? n_zoop_days() : 0;
  const int nw = has_whale() ? n_whale_days() : 0;
  s.log_z.resize(nz);
  s.log_z_mean.resize(nz);
  s.log_lambda.resize(nw);
  s.lambda.resize(nw);
  s.dist_dot.assign(nw, 0.0);
  s.pam_dot.resize(nw);
  for (int w = 0; w < nw; ++w) s.pam_dot[w].assign(wdays_[w].pam_p.size(), 0.0);
  s.point_logsum.assign(nw, 0.0);
  s.ll_obl_day.assign(nz, 0.0);
  s.ll_sur_day.assign(nz, 0.0);
  s.ll_dist_day.assign(nw, 0.0);
  s.ll_pam_day.assign(nw, 0.0);

  if (has_zoop()) {
    for (int d = 0; d < nz; ++d) recompute_zoop_day(s, d);
    recompute_log_z_bar(s);
    for (int d = 0; d < nz; ++d) {
      recompute_ll_obl_day(s, d);
      recompute_ll_sur_day(s, d);
    }
  } else {
    // Whale-only: log Z is not part of the model.
    s.log_z_bar = 0.0;
  }
  if (has_whale()) {
    if (!try_recompute_whale(s))
      throw numerical_error("whale intensity overflow in current state");
  }
}

void JointModel::audit(const ChainState& s) const {
  ChainState fresh = s;
  refresh(fresh);
  auto check = [&](double a, double b, const char* what) {
    if (std::abs(a - b) > 1e-8 * std::max(1.0, std::abs(b)))
      throw numerical_error(std::string("cache audit failed for ") + what +
                            ": cached " + std::to_string(a) + " vs fresh " +
                            std::to_string(b) + " at iteration " +
                            std::to_string(s.iteration));
  };
  for (std::size_t d = 0; d < s.ll_obl_day.size(); ++d) {
    check(s.ll_obl_day[d], fresh.ll_obl_day[d], "oblique loglik");
    check(s.ll_sur_day[d], fresh.ll_sur_day[d], "surface loglik");
  }
  for (std::size_t w = 0; w < s.ll_dist_day.size(); ++w) {
    check(s.ll_dist_day[w], fresh.ll_dist_day[w], "distance loglik");
    check(s.ll_pam_day[w], fresh.ll_pam_day[w], "pam loglik");
  }
  if (has_zoop()) check(s.log_z_bar, fresh.log_z_bar, "log_z_bar");
  for (std::size_t d = 0; d < s.eta.size(); ++d) {
    const Eigen::VectorXd w = factor_->whiten(s.eta[d]);
    if ((s.eta_white[d] - w).cwiseAbs().maxCoeff() > 1e-6)
      throw numerical_error("cache audit failed for whitened eta " +
                            std::to_string(d));
  }
  for (std::size_t p = 0; p < s.psi.size(); ++p) {
    const Eigen::VectorXd w = factor_->whiten(s.psi[p]);
    if ((s.psi_white[p] - w).cwiseAbs().maxCoeff() > 1e-6)
      throw numerical_error("cache audit failed for whitened psi " +
                            std::to_string(p));
  }
}

// ---------------------------------------------------------------------------
// Priors and posterior
// ---------------------------------------------------------------------------

double JointModel::prior_logdensity(const ChainState& s) const {
  const PriorSpec& p = cfg_.priors;
  double lp = 0.0;
  if (has_zoop()) {
    for (int i = 0; i < alpha_dim(); ++i)
      lp += normal_logpdf(s.alpha[i], 0.0, p.regression_variance);
    lp += normal_logpdf(s.lam0, 0.0, p.regression_variance);
    lp += normal_logpdf(s.lam1, 0.0, p.regression_variance);
    lp += invgamma_logpdf(s.sig2_sur, p.ig_shape, p.ig_rate);
    lp += invgamma_logpdf(s.kappa_eta, p.ig_shape, p.ig_rate);
  }
  if (has_whale()) {
    for (int i = 0; i < beta_dim(); ++i)
      lp += normal_logpdf(s.beta[i], 0.0, p.regression_variance);
    lp += invgamma_logpdf(s.kappa_psi, p.ig_shape, p.ig_rate);
    for (double c : s.c) lp += gamma_logpdf(c, p.call_rate_shape, p.call_rate_scale);
  }
  return lp;
}

double JointModel::gp_logprior(const ChainState& s) const {
  double lp = 0.0;
  for (const Eigen::VectorXd& w : s.eta_white)
    lp += factor_->logpdf_whitened(w.squaredNorm(), s.kappa_eta);
  for (const Eigen::VectorXd& w : s.psi_white)
    lp += factor_->logpdf_whitened(w.squaredNorm(), s.kappa_psi);
  return lp;
}

double JointModel::log_posterior(const ChainState& s) const {
  return prior_logdensity(s) + gp_logprior(s) + s.data_loglik();
}

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

ChainState JointModel::init_state(int chain_id) const {
  ChainState s;
  s.chain_id = chain_id;
  Rng init(derive_seed(cfg_.seed, StreamId::chain_init,
                       static_cast<std::uint64_t>(chain_id)));

  const int nz = n_zoop_days();
  const int nw = n_whale_days();

  if (has_zoop()) {
    double anchor = 0.0;
    if (!obl_.logy.empty()) {
      for (double v : obl_.logy) anchor += v;
      anchor /= static_cast<double>(obl_.logy.size());
    }
    s.alpha = Eigen::VectorXd::Zero(alpha_dim());
    for (int d = 0; d < nz; ++d) s.alpha[d] = anchor + init.rnorm();
    s.alpha[nz] = 0.5 * init.rnorm();  // alpha_temp
    s.lam0 = 0.5 * init.rnorm();
    s.lam1 = 1.0 + 0.5 * init.rnorm();
    const double prior_mean = cfg_.priors.ig_rate / (cfg_.priors.ig_shape - 1.0);
    s.sig2_sur = prior_mean * std::exp(0.5 * init.rnorm());
    s.kappa_eta = prior_mean * std::exp(0.5 * init.rnorm());
    for (int d = 0; d < nz; ++d) {
      s.eta.push_back(Eigen::VectorXd::Zero(n_active_));
      s.eta_white.push_back(Eigen::VectorXd::Zero(n_active_));
    }
  }
  if (has_whale()) {
    s.beta = Eigen::VectorXd::Zero(beta_dim());
    for (int w = 0; w < nw; ++w) {
      double total = 0.0;
      for (const auto& [cell, weight] : wdays_[w].point_cells) total += weight;
      const double naive =
          std::max(total, 1.0) / (wdays_[w].pi * domain_area_);
      s.beta[w] = std::log(naive) + init.rnorm();
    }
    s.beta[nw] = 0.5 * init.rnorm();  // beta_bath
    if (beta_has_zoop()) s.beta[nw + 1] = 0.5 * init.rnorm();
    const double prior_mean = cfg_.priors.ig_rate / (cfg_.priors.ig_shape - 1.0);
    s.kappa_psi = prior_mean * std::exp(0.5 * init.rnorm());
    const double c_mean = cfg_.priors.call_rate_shape * cfg_.priors.call_rate_scale;
    for (int w = 0; w < nw; ++w) s.c.push_back(c_mean * std::exp(0.5 * init.rnorm()));
    for (int p = 0; p < n_psi(); ++p) {
      s.psi.push_back(Eigen::VectorXd::Zero(n_active_));
      s.psi_white.push_back(Eigen::VectorXd::Zero(n_active_));
    }
  }

  s.steps.clear();
  auto add_step = [&](double target, double step0) {
    AdaptiveScale a;
    a.target = target;
    a.log_step = std::log(step0);
    s.steps.push_back(a);
  };
  add_step(0.234, 0.1);  // alpha
  add_step(0.234, 0.1);  // lam pair
  add_step(0.44, 0.3);   // sig2_sur
  add_step(0.44, 0.3);   // kappa_eta
  add_step(0.234, 0.1);  // beta
  add_step(0.44, 0.3);   // kappa_psi
  for (int w = 0; w < nw; ++w) add_step(0.44, 0.3);
  add_step(0.44, 0.3);  // joint (kappa_eta, eta) rescale
  add_step(0.44, 0.3);  // joint (kappa_psi, psi) rescale
  add_step(0.44, 0.3);  // (beta_zoop, psi) ridge translation
  for (int w = 0; w < nw; ++w) add_step(0.44, 0.3);  // (beta0, c) trade-off

  if (has_zoop()) {
    s.alpha_adapt.mean = Eigen::VectorXd::Zero(alpha_dim());
    s.alpha_adapt.m2 = Eigen::MatrixXd::Zero(alpha_dim(), alpha_dim());
    s.alpha_adapt.chol = Eigen::MatrixXd::Identity(alpha_dim(), alpha_dim());
    s.lam_adapt.mean = Eigen::VectorXd::Zero(2);
    s.lam_adapt.m2 = Eigen::MatrixXd::Zero(2, 2);
    s.lam_adapt.chol = Eigen::MatrixXd::Identity(2, 2);
  }
  if (has_whale()) {
    s.beta_adapt.mean = Eigen::VectorXd::Zero(beta_dim());
    s.beta_adapt.m2 = Eigen::MatrixXd::Zero(beta_dim(), beta_dim());
    s.beta_adapt.chol = Eigen::MatrixXd::Identity(beta_dim(), beta_dim());
  }

  s.rng = Rng(derive_seed(cfg_.seed, StreamId::chain,
                          static_cast<std::uint64_t>(chain_id)));
  refresh(s);
  return s;
}

// ---------------------------------------------------------------------------
// Scalar block updates
// ---------------------------------------------------------------------------

void JointModel::adapt(AdaptiveScale& step, double acc_prob,
                       bool accepted) const {
  if (step.frozen) {
    ++step.proposals;
    if (accepted) ++step.accepts;
    return;
  }
  ++step.t;
  const double gamma = 1.0 / std::pow(10.0 + step.t, 0.7);
  step.log_step += gamma * (acc_prob - step.target);
  step.log_step = std::clamp(step.log_step, -15.0, 5.0);
}

namespace {

void welford_update(CovAdapt& ca, const Eigen::VectorXd& x) {
  if (ca.frozen) return;
  ++ca.n;
  const Eigen::VectorXd delta = x - ca.mean;
  ca.mean += delta / static_cast<double>(ca.n);
  ca.m2 += delta * (x - ca.mean).transpose();
  const int dim = static_cast<int>(x.size());
  if (ca.n >= std::max<long>(100, 10 * dim) && ca.n % kCovRebuild == 0) {
    Eigen::MatrixXd cov = ca.m2 / static_cast<double>(ca.n - 1);
    cov.diagonal().array() += 1e-9;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() == Eigen::Success) ca.chol = llt.matrixL();
  }
}

double acc_probability(double logratio) {
  if (logratio >= 0.0) return 1.0;
  if (logratio == kNegInf) return 0.0;
  return std::exp(logratio);
}

}  // namespace

void JointModel::update_block_alpha(ChainState& s) const {
  AdaptiveScale& step = s.steps[0];
  const double scale = std::exp(step.log_step);
  Eigen::VectorXd z(alpha_dim());
  for (int i = 0; i < alpha_dim(); ++i) z[i] = s.rng.rnorm();
  Eigen::VectorXd move = s.alpha_adapt.chol.triangularView<Eigen::Lower>() * z;
  const Eigen::VectorXd proposal = s.alpha + scale * move;

  // Backup everything downstream of log Z.
  const Eigen::VectorXd alpha0 = s.alpha;
  const auto log_z0 = s.log_z;
  const auto log_z_mean0 = s.log_z_mean;
  const double log_z_bar0 = s.log_z_bar;
  const auto ll_obl0 = s.ll_obl_day;
  const auto ll_sur0 = s.ll_sur_day;
  const auto log_lambda0 = s.log_lambda;
  const auto lambda0 = s.lambda;
  const auto dist_dot0 = s.dist_dot;
  const auto pam_dot0 = s.pam_dot;
  const auto point_logsum0 = s.point_logsum;
  const auto ll_dist0 = s.ll_dist_day;
  const auto ll_pam0 = s.ll_pam_day;

  const double ll_before = s.data_loglik();
  double lp_before = 0.0, lp_after = 0.0;
  for (int i = 0; i < alpha_dim(); ++i) {
    lp_before += normal_logpdf(s.alpha[i], 0.0, cfg_.priors.regression_variance);
    lp_after += normal_logpdf(proposal[i], 0.0, cfg_.priors.regression_variance);
  }

  s.alpha = proposal;
  bool ok = true;
  for (int d = 0; d < n_zoop_days(); ++d) recompute_zoop_day(s, d);
  recompute_log_z_bar(s);
  for (int d = 0; d < n_zoop_days(); ++d) {
    recompute_ll_obl_day(s, d);
    recompute_ll_sur_day(s, d);
  }
  if (has_whale() && beta_has_zoop()) ok = try_recompute_whale(s);

  const double logratio =
      ok ? (s.data_loglik() - ll_before + lp_after - lp_before) : kNegInf;
  const double acc = acc_probability(logratio);
  const bool accepted = std::log(s.rng.runif()) < logratio;
  if (!accepted) {
    s.alpha = alpha0;
    s.log_z = log_z0;
    s.log_z_mean = log_z_mean0;
    s.log_z_bar = log_z_bar0;
    s.ll_obl_day = ll_obl0;
    s.ll_sur_day = ll_sur0;
    s.log_lambda = log_lambda0;
    s.lambda = lambda0;
    s.dist_dot = dist_dot0;
    s.pam_dot = pam_dot0;
    s.point_logsum = point_logsum0;
    s.ll_dist_day = ll_dist0;
    s.ll_pam_day = ll_pam0;
  }
  adapt(step, acc, accepted);
  welford_update(s.alpha_adapt, s.alpha);
}

void JointModel::update_block_lam(ChainState& s) const {
  AdaptiveScale& step = s.steps[1];
  const double scale = std::exp(step.log_step);
  Eigen::Vector2d z{s.rng.rnorm(), s.rng.rnorm()};
  Eigen::Vector2d move = s.lam_adapt.chol.triangularView<Eigen::Lower>() * z;
  const double lam0_new = s.lam0 + scale * move[0];
  const double lam1_new = s.lam1 + scale * move[1];

  const double lam0_old = s.lam0, lam1_old = s.lam1;
  const auto ll_sur0 = s.ll_sur_day;
  double ll_before = 0.0;
  for (double v : s.ll_sur_day) ll_before += v;
  const double v100 = cfg_.priors.regression_variance;
  const double lp_before =
      normal_logpdf(lam0_old, 0.0, v100) + normal_logpdf(lam1_old, 0.0, v100);
  const double lp_after =
      normal_logpdf(lam0_new, 0.0, v100) + normal_logpdf(lam1_new, 0.0, v100);

  s.lam0 = lam0_new;
  s.lam1 = lam1_new;
  for (int d = 0; d < n_zoop_days(); ++d) recompute_ll_sur_day(s, d);
  double ll_after = 0.0;
  for (double v : s.ll_sur_day) ll_after += v;

  const double logratio = ll_after - ll_before + lp_after - lp_before;
  const double acc = acc_probability(logratio);
  const bool accepted = std::log(s.rng.runif()) < logratio;
  if (!accepted) {
    s.lam0 = lam0_old;
    s.lam1 = lam1_old;
    s.ll_sur_day = ll_sur0;
  }
  adapt(step, acc, accepted);
  welford_update(s.lam_adapt, Eigen::Vector2d{s.lam0, s.lam1});
}

void JointModel::update_block_scalar_variance(ChainState& s, int which) const {
  // which: 0 = sig2_sur, 1 = kappa_eta, 2 = kappa_psi
  AdaptiveScale& step = s.steps[2 + (which == 2 ? 3 : which)];
  const double scale = std::exp(step.log_step);
  double& x = which == 0 ? s.sig2_sur : (which == 1 ? s.kappa_eta : s.kappa_psi);
  const double x_old = x;
  const double x_new = x_old * std::exp(scale * s.rng.rnorm());

  double logratio = invgamma_logpdf(x_new, cfg_.priors.ig_shape, cfg_.priors.ig_rate) -
                    invgamma_logpdf(x_old, cfg_.priors.ig_shape, cfg_.priors.ig_rate) +
                    std::log(x_new) - std::log(x_old);  // log-scale Jacobian

  std::vector<double> ll_sur0;
  if (which == 0) {
    ll_sur0 = s.ll_sur_day;
    double before = 0.0, after = 0.0;
    for (double v : s.ll_sur_day) before += v;
    s.sig2_sur = x_new;
    for (int d = 0; d < n_zoop_days(); ++d) recompute_ll_sur_day(s, d);
    for (double v : s.ll_sur_day) after += v;
    logratio += after - before;
  } else {
    // GP variance: only the field priors move.
    const auto& whites = which == 1 ? s.eta_white : s.psi_white;
    for (const Eigen::VectorXd& w : whites) {
      const double q = w.squaredNorm();
      logratio += factor_->logpdf_whitened(q, x_new) -
                  factor_->logpdf_whitened(q, x_old);
    }
    x = x_new;
  }

  const double acc = acc_probability(logratio);
  const bool accepted = std::log(s.rng.runif()) < logratio;
  if (!accepted) {
    x = x_old;
    if (which == 0) s.ll_sur_day = ll_sur0;
  }
  adapt(step, acc, accepted);
}

void JointModel::update_block_beta(ChainState& s) const {
  AdaptiveScale& step = s.steps[4];
  const double scale = std::exp(step.log_step);
  Eigen::VectorXd z(beta_dim());
  for (int i = 0; i < beta_dim(); ++i) z[i] = s.rng.rnorm();
  Eigen::VectorXd move = s.beta_adapt.chol.triangularView<Eigen::Lower>() * z;
  const Eigen::VectorXd proposal = s.beta + scale * move;

  const Eigen::VectorXd beta0 = s.beta;
  const auto log_lambda0 = s.log_lambda;
  const auto lambda0 = s.lambda;
  const auto dist_dot0 = s.dist_dot;
  const auto pam_dot0 = s.pam_dot;
  const auto point_logsum0 = s.point_logsum;
  const auto ll_dist0 = s.ll_dist_day;
  const auto ll_pam0 = s.ll_pam_day;

  double ll_before = 0.0;
  for (double v : s.ll_dist_day) ll_before += v;
  for (double v : s.ll_pam_day) ll_before += v;
  double lp_before = 0.0, lp_after = 0.0;
  for (int i = 0; i < beta_dim(); ++i) {
    lp_before += normal_logpdf(s.beta[i], 0.0, cfg_.priors.regression_variance);
    lp_after += normal_logpdf(proposal[i], 0.0, cfg_.priors.regression_variance);
  }

  s.beta = proposal;
  const bool ok = try_recompute_whale(s);
  double logratio = kNegInf;
  if (ok) {
    double ll_after = 0.0;
    for (double v : s.ll_dist_day) ll_after += v;
    for (double v : s.ll_pam_day) ll_after += v;
    logratio = ll_after - ll_before + lp_after - lp_before;
  }
  const double acc = acc_probability(logratio);
  const bool accepted = std::log(s.rng.runif()) < logratio;
  if (!accepted) {
    s.beta = beta0;
    s.log_lambda = log_lambda0;
    s.lambda = lambda0;
    s.dist_dot = dist_dot0;
    s.pam_dot = pam_dot0;
    s.point_logsum = point_logsum0;
    s.ll_dist_day = ll_dist0;
    s.ll_pam_day = ll_pam0;
  }
  adapt(step, acc, accepted);
  welford_update(s.beta_adapt, s.beta);
}

void JointModel::update_block_c(ChainState& s, int w) const {
  AdaptiveScale& step = s.steps[6 + w];
  const double scale = std::exp(step.log_step);
  const double c_old = s.c[w];
  const double c_new = c_old * std::exp(scale * s.rng.rnorm());

  const double ll_before = s.ll_pam_day[w];
  const double ll_pam0 = s.ll_pam_day[w];
  s.c[w] = c_new;
  recompute_ll_pam_day(s, w);
  const double logratio =
      s.ll_pam_day[w] - ll_before +
      gamma_logpdf(c_new, cfg_.priors.call_rate_shape, cfg_.priors.call_rate_scale) -
      gamma_logpdf(c_old, cfg_.priors.call_rate_shape, cfg_.priors.call_rate_scale) +
      std::log(c_new) - std::log(c_old);

  const double acc = acc_probability(logratio);
  const bool accepted = std::log(s.rng.runif()) < logratio;
  if (!accepted) {
    s.c[w] = c_old;
    s.ll_pam_day[w] = ll_pam0;
  }
  adapt(step, acc, accepted);
}

void JointModel::update_scalars(ChainState& s) const {
  if (has_zoop()) {
    update_block_alpha(s);
    update_block_lam(s);
    update_block_scalar_variance(s, 0);
    update_block_scalar_variance(s, 1);
  }
  if (has_whale()) {
    update_block_beta(s);
    update_block_scalar_variance(s, 2);
    for (int w = 0; w < n_whale_days(); ++w) update_block_c(s, w);
  }
}

// ---------------------------------------------------------------------------
// Interweaving moves: intercept/field-mean recentering (exact Gibbs, the
// likelihood is invariant) and joint (variance, field) rescalings with the
// whitened coordinates held fixed. Both break ridges the one-at-a-time
// sweeps walk slowly.
// ---------------------------------------------------------------------------

void JointModel::recenter_eta(ChainState& s, int d) const {
  const double prior_var = cfg_.priors.regression_variance;
  const double v = 1.0 / (ones_quad_ / s.kappa_eta + 1.0 / prior_var);
  const double m = v * (ones_white_.dot(s.eta_white[d]) / s.kappa_eta -
                        s.alpha[d] / prior_var);
  const double delta = m + std::sqrt(v) * s.rng.rnorm();
  s.alpha[d] += delta;
  s.eta[d].array() -= delta;
  s.eta_white[d] -= delta * ones_white_;
  // log Z is invariant up to rounding; caches still refresh through the
  // single pure code path so checkpoints stay bit-exact.
  recompute_zoop_day(s, d);
  recompute_log_z_bar(s);
  recompute_ll_obl_day(s, d);
  recompute_ll_sur_day(s, d);
  if (has_whale() && beta_has_zoop()) {
    if (!try_recompute_whale(s))
      throw numerical_error("recenter_eta: intensity overflow");
  }
}

void JointModel::recenter_psi(ChainState& s) const {
  const double prior_var = cfg_.priors.regression_variance;
  const int nw = n_whale_days();
  if (cfg_.psi_mode == PsiMode::shared) {
    double beta0_sum = 0.0;
    for (int w = 0; w < nw; ++w) beta0_sum += s.beta[w];
    const double v = 1.0 / (ones_quad_ / s.kappa_psi + nw / prior_var);
    const double m = v * (ones_white_.dot(s.psi_white[0]) / s.kappa_psi -
                          beta0_sum / prior_var);
    const double delta = m + std::sqrt(v) * s.rng.rnorm();
    for (int w = 0; w < nw; ++w) s.beta[w] += delta;
    s.psi[0].array() -= delta;
    s.psi_white[0] -= delta * ones_white_;
  } else {
    for (int w = 0; w < nw; ++w) {
      const double v = 1.0 / (ones_quad_ / s.kappa_psi + 1.0 / prior_var);
      const double m = v * (ones_white_.dot(s.psi_white[w]) / s.kappa_psi -
                            s.beta[w] / prior_var);
      const double delta = m + std::sqrt(v) * s.rng.rnorm();
      s.beta[w] += delta;
      s.psi[w].array() -= delta;
      s.psi_white[w] -= delta * ones_white_;
    }
  }
  if (!try_recompute_whale(s))
    throw numerical_error("recenter_psi: intensity overflow");
}

void JointModel::recenter_alpha_temp(ChainState& s) const {
  // alpha_temp += delta with every eta_d -= delta * temp_d keeps each
  // log Z field fixed; delta has a Gaussian full conditional from the GP
  // priors and the N(0, v) coefficient prior.
  const double prior_var = cfg_.priors.regression_variance;
  double quad = 0.0, cross = 0.0;
  for (int d = 0; d < n_zoop_days(); ++d) {
    quad += temp_white_[d].squaredNorm();
    cross += temp_white_[d].dot(s.eta_white[d]);
  }
  const int at = alpha_dim() - 1;
  const double v = 1.0 / (quad / s.kappa_eta + 1.0 / prior_var);
  const double m = v * (cross / s.kappa_eta - s.alpha[at] / prior_var);
  const double delta = m + std::sqrt(v) * s.rng.rnorm();
  s.alpha[at] += delta;
  for (int d = 0; d < n_zoop_days(); ++d) {
    s.eta[d] -= delta * temp_[d];
    s.eta_white[d] -= delta * temp_white_[d];
    recompute_zoop_day(s, d);
  }
  recompute_log_z_bar(s);
  for (int d = 0; d < n_zoop_days(); ++d) {
    recompute_ll_obl_day(s, d);
    recompute_ll_sur_day(s, d);
  }
  if (has_whale() && beta_has_zoop()) {
    if (!try_recompute_whale(s))
      throw numerical_error("recenter_alpha_temp: intensity overflow");
  }
}

void JointModel::recenter_beta_bath(ChainState& s) const {
  // beta_bath += delta with every psi -= delta * bath keeps each
  // log lambda fixed.
  const double prior_var = cfg_.priors.regression_variance;
  const int np = static_cast<int>(s.psi.size());
  double cross = 0.0;
  for (const Eigen::VectorXd& w : s.psi_white) cross += bath_white_.dot(w);
  const double quad = np * bath_white_.squaredNorm();
  const int bb = n_whale_days();
  const double v = 1.0 / (quad / s.kappa_psi + 1.0 / prior_var);
  const double m = v * (cross / s.kappa_psi - s.beta[bb] / prior_var);
  const double delta = m + std::sqrt(v) * s.rng.rnorm();
  s.beta[bb] += delta;
  for (int p = 0; p < np; ++p) {
    s.psi[p] -= delta * bath_;
    s.psi_white[p] -= delta * bath_white_;
  }
  if (!try_recompute_whale(s))
    throw numerical_error("recenter_beta_bath: intensity overflow");
}

void JointModel::ridge_move_beta_zoop(ChainState& s) const {
  // The zooplankton coefficient trades off against the psi field along the
  // centered log Z direction. With daily fields the shift compensates each
  // day exactly (Gibbs); with a shared field the day-mean direction leaves
  // a residual, handled as a symmetric random-walk move.
  const double prior_var = cfg_.priors.regression_variance;
  const int nw = n_whale_days();
  const int bz = nw + 1;

  std::vector<Eigen::VectorXd> x(nw), xw(nw);
  for (int w = 0; w < nw; ++w) {
    x[w] = s.log_z[wdays_[w].zoop_idx].array() - s.log_z_bar;
    xw[w] = factor_->whiten(x[w]);
  }

  if (cfg_.psi_mode == PsiMode::daily) {
    double quad = 0.0, cross = 0.0;
    for (int w = 0; w < nw; ++w) {
      quad += xw[w].squaredNorm();
      cross += xw[w].dot(s.psi_white[w]);
    }
    const double v = 1.0 / (quad / s.kappa_psi + 1.0 / prior_var);
    const double m = v * (cross / s.kappa_psi - s.beta[bz] / prior_var);
    const double delta = m + std::sqrt(v) * s.rng.rnorm();
    s.beta[bz] += delta;
    for (int w = 0; w < nw; ++w) {
      s.psi[w] -= delta * x[w];
      s.psi_white[w] -= delta * xw[w];
    }
    if (!try_recompute_whale(s))
      throw numerical_error("ridge_move_beta_zoop: intensity overflow");
    return;
  }

  // Shared field: Metropolis along the ridge, compensating each day's
  // intercept for the day-mean part of the covariate and the shared field
  // for the day-averaged spatial residual. What cannot cancel (between-day
  // differences of the residual shapes) is charged to the likelihood.
  AdaptiveScale& step = s.steps[6 + nw + 2];
  const double scale = std::exp(step.log_step);
  std::vector<double> day_mean(nw);
  Eigen::VectorXd resid_bar = Eigen::VectorXd::Zero(n_active_);
  Eigen::VectorXd resid_bar_w = Eigen::VectorXd::Zero(n_active_);
  for (int w = 0; w < nw; ++w) {
    day_mean[w] = x[w].mean();
    resid_bar += x[w].array().matrix() - day_mean[w] * Eigen::VectorXd::Ones(n_active_);
    resid_bar_w += xw[w] - day_mean[w] * ones_white_;
  }
  resid_bar /= static_cast<double>(nw);
  resid_bar_w /= static_cast<double>(nw);

  const double delta = scale * s.rng.rnorm();
  const Eigen::VectorXd beta0 = s.beta;
  const Eigen::VectorXd psi0 = s.psi[0];
  const Eigen::VectorXd psi_w0 = s.psi_white[0];
  const auto log_lambda0 = s.log_lambda;
  const auto lambda0 = s.lambda;
  const auto dist_dot0 = s.dist_dot;
  const auto pam_dot0 = s.pam_dot;
  const auto point_logsum0 = s.point_logsum;
  const auto ll_dist0 = s.ll_dist_day;
  const auto ll_pam0 = s.ll_pam_day;
  const double ll_before = s.data_loglik();

  double lp_before = normal_logpdf(s.beta[bz], 0.0, prior_var);
  for (int w = 0; w < nw; ++w)
    lp_before += normal_logpdf(s.beta[w], 0.0, prior_var);
  const double q_before = s.psi_white[0].squaredNorm();

  s.beta[bz] += delta;
  for (int w = 0; w < nw; ++w) s.beta[w] -= delta * day_mean[w];
  s.psi[0] -= delta * resid_bar;
  s.psi_white[0] -= delta * resid_bar_w;

  double lp_after = normal_logpdf(s.beta[bz], 0.0, prior_var);
  for (int w = 0; w < nw; ++w)
    lp_after += normal_logpdf(s.beta[w], 0.0, prior_var);
  const double q_after = s.psi_white[0].squaredNorm();

  double logratio = kNegInf;
  if (try_recompute_whale(s))
    logratio = s.data_loglik() - ll_before + lp_after - lp_before -
               0.5 * (q_after - q_before) / s.kappa_psi;
  const double acc = acc_probability(logratio);
  const bool accepted = std::log(s.rng.runif()) < logratio;
  if (!accepted) {
    s.beta = beta0;
    s.psi[0] = psi0;
    s.psi_white[0] = psi_w0;
    s.log_lambda = log_lambda0;
    s.lambda = lambda0;
    s.dist_dot = dist_dot0;
    s.pam_dot = pam_dot0;
    s.point_logsum = point_logsum0;
    s.ll_dist_day = ll_dist0;
    s.ll_pam_day = ll_pam0;
  }
  adapt(step, acc, accepted);
}

void JointModel::pam_tradeoff_move(ChainState& s, int w) const {
  // beta0_w += delta with c_w scaled by exp(-delta) leaves every PAM mean
  // fixed; only the distance-sampling terms and the priors move. This
  // mixes the survey-scale direction the one-parameter blocks walk slowly.
  AdaptiveScale& step = s.steps[6 + n_whale_days() + 3 + w];
  const double scale = std::exp(step.log_step);
  const double delta = scale * s.rng.rnorm();
  const double beta0_old = s.beta[w];
  const double c_old = s.c[w];
  const double c_new = c_old * std::exp(-delta);

  const auto log_lambda0 = s.log_lambda;
  const auto lambda0 = s.lambda;
  const auto dist_dot0 = s.dist_dot;
  const auto pam_dot0 = s.pam_dot;
  const auto point_logsum0 = s.point_logsum;
  const auto ll_dist0 = s.ll_dist_day;
  const auto ll_pam0 = s.ll_pam_day;
  const double ll_before = s.data_loglik();

  s.beta[w] += delta;
  s.c[w] = c_new;
  double logratio = kNegInf;
  if (try_recompute_whale(s)) {
    logratio =
        s.data_loglik() - ll_before +
        normal_logpdf(s.beta[w], 0.0, cfg_.priors.regression_variance) -
        normal_logpdf(beta0_old, 0.0, cfg_.priors.regression_variance) +
        gamma_logpdf(c_new, cfg_.priors.call_rate_shape, cfg_.priors.call_rate_scale) -
        gamma_logpdf(c_old, cfg_.priors.call_rate_shape, cfg_.priors.call_rate_scale) +
        std::log(c_new) - std::log(c_old);
  }
  const double acc = acc_probability(logratio);
  const bool accepted = std::log(s.rng.runif()) < logratio;
  if (!accepted) {
    s.beta[w] = beta0_old;
    s.c[w] = c_old;
    s.log_lambda = log_lambda0;
    s.lambda = lambda0;
    s.dist_dot = dist_dot0;
    s.pam_dot = pam_dot0;
    s.point_logsum = point_logsum0;
    s.ll_dist_day = ll_dist0;
    s.ll_pam_day = ll_pam0;
  }
  adapt(step, acc, accepted);
}

void JointModel::rescale_variance(ChainState& s, bool is_eta) const {
  AdaptiveScale& step = s.steps[6 + n_whale_days() + (is_eta ? 0 : 1)];
  const double scale = std::exp(step.log_step);
  double& kappa = is_eta ? s.kappa_eta : s.kappa_psi;
  const double kappa_old = kappa;
  const double kappa_new = kappa_old * std::exp(scale * s.rng.rnorm());
  const double r = std::sqrt(kappa_new / kappa_old);

  auto fields0 = is_eta ? s.eta : s.psi;
  auto whites0 = is_eta ? s.eta_white : s.psi_white;
  const auto log_z0 = s.log_z;
  const auto log_z_mean0 = s.log_z_mean;
  const double log_z_bar0 = s.log_z_bar;
  const auto ll_obl0 = s.ll_obl_day;
  const auto ll_sur0 = s.ll_sur_day;
  const auto log_lambda0 = s.log_lambda;
  const auto lambda0 = s.lambda;
  const auto dist_dot0 = s.dist_dot;
  const auto pam_dot0 = s.pam_dot;
  const auto point_logsum0 = s.point_logsum;
  const auto ll_dist0 = s.ll_dist_day;
  const auto ll_pam0 = s.ll_pam_day;

  const double ll_before = s.data_loglik();

  auto& fields = is_eta ? s.eta : s.psi;
  auto& whites = is_eta ? s.eta_white : s.psi_white;
  kappa = kappa_new;
  for (auto& f : fields) f *= r;
  for (auto& w : whites) w *= r;
  bool ok = true;
  if (is_eta) {
    for (int d = 0; d < n_zoop_days(); ++d) recompute_zoop_day(s, d);
    recompute_log_z_bar(s);
    for (int d = 0; d < n_zoop_days(); ++d) {
      recompute_ll_obl_day(s, d);
      recompute_ll_sur_day(s, d);
    }
    if (has_whale() && beta_has_zoop()) ok = try_recompute_whale(s);
  } else {
    ok = try_recompute_whale(s);
  }

  // In the whitened parameterization the GP prior term cancels; only the
  // data likelihood, the variance prior, and the log-scale Jacobian move.
  double logratio = kNegInf;
  if (ok)
    logratio =
        s.data_loglik() - ll_before +
        invgamma_logpdf(kappa_new, cfg_.priors.ig_shape, cfg_.priors.ig_rate) -
        invgamma_logpdf(kappa_old, cfg_.priors.ig_shape, cfg_.priors.ig_rate) +
        std::log(kappa_new) - std::log(kappa_old);
  const double acc = acc_probability(logratio);
  const bool accepted = std::log(s.rng.runif()) < logratio;
  if (!accepted) {
    kappa = kappa_old;
    fields = std::move(fields0);
    whites = std::move(whites0);
    s.log_z = log_z0;
    s.log_z_mean = log_z_mean0;
    s.log_z_bar = log_z_bar0;
    s.ll_obl_day = ll_obl0;
    s.ll_sur_day = ll_sur0;
    s.log_lambda = log_lambda0;
    s.lambda = lambda0;
    s.dist_dot = dist_dot0;
    s.pam_dot = pam_dot0;
    s.point_logsum = point_logsum0;
    s.ll_dist_day = ll_dist0;
    s.ll_pam_day = ll_pam0;
  }
  adapt(step, acc, accepted);
}

void JointModel::update_reparam(ChainState& s) const {
  if (has_zoop()) {
    for (int d = 0; d < n_zoop_days(); ++d) recenter_eta(s, d);
    recenter_alpha_temp(s);
    rescale_variance(s, true);
  }
  if (has_whale() && n_whale_days() > 0) {
    recenter_psi(s);
    recenter_beta_bath(s);
    if (beta_has_zoop()) ridge_move_beta_zoop(s);
    for (int w = 0; w < n_whale_days(); ++w) pam_tradeoff_move(s, w);
    rescale_variance(s, false);
  }
}

// ---------------------------------------------------------------------------
// Elliptical slice updates for the GP fields
// ---------------------------------------------------------------------------

void JointModel::ess_update(ChainState& s, bool is_eta, int idx) const {
  Eigen::VectorXd& field = is_eta ? s.eta[idx] : s.psi[idx];
  Eigen::VectorXd& white = is_eta ? s.eta_white[idx] : s.psi_white[idx];
  const double kappa = is_eta ? s.kappa_eta : s.kappa_psi;

  Eigen::VectorXd z(n_active_);
  for (int i = 0; i < n_active_; ++i) z[i] = s.rng.rnorm();
  const Eigen::VectorXd nu = std::sqrt(kappa) * factor_->unit_correlated(z);

  const double ll_threshold = s.data_loglik() + std::log(s.rng.runif());
  double theta = s.rng.runif(0.0, 2.0 * std::numbers::pi);
  double theta_min = theta - 2.0 * std::numbers::pi;
  double theta_max = theta;

  // Backups for the caches each trial touches.
  const Eigen::VectorXd field0 = field;
  const auto log_z0 = s.log_z;
  const auto log_z_mean0 = s.log_z_mean;
  const double log_z_bar0 = s.log_z_bar;
  const auto ll_obl0 = s.ll_obl_day;
  const auto ll_sur0 = s.ll_sur_day;
  const auto log_lambda0 = s.log_lambda;
  const auto lambda0 = s.lambda;
  const auto dist_dot0 = s.dist_dot;
  const auto pam_dot0 = s.pam_dot;
  const auto point_logsum0 = s.point_logsum;
  const auto ll_dist0 = s.ll_dist_day;
  const auto ll_pam0 = s.ll_pam_day;

  auto restore = [&]() {
    field = field0;
    s.log_z = log_z0;
    s.log_z_mean = log_z_mean0;
    s.log_z_bar = log_z_bar0;
    s.ll_obl_day = ll_obl0;
    s.ll_sur_day = ll_sur0;
    s.log_lambda = log_lambda0;
    s.lambda = lambda0;
    s.dist_dot = dist_dot0;
    s.pam_dot = pam_dot0;
    s.point_logsum = point_logsum0;
    s.ll_dist_day = ll_dist0;
    s.ll_pam_day = ll_pam0;
  };

  auto apply = [&](double angle) -> double {
    field = field0 * std::cos(angle) + nu * std::sin(angle);
    bool ok = true;
    if (is_eta) {
      recompute_zoop_day(s, idx);
      recompute_log_z_bar(s);
      recompute_ll_obl_day(s, idx);
      recompute_ll_sur_day(s, idx);
      if (has_whale() && beta_has_zoop()) ok = try_recompute_whale(s);
    } else {
      if (cfg_.psi_mode == PsiMode::shared) {
        ok = try_recompute_whale(s);
      } else {
        const WhaleDay& wd = wdays_[idx];
        const int nw = n_whale_days();
        Eigen::ArrayXd ex = s.beta[idx] + s.beta[nw] * bath_.array();
        if (beta_has_zoop())
          ex += s.beta[nw + 1] * (s.log_z[wd.zoop_idx].array() - s.log_z_bar);
        ex += field.array();
        if ((ex > 700.0).any()) {
          ok = false;
        } else {
          recompute_whale_day(s, idx);
          recompute_ll_dist_day(s, idx);
          recompute_ll_pam_day(s, idx);
        }
      }
    }
    return ok ? s.data_loglik() : kNegInf;
  };

  long shrinks = 0;
  while (true) {
    const double ll = apply(theta);
    if (ll > ll_threshold) break;
    restore();
    if (theta < 0.0)
      theta_min = theta;
    else
      theta_max = theta;
    theta = s.rng.runif(theta_min, theta_max);
    if (++shrinks > kEssMaxShrink)
      throw numerical_error("elliptical slice update failed to accept after " +
                            std::to_string(kEssMaxShrink) + " shrinks");
  }
  white = white * std::cos(theta) + std::sqrt(kappa) * std::sin(theta) * z;
}

void JointModel::update_fields(ChainState& s) const {
  if (has_zoop())
    for (int d = 0; d < n_zoop_days(); ++d) ess_update(s, true, d);
  if (has_whale())
    for (int p = 0; p < n_psi(); ++p) ess_update(s, false, p);
}

// ---------------------------------------------------------------------------
// Draws and the chain driver
// ---------------------------------------------------------------------------

PosteriorDraw JointModel::make_draw(const ChainState& s) const {
  PosteriorDraw d;
  d.iteration = s.iteration;
  d.chain_id = s.chain_id;
  if (has_zoop()) {
    for (int i = 0; i < alpha_dim(); ++i) d.scalars.push_back(s.alpha[i]);
    d.scalars.push_back(s.lam0);
    d.scalars.push_back(s.lam1);
    d.scalars.push_back(s.sig2_sur);
    d.scalars.push_back(s.kappa_eta);
    for (int i = 0; i < n_zoop_days(); ++i) {
      d.zoop_mean.push_back(s.log_z[i].array().exp().mean());
      d.log_z.push_back(s.log_z[i]);
    }
  }
  if (has_whale()) {
    for (int i = 0; i < beta_dim(); ++i) d.scalars.push_back(s.beta[i]);
    d.scalars.push_back(s.kappa_psi);
    for (double c : s.c) d.scalars.push_back(c);
    for (int w = 0; w < n_whale_days(); ++w) {
      d.whale_total.push_back(s.lambda[w].sum() * cell_area_);
      d.log_lambda.push_back(s.log_lambda[w]);
    }
  }
  d.loglik = s.data_loglik();
  return d;
}

ChainState JointModel::run_chain(int chain_id, DrawSink& sink) const {
  return run_chain(init_state(chain_id), sink);
}

ChainState JointModel::run_chain(ChainState s, DrawSink& sink) const {
  refresh(s);
  const long iterations = cfg_.mcmc.iterations;
  const long burnin = cfg_.mcmc.resolved_burnin();
  const int thin = cfg_.mcmc.thin;

  if (iterations == 0 && s.iteration == 0) {
    sink.on_draw(make_draw(s));
    ++s.draws_emitted;
    sink.on_checkpoint(s);
    return s;
  }

  while (s.iteration < iterations) {
    ++s.iteration;
    if (s.iteration > burnin) {
      for (AdaptiveScale& st : s.steps) st.frozen = true;
      s.alpha_adapt.frozen = true;
      s.lam_adapt.frozen = true;
      s.beta_adapt.frozen = true;
    }
    update_scalars(s);
    update_fields(s);
    update_reparam(s);
    if (cfg_.mcmc.audit_every > 0 && s.iteration % cfg_.mcmc.audit_every == 0)
      audit(s);
    if (s.iteration > burnin && (s.iteration - burnin) % thin == 0) {
      sink.on_draw(make_draw(s));
      ++s.draws_emitted;
    }
    if (cfg_.mcmc.checkpoint_every > 0 &&
        s.iteration % cfg_.mcmc.checkpoint_every == 0 &&
        s.iteration < iterations)
      sink.on_checkpoint(s);
  }
  sink.on_checkpoint(s);
  return s;
}

std::vector<std::pair<std::string, double>> JointModel::acceptance_rates(
    const ChainState& s) const {
  std::vector<std::pair<std::string, double>> out;
  const std::size_t nw = static_cast<std::size_t>(n_whale_days());
  for (std::size_t b = 0; b < s.steps.size(); ++b) {
    const AdaptiveScale& st = s.steps[b];
    const bool zoop_block = b <= 3 || b == 6 + nw;
    const bool active = zoop_block ? has_zoop() : has_whale();
    if (!active || st.proposals == 0) continue;
    out.emplace_back(block_names_[b],
                     static_cast<double>(st.accepts) /
                         static_cast<double>(st.proposals));
  }
  return out;
}

ZoopParams JointModel::zoop_params(const ChainState& s) const {
  ZoopParams p;
  for (int d = 0; d < n_zoop_days(); ++d) p.alpha0[zoop_days_[d]] = s.alpha[d];
  p.alpha_temp = s.alpha[alpha_dim() - 1];
  p.tau2 = cfg_.fixed.tau2;
  p.kappa_eta = s.kappa_eta;
  p.phi_eta = phi_;
  p.sig2_obl = cfg_.fixed.sig2_obl;
  p.sig2_sur = s.sig2_sur;
  p.lam0_sur = s.lam0;
  p.lam1_sur = s.lam1;
  return p;
}

WhaleParams JointModel::whale_params(const ChainState& s) const {
  WhaleParams p;
  const int nw = n_whale_days();
  for (int w = 0; w < nw; ++w) p.beta0[whale_days_[w]] = s.beta[w];
  p.beta_bath = s.beta[nw];
  p.beta_zoop = beta_has_zoop() ? s.beta[nw + 1] : 0.0;
  p.kappa_psi = s.kappa_psi;
  p.phi_psi = phi_;
  for (int w = 0; w < nw; ++w) {
    p.call_rate[whale_days_[w]] = s.c[w];
    p.surface_prob[whale_days_[w]] = wdays_[w].pi;
    p.duration_hours[whale_days_[w]] = wdays_[w].duration;
  }
  p.log_z_bar = s.log_z_bar;
  return p;
}

// ---------------------------------------------------------------------------
// Checkpointing
// ---------------------------------------------------------------------------

namespace {

json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
}

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd mat_from(const json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j.at(0).size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

json fields_json(const std::vector<Eigen::VectorXd>& fs) {
  json out = json::array();
  for (const auto& f : fs) out.push_back(vec_json(f));
  return out;
}

std::vector<Eigen::VectorXd> fields_from(const json& j) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& f : j) out.push_back(vec_from(f));
  return out;
}

json cov_json(const CovAdapt& ca) {
  return {{"mean", vec_json(ca.mean)}, {"m2", mat_json(ca.m2)},
          {"chol", mat_json(ca.chol)}, {"n", ca.n}, {"frozen", ca.frozen}};
}

void cov_from(const json& j, CovAdapt& ca) {
  ca.mean = vec_from(j.at("mean"));
  ca.m2 = mat_from(j.at("m2"));
  ca.chol = mat_from(j.at("chol"));
  ca.n = j.at("n").get<long>();
  ca.frozen = j.at("frozen").get<bool>();
}

}  // namespace

std::string JointModel::checkpoint_json(const ChainState& s) const {
  json j;
  j["version"] = 1;
  j["chain_id"] = s.chain_id;
  j["iteration"] = s.iteration;
  j["draws_emitted"] = s.draws_emitted;
  j["alpha"] = vec_json(s.alpha);
  j["lam0"] = s.lam0;
  j["lam1"] = s.lam1;
  j["sig2_sur"] = s.sig2_sur;
  j["kappa_eta"] = s.kappa_eta;
  j["kappa_psi"] = s.kappa_psi;
  j["beta"] = vec_json(s.beta);
  j["c"] = s.c;
  j["eta"] = fields_json(s.eta);
  j["eta_white"] = fields_json(s.eta_white);
  j["psi"] = fields_json(s.psi);
  j["psi_white"] = fields_json(s.psi_white);
  json steps = json::array();
  for (const AdaptiveScale& st : s.steps)
    steps.push_back({{"log_step", st.log_step},
                     {"target", st.target},
                     {"t", st.t},
                     {"frozen", st.frozen},
                     {"proposals", st.proposals},
                     {"accepts", st.accepts}});
  j["steps"] = steps;
  if (s.alpha_adapt.mean.size() > 0) j["alpha_adapt"] = cov_json(s.alpha_adapt);
  if (s.lam_adapt.mean.size() > 0) j["lam_adapt"] = cov_json(s.lam_adapt);
  if (s.beta_adapt.mean.size() > 0) j["beta_adapt"] = cov_json(s.beta_adapt);
  j["rng"] = s.rng.serialize();
  j["model"] = {{"n_zoop", n_zoop_days()},
                {"n_whale", n_whale_days()},
                {"n_active", n_active_},
                {"component", static_cast<int>(cfg_.component)},
                {"psi_mode", static_cast<int>(cfg_.psi_mode)},
                {"seed", cfg_.seed}};
  return j.dump();
}

ChainState JointModel::restore_checkpoint(const std::string& json_text) const {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw validation_error(std::string("checkpoint parse error: ") + e.what());
  }
  if (j.at("version").get<int>() != 1)
    throw validation_error("unsupported checkpoint version");
  const json& m = j.at("model");
  if (m.at("n_zoop").get<int>() != n_zoop_days() ||
      m.at("n_whale").get<int>() != n_whale_days() ||
      m.at("n_active").get<int>() != n_active_ ||
      m.at("component").get<int>() != static_cast<int>(cfg_.component) ||
      m.at("psi_mode").get<int>() != static_cast<int>(cfg_.psi_mode))
    throw validation_error("checkpoint does not match the prepared model");

  ChainState s;
  s.chain_id = j.at("chain_id").get<int>();
  s.iteration = j.at("iteration").get<long>();
  s.draws_emitted = j.at("draws_emitted").get<long>();
  s.alpha = vec_from(j.at("alpha"));
  s.lam0 = j.at("lam0").get<double>();
  s.lam1 = j.at("lam1").get<double>();
  s.sig2_sur = j.at("sig2_sur").get<double>();
  s.kappa_eta = j.at("kappa_eta").get<double>();
  s.kappa_psi = j.at("kappa_psi").get<double>();
  s.beta = vec_from(j.at("beta"));
  s.c = j.at("c").get<std::vector<double>>();
  s.eta = fields_from(j.at("eta"));
  s.eta_white = fields_from(j.at("eta_white"));
  s.psi = fields_from(j.at("psi"));
  s.psi_white = fields_from(j.at("psi_white"));
  for (const auto& st : j.at("steps")) {
    AdaptiveScale a;
    a.log_step = st.at("log_step").get<double>();
    a.target = st.at("target").get<double>();
    a.t = st.at("t").get<long>();
    a.frozen = st.at("frozen").get<bool>();
    a.proposals = st.at("proposals").get<long>();
    a.accepts = st.at("accepts").get<long>();
    s.steps.push_back(a);
  }
  if (j.contains("alpha_adapt")) cov_from(j.at("alpha_adapt"), s.alpha_adapt);
  if (j.contains("lam_adapt")) cov_from(j.at("lam_adapt"), s.lam_adapt);
  if (j.contains("beta_adapt")) cov_from(j.at("beta_adapt"), s.beta_adapt);
  s.rng = Rng(0);
  s.rng.restore(j.at("rng").get<std::string>());
  refresh(s);
  return s;
}

}  // namespace zwf
