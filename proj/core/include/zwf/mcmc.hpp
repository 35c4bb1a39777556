#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "zwf/config.hpp"
#include "zwf/dataset.hpp"
#include "zwf/gp.hpp"
#include "zwf/rng.hpp"

namespace zwf {

// Density helpers shared by the sampler and its oracles.
double normal_logpdf(double x, double mean, double variance);
double invgamma_logpdf(double x, double shape, double rate);
double gamma_logpdf(double x, double shape, double scale);

// Robbins-Monro step-size adaptation for one proposal block.
struct AdaptiveScale {
  double log_step = 0.0;
  double target = 0.234;
  long t = 0;
  bool frozen = false;
  long proposals = 0;  // post-freeze bookkeeping
  long accepts = 0;
};

// Empirical proposal shape for multivariate blocks, learned during burn-in.
struct CovAdapt {
  Eigen::VectorXd mean;
  Eigen::MatrixXd m2;
  Eigen::MatrixXd chol;  // unit-scale proposal factor
  long n = 0;
  bool frozen = false;
};

// One chain's full mutable state. Derived caches hold per-day values that
// are always recomputed whole, so a checkpointed state restores to the
// bit-identical trajectory.
struct ChainState {
  Eigen::VectorXd alpha;  // [alpha0 per zoop day..., alpha_temp]
  double lam0 = 0.0, lam1 = 1.0;
  double sig2_sur = 2.0, kappa_eta = 2.0, kappa_psi = 2.0;
  Eigen::VectorXd beta;   // [beta0 per whale day..., beta_bath (, beta_zoop)]
  std::vector<double> c;  // call rate per whale day

  std::vector<Eigen::VectorXd> eta;        // per zoop day
  std::vector<Eigen::VectorXd> eta_white;  // L^-1 eta, maintained incrementally
  std::vector<Eigen::VectorXd> psi;        // one (shared) or per whale day
  std::vector<Eigen::VectorXd> psi_white;

  // Derived caches (pure per-day functions of the state above).
  std::vector<Eigen::VectorXd> log_z;
  std::vector<double> log_z_mean;
  double log_z_bar = 0.0;
  std::vector<Eigen::VectorXd> log_lambda;
  std::vector<Eigen::VectorXd> lambda;
  std::vector<double> dist_dot;                 // dot(det_sum, lambda)
  std::vector<std::vector<double>> pam_dot;     // [day][hydro], dot(p, lambda)
  std::vector<double> point_logsum;             // sum w_i log lambda(cell_i)
  std::vector<double> ll_obl_day, ll_sur_day, ll_dist_day, ll_pam_day;

  std::vector<AdaptiveScale> steps;
  CovAdapt alpha_adapt, lam_adapt, beta_adapt;

  long iteration = 0;
  long draws_emitted = 0;
  int chain_id = 0;
  Rng rng{0};

  double data_loglik() const;
};

// One retained draw: scalar parameters, abundance functionals, total data
// log-likelihood, and the latent fields on the log scale.
struct PosteriorDraw {
  long iteration = 0;
  int chain_id = 0;
  std::vector<double> scalars;        // ordered as JointModel::scalar_names()
  std::vector<double> zoop_mean;      // per zoop day: mean of exp(log Z)
  std::vector<double> whale_total;    // per whale day: integral of lambda
  double loglik = 0.0;
  std::vector<Eigen::VectorXd> log_z;       // per zoop day
  std::vector<Eigen::VectorXd> log_lambda;  // per whale day
};

class DrawSink {
public:
  virtual ~DrawSink() = default;
  virtual void on_draw(const PosteriorDraw& draw) = 0;
  virtual void on_checkpoint(const ChainState&) {}
};

// Collects draws in memory; enough for tests and summaries at desk scale.
class MemorySink : public DrawSink {
public:
  void on_draw(const PosteriorDraw& draw) override { draws.push_back(draw); }
  std::vector<PosteriorDraw> draws;
};

// The prepared joint model: immutable dataset-derived quantities plus the
// Metropolis-within-Gibbs sweep. Scalars move by adaptive random-walk
// blocks (variances on the log scale); each GP field moves by one
// elliptical slice update per iteration.
class JointModel {
public:
  JointModel(const SurveyDataset& data, const RunConfig& cfg);

  const SurveyDataset& data() const { return *data_; }
  const RunConfig& config() const { return cfg_; }
  Component component() const { return cfg_.component; }
  PsiMode psi_mode() const { return cfg_.psi_mode; }
  double decay() const { return phi_; }
  const GpFactor& field_factor() const { return *factor_; }

  const std::vector<std::string>& scalar_names() const { return scalar_names_; }
  int n_zoop_days() const { return static_cast<int>(zoop_days_.size()); }
  int n_whale_days() const { return static_cast<int>(whale_days_.size()); }
  const std::vector<int>& zoop_days() const { return zoop_days_; }
  const std::vector<int>& whale_days() const { return whale_days_; }

  ChainState init_state(int chain_id) const;

  // One full sweep over the scalar blocks / the GP fields.
  void update_scalars(ChainState& s) const;
  void update_fields(ChainState& s) const;
  // Interweaving moves that break the two slow ridges: exact Gibbs shifts
  // of GP-field means into the matching intercepts, and joint
  // (variance, field) rescalings with the whitened coordinates held fixed.
  // Both leave the posterior invariant; run_chain composes them with the
  // block and field sweeps.
  void update_reparam(ChainState& s) const;

  // Recomputes every derived cache from the parameters and fields.
  void refresh(ChainState& s) const;
  // Fresh recomputation vs. caches; throws numerical_error beyond 1e-8.
  void audit(const ChainState& s) const;

  double prior_logdensity(const ChainState& s) const;
  double gp_logprior(const ChainState& s) const;
  double log_posterior(const ChainState& s) const;

  PosteriorDraw make_draw(const ChainState& s) const;

  // Alternates scalar and field sweeps for the configured budget, emitting
  // every thin-th post-burn-in draw. iterations == 0 emits the
  // initialization draw only.
  ChainState run_chain(int chain_id, DrawSink& sink) const;
  ChainState run_chain(ChainState state, DrawSink& sink) const;

  std::string checkpoint_json(const ChainState& s) const;
  ChainState restore_checkpoint(const std::string& json_text) const;

  // Post-freeze acceptance rate per block, for the diagnostics report.
  std::vector<std::pair<std::string, double>> acceptance_rates(
      const ChainState& s) const;

  ZoopParams zoop_params(const ChainState& s) const;
  WhaleParams whale_params(const ChainState& s) const;

private:
  struct WhaleDay {
    int day = 0;
    int zoop_idx = -1;
    double pi = 0.0;
    double duration = 0.0;
    Eigen::VectorXd det_sum;  // sum over transects of the detection profile
    double point_const = 0.0; // sum w_i log(pi * f(cell_i)), data-fixed
    std::vector<std::pair<int, double>> point_cells;  // (active cell, weight)
    std::vector<int> hydro_ids;
    std::vector<Eigen::VectorXd> pam_p;  // per listed hydrophone
    std::vector<double> pam_w;           // observed counts
    double pam_const = 0.0;              // -sum lgamma(W+1)
    // Days with no survey effort have a flat likelihood in lambda, so
    // intensity overflow must not veto proposals there.
    bool has_data = false;
  };
  struct TowIndex {
    std::vector<int> day_idx, cell;
    std::vector<double> logy;
    std::vector<std::vector<int>> by_day;
  };

  bool has_zoop() const { return cfg_.component != Component::whale_only; }
  bool has_whale() const { return cfg_.component != Component::zoop_only; }
  bool beta_has_zoop() const { return cfg_.component == Component::joint; }
  int n_psi() const;
  int alpha_dim() const { return n_zoop_days() + 1; }
  int beta_dim() const {
    return n_whale_days() + (beta_has_zoop() ? 2 : 1);
  }

  void recompute_zoop_day(ChainState& s, int d) const;
  void recompute_log_z_bar(ChainState& s) const;
  void recompute_whale_day(ChainState& s, int w) const;
  void recompute_ll_obl_day(ChainState& s, int d) const;
  void recompute_ll_sur_day(ChainState& s, int d) const;
  void recompute_ll_dist_day(ChainState& s, int w) const;
  void recompute_ll_pam_day(ChainState& s, int w) const;
  // Rebuilds whale-side caches for the given day (or all when from stale
  // log Z); returns false on intensity overflow.
  bool try_recompute_whale(ChainState& s) const;

  void ess_update(ChainState& s, bool is_eta, int idx) const;
  void adapt(AdaptiveScale& step, double acc_prob, bool accepted) const;
  void update_block_alpha(ChainState& s) const;
  void update_block_lam(ChainState& s) const;
  void update_block_scalar_variance(ChainState& s, int which) const;
  void update_block_beta(ChainState& s) const;
  void update_block_c(ChainState& s, int w) const;
  void recenter_eta(ChainState& s, int d) const;
  void recenter_psi(ChainState& s) const;
  void recenter_alpha_temp(ChainState& s) const;
  void recenter_beta_bath(ChainState& s) const;
  void ridge_move_beta_zoop(ChainState& s) const;
  void pam_tradeoff_move(ChainState& s, int w) const;
  void rescale_variance(ChainState& s, bool is_eta) const;

  const SurveyDataset* data_;
  RunConfig cfg_;
  double phi_ = 1.0;
  std::unique_ptr<GpFactor> factor_;
  Eigen::VectorXd ones_white_;  // L^-1 * 1 for the recentering moves
  double ones_quad_ = 0.0;      // 1' R^-1 1
  std::vector<Eigen::VectorXd> temp_white_;  // L^-1 * temp_d
  Eigen::VectorXd bath_white_;               // L^-1 * bath

  std::vector<int> zoop_days_, whale_days_;
  std::vector<Eigen::VectorXd> temp_;  // standardized, per zoop day
  Eigen::VectorXd bath_;
  double cell_area_ = 1.0;
  double domain_area_ = 1.0;
  int n_active_ = 0;

  TowIndex obl_, sur_;
  std::vector<WhaleDay> wdays_;
  std::vector<std::string> scalar_names_;
  std::vector<std::string> block_names_;
};

}  // namespace zwf
