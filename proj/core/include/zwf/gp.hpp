#pragma once

#include <Eigen/Dense>

#include "zwf/grid.hpp"
#include "zwf/rng.hpp"

namespace zwf {

// Exponential covariance: variance * exp(-distance / decay).
struct GpSpec {
  double variance = 1.0;  // kappa, > 0
  double decay = 1.0;     // phi in km, > 0
};

double gp_cov(const GpSpec& spec, Point s1, Point s2);

// Decay giving correlation 0.05 at the stated effective range:
// phi = range / ln 20.
double decay_from_effective_range(double range_km);

// Cholesky factor of the unit-variance correlation matrix over the active
// cell centroids. The variance enters as a scalar, so one factorization per
// (grid, decay) serves every kappa: draws scale by sqrt(kappa) and the
// log-density shifts by n/2 * log(kappa).
class GpFactor {
public:
  GpFactor(const Grid& grid, const GpSpec& spec);

  const GpSpec& spec() const { return spec_; }
  const Grid& grid() const { return *grid_; }
  int dim() const { return static_cast<int>(chol_.rows()); }

  // Rescales the variance without refactorizing.
  void set_variance(double kappa);

  // Mean-zero draw with the spec covariance; consumes dim() normals.
  ScalarField sample(Rng& rng) const;
  // chol(R) * z scaled by sqrt(kappa); for callers that manage normals.
  Eigen::VectorXd correlated(const Eigen::VectorXd& z) const;

  // Exact mean-zero multivariate normal log-density of the field.
  double logpdf(const ScalarField& field) const;

  // chol(R) * z, unit variance; callers apply their own sqrt(kappa).
  Eigen::VectorXd unit_correlated(const Eigen::VectorXd& z) const;

  // Whitened coordinates w = L^-1 * x; |w|^2 / kappa is the quadratic form.
  Eigen::VectorXd whiten(const Eigen::VectorXd& x) const;
  // -n/2 log(2 pi kappa) - log|L| - |w|^2 / (2 kappa).
  double logpdf_whitened(double squared_norm) const;
  double logpdf_whitened(double squared_norm, double kappa) const;

private:
  const Grid* grid_;
  GpSpec spec_;
  Eigen::MatrixXd chol_;  // lower factor of R + jitter*I
  double half_logdet_corr_ = 0.0;
};

}  // namespace zwf
