#include "zwf/gp.hpp"

#include <cmath>
#include <numbers>

#include "zwf/errors.hpp"

namespace zwf {

namespace {
constexpr double kJitter = 1e-8;
}

double gp_cov(const GpSpec& spec, Point s1, Point s2) {
  if (!(spec.variance > 0.0) || !(spec.decay > 0.0))
    throw validation_error("gp_cov: variance and decay must be > 0");
  const double d = std::hypot(s1.x - s2.x, s1.y - s2.y);
  return spec.variance * std::exp(-d / spec.decay);
}

double decay_from_effective_range(double range_km) {
  if (!(range_km > 0.0))
    throw validation_error("decay_from_effective_range: range must be > 0");
  return range_km / std::log(20.0);
}

GpFactor::GpFactor(const Grid& grid, const GpSpec& spec)
    : grid_(&grid), spec_(spec) {
  if (!(spec.variance > 0.0) || !(spec.decay > 0.0))
    throw validation_error("GpFactor: variance and decay must be > 0");
  const int n = grid.n_active();
  const Eigen::MatrixX2d c = grid.active_centroids();
  Eigen::MatrixXd corr(n, n);
  for (int j = 0; j < n; ++j) {
    corr(j, j) = 1.0 + kJitter;
    for (int i = j + 1; i < n; ++i) {
      const double d = std::hypot(c(i, 0) - c(j, 0), c(i, 1) - c(j, 1));
      const double v = std::exp(-d / spec.decay);
      corr(i, j) = v;
      corr(j, i) = v;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(corr);
  if (llt.info() != Eigen::Success)
    throw numerical_error(
        "GpFactor: correlation matrix not positive definite after jitter");
  chol_ = llt.matrixL();
  half_logdet_corr_ = chol_.diagonal().array().log().sum();
}

void GpFactor::set_variance(double kappa) {
  if (!(kappa > 0.0)) throw validation_error("set_variance: kappa must be > 0");
  spec_.variance = kappa;
}

ScalarField GpFactor::sample(Rng& rng) const {
  Eigen::VectorXd z(dim());
  for (int i = 0; i < dim(); ++i) z[i] = rng.rnorm();
  return ScalarField(*grid_, correlated(z));
}

Eigen::VectorXd GpFactor::correlated(const Eigen::VectorXd& z) const {
  Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>() * z;
  v *= std::sqrt(spec_.variance);
  return v;
}

Eigen::VectorXd GpFactor::unit_correlated(const Eigen::VectorXd& z) const {
  return chol_.triangularView<Eigen::Lower>() * z;
}

Eigen::VectorXd GpFactor::whiten(const Eigen::VectorXd& x) const {
  if (x.size() != chol_.rows())
    throw validation_error("GpFactor: field dimension " +
                           std::to_string(x.size()) + " != " +
                           std::to_string(chol_.rows()));
  return chol_.triangularView<Eigen::Lower>().solve(x);
}

double GpFactor::logpdf_whitened(double squared_norm) const {
  return logpdf_whitened(squared_norm, spec_.variance);
}

double GpFactor::logpdf_whitened(double squared_norm, double kappa) const {
  const int n = dim();
  return -0.5 * n * std::log(2.0 * std::numbers::pi * kappa) -
         half_logdet_corr_ - 0.5 * squared_norm / kappa;
}

double GpFactor::logpdf(const ScalarField& field) const {
  return logpdf_whitened(whiten(field.values).squaredNorm());
}

}  // namespace zwf
