#include "zwf/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "zwf/errors.hpp"

namespace zwf {

Interval hpd_interval(std::vector<double> samples, double mass) {
  if (samples.size() < 2)
    throw validation_error("hpd_interval: need at least 2 samples");
  if (!(mass > 0.0 && mass < 1.0))
    throw validation_error("hpd_interval: mass must be in (0, 1)");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  std::size_t m = static_cast<std::size_t>(std::ceil(mass * n));
  if (m < 2) m = 2;
  if (m > n) m = n;
  std::size_t best = 0;
  double best_width = samples[m - 1] - samples[0];
  for (std::size_t i = 1; i + m <= n; ++i) {
    const double width = samples[i + m - 1] - samples[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {samples[best], samples[best + m - 1]};
}

double median(std::vector<double> samples) {
  if (samples.empty()) throw validation_error("median: empty sample");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  return n % 2 == 1 ? samples[n / 2]
                    : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
}

double crps(std::span<const double> samples, double observed) {
  if (samples.empty()) throw validation_error("crps: empty sample");
  const std::size_t n = samples.size();
  double mean_abs = 0.0;
  for (double x : samples) mean_abs += std::abs(x - observed);
  mean_abs /= static_cast<double>(n);

  // Sum of |Xi - Xj| over all ordered pairs via the sorted prefix trick.
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  double pair_sum = 0.0;
  double prefix = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pair_sum += sorted[i] * static_cast<double>(i) - prefix;
    prefix += sorted[i];
  }
  pair_sum *= 2.0;  // both orders; diagonal terms are zero
  return mean_abs - 0.5 * pair_sum / (static_cast<double>(n) * n);
}

double rmse_field(const ScalarField& est, const ScalarField& truth) {
  if (est.grid == nullptr || est.grid != truth.grid)
    throw validation_error("rmse_field: fields must share a grid");
  return std::sqrt((est.values - truth.values).squaredNorm() /
                   static_cast<double>(est.values.size()));
}

AbundanceSummary abundance(const std::vector<Eigen::VectorXd>& log_fields,
                           const std::vector<int>& region,
                           AbundanceKind kind, double cell_area, double mass) {
  if (region.empty()) throw validation_error("abundance: empty region");
  if (log_fields.empty()) throw validation_error("abundance: no draws");
  std::vector<double> values;
  values.reserve(log_fields.size());
  for (const Eigen::VectorXd& f : log_fields) {
    double acc = 0.0;
    for (int idx : region) {
      if (idx < 0 || idx >= f.size())
        throw validation_error("abundance: region index out of range");
      acc += std::exp(f[idx]);
    }
    values.push_back(kind == AbundanceKind::zoop_average
                         ? acc / static_cast<double>(region.size())
                         : acc * cell_area);
  }
  AbundanceSummary s;
  s.med = median(values);
  s.hpd = hpd_interval(values, mass);
  return s;
}

ScalingResult whatif_scaling(std::span<const double> whale_total_draws,
                             std::span<const double> beta_zoop_draws,
                             double k, Rng& rng) {
  if (!(k > 0.0)) throw validation_error("whatif_scaling: k must be > 0");
  if (whale_total_draws.size() != beta_zoop_draws.size())
    throw validation_error("whatif_scaling: draw count mismatch");
  ScalingResult r;
  r.k = k;
  r.expected.reserve(whale_total_draws.size());
  r.predicted.reserve(whale_total_draws.size());
  for (std::size_t i = 0; i < whale_total_draws.size(); ++i) {
    const double expected =
        std::pow(k, beta_zoop_draws[i]) * whale_total_draws[i];
    r.expected.push_back(expected);
    r.predicted.push_back(static_cast<double>(rng.rpois(expected)));
  }
  return r;
}

LoglikSummary loglik_summary(std::vector<double> loglik_draws, double mass) {
  if (loglik_draws.empty())
    throw validation_error("loglik_summary: no log-likelihood draws");
  LoglikSummary s;
  s.med = median(loglik_draws);
  s.hpd = hpd_interval(std::move(loglik_draws), mass);
  return s;
}

}  // namespace zwf
