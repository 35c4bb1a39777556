#pragma once

#include <span>
#include <utility>
#include <vector>

#include "zwf/grid.hpp"
#include "zwf/rng.hpp"

namespace zwf {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Shortest sorted-sample window holding ceil(mass * n) points; ties go to
// the smallest lower endpoint.
Interval hpd_interval(std::vector<double> samples, double mass);

double median(std::vector<double> samples);

// Empirical continuous ranked probability score with the all-pairs
// (including i == j) spread term.
double crps(std::span<const double> samples, double observed);

// Root mean squared per-cell difference.
double rmse_field(const ScalarField& est, const ScalarField& truth);

enum class AbundanceKind { zoop_average, whale_total };

struct AbundanceSummary {
  double med = 0.0;
  Interval hpd;
};

// Per-draw regional functional of log-scale fields, then median + HPD.
// zoop_average: mean of exp(field) over the region cells.
// whale_total: sum of exp(field) * cell_area over the region cells.
// `region` holds active-cell indices; empty regions are an error.
AbundanceSummary abundance(const std::vector<Eigen::VectorXd>& log_fields,
                           const std::vector<int>& region,
                           AbundanceKind kind, double cell_area,
                           double mass = 0.95);

struct ScalingResult {
  double k = 1.0;
  std::vector<double> expected;   // per draw: k^beta_zoop * base integral
  std::vector<double> predicted;  // per draw: Poisson(expected)
};

// What-if rescaling of the zooplankton surface by k: the intensity scales
// by k^beta_zoop exactly, and a Poisson layer gives predictive abundance.
ScalingResult whatif_scaling(std::span<const double> whale_total_draws,
                             std::span<const double> beta_zoop_draws,
                             double k, Rng& rng);

struct LoglikSummary {
  double med = 0.0;
  Interval hpd;
};

LoglikSummary loglik_summary(std::vector<double> loglik_draws,
                             double mass = 0.95);

}  // namespace zwf
