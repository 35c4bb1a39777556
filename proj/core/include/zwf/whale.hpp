#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "zwf/grid.hpp"

namespace zwf {

// Scalar unknowns and fixed quantities of the whale component.
struct WhaleParams {
  std::map<int, double> beta0;  // daily intercepts, one per whale day
  double beta_bath = 0.0;
  double beta_zoop = 0.0;
  double kappa_psi = 1.0;
  double phi_psi = 1.0;                  // km, fixed
  std::map<int, double> call_rate;       // c, upcalls per whale per hour
  std::map<int, double> surface_prob;    // pi in [0,1], fixed
  std::map<int, double> duration_hours;  // aerial survey duration d
  double log_z_bar = 0.0;                // zooplankton centering constant
};

// Median ambient noise per (day, hydrophone id), dB re 1 uPa.
struct PamContext {
  std::map<std::pair<int, int>, double> noise_db;

  double noise(int day, int hydrophone) const;
};

// One day's point locations with optional per-point multiplicity
// (upper-bound sighting repair stores the recorded group size).
struct PointPattern {
  int day = 0;
  std::vector<Point> points;
  std::vector<int> multiplicity;  // empty means all 1

  int weight(std::size_t i) const {
    return multiplicity.empty() ? 1 : multiplicity[i];
  }
  long long total_weight() const;
};

struct CallCount {
  int day = 0;
  int hydrophone = 0;
  long long calls = 0;
};

// lambda(s) = exp{beta0_day + beta_bath*bath + beta_zoop*(logZ - logZbar)
//                 + psi}, whales per km^2. Throws numerical_error when any
// exponent exceeds 700 (intensity overflow).
ScalarField whale_intensity(const WhaleParams& params, int day,
                            const ScalarField& bath, const ScalarField& log_z,
                            const ScalarField& psi);

// Distance-sampling detection: 1 within 0.75 km of the transect, then a
// squared-exponential falloff, scaled by the day's surface probability.
double dist_detection_profile(double dist_km);
double dist_detection(const WhaleParams& params, int day, Point s,
                      const Transect& t);

// Poisson point-process log-likelihood of the per-(day, transect) detected
// patterns under the thinned intensity p_dist * lambda, with the intensity
// evaluated at each point's containing cell. Every listed (day, transect)
// pair contributes its integral term, observed points or not.
double dist_loglik(
    const WhaleParams& params, const std::map<int, ScalarField>& intensity,
    const std::vector<Transect>& transects,
    const std::map<std::pair<int, int>, PointPattern>& patterns);

// Probability that a call from distance d (meters) clears the noise floor:
// piecewise linear in u = 14.5*log10(d) + noise + 26 between 141 and 197.
double pam_detection(double noise_db, double dist_m);

// Expected calls at hydrophone k: c * d * sum_cells p_pam * lambda * area.
double pam_mean(const WhaleParams& params, int day, const Hydrophone& k,
                double noise_db, const ScalarField& intensity);

// Poisson log-likelihood of observed counts given per-(day, hydrophone)
// means; a positive count with a zero mean is a data/model inconsistency.
double pam_loglik(const std::map<std::pair<int, int>, double>& means,
                  std::span<const CallCount> counts);

}  // namespace zwf
