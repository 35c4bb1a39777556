#include "zwf/whale.hpp"

#include <cmath>
#include <string>

#include "zwf/errors.hpp"

namespace zwf {

double PamContext::noise(int day, int hydrophone) const {
  auto it = noise_db.find({day, hydrophone});
  if (it == noise_db.end())
    throw validation_error("no ambient noise for day " + std::to_string(day) +
                           ", hydrophone " + std::to_string(hydrophone));
  return it->second;
}

long long PointPattern::total_weight() const {
  long long w = 0;
  for (std::size_t i = 0; i < points.size(); ++i) w += weight(i);
  return w;
}

namespace {

double require_day(const std::map<int, double>& m, int day, const char* what) {
  auto it = m.find(day);
  if (it == m.end())
    throw validation_error(std::string("no ") + what + " for day " +
                           std::to_string(day));
  return it->second;
}

}  // namespace

ScalarField whale_intensity(const WhaleParams& params, int day,
                            const ScalarField& bath, const ScalarField& log_z,
                            const ScalarField& psi) {
  if (bath.grid == nullptr || bath.grid != log_z.grid || bath.grid != psi.grid)
    throw validation_error("whale_intensity: fields must share a grid");
  const double beta0 = require_day(params.beta0, day, "whale intercept");
  ScalarField out(*bath.grid);
  out.values = beta0 +
               (params.beta_bath * bath.values.array() +
                params.beta_zoop * (log_z.values.array() - params.log_z_bar) +
                psi.values.array());
  if ((out.values.array() > 700.0).any())
    throw numerical_error("whale_intensity: exponent exceeds 700 on day " +
                          std::to_string(day));
  out.values = out.values.array().exp();
  return out;
}

double dist_detection_profile(double dist_km) {
  if (dist_km <= 0.75) return 1.0;
  const double excess = dist_km - 0.75;
  return std::exp(-excess * excess);
}

double dist_detection(const WhaleParams& params, int day, Point s,
                      const Transect& t) {
  const double pi_day = require_day(params.surface_prob, day, "surface probability");
  return pi_day * dist_detection_profile(dist_to_transect(s, t));
}

double dist_loglik(
    const WhaleParams& params, const std::map<int, ScalarField>& intensity,
    const std::vector<Transect>& transects,
    const std::map<std::pair<int, int>, PointPattern>& patterns) {
  double ll = 0.0;
  for (const auto& [key, pattern] : patterns) {
    const auto [day, transect_id] = key;
    const Transect* transect = nullptr;
    for (const Transect& t : transects)
      if (t.id == transect_id) transect = &t;
    if (transect == nullptr)
      throw validation_error("dist_loglik: unknown transect id " +
                             std::to_string(transect_id));
    auto day_it = intensity.find(day);
    if (day_it == intensity.end())
      throw validation_error("dist_loglik: no intensity for day " +
                             std::to_string(day));
    const ScalarField& lambda = day_it->second;
    const Grid& grid = *lambda.grid;
    const double pi_day = require_day(params.surface_prob, day, "surface probability");

    // Integral of the degraded intensity, detection at cell centroids.
    double integral = 0.0;
    for (int a = 0; a < grid.n_active(); ++a) {
      const Point c = grid.centroid(grid.active_ids()[a]);
      integral += dist_detection_profile(dist_to_transect(c, *transect)) *
                  lambda.values[a];
    }
    ll -= pi_day * integral * grid.cell_area();

    for (std::size_t i = 0; i < pattern.points.size(); ++i) {
      const int idx = grid.active_cell_at(pattern.points[i]);
      if (idx < 0)
        throw validation_error("sighting outside the active domain on day " +
                               std::to_string(day));
      const Point c = grid.centroid(grid.active_ids()[idx]);
      const double p =
          pi_day * dist_detection_profile(dist_to_transect(c, *transect));
      const double deg = p * lambda.values[idx];
      if (!(deg > 0.0))
        throw validation_error(
            "sighting in a cell with zero detected intensity on day " +
            std::to_string(day) + ", transect " + std::to_string(transect_id));
      ll += pattern.weight(i) * std::log(deg);
    }
  }
  return ll;
}

double pam_detection(double noise_db, double dist_m) {
  if (!(dist_m >= 1.0))
    throw validation_error("pam_detection: distance must be >= 1 m");
  const double u = 14.5 * std::log10(dist_m) + noise_db + 26.0;
  if (u > 197.0) return 0.0;
  if (u < 141.0) return 1.0;
  return 1.0 - (u - 141.0) / 56.0;
}

double pam_mean(const WhaleParams& params, int day, const Hydrophone& k,
                double noise_db, const ScalarField& intensity) {
  const double c = require_day(params.call_rate, day, "call rate");
  const double d = require_day(params.duration_hours, day, "survey duration");
  const Grid& grid = *intensity.grid;
  double integral = 0.0;
  for (int a = 0; a < grid.n_active(); ++a) {
    const Point cell = grid.centroid(grid.active_ids()[a]);
    integral +=
        pam_detection(noise_db, dist_to_hydrophone(cell, k)) * intensity.values[a];
  }
  return c * d * integral * grid.cell_area();
}

double pam_loglik(const std::map<std::pair<int, int>, double>& means,
                  std::span<const CallCount> counts) {
  double ll = 0.0;
  for (const CallCount& cc : counts) {
    auto it = means.find({cc.day, cc.hydrophone});
    if (it == means.end())
      throw validation_error("pam_loglik: no mean for day " +
                             std::to_string(cc.day) + ", hydrophone " +
                             std::to_string(cc.hydrophone));
    const double mean = it->second;
    if (cc.calls < 0)
      throw validation_error("pam_loglik: negative call count");
    if (mean <= 0.0) {
      if (cc.calls > 0)
        throw validation_error(
            "pam_loglik: positive count with zero detection mean at day " +
            std::to_string(cc.day) + ", hydrophone " +
            std::to_string(cc.hydrophone));
      continue;  // 0 calls, mean 0: probability 1
    }
    ll += -mean + cc.calls * std::log(mean) -
          std::lgamma(static_cast<double>(cc.calls) + 1.0);
  }
  return ll;
}

}  // namespace zwf
