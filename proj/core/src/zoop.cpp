#include "zwf/zoop.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "zwf/errors.hpp"

namespace zwf {

ScalarField latent_log_field(const ZoopParams& params, int day,
                             const ScalarField& temp, const ScalarField& eta) {
  if (temp.grid != eta.grid || temp.grid == nullptr)
    throw validation_error("latent_log_field: fields must share a grid");
  auto it = params.alpha0.find(day);
  if (it == params.alpha0.end())
    throw validation_error("latent_log_field: no intercept for day " +
                           std::to_string(day));
  ScalarField out(*temp.grid);
  out.values = it->second +
               (params.alpha_temp * temp.values.array() + eta.values.array());
  return out;
}

namespace {

// Shared accumulation for both tow types; `mean_of_logz` maps the latent
// log field value at the observation cell to the likelihood mean.
template <typename MeanFn>
double tow_loglik(const std::map<int, ScalarField>& log_z,
                  std::span<const TowObservation> obs, TowKind kind,
                  double variance, MeanFn mean_of_logz) {
  double ll = 0.0;
  const double log_norm =
      -0.5 * std::log(2.0 * std::numbers::pi * variance);
  for (const TowObservation& o : obs) {
    if (o.kind != kind) continue;
    if (!(o.value > 0.0))
      throw validation_error("tow value must be > 0, got " +
                             std::to_string(o.value) + " on day " +
                             std::to_string(o.day));
    auto day_it = log_z.find(o.day);
    if (day_it == log_z.end())
      throw validation_error("no latent field for tow day " +
                             std::to_string(o.day));
    const ScalarField& field = day_it->second;
    const int idx = field.grid->active_cell_at(o.location);
    if (idx < 0)
      throw validation_error("tow at (" + std::to_string(o.location.x) + "," +
                             std::to_string(o.location.y) +
                             ") is outside the active domain");
    const double resid = std::log(o.value) - mean_of_logz(field.values[idx]);
    ll += log_norm - 0.5 * resid * resid / variance;
  }
  return ll;
}

}  // namespace

double oblique_loglik(const ZoopParams& params,
                      const std::map<int, ScalarField>& log_z,
                      std::span<const TowObservation> obs) {
  return tow_loglik(log_z, obs, TowKind::oblique, params.sig2_obl,
                    [](double lz) { return lz; });
}

double surface_loglik(const ZoopParams& params,
                      const std::map<int, ScalarField>& log_z,
                      std::span<const TowObservation> obs) {
  return tow_loglik(log_z, obs, TowKind::surface, params.sig2_sur,
                    [&params](double lz) {
                      return params.lam0_sur + params.lam1_sur * lz;
                    });
}

}  // namespace zwf
