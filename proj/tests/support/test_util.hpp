#pragma once

#include <map>
#include <vector>

#include "zwf/config.hpp"
#include "zwf/dataset.hpp"
#include "zwf/grid.hpp"

namespace zwf::testutil {

inline Grid square_grid(int nx, int ny, double res = 1.0) {
  return Grid::build({0.0, 0.0, nx * res, ny * res}, res);
}

// A bare-bones dataset: grid + flat covariates + declared days, no
// observations unless the caller adds them.
inline SurveyDataset skeleton_dataset(int nx, int ny,
                                      std::vector<int> zoop_days,
                                      std::vector<int> whale_days) {
  SurveyDataset ds;
  ds.grid = square_grid(nx, ny);
  ds.zoop_days = std::move(zoop_days);
  ds.whale_days = std::move(whale_days);
  for (int day : ds.zoop_days) ds.temperature.emplace(day, ScalarField(ds.grid));
  ds.bathymetry = ScalarField(ds.grid);
  static constexpr double kPi[3] = {0.34, 0.31, 0.55};
  static constexpr double kDur[3] = {3.27, 6.58, 5.32};
  for (std::size_t i = 0; i < ds.whale_days.size(); ++i) {
    ds.surface_prob[ds.whale_days[i]] = kPi[i % 3];
    ds.duration_hours[ds.whale_days[i]] = kDur[i % 3];
  }
  ds.rebind();
  return ds;
}

inline RunConfig quick_config(long iterations, long burnin, int thin,
                              Component comp = Component::joint,
                              PsiMode psi = PsiMode::shared) {
  RunConfig cfg = default_config();
  cfg.mcmc.iterations = iterations;
  cfg.mcmc.burnin = burnin;
  cfg.mcmc.thin = thin;
  cfg.mcmc.chains = 1;
  cfg.component = comp;
  cfg.psi_mode = psi;
  return cfg;
}

}  // namespace zwf::testutil
