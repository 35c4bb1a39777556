#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace zwf {

// Standard normal quantile function (Wichura's AS241 rational fit).
double normal_quantile(double p);

// Rank-normalized split R-hat over >= 2 equal-length chains of >= 2 draws.
double split_rhat(const std::vector<Eigen::VectorXd>& chains);

// Rank-normalized bulk effective sample size (Geyer initial monotone
// pairing over the split chains).
double bulk_ess(const std::vector<Eigen::VectorXd>& chains);

struct DiagnosticsRow {
  std::string name;
  double rhat = 0.0;
  double ess = 0.0;
};

// One row per named scalar; chains_by_param[p][c] is chain c of parameter p.
std::vector<DiagnosticsRow> diagnostics(
    const std::vector<std::string>& names,
    const std::vector<std::vector<Eigen::VectorXd>>& chains_by_param);

}  // namespace zwf
