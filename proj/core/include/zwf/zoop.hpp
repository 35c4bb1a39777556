#pragma once

#include <map>
#include <span>
#include <vector>

#include "zwf/grid.hpp"

namespace zwf {

// Scalar unknowns and fixed hyperparameters of the zooplankton component.
struct ZoopParams {
  std::map<int, double> alpha0;  // daily intercepts, one per zooplankton day
  double alpha0_mean = 0.0;      // intercept mean (simulation / init anchor)
  double tau2 = 0.04;            // intercept variance, fixed
  double alpha_temp = 0.0;
  double kappa_eta = 1.0;
  double phi_eta = 1.0;   // km, fixed
  double sig2_obl = 1.0;  // oblique measurement error, fixed
  double sig2_sur = 1.0;
  double lam0_sur = 0.0;  // surface-tow calibration intercept
  double lam1_sur = 1.0;  // surface-tow calibration slope
};

enum class TowKind { oblique, surface };

struct TowObservation {
  int day = 0;
  Point location;
  TowKind kind = TowKind::oblique;
  double value = 0.0;  // organisms per m^3, > 0
};

// log Z(s) = alpha0_day + alpha_temp * temp(s) + eta(s) on the active cells.
// `temp` is the pre-standardized temperature covariate for the day.
ScalarField latent_log_field(const ZoopParams& params, int day,
                             const ScalarField& temp, const ScalarField& eta);

// Gaussian log-likelihood of log-tow values around the latent log field at
// each observation's containing cell, normalizing constants included.
// Oblique tows read the field directly (variance sig2_obl); surface tows
// read lam0 + lam1 * logZ (variance sig2_sur).
double oblique_loglik(const ZoopParams& params,
                      const std::map<int, ScalarField>& log_z,
                      std::span<const TowObservation> obs);
double surface_loglik(const ZoopParams& params,
                      const std::map<int, ScalarField>& log_z,
                      std::span<const TowObservation> obs);

}  // namespace zwf
