#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zwf/config.hpp"
#include "zwf/dataset.hpp"
#include "zwf/rng.hpp"

namespace zwf {

// Realized ground truth behind one synthetic dataset.
struct SimTruth {
  ZoopParams zoop;    // alpha0 filled with the realized draws
  WhaleParams whale;  // log_z_bar set from the realized fields
  PsiMode psi_mode = PsiMode::shared;
  std::map<int, ScalarField> eta;          // per zoop day
  std::map<int, ScalarField> psi;          // per whale day (shared: same field)
  std::map<int, ScalarField> log_z;        // per zoop day
  std::map<int, ScalarField> lambda;       // per whale day
  std::map<int, PointPattern> true_whales; // per whale day
};

// Concrete survey design realized from a ScenarioSpec.
struct SurveyLayout {
  std::map<int, std::vector<Point>> tow_sites;  // per zoop day
  std::vector<Transect> transects;
  std::vector<Hydrophone> hydrophones;
  std::map<std::pair<int, int>, double> noise_db;  // (day, hydrophone)
};

// Deterministic design: low zoop sampling reuses 9 fixed stations; other
// intensities draw per-day sites. Transects are evenly spaced horizontal
// lines; hydrophones sit on evenly spread active cells.
SurveyLayout make_layout(const ScenarioSpec& spec, const Grid& grid,
                         std::uint64_t seed);

// Synthetic raw covariates: a north-south bathymetry gradient and a
// temperature surface warming over the season with a day-varying gradient.
Eigen::VectorXd synth_bathymetry(const Grid& grid);
Eigen::VectorXd synth_temperature(const Grid& grid, int day_index);

// Draws daily intercepts and GP fields, then builds log Z and lambda.
SimTruth simulate_latents(const ScenarioSpec& spec, PsiMode psi_mode,
                          const Grid& grid,
                          const std::map<int, ScalarField>& temperature,
                          const ScalarField& bathymetry, double phi,
                          std::uint64_t seed);

// Tow observations at the layout sites: one oblique and one surface tow per
// site, noised on the log scale and read from the site's containing cell.
std::vector<TowObservation> simulate_tows(const SimTruth& truth,
                                          const SurveyLayout& layout,
                                          std::uint64_t seed);

// Per-cell Poisson counts with uniform placement inside each cell; exact
// for the piecewise-constant intensity.
PointPattern simulate_point_pattern(const ScalarField& lambda, int day,
                                    Rng& rng);

// Independent Bernoulli thinning of the true pattern per transect, using
// each whale's exact location. A whale may appear in several transects.
std::map<int, PointPattern> simulate_distance_survey(
    const PointPattern& truth, const std::vector<Transect>& transects,
    double surface_prob, Rng& rng);

// Calls per whale ~ Poisson(c*d); each call is heard at each hydrophone
// independently with the pam detection probability at the whale location.
std::vector<CallCount> simulate_pam(
    const PointPattern& truth, const std::vector<Hydrophone>& hydrophones,
    double calls_per_whale, int day,
    const std::map<std::pair<int, int>, double>& noise_db, Rng& rng);

struct SimOutput {
  SurveyDataset dataset;  // standardized covariates, ready to fit
  SimTruth truth;
  std::map<int, Eigen::VectorXd> raw_temperature;
  Eigen::VectorXd raw_bathymetry;
};

// Full pipeline: grid, covariates, layout, latents, and all four data
// sources. Byte-identical output for a fixed (spec, psi_mode, seed).
SimOutput simulate_scenario(const ScenarioSpec& spec, PsiMode psi_mode,
                            std::uint64_t seed,
                            double effective_range_km = 0.0);

// Writes the ingestible CSV set plus covariate_scaling.json and truth.json.
void write_dataset(const SimOutput& out, const std::string& dir);

}  // namespace zwf
