#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "zwf/grid.hpp"
#include "zwf/whale.hpp"
#include "zwf/zoop.hpp"

namespace zwf {

// Whether multi-whale sighting records enter the point pattern at their
// recorded group size (upper bound on abundance) or as a single point
// (lower bound).
enum class SightingsMode { upper, lower };

// Standardization applied to raw covariates at ingestion. Persisted with
// the dataset (covariate_scaling.json) so simulation and fitting agree.
struct CovariateScaling {
  double temp_mean = 0.0, temp_sd = 1.0;
  double bath_mean = 0.0, bath_sd = 1.0;
};

// The four observation sources plus geometry and standardized covariates.
struct SurveyDataset {
  Grid grid;
  std::vector<Transect> transects;
  std::vector<Hydrophone> hydrophones;

  std::vector<int> zoop_days;   // sorted
  std::vector<int> whale_days;  // sorted, subset of zoop_days

  std::map<int, ScalarField> temperature;  // standardized, per zoop day
  ScalarField bathymetry;                  // standardized
  CovariateScaling scaling;

  std::vector<TowObservation> tows;
  std::map<std::pair<int, int>, PointPattern> sightings;  // (day, transect)
  std::vector<CallCount> calls;
  PamContext noise;
  std::map<int, double> duration_hours;  // per whale day, from calls file
  std::map<int, double> surface_prob;    // per whale day, fixed by config

  std::vector<std::string> warnings;  // non-fatal ingestion notes

  int zoop_day_index(int day) const;   // -1 if unknown
  int whale_day_index(int day) const;  // -1 if unknown

  // Rewires internal grid pointers after copy/move; call after either.
  void rebind();

  SurveyDataset() = default;
  SurveyDataset(const SurveyDataset& other);
  SurveyDataset& operator=(const SurveyDataset& other);
  SurveyDataset(SurveyDataset&& other) noexcept;
  SurveyDataset& operator=(SurveyDataset&& other) noexcept;
};

// File names within a dataset directory.
namespace dataset_files {
inline constexpr const char* grid = "grid.csv";
inline constexpr const char* transects = "transects.csv";
inline constexpr const char* hydrophones = "hydrophones.csv";
inline constexpr const char* temperature = "temperature.csv";
inline constexpr const char* bathymetry = "bathymetry.csv";
inline constexpr const char* tows = "tows.csv";
inline constexpr const char* sightings = "sightings.csv";
inline constexpr const char* calls = "calls.csv";
inline constexpr const char* scaling = "covariate_scaling.json";
inline constexpr const char* truth = "truth.json";
}  // namespace dataset_files

// Reads and validates a dataset directory. Days with whale data must be a
// subset of zooplankton days; tow values must be positive; locations must
// fall in the active domain; duplicate (day, hydrophone) call rows and
// unknown ids are rejected. `surface_prob` maps whale days to their fixed
// availability probability; missing days fall back to the monthly defaults
// 0.34 / 0.31 / 0.55 cycled in day order.
SurveyDataset ingest(const std::string& dir, SightingsMode mode,
                     const std::map<int, double>& surface_prob = {});

}  // namespace zwf
