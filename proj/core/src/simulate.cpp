#include "zwf/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "zwf/csv.hpp"
#include "zwf/errors.hpp"
#include "zwf/gp.hpp"

#include "json.hpp"

namespace zwf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int sites_for(const ScenarioSpec& spec) {
  if (spec.zoop_sites_per_day > 0) return spec.zoop_sites_per_day;
  if (spec.zoop_sampling == "low") return 9;
  if (spec.zoop_sampling == "moderate") return 20;
  if (spec.zoop_sampling == "high") return 100;
  throw validation_error("scenario: zoop_sampling must be low, moderate, or high");
}

std::pair<int, int> whale_design(const ScenarioSpec& spec) {
  int transects = spec.n_transects, hydros = spec.n_hydrophones;
  if (transects <= 0 || hydros <= 0) {
    if (spec.whale_sampling == "low") {
      transects = 5;
      hydros = 3;
    } else if (spec.whale_sampling == "moderate") {
      transects = 8;
      hydros = 5;
    } else if (spec.whale_sampling == "high") {
      transects = 15;
      hydros = 10;
    } else {
      throw validation_error(
          "scenario: whale_sampling must be low, moderate, or high");
    }
    if (spec.n_transects > 0) transects = spec.n_transects;
    if (spec.n_hydrophones > 0) hydros = spec.n_hydrophones;
  }
  return {transects, hydros};
}

// Evenly spread positions over the active cells, in active-index order.
std::vector<Point> spread_positions(const Grid& grid, int count) {
  std::vector<Point> out;
  out.reserve(count);
  const int n = grid.n_active();
  for (int j = 0; j < count; ++j) {
    const int a = static_cast<int>((j + 0.5) * n / count);
    out.push_back(grid.centroid(grid.active_ids()[std::min(a, n - 1)]));
  }
  return out;
}

Point random_site(const Grid& grid, Rng& rng) {
  const int a = static_cast<int>(rng.rint(grid.n_active()));
  const Point c = grid.centroid(grid.active_ids()[a]);
  const double h = grid.resolution() / 2.0;
  return {c.x + rng.runif(-h, h), c.y + rng.runif(-h, h)};
}

}  // namespace

SurveyLayout make_layout(const ScenarioSpec& spec, const Grid& grid,
                         std::uint64_t seed) {
  SurveyLayout layout;
  const int sites = sites_for(spec);
  const bool fixed_stations = sites == 9 && spec.zoop_sites_per_day <= 0 &&
                              spec.zoop_sampling == "low";
  const std::vector<Point> stations = spread_positions(grid, sites);
  for (std::size_t i = 0; i < spec.zoop_days.size(); ++i) {
    const int day = spec.zoop_days[i];
    if (fixed_stations) {
      layout.tow_sites[day] = stations;
    } else {
      Rng rng(derive_seed(seed, StreamId::scenario_layout, static_cast<std::uint64_t>(day)));
      std::vector<Point> pts(sites);
      for (Point& p : pts) p = random_site(grid, rng);
      layout.tow_sites[day] = std::move(pts);
    }
  }

  const auto [n_transects, n_hydros] = whale_design(spec);
  const BoundingBox& b = grid.bounds();
  for (int t = 0; t < n_transects; ++t) {
    Transect tr;
    tr.id = t;
    const double y = b.y0 + (t + 0.5) * b.height() / n_transects;
    tr.polyline = {{b.x0, y}, {b.x1, y}};
    layout.transects.push_back(std::move(tr));
  }
  const std::vector<Point> hydro_pos = spread_positions(grid, n_hydros);
  for (int k = 0; k < n_hydros; ++k)
    layout.hydrophones.push_back({k, hydro_pos[k]});

  for (int day : spec.whale_days)
    for (const Hydrophone& h : layout.hydrophones)
      layout.noise_db[{day, h.id}] = spec.noise_db;
  return layout;
}

Eigen::VectorXd synth_bathymetry(const Grid& grid) {
  const BoundingBox& b = grid.bounds();
  Eigen::VectorXd v(grid.n_active());
  for (int a = 0; a < grid.n_active(); ++a) {
    const Point c = grid.centroid(grid.active_ids()[a]);
    const double nx = (c.x - b.x0) / b.width();
    const double ny = (c.y - b.y0) / b.height();
    v[a] = 10.0 + 35.0 * ny + 8.0 * nx * (1.0 - nx);
  }
  return v;
}

Eigen::VectorXd synth_temperature(const Grid& grid, int day_index) {
  const BoundingBox& b = grid.bounds();
  Eigen::VectorXd v(grid.n_active());
  for (int a = 0; a < grid.n_active(); ++a) {
    const Point c = grid.centroid(grid.active_ids()[a]);
    const double nx = (c.x - b.x0) / b.width();
    const double ny = (c.y - b.y0) / b.height();
    v[a] = 3.0 + 0.9 * day_index + 2.0 * (1.0 - ny) +
           0.35 * day_index * ny + 0.6 * std::sin(2.0 * std::numbers::pi * nx);
  }
  return v;
}

SimTruth simulate_latents(const ScenarioSpec& spec, PsiMode psi_mode,
                          const Grid& grid,
                          const std::map<int, ScalarField>& temperature,
                          const ScalarField& bathymetry, double phi,
                          std::uint64_t seed) {
  SimTruth truth;
  truth.psi_mode = psi_mode;

  truth.zoop.alpha0_mean = spec.alpha0_mean;
  truth.zoop.tau2 = spec.tau2;
  truth.zoop.alpha_temp = spec.alpha_temp;
  truth.zoop.kappa_eta = spec.kappa_eta;
  truth.zoop.phi_eta = phi;
  truth.zoop.sig2_obl = spec.sig2_obl;
  truth.zoop.sig2_sur = spec.sig2_sur;
  truth.zoop.lam0_sur = spec.lam0_sur;
  truth.zoop.lam1_sur = spec.lam1_sur;

  truth.whale.beta_bath = spec.beta_bath;
  truth.whale.beta_zoop = spec.beta_zoop;
  truth.whale.kappa_psi = spec.kappa_psi;
  truth.whale.phi_psi = phi;
  for (std::size_t i = 0; i < spec.whale_days.size(); ++i) {
    const int day = spec.whale_days[i];
    truth.whale.beta0[day] = spec.beta0;
    truth.whale.call_rate[day] = spec.call_rate;
    static constexpr double kPi[3] = {0.34, 0.31, 0.55};
    static constexpr double kDur[3] = {3.27, 6.58, 5.32};
    auto pit = spec.surface_prob.find(day);
    truth.whale.surface_prob[day] =
        pit != spec.surface_prob.end() ? pit->second : kPi[i % 3];
    auto dit = spec.duration_hours.find(day);
    truth.whale.duration_hours[day] =
        dit != spec.duration_hours.end() ? dit->second : kDur[i % 3];
  }

  GpFactor eta_factor(grid, {spec.kappa_eta, phi});
  for (int day : spec.zoop_days) {
    Rng rng(derive_seed(seed, StreamId::latents, static_cast<std::uint64_t>(day), 0));
    truth.zoop.alpha0[day] =
        rng.rnorm(spec.alpha0_mean, std::sqrt(spec.tau2));
    truth.eta.emplace(day, eta_factor.sample(rng));
    auto temp_it = temperature.find(day);
    if (temp_it == temperature.end())
      throw validation_error("simulate_latents: no temperature for day " +
                             std::to_string(day));
    truth.log_z.emplace(
        day, latent_log_field(truth.zoop, day, temp_it->second, truth.eta.at(day)));
  }

  double lz_sum = 0.0;
  long lz_n = 0;
  for (const auto& [day, f] : truth.log_z) {
    lz_sum += f.values.sum();
    lz_n += f.values.size();
  }
  truth.whale.log_z_bar = lz_sum / lz_n;

  GpFactor psi_factor(grid, {spec.kappa_psi, phi});
  if (psi_mode == PsiMode::shared) {
    Rng rng(derive_seed(seed, StreamId::latents, 0, 1));
    const ScalarField shared = psi_factor.sample(rng);
    for (int day : spec.whale_days) truth.psi.emplace(day, shared);
  } else {
    for (int day : spec.whale_days) {
      Rng rng(derive_seed(seed, StreamId::latents, static_cast<std::uint64_t>(day), 1));
      truth.psi.emplace(day, psi_factor.sample(rng));
    }
  }

  for (int day : spec.whale_days)
    truth.lambda.emplace(day, whale_intensity(truth.whale, day, bathymetry,
                                              truth.log_z.at(day),
                                              truth.psi.at(day)));
  return truth;
}

std::vector<TowObservation> simulate_tows(const SimTruth& truth,
                                          const SurveyLayout& layout,
                                          std::uint64_t seed) {
  std::vector<TowObservation> out;
  const double sd_obl = std::sqrt(truth.zoop.sig2_obl);
  const double sd_sur = std::sqrt(truth.zoop.sig2_sur);
  for (const auto& [day, sites] : layout.tow_sites) {
    Rng rng(derive_seed(seed, StreamId::tows, static_cast<std::uint64_t>(day)));
    const ScalarField& log_z = truth.log_z.at(day);
    for (const Point& site : sites) {
      const int idx = log_z.grid->active_cell_at(site);
      if (idx < 0)
        throw validation_error("simulate_tows: site outside the active domain");
      const double lz = log_z.values[idx];
      out.push_back({day, site, TowKind::oblique,
                     std::exp(rng.rnorm(lz, sd_obl))});
      out.push_back({day, site, TowKind::surface,
                     std::exp(rng.rnorm(truth.zoop.lam0_sur +
                                            truth.zoop.lam1_sur * lz,
                                        sd_sur))});
    }
  }
  return out;
}

PointPattern simulate_point_pattern(const ScalarField& lambda, int day,
                                    Rng& rng) {
  PointPattern out;
  out.day = day;
  const Grid& grid = *lambda.grid;
  const double h = grid.resolution() / 2.0;
  for (int a = 0; a < grid.n_active(); ++a) {
    const long long n = rng.rpois(lambda.values[a] * grid.cell_area());
    const Point c = grid.centroid(grid.active_ids()[a]);
    for (long long i = 0; i < n; ++i)
      out.points.push_back({c.x + rng.runif(-h, h), c.y + rng.runif(-h, h)});
  }
  return out;
}

std::map<int, PointPattern> simulate_distance_survey(
    const PointPattern& truth, const std::vector<Transect>& transects,
    double surface_prob, Rng& rng) {
  std::map<int, PointPattern> out;
  for (const Transect& t : transects) {
    PointPattern& p = out[t.id];
    p.day = truth.day;
  }
  for (const Point& whale : truth.points)
    for (const Transect& t : transects) {
      const double p =
          surface_prob * dist_detection_profile(dist_to_transect(whale, t));
      if (rng.runif() < p) out[t.id].points.push_back(whale);
    }
  return out;
}

std::vector<CallCount> simulate_pam(
    const PointPattern& truth, const std::vector<Hydrophone>& hydrophones,
    double calls_per_whale, int day,
    const std::map<std::pair<int, int>, double>& noise_db, Rng& rng) {
  std::vector<CallCount> out;
  std::vector<long long> w(hydrophones.size(), 0);
  for (const Point& whale : truth.points) {
    const long long calls = rng.rpois(calls_per_whale);
    for (std::size_t k = 0; k < hydrophones.size(); ++k) {
      auto it = noise_db.find({day, hydrophones[k].id});
      if (it == noise_db.end())
        throw validation_error("simulate_pam: no noise for day " +
                               std::to_string(day) + ", hydrophone " +
                               std::to_string(hydrophones[k].id));
      const double p =
          pam_detection(it->second, dist_to_hydrophone(whale, hydrophones[k]));
      for (long long c = 0; c < calls; ++c)
        if (rng.runif() < p) ++w[k];
    }
  }
  for (std::size_t k = 0; k < hydrophones.size(); ++k)
    out.push_back({day, hydrophones[k].id, w[k]});
  return out;
}

SimOutput simulate_scenario(const ScenarioSpec& spec, PsiMode psi_mode,
                            std::uint64_t seed, double effective_range_km) {
  SimOutput out;
  SurveyDataset& ds = out.dataset;
  ds.grid = Grid::build(spec.bounds, spec.resolution, spec.mask);

  for (int day : spec.whale_days)
    if (std::find(spec.zoop_days.begin(), spec.zoop_days.end(), day) ==
        spec.zoop_days.end())
      throw validation_error("scenario: whale day " + std::to_string(day) +
                             " is not a zooplankton day");

  // Raw covariates, then the same standardization ingest applies.
  out.raw_bathymetry = synth_bathymetry(ds.grid);
  for (std::size_t i = 0; i < spec.zoop_days.size(); ++i)
    out.raw_temperature[spec.zoop_days[i]] =
        synth_temperature(ds.grid, static_cast<int>(i));

  double sum = 0.0, sum2 = 0.0;
  long n = 0;
  for (const auto& [day, v] : out.raw_temperature) {
    sum += v.sum();
    sum2 += v.squaredNorm();
    n += v.size();
  }
  ds.scaling.temp_mean = sum / n;
  const double var_t = sum2 / n - ds.scaling.temp_mean * ds.scaling.temp_mean;
  ds.scaling.temp_sd = var_t > 0 ? std::sqrt(var_t) : 1.0;
  ds.scaling.bath_mean = out.raw_bathymetry.mean();
  const double var_b = out.raw_bathymetry.squaredNorm() / out.raw_bathymetry.size() -
                       ds.scaling.bath_mean * ds.scaling.bath_mean;
  ds.scaling.bath_sd = var_b > 0 ? std::sqrt(var_b) : 1.0;

  for (const auto& [day, v] : out.raw_temperature)
    ds.temperature.emplace(
        day, ScalarField(ds.grid, (v.array() - ds.scaling.temp_mean) /
                                      ds.scaling.temp_sd));
  ds.bathymetry = ScalarField(
      ds.grid,
      (out.raw_bathymetry.array() - ds.scaling.bath_mean) / ds.scaling.bath_sd);

  const double range = effective_range_km > 0.0
                           ? effective_range_km
                           : default_effective_range(spec.bounds);
  const double phi = decay_from_effective_range(range);

  SurveyLayout layout = make_layout(spec, ds.grid, seed);
  out.truth = simulate_latents(spec, psi_mode, ds.grid, ds.temperature,
                               ds.bathymetry, phi, seed);

  ds.zoop_days = spec.zoop_days;
  std::sort(ds.zoop_days.begin(), ds.zoop_days.end());
  ds.whale_days = spec.whale_days;
  std::sort(ds.whale_days.begin(), ds.whale_days.end());
  ds.transects = layout.transects;
  ds.hydrophones = layout.hydrophones;
  ds.noise.noise_db = layout.noise_db;
  ds.surface_prob = out.truth.whale.surface_prob;
  ds.duration_hours = out.truth.whale.duration_hours;

  ds.tows = simulate_tows(out.truth, layout, seed);

  for (int day : ds.whale_days) {
    Rng pattern_rng(derive_seed(seed, StreamId::point_pattern,
                                static_cast<std::uint64_t>(day)));
    PointPattern whales =
        simulate_point_pattern(out.truth.lambda.at(day), day, pattern_rng);

    Rng survey_rng(derive_seed(seed, StreamId::distance_survey,
                               static_cast<std::uint64_t>(day)));
    auto detected = simulate_distance_survey(
        whales, layout.transects, out.truth.whale.surface_prob.at(day),
        survey_rng);
    for (auto& [tid, pattern] : detected)
      ds.sightings[{day, tid}] = std::move(pattern);

    Rng pam_rng(derive_seed(seed, StreamId::pam, static_cast<std::uint64_t>(day)));
    auto counts = simulate_pam(
        whales, layout.hydrophones,
        out.truth.whale.call_rate.at(day) * out.truth.whale.duration_hours.at(day),
        day, layout.noise_db, pam_rng);
    ds.calls.insert(ds.calls.end(), counts.begin(), counts.end());

    out.truth.true_whales.emplace(day, std::move(whales));
  }
  ds.rebind();
  return out;
}

void write_dataset(const SimOutput& out, const std::string& dir) {
  fs::create_directories(dir);
  const SurveyDataset& ds = out.dataset;
  const Grid& grid = ds.grid;

  {
    CsvTable t({"cell_id", "x_km", "y_km", "in_domain"});
    for (int cell = 0; cell < grid.n_cells(); ++cell) {
      const Point c = grid.centroid(cell);
      t.append_row({std::to_string(cell), format_double(c.x), format_double(c.y),
                    grid.is_active(cell) ? "1" : "0"});
    }
    t.write_file((fs::path(dir) / dataset_files::grid).string());
  }
  {
    CsvTable t({"transect_id", "vertex_idx", "x_km", "y_km"});
    for (const Transect& tr : ds.transects)
      for (std::size_t i = 0; i < tr.polyline.size(); ++i)
        t.append_row({std::to_string(tr.id), std::to_string(i),
                      format_double(tr.polyline[i].x),
                      format_double(tr.polyline[i].y)});
    t.write_file((fs::path(dir) / dataset_files::transects).string());
  }
  {
    CsvTable t({"hydrophone_id", "x_km", "y_km"});
    for (const Hydrophone& h : ds.hydrophones)
      t.append_row({std::to_string(h.id), format_double(h.location.x),
                    format_double(h.location.y)});
    t.write_file((fs::path(dir) / dataset_files::hydrophones).string());
  }
  {
    CsvTable t({"day", "cell_id", "temp"});
    for (const auto& [day, v] : out.raw_temperature)
      for (int a = 0; a < grid.n_active(); ++a)
        t.append_row({std::to_string(day),
                      std::to_string(grid.active_ids()[a]),
                      format_double(v[a])});
    t.write_file((fs::path(dir) / dataset_files::temperature).string());
  }
  {
    CsvTable t({"cell_id", "bath"});
    for (int a = 0; a < grid.n_active(); ++a)
      t.append_row({std::to_string(grid.active_ids()[a]),
                    format_double(out.raw_bathymetry[a])});
    t.write_file((fs::path(dir) / dataset_files::bathymetry).string());
  }
  {
    CsvTable t({"day", "kind", "x_km", "y_km", "organisms_per_m3"});
    for (const TowObservation& o : ds.tows)
      t.append_row({std::to_string(o.day),
                    o.kind == TowKind::oblique ? "oblique" : "surface",
                    format_double(o.location.x), format_double(o.location.y),
                    format_double(o.value)});
    t.write_file((fs::path(dir) / dataset_files::tows).string());
  }
  {
    CsvTable t({"day", "transect_id", "x_km", "y_km", "count"});
    for (const auto& [key, pattern] : ds.sightings)
      for (std::size_t i = 0; i < pattern.points.size(); ++i)
        t.append_row({std::to_string(key.first), std::to_string(key.second),
                      format_double(pattern.points[i].x),
                      format_double(pattern.points[i].y),
                      std::to_string(pattern.weight(i))});
    t.write_file((fs::path(dir) / dataset_files::sightings).string());
  }
  {
    CsvTable t({"day", "hydrophone_id", "calls", "noise_db", "duration_hours"});
    for (const CallCount& cc : ds.calls)
      t.append_row({std::to_string(cc.day), std::to_string(cc.hydrophone),
                    std::to_string(cc.calls),
                    format_double(ds.noise.noise(cc.day, cc.hydrophone)),
                    format_double(ds.duration_hours.at(cc.day))});
    t.write_file((fs::path(dir) / dataset_files::calls).string());
  }
  {
    json j;
    j["temp"] = {{"mean", ds.scaling.temp_mean}, {"sd", ds.scaling.temp_sd}};
    j["bath"] = {{"mean", ds.scaling.bath_mean}, {"sd", ds.scaling.bath_sd}};
    std::ofstream f(fs::path(dir) / dataset_files::scaling, std::ios::trunc);
    f << j.dump(2) << "\n";
  }

  // Ground truth for scoring.
  {
    const SimTruth& tr = out.truth;
    json j;
    json alpha0 = json::object(), beta0 = json::object(), c = json::object();
    json pi = json::object(), dur = json::object();
    for (auto& [d, v] : tr.zoop.alpha0) alpha0[std::to_string(d)] = v;
    for (auto& [d, v] : tr.whale.beta0) beta0[std::to_string(d)] = v;
    for (auto& [d, v] : tr.whale.call_rate) c[std::to_string(d)] = v;
    for (auto& [d, v] : tr.whale.surface_prob) pi[std::to_string(d)] = v;
    for (auto& [d, v] : tr.whale.duration_hours) dur[std::to_string(d)] = v;
    j["params"] = {{"alpha0", alpha0},
                   {"alpha0_mean", tr.zoop.alpha0_mean},
                   {"tau2", tr.zoop.tau2},
                   {"alpha_temp", tr.zoop.alpha_temp},
                   {"kappa_eta", tr.zoop.kappa_eta},
                   {"phi_eta", tr.zoop.phi_eta},
                   {"sig2_obl", tr.zoop.sig2_obl},
                   {"sig2_sur", tr.zoop.sig2_sur},
                   {"lam0_sur", tr.zoop.lam0_sur},
                   {"lam1_sur", tr.zoop.lam1_sur},
                   {"beta0", beta0},
                   {"beta_bath", tr.whale.beta_bath},
                   {"beta_zoop", tr.whale.beta_zoop},
                   {"kappa_psi", tr.whale.kappa_psi},
                   {"phi_psi", tr.whale.phi_psi},
                   {"call_rate", c},
                   {"surface_prob", pi},
                   {"duration_hours", dur},
                   {"log_z_bar", tr.whale.log_z_bar}};
    j["psi_mode"] = tr.psi_mode == PsiMode::shared ? "shared" : "daily";
    json logz = json::object(), loglam = json::object();
    json zoop_mean = json::object(), whale_expected = json::object(),
         whale_realized = json::object();
    for (const auto& [day, f] : tr.log_z) {
      logz[std::to_string(day)] =
          std::vector<double>(f.values.data(), f.values.data() + f.values.size());
      zoop_mean[std::to_string(day)] = f.values.array().exp().mean();
    }
    for (const auto& [day, f] : tr.lambda) {
      Eigen::VectorXd ll = f.values.array().log();
      loglam[std::to_string(day)] =
          std::vector<double>(ll.data(), ll.data() + ll.size());
      whale_expected[std::to_string(day)] = integrate_field(f);
      whale_realized[std::to_string(day)] =
          tr.true_whales.at(day).total_weight();
    }
    j["fields"] = {{"log_z", logz}, {"log_lambda", loglam}};
    j["abundance"] = {{"zoop_mean", zoop_mean},
                      {"whale_expected", whale_expected},
                      {"whale_realized", whale_realized}};
    std::ofstream f(fs::path(dir) / dataset_files::truth, std::ios::trunc);
    f << j.dump() << "\n";
  }
}

}  // namespace zwf
