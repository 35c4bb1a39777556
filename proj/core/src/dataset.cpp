#include "zwf/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "zwf/csv.hpp"
#include "zwf/errors.hpp"

#include "json.hpp"

namespace zwf {

namespace fs = std::filesystem;
using nlohmann::json;

int SurveyDataset::zoop_day_index(int day) const {
  auto it = std::lower_bound(zoop_days.begin(), zoop_days.end(), day);
  if (it == zoop_days.end() || *it != day) return -1;
  return static_cast<int>(it - zoop_days.begin());
}

int SurveyDataset::whale_day_index(int day) const {
  auto it = std::lower_bound(whale_days.begin(), whale_days.end(), day);
  if (it == whale_days.end() || *it != day) return -1;
  return static_cast<int>(it - whale_days.begin());
}

void SurveyDataset::rebind() {
  for (auto& [day, field] : temperature) field.grid = &grid;
  bathymetry.grid = &grid;
}

SurveyDataset::SurveyDataset(const SurveyDataset& other) {
  *this = other;
}

SurveyDataset& SurveyDataset::operator=(const SurveyDataset& other) {
  if (this == &other) return *this;
  grid = other.grid;
  transects = other.transects;
  hydrophones = other.hydrophones;
  zoop_days = other.zoop_days;
  whale_days = other.whale_days;
  temperature = other.temperature;
  bathymetry = other.bathymetry;
  scaling = other.scaling;
  tows = other.tows;
  sightings = other.sightings;
  calls = other.calls;
  noise = other.noise;
  duration_hours = other.duration_hours;
  surface_prob = other.surface_prob;
  warnings = other.warnings;
  rebind();
  return *this;
}

SurveyDataset::SurveyDataset(SurveyDataset&& other) noexcept {
  *this = std::move(other);
}

SurveyDataset& SurveyDataset::operator=(SurveyDataset&& other) noexcept {
  if (this == &other) return *this;
  grid = std::move(other.grid);
  transects = std::move(other.transects);
  hydrophones = std::move(other.hydrophones);
  zoop_days = std::move(other.zoop_days);
  whale_days = std::move(other.whale_days);
  temperature = std::move(other.temperature);
  bathymetry = std::move(other.bathymetry);
  scaling = std::move(other.scaling);
  tows = std::move(other.tows);
  sightings = std::move(other.sightings);
  calls = std::move(other.calls);
  noise = std::move(other.noise);
  duration_hours = std::move(other.duration_hours);
  surface_prob = std::move(other.surface_prob);
  warnings = std::move(other.warnings);
  rebind();
  return *this;
}

namespace {

std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}

Grid read_grid(const std::string& path) {
  CsvTable t = CsvTable::read_file(path);
  const auto c_id = t.column("cell_id");
  const auto c_x = t.column("x_km");
  const auto c_y = t.column("y_km");
  const auto c_in = t.column("in_domain");
  std::vector<Point> centroids(t.n_rows());
  std::vector<bool> in_domain(t.n_rows());
  std::vector<bool> seen(t.n_rows(), false);
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const long long id = t.integer(r, c_id);
    if (id < 0 || static_cast<std::size_t>(id) >= t.n_rows() || seen[id])
      throw validation_error(path + ": cell ids must be unique and contiguous from 0");
    seen[id] = true;
    centroids[id] = {t.num(r, c_x), t.num(r, c_y)};
    in_domain[id] = t.integer(r, c_in) != 0;
  }
  return Grid::from_cells(centroids, in_domain);
}

std::vector<Transect> read_transects(const std::string& path) {
  std::vector<Transect> out;
  if (!fs::exists(path)) return out;
  CsvTable t = CsvTable::read_file(path);
  const auto c_id = t.column("transect_id");
  const auto c_idx = t.column("vertex_idx");
  const auto c_x = t.column("x_km");
  const auto c_y = t.column("y_km");
  std::map<int, std::map<int, Point>> by_id;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    const int id = static_cast<int>(t.integer(r, c_id));
    const int idx = static_cast<int>(t.integer(r, c_idx));
    if (!by_id[id].emplace(idx, Point{t.num(r, c_x), t.num(r, c_y)}).second)
      throw validation_error(path + ": duplicate vertex " + std::to_string(idx) +
                             " on transect " + std::to_string(id));
  }
  for (auto& [id, verts] : by_id) {
    Transect tr;
    tr.id = id;
    for (auto& [idx, p] : verts) tr.polyline.push_back(p);
    validate_transect(tr);
    out.push_back(std::move(tr));
  }
  return out;
}

std::vector<Hydrophone> read_hydrophones(const std::string& path,
                                         const Grid& grid) {
  std::vector<Hydrophone> out;
  if (!fs::exists(path)) return out;
  CsvTable t = CsvTable::read_file(path);
  const auto c_id = t.column("hydrophone_id");
  const auto c_x = t.column("x_km");
  const auto c_y = t.column("y_km");
  std::set<int> seen;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    Hydrophone h;
    h.id = static_cast<int>(t.integer(r, c_id));
    h.location = {t.num(r, c_x), t.num(r, c_y)};
    if (!seen.insert(h.id).second)
      throw validation_error(path + ": duplicate hydrophone id " +
                             std::to_string(h.id));
    if (!grid.bounds().contains(h.location))
      throw validation_error(path + ": hydrophone " + std::to_string(h.id) +
                             " outside the grid bounding box");
    out.push_back(h);
  }
  std::sort(out.begin(), out.end(),
            [](const Hydrophone& a, const Hydrophone& b) { return a.id < b.id; });
  return out;
}

}  // namespace

SurveyDataset ingest(const std::string& dir, SightingsMode mode,
                     const std::map<int, double>& surface_prob) {
  SurveyDataset ds;
  ds.grid = read_grid(join(dir, dataset_files::grid));
  ds.transects = read_transects(join(dir, dataset_files::transects));
  ds.hydrophones = read_hydrophones(join(dir, dataset_files::hydrophones), ds.grid);

  // Temperature defines the zooplankton days.
  {
    CsvTable t = CsvTable::read_file(join(dir, dataset_files::temperature));
    const auto c_day = t.column("day");
    const auto c_cell = t.column("cell_id");
    const auto c_v = t.column("temp");
    std::map<int, std::vector<std::pair<int, double>>> rows;
    for (std::size_t r = 0; r < t.n_rows(); ++r)
      rows[static_cast<int>(t.integer(r, c_day))].emplace_back(
          static_cast<int>(t.integer(r, c_cell)), t.num(r, c_v));
    if (rows.empty())
      throw validation_error("temperature.csv: no rows, need one day at least");
    for (auto& [day, cells] : rows) {
      ds.zoop_days.push_back(day);
      ScalarField f(ds.grid);
      std::vector<bool> filled(ds.grid.n_active(), false);
      for (auto& [cell, v] : cells) {
        if (cell < 0 || cell >= ds.grid.n_cells())
          throw validation_error("temperature.csv: unknown cell id " +
                                 std::to_string(cell));
        const int a = ds.grid.active_index(cell);
        if (a < 0) continue;  // covariate rows for inactive cells are ignored
        f.values[a] = v;
        filled[a] = true;
      }
      for (int a = 0; a < ds.grid.n_active(); ++a)
        if (!filled[a])
          throw validation_error("temperature.csv: day " + std::to_string(day) +
                                 " missing cell " +
                                 std::to_string(ds.grid.active_ids()[a]));
      ds.temperature.emplace(day, std::move(f));
    }
  }

  {
    CsvTable t = CsvTable::read_file(join(dir, dataset_files::bathymetry));
    const auto c_cell = t.column("cell_id");
    const auto c_v = t.column("bath");
    ds.bathymetry = ScalarField(ds.grid);
    std::vector<bool> filled(ds.grid.n_active(), false);
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      const int cell = static_cast<int>(t.integer(r, c_cell));
      if (cell < 0 || cell >= ds.grid.n_cells())
        throw validation_error("bathymetry.csv: unknown cell id " +
                               std::to_string(cell));
      const int a = ds.grid.active_index(cell);
      if (a < 0) continue;
      ds.bathymetry.values[a] = t.num(r, c_v);
      filled[a] = true;
    }
    for (int a = 0; a < ds.grid.n_active(); ++a)
      if (!filled[a])
        throw validation_error("bathymetry.csv: missing cell " +
                               std::to_string(ds.grid.active_ids()[a]));
  }

  // Standardize covariates: temperature jointly across days, bathymetry
  // over cells. A persisted scaling file wins so refits reuse the exact
  // transform the dataset was generated with.
  {
    const std::string spath = join(dir, dataset_files::scaling);
    if (fs::exists(spath)) {
      std::ifstream in(spath);
      json j;
      in >> j;
      ds.scaling.temp_mean = j.at("temp").at("mean").get<double>();
      ds.scaling.temp_sd = j.at("temp").at("sd").get<double>();
      ds.scaling.bath_mean = j.at("bath").at("mean").get<double>();
      ds.scaling.bath_sd = j.at("bath").at("sd").get<double>();
    } else {
      double sum = 0.0, sum2 = 0.0;
      long n = 0;
      for (auto& [day, f] : ds.temperature) {
        sum += f.values.sum();
        sum2 += f.values.squaredNorm();
        n += f.values.size();
      }
      ds.scaling.temp_mean = sum / n;
      const double var_t = sum2 / n - ds.scaling.temp_mean * ds.scaling.temp_mean;
      ds.scaling.temp_sd = var_t > 0 ? std::sqrt(var_t) : 1.0;
      ds.scaling.bath_mean = ds.bathymetry.values.mean();
      const double var_b =
          ds.bathymetry.values.squaredNorm() / ds.bathymetry.values.size() -
          ds.scaling.bath_mean * ds.scaling.bath_mean;
      ds.scaling.bath_sd = var_b > 0 ? std::sqrt(var_b) : 1.0;
    }
    if (!(ds.scaling.temp_sd > 0.0) || !(ds.scaling.bath_sd > 0.0))
      throw validation_error("covariate scaling: sd must be > 0");
    for (auto& [day, f] : ds.temperature)
      f.values = (f.values.array() - ds.scaling.temp_mean) / ds.scaling.temp_sd;
    ds.bathymetry.values =
        (ds.bathymetry.values.array() - ds.scaling.bath_mean) / ds.scaling.bath_sd;
  }

  // Tows.
  {
    CsvTable t = CsvTable::read_file(join(dir, dataset_files::tows));
    const auto c_day = t.column("day");
    const auto c_kind = t.column("kind");
    const auto c_x = t.column("x_km");
    const auto c_y = t.column("y_km");
    const auto c_v = t.column("organisms_per_m3");
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      TowObservation o;
      o.day = static_cast<int>(t.integer(r, c_day));
      const std::string& kind = t.cell(r, c_kind);
      if (kind == "oblique")
        o.kind = TowKind::oblique;
      else if (kind == "surface")
        o.kind = TowKind::surface;
      else
        throw validation_error("tows.csv: row " + std::to_string(r + 2) +
                               ": kind must be oblique or surface, got '" +
                               kind + "'");
      o.location = {t.num(r, c_x), t.num(r, c_y)};
      o.value = t.num(r, c_v);
      if (!(o.value > 0.0))
        throw validation_error("tows.csv: row " + std::to_string(r + 2) +
                               ": tow value must be > 0, got " +
                               t.cell(r, c_v));
      if (ds.zoop_day_index(o.day) < 0 && ds.temperature.count(o.day) == 0)
        throw validation_error("tows.csv: row " + std::to_string(r + 2) +
                               ": day " + std::to_string(o.day) +
                               " has no temperature field");
      if (ds.grid.active_cell_at(o.location) < 0)
        throw validation_error("tows.csv: row " + std::to_string(r + 2) +
                               ": location outside the active domain");
      ds.tows.push_back(o);
    }
  }

  std::set<int> wdays;

  // Sightings: one row per (day, transect, location, count).
  {
    const std::string path = join(dir, dataset_files::sightings);
    if (fs::exists(path)) {
      CsvTable t = CsvTable::read_file(path);
      const auto c_day = t.column("day");
      const auto c_tr = t.column("transect_id");
      const auto c_x = t.column("x_km");
      const auto c_y = t.column("y_km");
      const auto c_n = t.column("count");
      for (std::size_t r = 0; r < t.n_rows(); ++r) {
        const int day = static_cast<int>(t.integer(r, c_day));
        const int tr = static_cast<int>(t.integer(r, c_tr));
        const Point p{t.num(r, c_x), t.num(r, c_y)};
        const long long count = t.integer(r, c_n);
        if (count < 1)
          throw validation_error("sightings.csv: row " + std::to_string(r + 2) +
                                 ": count must be >= 1");
        bool known = false;
        for (const Transect& tt : ds.transects) known |= (tt.id == tr);
        if (!known)
          throw validation_error("sightings.csv: row " + std::to_string(r + 2) +
                                 ": unknown transect id " + std::to_string(tr));
        if (ds.grid.active_cell_at(p) < 0)
          throw validation_error("sightings.csv: row " + std::to_string(r + 2) +
                                 ": location outside the active domain");
        auto& pattern = ds.sightings[{day, tr}];
        pattern.day = day;
        pattern.points.push_back(p);
        pattern.multiplicity.push_back(
            mode == SightingsMode::upper ? static_cast<int>(count) : 1);
        wdays.insert(day);
      }
    }
  }

  // Call counts with per-day noise and survey duration.
  {
    const std::string path = join(dir, dataset_files::calls);
    if (fs::exists(path)) {
      CsvTable t = CsvTable::read_file(path);
      const auto c_day = t.column("day");
      const auto c_h = t.column("hydrophone_id");
      const auto c_w = t.column("calls");
      const auto c_noise = t.column("noise_db");
      const auto c_dur = t.column("duration_hours");
      for (std::size_t r = 0; r < t.n_rows(); ++r) {
        CallCount cc;
        cc.day = static_cast<int>(t.integer(r, c_day));
        cc.hydrophone = static_cast<int>(t.integer(r, c_h));
        cc.calls = t.integer(r, c_w);
        if (cc.calls < 0)
          throw validation_error("calls.csv: row " + std::to_string(r + 2) +
                                 ": calls must be >= 0");
        bool known = false;
        for (const Hydrophone& h : ds.hydrophones) known |= (h.id == cc.hydrophone);
        if (!known)
          throw validation_error("calls.csv: row " + std::to_string(r + 2) +
                                 ": unknown hydrophone id " +
                                 std::to_string(cc.hydrophone));
        if (!ds.noise.noise_db.emplace(std::pair{cc.day, cc.hydrophone},
                                       t.num(r, c_noise)).second)
          throw validation_error("calls.csv: row " + std::to_string(r + 2) +
                                 ": duplicate (day, hydrophone) = (" +
                                 std::to_string(cc.day) + ", " +
                                 std::to_string(cc.hydrophone) + ")");
        const double noise = t.num(r, c_noise);
        if (noise < 90.0 || noise > 130.0)
          ds.warnings.push_back("calls.csv: row " + std::to_string(r + 2) +
                                ": ambient noise " + format_double(noise) +
                                " dB outside the typical [90, 130] range");
        const double dur = t.num(r, c_dur);
        if (!(dur > 0.0))
          throw validation_error("calls.csv: row " + std::to_string(r + 2) +
                                 ": duration must be > 0 hours");
        auto [it, inserted] = ds.duration_hours.emplace(cc.day, dur);
        if (!inserted && std::abs(it->second - dur) > 1e-9)
          throw validation_error("calls.csv: row " + std::to_string(r + 2) +
                                 ": inconsistent duration for day " +
                                 std::to_string(cc.day));
        ds.calls.push_back(cc);
        wdays.insert(cc.day);
      }
    }
  }

  ds.whale_days.assign(wdays.begin(), wdays.end());
  for (int day : ds.whale_days)
    if (ds.zoop_day_index(day) < 0)
      throw validation_error("whale day " + std::to_string(day) +
                             " is not a zooplankton day (no temperature field)");

  // Every transect is assumed flown on every whale day, so empty patterns
  // still contribute their integral term.
  for (int day : ds.whale_days)
    for (const Transect& t : ds.transects) {
      auto& pattern = ds.sightings[{day, t.id}];
      pattern.day = day;
    }

  // Fixed availability probabilities; fall back to the monthly defaults.
  static constexpr double kMonthlyPi[3] = {0.34, 0.31, 0.55};
  for (std::size_t i = 0; i < ds.whale_days.size(); ++i) {
    const int day = ds.whale_days[i];
    auto it = surface_prob.find(day);
    const double pi =
        it != surface_prob.end() ? it->second : kMonthlyPi[i % 3];
    if (pi < 0.0 || pi > 1.0)
      throw validation_error("surface probability for day " +
                             std::to_string(day) + " must be in [0, 1]");
    ds.surface_prob[day] = pi;
  }

  return ds;
}

}  // namespace zwf
