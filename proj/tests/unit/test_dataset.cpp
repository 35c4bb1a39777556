#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "test_util.hpp"
#include "zwf/csv.hpp"
#include "zwf/dataset.hpp"
#include "zwf/errors.hpp"
#include "zwf/simulate.hpp"

using namespace zwf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("zwf_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

ScenarioSpec small_scenario() {
  ScenarioSpec s = default_config().scenario;
  s.bounds = {0, 0, 12, 8};
  s.mask.clear();
  s.zoop_days = {1, 2, 3};
  s.whale_days = {2, 3};
  s.zoop_sampling = "low";
  s.whale_sampling = "low";
  s.surface_prob.clear();
  s.duration_hours.clear();
  return s;
}

void patch_row(const fs::path& file, const std::string& match,
               const std::string& replacement) {
  std::ifstream in(file);
  std::string text, line;
  bool done = false;
  while (std::getline(in, line)) {
    if (!done && line.find(match) != std::string::npos) {
      line = replacement;
      done = true;
    }
    text += line + "\n";
  }
  REQUIRE(done);
  std::ofstream out(file, std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("simulated datasets round-trip through ingest") {
  TempDir dir("roundtrip");
  const SimOutput out = simulate_scenario(small_scenario(), PsiMode::shared, 99);
  write_dataset(out, dir.path.string());

  const SurveyDataset ds = ingest(dir.path.string(), SightingsMode::upper);
  CHECK(ds.grid.n_active() == out.dataset.grid.n_active());
  CHECK(ds.zoop_days == out.dataset.zoop_days);
  CHECK(ds.whale_days == out.dataset.whale_days);
  REQUIRE(ds.tows.size() == out.dataset.tows.size());
  CHECK(ds.calls.size() == out.dataset.calls.size());

  // Standardized covariates agree bitwise thanks to the persisted scaling.
  for (int day : ds.zoop_days)
    CHECK((ds.temperature.at(day).values -
           out.dataset.temperature.at(day).values)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  CHECK((ds.bathymetry.values - out.dataset.bathymetry.values)
            .cwiseAbs()
            .maxCoeff() == 0.0);

  // Tow values survive the CSV round trip exactly.
  for (std::size_t i = 0; i < ds.tows.size(); ++i)
    CHECK(ds.tows[i].value == out.dataset.tows[i].value);

  // Same sighting patterns per (day, transect).
  for (const auto& [key, pattern] : out.dataset.sightings) {
    REQUIRE(ds.sightings.count(key) == 1);
    CHECK(ds.sightings.at(key).points.size() == pattern.points.size());
  }
}

TEST_CASE("upper vs lower sighting repair") {
  TempDir dir("modes");
  const SimOutput out = simulate_scenario(small_scenario(), PsiMode::shared, 7);
  write_dataset(out, dir.path.string());

  // Rewrite one sighting row with count 3 to exercise the repair.
  {
    CsvTable t = CsvTable::read_file((dir.path / "sightings.csv").string());
    REQUIRE(t.n_rows() > 0);
    std::vector<std::string> row;
    for (std::size_t c = 0; c < t.columns().size(); ++c)
      row.push_back(t.cell(0, c));
    row[t.column("count")] = "3";
    CsvTable patched(t.columns());
    patched.append_row(row);
    for (std::size_t r = 1; r < t.n_rows(); ++r) {
      std::vector<std::string> cells;
      for (std::size_t c = 0; c < t.columns().size(); ++c)
        cells.push_back(t.cell(r, c));
      patched.append_row(cells);
    }
    patched.write_file((dir.path / "sightings.csv").string());
  }

  const SurveyDataset upper = ingest(dir.path.string(), SightingsMode::upper);
  const SurveyDataset lower = ingest(dir.path.string(), SightingsMode::lower);
  long upper_w = 0, lower_w = 0, lower_pts = 0;
  for (const auto& [key, p] : upper.sightings) upper_w += p.total_weight();
  for (const auto& [key, p] : lower.sightings) {
    lower_w += p.total_weight();
    lower_pts += static_cast<long>(p.points.size());
  }
  CHECK(lower_w == lower_pts);
  CHECK(upper_w == lower_w + 2);  // the count-3 record adds 2
  CHECK(upper_w >= lower_pts);
}

TEST_CASE("ingest rejects bad rows with informative errors") {
  const ScenarioSpec spec = small_scenario();

  SUBCASE("non-positive tow value") {
    TempDir dir("badtow");
    write_dataset(simulate_scenario(spec, PsiMode::shared, 3), dir.path.string());
    CsvTable t = CsvTable::read_file((dir.path / "tows.csv").string());
    std::vector<std::string> row;
    for (std::size_t c = 0; c < t.columns().size(); ++c)
      row.push_back(t.cell(0, c));
    row[t.column("organisms_per_m3")] = "0";
    CsvTable patched(t.columns());
    patched.append_row(row);
    patched.write_file((dir.path / "tows.csv").string());
    CHECK_THROWS_WITH_AS(ingest(dir.path.string(), SightingsMode::upper),
                         doctest::Contains("row 2"), validation_error);
  }

  SUBCASE("out-of-domain location") {
    TempDir dir("baddomain");
    write_dataset(simulate_scenario(spec, PsiMode::shared, 4), dir.path.string());
    CsvTable t = CsvTable::read_file((dir.path / "tows.csv").string());
    std::vector<std::string> row;
    for (std::size_t c = 0; c < t.columns().size(); ++c)
      row.push_back(t.cell(0, c));
    row[t.column("x_km")] = "999";
    CsvTable patched(t.columns());
    patched.append_row(row);
    patched.write_file((dir.path / "tows.csv").string());
    CHECK_THROWS_AS(ingest(dir.path.string(), SightingsMode::upper),
                    validation_error);
  }

  SUBCASE("unknown hydrophone id") {
    TempDir dir("badhydro");
    write_dataset(simulate_scenario(spec, PsiMode::shared, 5), dir.path.string());
    patch_row(dir.path / "calls.csv", "2,0,", "2,77,5,105,3.27");
    CHECK_THROWS_AS(ingest(dir.path.string(), SightingsMode::upper),
                    validation_error);
  }

  SUBCASE("duplicate (day, hydrophone) call rows") {
    TempDir dir("dupcall");
    write_dataset(simulate_scenario(spec, PsiMode::shared, 6), dir.path.string());
    CsvTable t = CsvTable::read_file((dir.path / "calls.csv").string());
    std::vector<std::string> row;
    for (std::size_t c = 0; c < t.columns().size(); ++c)
      row.push_back(t.cell(0, c));
    CsvTable patched(t.columns());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      std::vector<std::string> cells;
      for (std::size_t c = 0; c < t.columns().size(); ++c)
        cells.push_back(t.cell(r, c));
      patched.append_row(cells);
    }
    patched.append_row(row);
    patched.write_file((dir.path / "calls.csv").string());
    CHECK_THROWS_WITH_AS(ingest(dir.path.string(), SightingsMode::upper),
                         doctest::Contains("duplicate"), validation_error);
  }

  SUBCASE("whale day missing from zooplankton days") {
    TempDir dir("badday");
    write_dataset(simulate_scenario(spec, PsiMode::shared, 8), dir.path.string());
    patch_row(dir.path / "calls.csv", "2,0,", "9,0,5,105,6.58");
    CHECK_THROWS_WITH_AS(ingest(dir.path.string(), SightingsMode::upper),
                         doctest::Contains("not a zooplankton day"),
                         validation_error);
  }
}

TEST_CASE("out-of-band ambient noise only warns") {
  TempDir dir("noisewarn");
  write_dataset(simulate_scenario(small_scenario(), PsiMode::shared, 12),
                dir.path.string());
  patch_row(dir.path / "calls.csv", "2,0,", "2,0,5,150,3.27");
  const SurveyDataset ds = ingest(dir.path.string(), SightingsMode::upper);
  REQUIRE(!ds.warnings.empty());
  CHECK(ds.warnings.front().find("150") != std::string::npos);
}

TEST_CASE("surface probabilities come from config with monthly fallback") {
  TempDir dir("pi");
  write_dataset(simulate_scenario(small_scenario(), PsiMode::shared, 13),
                dir.path.string());
  const SurveyDataset defaults = ingest(dir.path.string(), SightingsMode::upper);
  CHECK(defaults.surface_prob.at(2) == doctest::Approx(0.34));
  CHECK(defaults.surface_prob.at(3) == doctest::Approx(0.31));
  const SurveyDataset custom = ingest(dir.path.string(), SightingsMode::upper,
                                      {{2, 0.5}, {3, 0.6}});
  CHECK(custom.surface_prob.at(2) == doctest::Approx(0.5));
  CHECK(custom.surface_prob.at(3) == doctest::Approx(0.6));
}
