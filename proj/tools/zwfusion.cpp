// Command-line driver: simulate / fit / summarize / whatif / diag.
// Exit codes: 0 success, 2 validation error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "zwf/analysis.hpp"
#include "zwf/config.hpp"
#include "zwf/csv.hpp"
#include "zwf/dataset.hpp"
#include "zwf/diagnostics.hpp"
#include "zwf/errors.hpp"
#include "zwf/mcmc.hpp"
#include "zwf/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace zwf;

namespace {

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::optional<long> iterations;
  std::optional<std::string> mode, model, component, out, data;
};

RunConfig resolve_config(const std::string& config_path, const CliOverrides& o) {
  RunConfig cfg = config_path.empty() ? default_config() : load_config(config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.chains) cfg.mcmc.chains = *o.chains;
  if (o.iterations) {
    cfg.mcmc.iterations = *o.iterations;
    if (cfg.mcmc.burnin >= cfg.mcmc.iterations) cfg.mcmc.burnin = -1;
  }
  if (o.out) cfg.out = *o.out;
  if (o.data) cfg.data_dir = *o.data;
  if (o.mode) {
    if (*o.mode == "upper") cfg.mode = SightingsMode::upper;
    else if (*o.mode == "lower") cfg.mode = SightingsMode::lower;
    else throw validation_error("--mode must be upper or lower");
  }
  if (o.model) {
    if (*o.model == "shared") cfg.psi_mode = PsiMode::shared;
    else if (*o.model == "daily") cfg.psi_mode = PsiMode::daily;
    else throw validation_error("--model must be shared or daily");
  }
  if (o.component) {
    if (*o.component == "joint") cfg.component = Component::joint;
    else if (*o.component == "zoop") cfg.component = Component::zoop_only;
    else if (*o.component == "whale") cfg.component = Component::whale_only;
    else throw validation_error("--component must be joint, zoop, or whale");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// fit output files
// ---------------------------------------------------------------------------

std::string chain_file(const std::string& dir, const char* stem, int chain,
                       const char* ext) {
  return (fs::path(dir) / (std::string(stem) + "_chain" + std::to_string(chain) + ext))
      .string();
}

// Streams one chain's draws to CSV + binary field files and keeps the
// checkpoint current.
class FileSink : public DrawSink {
public:
  FileSink(const JointModel& model, const std::string& dir, int chain)
      : model_(model), dir_(dir), chain_(chain) {
    const std::string csv_path = chain_file(dir, "draws", chain, ".csv");
    csv_.open(csv_path, std::ios::trunc);
    if (!csv_) throw validation_error("cannot write " + csv_path);
    csv_ << "iter";
    for (const std::string& n : model.scalar_names()) csv_ << "," << n;
    for (int d : model.zoop_days())
      if (model.component() != Component::whale_only)
        csv_ << ",zoopmean_" << d;
    for (int d : model.whale_days())
      if (model.component() != Component::zoop_only)
        csv_ << ",whaletotal_" << d;
    csv_ << ",loglik\n";
    if (model.component() != Component::whale_only)
      logz_.open(chain_file(dir, "logz", chain, ".bin"),
                 std::ios::trunc | std::ios::binary);
    if (model.component() != Component::zoop_only)
      loglam_.open(chain_file(dir, "loglam", chain, ".bin"),
                   std::ios::trunc | std::ios::binary);
  }

  // Reopens existing outputs truncated to the checkpointed draw count.
  FileSink(const JointModel& model, const std::string& dir, int chain,
           long keep_draws)
      : model_(model), dir_(dir), chain_(chain) {
    const std::string csv_path = chain_file(dir, "draws", chain, ".csv");
    {
      std::ifstream in(csv_path);
      if (!in) throw validation_error("resume: missing " + csv_path);
      std::string line, kept;
      long rows = -1;  // header
      while (std::getline(in, line) && rows < keep_draws) {
        kept += line;
        kept += '\n';
        ++rows;
      }
      if (rows < keep_draws)
        throw validation_error("resume: " + csv_path + " has fewer rows than "
                               "the checkpoint recorded");
      std::ofstream out(csv_path, std::ios::trunc);
      out << kept;
    }
    csv_.open(csv_path, std::ios::app);
    n_draws_ = keep_draws;
    auto reopen_bin = [&](std::ofstream& f, const char* stem, long record) {
      const std::string path = chain_file(dir, stem, chain, ".bin");
      if (!fs::exists(path)) throw validation_error("resume: missing " + path);
      fs::resize_file(path, static_cast<std::uintmax_t>(keep_draws) * record);
      f.open(path, std::ios::app | std::ios::binary);
    };
    if (model.component() != Component::whale_only)
      reopen_bin(logz_, "logz",
                 static_cast<long>(model.n_zoop_days()) *
                     model.data().grid.n_active() * 8);
    if (model.component() != Component::zoop_only)
      reopen_bin(loglam_, "loglam",
                 static_cast<long>(model.n_whale_days()) *
                     model.data().grid.n_active() * 8);
  }

  void on_draw(const PosteriorDraw& d) override {
    csv_ << d.iteration;
    for (double v : d.scalars) csv_ << "," << format_double(v);
    for (double v : d.zoop_mean) csv_ << "," << format_double(v);
    for (double v : d.whale_total) csv_ << "," << format_double(v);
    csv_ << "," << format_double(d.loglik) << "\n";
    for (const Eigen::VectorXd& f : d.log_z)
      logz_.write(reinterpret_cast<const char*>(f.data()),
                  static_cast<std::streamsize>(f.size() * sizeof(double)));
    for (const Eigen::VectorXd& f : d.log_lambda)
      loglam_.write(reinterpret_cast<const char*>(f.data()),
                    static_cast<std::streamsize>(f.size() * sizeof(double)));
    ++n_draws_;
  }

  void on_checkpoint(const ChainState& s) override {
    csv_.flush();
    if (logz_.is_open()) logz_.flush();
    if (loglam_.is_open()) loglam_.flush();
    std::ofstream f(chain_file(dir_, "checkpoint", chain_, ".json"),
                    std::ios::trunc);
    f << model_.checkpoint_json(s) << "\n";
  }

  void write_headers() const {
    auto header = [&](const char* kind, const std::vector<int>& days) {
      json j;
      j["kind"] = kind;
      j["days"] = days;
      j["n_active"] = model_.data().grid.n_active();
      j["cell_ids"] = model_.data().grid.active_ids();
      j["draws"] = n_draws_;
      std::ofstream f(chain_file(dir_, kind, chain_, ".json"), std::ios::trunc);
      f << j.dump() << "\n";
    };
    if (model_.component() != Component::whale_only)
      header("logz", model_.zoop_days());
    if (model_.component() != Component::zoop_only)
      header("loglam", model_.whale_days());
  }

private:
  const JointModel& model_;
  std::string dir_;
  int chain_;
  long n_draws_ = 0;
  std::ofstream csv_, logz_, loglam_;
};

void write_fit_manifest(const JointModel& model, const RunConfig& cfg,
                        const std::string& dir) {
  json j;
  j["chains"] = cfg.mcmc.chains;
  j["iterations"] = cfg.mcmc.iterations;
  j["burnin"] = cfg.mcmc.resolved_burnin();
  j["thin"] = cfg.mcmc.thin;
  j["seed"] = cfg.seed;
  j["component"] = cfg.component == Component::joint
                       ? "joint"
                       : (cfg.component == Component::zoop_only ? "zoop" : "whale");
  j["model"] = cfg.psi_mode == PsiMode::shared ? "shared" : "daily";
  j["mode"] = cfg.mode == SightingsMode::upper ? "upper" : "lower";
  j["data_dir"] = cfg.data_dir;
  j["scalar_names"] = model.scalar_names();
  j["zoop_days"] = model.zoop_days();
  j["whale_days"] = model.whale_days();
  j["cell_area"] = model.data().grid.cell_area();
  std::ofstream f(fs::path(dir) / "fit.json", std::ios::trunc);
  f << j.dump(2) << "\n";
}

struct LoadedDraws {
  std::vector<std::string> columns;              // numeric columns, iter excluded
  std::vector<Eigen::MatrixXd> per_chain;        // rows x columns
  std::map<std::string, int> col_index;
  int n_chains = 0;

  Eigen::VectorXd chain_column(int chain, const std::string& name) const {
    auto it = col_index.find(name);
    if (it == col_index.end())
      throw validation_error("draws: missing column " + name);
    return per_chain[chain].col(it->second);
  }
  std::vector<double> merged_column(const std::string& name) const {
    std::vector<double> out;
    for (int c = 0; c < n_chains; ++c) {
      const Eigen::VectorXd v = chain_column(c, name);
      out.insert(out.end(), v.data(), v.data() + v.size());
    }
    return out;
  }
};

LoadedDraws load_draws(const std::string& fit_dir) {
  std::ifstream mf(fs::path(fit_dir) / "fit.json");
  if (!mf) throw validation_error("missing fit manifest " + fit_dir + "/fit.json");
  json manifest;
  mf >> manifest;
  LoadedDraws out;
  out.n_chains = manifest.at("chains").get<int>();
  for (int c = 0; c < out.n_chains; ++c) {
    CsvTable t = CsvTable::read_file(chain_file(fit_dir, "draws", c, ".csv"));
    if (t.n_rows() == 0)
      throw validation_error("empty draws file for chain " + std::to_string(c));
    if (out.columns.empty()) {
      for (const std::string& col : t.columns())
        if (col != "iter") {
          out.col_index[col] = static_cast<int>(out.columns.size());
          out.columns.push_back(col);
        }
    }
    Eigen::MatrixXd m(t.n_rows(), out.columns.size());
    for (std::size_t r = 0; r < t.n_rows(); ++r)
      for (std::size_t k = 0; k < out.columns.size(); ++k)
        m(r, k) = t.num(r, t.column(out.columns[k]));
    out.per_chain.push_back(std::move(m));
  }
  return out;
}

// Per-draw log fields from one chain's binary file.
struct FieldFile {
  std::vector<int> days;
  std::vector<int> cell_ids;
  int n_active = 0;
  long draws = 0;
  std::vector<std::vector<Eigen::VectorXd>> data;  // [draw][day] field
};

FieldFile load_fields(const std::string& fit_dir, const char* kind, int chain) {
  FieldFile f;
  std::ifstream hf(chain_file(fit_dir, kind, chain, ".json"));
  if (!hf)
    throw validation_error(std::string("missing field header for ") + kind);
  json h;
  hf >> h;
  f.days = h.at("days").get<std::vector<int>>();
  f.cell_ids = h.at("cell_ids").get<std::vector<int>>();
  f.n_active = h.at("n_active").get<int>();
  f.draws = h.at("draws").get<long>();
  std::ifstream bin(chain_file(fit_dir, kind, chain, ".bin"), std::ios::binary);
  if (!bin) throw validation_error(std::string("missing field data for ") + kind);
  f.data.resize(f.draws);
  for (long d = 0; d < f.draws; ++d) {
    f.data[d].resize(f.days.size());
    for (std::size_t day = 0; day < f.days.size(); ++day) {
      Eigen::VectorXd v(f.n_active);
      bin.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(f.n_active * sizeof(double)));
      if (!bin) throw validation_error(std::string(kind) + " field file truncated");
      f.data[d][day] = std::move(v);
    }
  }
  return f;
}

void write_diagnostics(const std::string& fit_dir, const LoadedDraws& draws) {
  if (draws.n_chains < 2) return;
  long min_rows = draws.per_chain[0].rows();
  for (const auto& m : draws.per_chain)
    min_rows = std::min<long>(min_rows, m.rows());
  std::vector<std::string> names;
  std::vector<std::vector<Eigen::VectorXd>> per_param;
  for (const std::string& col : draws.columns) {
    names.push_back(col);
    std::vector<Eigen::VectorXd> chains;
    for (int c = 0; c < draws.n_chains; ++c)
      chains.push_back(draws.chain_column(c, col).head(min_rows));
    per_param.push_back(std::move(chains));
  }
  const auto rows = diagnostics(names, per_param);
  CsvTable t({"parameter", "rhat", "ess"});
  for (const auto& r : rows)
    t.append_row({r.name, format_double(r.rhat), format_double(r.ess)});
  t.write_file((fs::path(fit_dir) / "diagnostics.csv").string());
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg) {
  SimOutput out = simulate_scenario(cfg.scenario, cfg.psi_mode, cfg.seed,
                                    cfg.fixed.effective_range_km);
  write_dataset(out, cfg.out);
  long n_sight = 0;
  for (const auto& [key, p] : out.dataset.sightings)
    n_sight += p.total_weight();
  std::cerr << "simulate: " << cfg.out << ": "
            << out.dataset.grid.n_active() << " active cells, "
            << out.dataset.tows.size() << " tows, " << n_sight
            << " sightings, " << out.dataset.calls.size()
            << " call-count rows\n";
  return 0;
}

int cmd_fit(const RunConfig& cfg, bool resume) {
  if (cfg.data_dir.empty())
    throw validation_error("fit: no data directory (set data_dir or --data)");
  SurveyDataset data = ingest(cfg.data_dir, cfg.mode, cfg.fixed.surface_prob);
  for (const std::string& w : data.warnings) std::cerr << "warning: " << w << "\n";
  JointModel model(data, cfg);
  fs::create_directories(cfg.out);

  std::vector<std::exception_ptr> errors(cfg.mcmc.chains);
  std::vector<std::string> accept_report(cfg.mcmc.chains);
  auto run_one = [&](int chain) {
    try {
      std::unique_ptr<FileSink> sink;
      ChainState state;
      const std::string ck = chain_file(cfg.out, "checkpoint", chain, ".json");
      if (resume && fs::exists(ck)) {
        std::ifstream f(ck);
        std::string text((std::istreambuf_iterator<char>(f)),
                         std::istreambuf_iterator<char>());
        state = model.restore_checkpoint(text);
        sink = std::make_unique<FileSink>(model, cfg.out, chain,
                                          state.draws_emitted);
        state = model.run_chain(std::move(state), *sink);
      } else {
        sink = std::make_unique<FileSink>(model, cfg.out, chain);
        state = model.run_chain(chain, *sink);
      }
      sink->write_headers();
      std::string rep;
      for (const auto& [name, rate] : model.acceptance_rates(state))
        rep += name + "=" + format_double(rate) + " ";
      accept_report[chain] = rep;
    } catch (...) {
      errors[chain] = std::current_exception();
    }
  };

  {
    std::vector<std::thread> threads;
    for (int c = 0; c < cfg.mcmc.chains; ++c) threads.emplace_back(run_one, c);
    for (auto& t : threads) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  write_fit_manifest(model, cfg, cfg.out);
  {
    CsvTable t({"chain", "block", "acceptance"});
    for (int c = 0; c < cfg.mcmc.chains; ++c) {
      std::istringstream ss(accept_report[c]);
      std::string tok;
      while (ss >> tok) {
        const auto eq = tok.find('=');
        t.append_row({std::to_string(c), tok.substr(0, eq), tok.substr(eq + 1)});
      }
    }
    t.write_file((fs::path(cfg.out) / "acceptance.csv").string());
  }
  write_diagnostics(cfg.out, load_draws(cfg.out));
  std::cerr << "fit: " << cfg.mcmc.chains << " chain(s) x "
            << cfg.mcmc.iterations << " iterations -> " << cfg.out << "\n";
  return 0;
}

json load_truth(const std::string& data_dir) {
  std::ifstream f(fs::path(data_dir) / dataset_files::truth);
  if (!f) return json();
  json j;
  f >> j;
  return j;
}

int cmd_summarize(const RunConfig& cfg, const std::string& fit_dir,
                  const std::string& compare_dir) {
  const LoadedDraws draws = load_draws(fit_dir);
  fs::create_directories(cfg.out);
  std::ifstream mf(fs::path(fit_dir) / "fit.json");
  json manifest;
  mf >> manifest;
  const auto scalar_names =
      manifest.at("scalar_names").get<std::vector<std::string>>();
  const auto zoop_days = manifest.at("zoop_days").get<std::vector<int>>();
  const auto whale_days = manifest.at("whale_days").get<std::vector<int>>();
  const std::string component = manifest.at("component").get<std::string>();

  {
    CsvTable t({"parameter", "median", "hpd_lo", "hpd_hi"});
    for (const std::string& name : scalar_names) {
      std::vector<double> v = draws.merged_column(name);
      const Interval hpd = hpd_interval(v, 0.95);
      t.append_row({name, format_double(median(std::move(v))),
                    format_double(hpd.lo), format_double(hpd.hi)});
    }
    t.write_file((fs::path(cfg.out) / "params.csv").string());
  }

  {
    CsvTable t({"kind", "day", "region", "median", "hpd_lo", "hpd_hi"});
    auto add_row = [&](const char* kind, int day, const std::string& region,
                       std::vector<double> v) {
      const Interval hpd = hpd_interval(v, 0.95);
      t.append_row({kind, std::to_string(day), region,
                    format_double(median(std::move(v))), format_double(hpd.lo),
                    format_double(hpd.hi)});
    };
    if (component != "whale")
      for (int d : zoop_days)
        add_row("zoop_mean", d, "D",
                draws.merged_column("zoopmean_" + std::to_string(d)));
    if (component != "zoop")
      for (int d : whale_days)
        add_row("whale_total", d, "D",
                draws.merged_column("whaletotal_" + std::to_string(d)));

    // Subregion abundance needs the per-draw fields.
    if (!cfg.regions.empty()) {
      const double cell_area = manifest.at("cell_area").get<double>();
      auto region_rows = [&](const char* kind, AbundanceKind ak) {
        std::vector<FieldFile> files;
        for (int c = 0; c < draws.n_chains; ++c)
          files.push_back(load_fields(fit_dir, kind, c));
        std::map<int, int> cell_to_active;
        for (std::size_t i = 0; i < files[0].cell_ids.size(); ++i)
          cell_to_active[files[0].cell_ids[i]] = static_cast<int>(i);
        for (std::size_t day = 0; day < files[0].days.size(); ++day) {
          std::vector<Eigen::VectorXd> merged;
          for (const FieldFile& ff : files)
            for (long dr = 0; dr < ff.draws; ++dr)
              merged.push_back(ff.data[dr][day]);
          for (const auto& [name, cells] : cfg.regions) {
            std::vector<int> region;
            for (int cell : cells) {
              auto it = cell_to_active.find(cell);
              if (it == cell_to_active.end())
                throw validation_error("region " + name + ": cell " +
                                       std::to_string(cell) +
                                       " is not an active cell");
              region.push_back(it->second);
            }
            const AbundanceSummary s =
                abundance(merged, region, ak, cell_area, 0.95);
            t.append_row({kind == std::string("logz") ? "zoop_mean" : "whale_total",
                          std::to_string(files[0].days[day]), name,
                          format_double(s.med), format_double(s.hpd.lo),
                          format_double(s.hpd.hi)});
          }
        }
      };
      if (component != "whale") region_rows("logz", AbundanceKind::zoop_average);
      if (component != "zoop") region_rows("loglam", AbundanceKind::whale_total);
    }
    t.write_file((fs::path(cfg.out) / "abundance.csv").string());
  }

  {
    CsvTable t({"fit", "median", "hpd_lo", "hpd_hi"});
    auto add = [&](const std::string& dir) {
      const LoadedDraws d = dir == fit_dir ? draws : load_draws(dir);
      const LoglikSummary s = loglik_summary(d.merged_column("loglik"));
      t.append_row({fs::path(dir).filename().string(), format_double(s.med),
                    format_double(s.hpd.lo), format_double(s.hpd.hi)});
    };
    add(fit_dir);
    if (!compare_dir.empty()) add(compare_dir);
    t.write_file((fs::path(cfg.out) / "loglik.csv").string());
  }

  // Scores against simulation truth, when available.
  const std::string data_dir =
      !cfg.data_dir.empty() ? cfg.data_dir
                            : manifest.at("data_dir").get<std::string>();
  const json truth = data_dir.empty() ? json() : load_truth(data_dir);
  if (!truth.is_null() && !truth.empty()) {
    CsvTable t({"kind", "day", "rmse_log_surface", "crps_abundance",
                "truth_abundance"});
    auto score = [&](const char* kind, const std::vector<int>& days,
                     const char* field_key, const char* abun_key,
                     const std::string& col_prefix) {
      std::vector<FieldFile> files;
      for (int c = 0; c < draws.n_chains; ++c)
        files.push_back(load_fields(fit_dir, kind, c));
      for (std::size_t day = 0; day < days.size(); ++day) {
        const auto tv =
            truth.at("fields").at(field_key).at(std::to_string(days[day]))
                .get<std::vector<double>>();
        Eigen::Map<const Eigen::VectorXd> truth_field(tv.data(), tv.size());
        Eigen::VectorXd mean_field = Eigen::VectorXd::Zero(tv.size());
        long n = 0;
        for (const FieldFile& ff : files)
          for (long dr = 0; dr < ff.draws; ++dr) {
            mean_field += ff.data[dr][day];
            ++n;
          }
        mean_field /= static_cast<double>(n);
        const double rmse = std::sqrt(
            (mean_field - truth_field).squaredNorm() / truth_field.size());
        const double truth_ab =
            truth.at("abundance").at(abun_key).at(std::to_string(days[day]))
                .get<double>();
        const std::vector<double> ab =
            draws.merged_column(col_prefix + std::to_string(days[day]));
        t.append_row({kind, std::to_string(days[day]), format_double(rmse),
                      format_double(crps(ab, truth_ab)),
                      format_double(truth_ab)});
      }
    };
    if (component != "whale")
      score("logz", zoop_days, "log_z", "zoop_mean", "zoopmean_");
    if (component != "zoop")
      score("loglam", whale_days, "log_lambda", "whale_expected", "whaletotal_");
    t.write_file((fs::path(cfg.out) / "scores.csv").string());
  }
  std::cerr << "summarize: wrote tables to " << cfg.out << "\n";
  return 0;
}

int cmd_whatif(const RunConfig& cfg, const std::string& fit_dir) {
  const LoadedDraws draws = load_draws(fit_dir);
  std::ifstream mf(fs::path(fit_dir) / "fit.json");
  json manifest;
  mf >> manifest;
  if (manifest.at("component").get<std::string>() == "zoop")
    throw validation_error("whatif: the fitted model has no whale component");
  const auto whale_days = manifest.at("whale_days").get<std::vector<int>>();
  const std::vector<double> beta_zoop =
      manifest.at("component").get<std::string>() == "joint"
          ? draws.merged_column("beta_zoop")
          : std::vector<double>(draws.merged_column("loglik").size(), 0.0);

  fs::create_directories(cfg.out);
  CsvTable t({"day", "k", "draw", "abundance"});
  for (std::size_t di = 0; di < whale_days.size(); ++di) {
    const int day = whale_days[di];
    const std::vector<double> totals =
        draws.merged_column("whaletotal_" + std::to_string(day));
    for (std::size_t ki = 0; ki < cfg.whatif_k.size(); ++ki) {
      Rng rng(derive_seed(cfg.seed, StreamId::whatif, di, ki));
      const ScalingResult r =
          whatif_scaling(totals, beta_zoop, cfg.whatif_k[ki], rng);
      for (std::size_t dr = 0; dr < r.predicted.size(); ++dr)
        t.append_row({std::to_string(day), format_double(r.k),
                      std::to_string(dr), format_double(r.predicted[dr])});
    }
  }
  t.write_file((fs::path(cfg.out) / "whatif.csv").string());
  std::cerr << "whatif: wrote " << cfg.out << "/whatif.csv\n";
  return 0;
}

int cmd_diag(const std::string& fit_dir) {
  const LoadedDraws draws = load_draws(fit_dir);
  if (draws.n_chains < 2)
    throw validation_error("diag: need at least 2 chains");
  write_diagnostics(fit_dir, draws);
  CsvTable t = CsvTable::read_file((fs::path(fit_dir) / "diagnostics.csv").string());
  const auto c_par = t.column("parameter");
  const auto c_rhat = t.column("rhat");
  const auto c_ess = t.column("ess");
  std::printf("%-20s %10s %12s\n", "parameter", "rhat", "ess");
  for (std::size_t r = 0; r < t.n_rows(); ++r)
    std::printf("%-20s %10.4f %12.1f\n", t.cell(r, c_par).c_str(),
                t.num(r, c_rhat), t.num(r, c_ess));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint zooplankton-whale data fusion: simulate, fit, summarize"};
  app.require_subcommand(0, 1);

  bool print_config = false;
  app.add_flag("--print-config", print_config,
               "Print the fully-populated default config as JSON and exit");

  std::string config_path;
  CliOverrides ov;
  std::string fit_dir, compare_dir;
  bool resume = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--seed", ov.seed, "Master seed (overrides config)");
    cmd->add_option("--out", ov.out, "Output directory (overrides config)");
  };

  CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  add_common(sim);
  sim->add_option("--model", ov.model, "shared | daily");

  CLI::App* fit = app.add_subcommand("fit", "Run the MCMC sampler");
  add_common(fit);
  fit->add_option("--data", ov.data, "Dataset directory");
  fit->add_option("--chains", ov.chains, "Number of chains");
  fit->add_option("--iterations", ov.iterations, "Iterations per chain");
  fit->add_option("--mode", ov.mode, "upper | lower sighting repair");
  fit->add_option("--model", ov.model, "shared | daily");
  fit->add_option("--component", ov.component, "joint | zoop | whale");
  fit->add_flag("--resume", resume, "Continue from checkpoints in --out");

  CLI::App* sum = app.add_subcommand("summarize", "Posterior tables");
  add_common(sum);
  sum->add_option("--fit", fit_dir, "Fit output directory")->required();
  sum->add_option("--data", ov.data, "Dataset directory (for truth scoring)");
  sum->add_option("--compare", compare_dir, "Second fit for loglik comparison");

  CLI::App* wi = app.add_subcommand("whatif", "Zooplankton scaling what-if");
  add_common(wi);
  wi->add_option("--fit", fit_dir, "Fit output directory")->required();
  std::vector<double> k_list;
  wi->add_option("--k", k_list, "k values (default 0.5..1.2 step 0.1)")
      ->delimiter(',');

  CLI::App* dg = app.add_subcommand("diag", "Convergence diagnostics");
  add_common(dg);
  dg->add_option("--fit", fit_dir, "Fit output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (print_config) {
      std::cout << config_to_json(default_config());
      return 0;
    }
    if (sim->parsed()) return cmd_simulate(resolve_config(config_path, ov));
    if (fit->parsed()) return cmd_fit(resolve_config(config_path, ov), resume);
    if (sum->parsed()) {
      RunConfig cfg = resolve_config(config_path, ov);
      return cmd_summarize(cfg, fit_dir, compare_dir);
    }
    if (wi->parsed()) {
      RunConfig cfg = resolve_config(config_path, ov);
      if (!k_list.empty()) {
        for (double k : k_list)
          if (!(k > 0.0)) throw validation_error("whatif: k must be > 0");
        cfg.whatif_k = k_list;
      }
      return cmd_whatif(cfg, fit_dir);
    }
    if (dg->parsed()) return cmd_diag(fit_dir);
    std::cout << app.help();
    return 0;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
