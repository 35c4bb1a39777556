#include "zwf/config.hpp"

#include <fstream>

#include "zwf/errors.hpp"

#include "json.hpp"

namespace zwf {

using nlohmann::json;

RunConfig default_config() {
  RunConfig cfg;
  // Clip the upper-left corner so the default 25x15 tiling keeps ~320 of
  // its 375 cells, mimicking a coastline.
  cfg.scenario.mask = {{0.0, 0.0}, {25.0, 0.0}, {25.0, 15.0},
                       {12.0, 15.0}, {0.0, 6.0}};
  cfg.scenario.surface_prob = {{3, 0.34}, {4, 0.31}, {5, 0.55}};
  cfg.scenario.duration_hours = {{3, 3.27}, {4, 6.58}, {5, 5.32}};
  cfg.fixed.surface_prob = cfg.scenario.surface_prob;
  return cfg;
}

namespace {

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::map<int, double> day_map(const json& j) {
  std::map<int, double> m;
  for (auto& [k, v] : j.items()) m[std::stoi(k)] = v.get<double>();
  return m;
}

json day_map_json(const std::map<int, double>& m) {
  json j = json::object();
  for (auto& [k, v] : m) j[std::to_string(k)] = v;
  return j;
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw validation_error(path + ": " + e.what());
  }

  RunConfig cfg = default_config();
  try {
    get_if(j, "seed", cfg.seed);
    get_if(j, "out", cfg.out);
    get_if(j, "data_dir", cfg.data_dir);
    if (j.contains("model")) {
      const std::string m = j.at("model").get<std::string>();
      if (m == "shared")
        cfg.psi_mode = PsiMode::shared;
      else if (m == "daily")
        cfg.psi_mode = PsiMode::daily;
      else
        throw validation_error("config: model must be shared or daily");
    }
    if (j.contains("component")) {
      const std::string c = j.at("component").get<std::string>();
      if (c == "joint")
        cfg.component = Component::joint;
      else if (c == "zoop")
        cfg.component = Component::zoop_only;
      else if (c == "whale")
        cfg.component = Component::whale_only;
      else
        throw validation_error("config: component must be joint, zoop, or whale");
    }
    if (j.contains("mode")) {
      const std::string m = j.at("mode").get<std::string>();
      if (m == "upper")
        cfg.mode = SightingsMode::upper;
      else if (m == "lower")
        cfg.mode = SightingsMode::lower;
      else
        throw validation_error("config: mode must be upper or lower");
    }
    if (j.contains("mcmc")) {
      const json& m = j.at("mcmc");
      get_if(m, "iterations", cfg.mcmc.iterations);
      get_if(m, "burnin", cfg.mcmc.burnin);
      get_if(m, "thin", cfg.mcmc.thin);
      get_if(m, "chains", cfg.mcmc.chains);
      get_if(m, "checkpoint_every", cfg.mcmc.checkpoint_every);
      get_if(m, "audit_every", cfg.mcmc.audit_every);
    }
    if (j.contains("priors")) {
      const json& p = j.at("priors");
      get_if(p, "regression_variance", cfg.priors.regression_variance);
      get_if(p, "ig_shape", cfg.priors.ig_shape);
      get_if(p, "ig_rate", cfg.priors.ig_rate);
      get_if(p, "call_rate_shape", cfg.priors.call_rate_shape);
      get_if(p, "call_rate_scale", cfg.priors.call_rate_scale);
    }
    if (j.contains("fixed")) {
      const json& f = j.at("fixed");
      get_if(f, "tau2", cfg.fixed.tau2);
      get_if(f, "sig2_obl", cfg.fixed.sig2_obl);
      get_if(f, "effective_range_km", cfg.fixed.effective_range_km);
      if (f.contains("surface_prob"))
        cfg.fixed.surface_prob = day_map(f.at("surface_prob"));
    }
    if (j.contains("scenario")) {
      const json& s = j.at("scenario");
      ScenarioSpec& sc = cfg.scenario;
      if (s.contains("domain")) {
        const json& d = s.at("domain");
        get_if(d, "x0", sc.bounds.x0);
        get_if(d, "y0", sc.bounds.y0);
        get_if(d, "x1", sc.bounds.x1);
        get_if(d, "y1", sc.bounds.y1);
        get_if(d, "resolution", sc.resolution);
        if (d.contains("mask")) {
          sc.mask.clear();
          for (const auto& v : d.at("mask"))
            sc.mask.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        }
      }
      get_if(s, "zoop_days", sc.zoop_days);
      get_if(s, "whale_days", sc.whale_days);
      get_if(s, "zoop_sampling", sc.zoop_sampling);
      get_if(s, "zoop_sites_per_day", sc.zoop_sites_per_day);
      get_if(s, "whale_sampling", sc.whale_sampling);
      get_if(s, "n_transects", sc.n_transects);
      get_if(s, "n_hydrophones", sc.n_hydrophones);
      get_if(s, "noise_db", sc.noise_db);
      if (s.contains("truth")) {
        const json& t = s.at("truth");
        get_if(t, "alpha0_mean", sc.alpha0_mean);
        get_if(t, "tau2", sc.tau2);
        get_if(t, "alpha_temp", sc.alpha_temp);
        get_if(t, "sig2_obl", sc.sig2_obl);
        get_if(t, "kappa_eta", sc.kappa_eta);
        get_if(t, "sig2_sur", sc.sig2_sur);
        get_if(t, "lam0_sur", sc.lam0_sur);
        get_if(t, "lam1_sur", sc.lam1_sur);
        get_if(t, "beta0", sc.beta0);
        get_if(t, "beta_bath", sc.beta_bath);
        get_if(t, "beta_zoop", sc.beta_zoop);
        get_if(t, "kappa_psi", sc.kappa_psi);
        get_if(t, "call_rate", sc.call_rate);
        if (t.contains("surface_prob"))
          sc.surface_prob = day_map(t.at("surface_prob"));
        if (t.contains("duration_hours"))
          sc.duration_hours = day_map(t.at("duration_hours"));
      }
    }
    if (j.contains("regions")) {
      cfg.regions.clear();
      for (auto& [name, cells] : j.at("regions").items())
        cfg.regions[name] = cells.get<std::vector<int>>();
    }
    get_if(j, "whatif_k", cfg.whatif_k);
  } catch (const json::exception& e) {
    throw validation_error(path + ": " + e.what());
  }

  if (cfg.mcmc.chains < 1) throw validation_error("config: chains must be >= 1");
  if (cfg.mcmc.iterations < 0)
    throw validation_error("config: iterations must be >= 0");
  if (cfg.mcmc.resolved_burnin() > cfg.mcmc.iterations)
    throw validation_error("config: burnin must not exceed iterations");
  if (cfg.mcmc.thin < 1) throw validation_error("config: thin must be >= 1");
  for (double k : cfg.whatif_k)
    if (!(k > 0.0)) throw validation_error("config: whatif k must be > 0");
  return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["out"] = cfg.out;
  j["data_dir"] = cfg.data_dir;
  j["model"] = cfg.psi_mode == PsiMode::shared ? "shared" : "daily";
  j["component"] = cfg.component == Component::joint
                       ? "joint"
                       : (cfg.component == Component::zoop_only ? "zoop" : "whale");
  j["mode"] = cfg.mode == SightingsMode::upper ? "upper" : "lower";
  j["mcmc"] = {{"iterations", cfg.mcmc.iterations},
               {"burnin", cfg.mcmc.burnin},
               {"thin", cfg.mcmc.thin},
               {"chains", cfg.mcmc.chains},
               {"checkpoint_every", cfg.mcmc.checkpoint_every},
               {"audit_every", cfg.mcmc.audit_every}};
  j["priors"] = {{"regression_variance", cfg.priors.regression_variance},
                 {"ig_shape", cfg.priors.ig_shape},
                 {"ig_rate", cfg.priors.ig_rate},
                 {"call_rate_shape", cfg.priors.call_rate_shape},
                 {"call_rate_scale", cfg.priors.call_rate_scale}};
  j["fixed"] = {{"tau2", cfg.fixed.tau2},
                {"sig2_obl", cfg.fixed.sig2_obl},
                {"effective_range_km", cfg.fixed.effective_range_km},
                {"surface_prob", day_map_json(cfg.fixed.surface_prob)}};
  json mask = json::array();
  for (const Point& p : cfg.scenario.mask) mask.push_back({p.x, p.y});
  j["scenario"] = {
      {"domain",
       {{"x0", cfg.scenario.bounds.x0},
        {"y0", cfg.scenario.bounds.y0},
        {"x1", cfg.scenario.bounds.x1},
        {"y1", cfg.scenario.bounds.y1},
        {"resolution", cfg.scenario.resolution},
        {"mask", mask}}},
      {"zoop_days", cfg.scenario.zoop_days},
      {"whale_days", cfg.scenario.whale_days},
      {"zoop_sampling", cfg.scenario.zoop_sampling},
      {"zoop_sites_per_day", cfg.scenario.zoop_sites_per_day},
      {"whale_sampling", cfg.scenario.whale_sampling},
      {"n_transects", cfg.scenario.n_transects},
      {"n_hydrophones", cfg.scenario.n_hydrophones},
      {"noise_db", cfg.scenario.noise_db},
      {"truth",
       {{"alpha0_mean", cfg.scenario.alpha0_mean},
        {"tau2", cfg.scenario.tau2},
        {"alpha_temp", cfg.scenario.alpha_temp},
        {"sig2_obl", cfg.scenario.sig2_obl},
        {"kappa_eta", cfg.scenario.kappa_eta},
        {"sig2_sur", cfg.scenario.sig2_sur},
        {"lam0_sur", cfg.scenario.lam0_sur},
        {"lam1_sur", cfg.scenario.lam1_sur},
        {"beta0", cfg.scenario.beta0},
        {"beta_bath", cfg.scenario.beta_bath},
        {"beta_zoop", cfg.scenario.beta_zoop},
        {"kappa_psi", cfg.scenario.kappa_psi},
        {"call_rate", cfg.scenario.call_rate},
        {"surface_prob", day_map_json(cfg.scenario.surface_prob)},
        {"duration_hours", day_map_json(cfg.scenario.duration_hours)}}}};
  json regions = json::object();
  for (auto& [name, cells] : cfg.regions) regions[name] = cells;
  j["regions"] = regions;
  j["whatif_k"] = cfg.whatif_k;
  return j.dump(2) + "\n";
}

}  // namespace zwf
