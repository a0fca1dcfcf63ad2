#include "ipd/config.hpp"

#include "ipd/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ipd {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string where(const std::string& key) { return "config key '" + key + "'"; }

double to_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    fail(ErrorKind::ConfigError, where(key) + ": expected a number, got '" + v + "'");
  if (!std::isfinite(out)) fail(ErrorKind::ConfigError, where(key) + ": value must be finite");
  return out;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    fail(ErrorKind::ConfigError, where(key) + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = lower(trim(raw));
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  fail(ErrorKind::ConfigError, where(key) + ": expected a boolean, got '" + v + "'");
}

template <class T, class Parse>
std::vector<T> to_list(const std::string& key, const std::string& raw, Parse parse) {
  std::vector<T> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse(key, item));
  if (out.empty()) fail(ErrorKind::ConfigError, where(key) + ": empty list");
  return out;
}

struct ForestLists {
  std::vector<std::uint64_t> trees{50, 100};
  std::vector<std::uint64_t> depth{4, 8, 16};
  std::vector<std::uint64_t> leaf{5, 10};
};

struct SimTimes {
  double start = 0.0;
  double end = 3.0;
  std::uint64_t points = 50;
};

using Setter = std::function<void(const std::string& key, const std::string& value)>;

}  // namespace

RunConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorKind::ConfigError, std::string("malformed config: ") + e.what());
  }

  RunConfig cfg;
  ScenarioConfig& sc = cfg.scenario;
  ForestLists forest;
  SimTimes times;

  const std::map<std::string, std::map<std::string, Setter>> table = {
      {"run",
       {{"seed", [&](auto& k, auto& v) { sc.master_seed = to_unsigned(k, v); }},
        {"threads", [&](auto& k, auto& v) { sc.threads = static_cast<unsigned>(to_unsigned(k, v)); }},
        {"target", [&](auto&, auto& v) { sc.target = trim(v); }},
        {"t_future", [&](auto& k, auto& v) { sc.t_future = to_double(k, v); }}}},
      {"cost",
       {{"budget", [&](auto& k, auto& v) { sc.cost.budget = to_double(k, v); }},
        {"model_cost", [&](auto& k, auto& v) { sc.cost.model_cost = to_double(k, v); }},
        {"labeled_cost", [&](auto& k, auto& v) { sc.cost.labeled_cost = to_double(k, v); }},
        {"unlabeled_cost", [&](auto& k, auto& v) { sc.cost.unlabeled_cost = to_double(k, v); }}}},
      {"bootstrap",
       {{"replicates", [&](auto& k, auto& v) { sc.boot.replicates = to_unsigned(k, v); }},
        {"zeta_grid", [&](auto& k, auto& v) { sc.boot.zeta_grid = to_list<double>(k, v, to_double); }},
        {"pool",
         [&](auto& k, auto& v) {
           const std::string p = lower(trim(v));
           if (p == "pooled") sc.boot.pool = DesignPool::Pooled;
           else if (p == "latest") sc.boot.pool = DesignPool::LatestPoint;
           else fail(ErrorKind::ConfigError, where(k) + ": expected 'pooled' or 'latest'");
         }},
        {"band",
         [&](auto& k, auto& v) {
           const std::string b = lower(trim(v));
           if (b == "mean") sc.boot.recalibration_band = ForecastBand::Mean;
           else if (b == "prediction") sc.boot.recalibration_band = ForecastBand::Prediction;
           else fail(ErrorKind::ConfigError, where(k) + ": expected 'mean' or 'prediction'");
         }},
        {"couple_covariance", [&](auto& k, auto& v) { sc.boot.pair_replicates = to_bool(k, v); }}}},
      {"preferences",
       {{"lambda", [&](auto& k, auto& v) { sc.preferences.lambda = to_double(k, v); }},
        {"theta", [&](auto& k, auto& v) { sc.preferences.theta = to_double(k, v); }},
        {"alpha", [&](auto& k, auto& v) { sc.preferences.alpha = to_double(k, v); }},
        {"calibrate", [&](auto& k, auto& v) { sc.preferences.calibrate = to_bool(k, v); }},
        {"mc_draws", [&](auto& k, auto& v) { sc.preferences.mc_draws = to_unsigned(k, v); }}}},
      {"decision",
       {{"solver",
         [&](auto& k, auto& v) {
           try {
             sc.solver = parse_solver_mode(trim(v));
           } catch (const Error& e) {
             fail(ErrorKind::ConfigError, where(k) + ": " + e.what());
           }
         }}}},
      {"simulation",
       {{"drift_rate", [&](auto& k, auto& v) { sc.dgp.drift_rate = to_double(k, v); }},
        {"step_height", [&](auto& k, auto& v) { sc.dgp.step_height = to_double(k, v); }},
        {"noise_var", [&](auto& k, auto& v) { sc.dgp.noise_var = to_double(k, v); }},
        {"n_train", [&](auto& k, auto& v) { sc.n_train = to_unsigned(k, v); }},
        {"n_holdout", [&](auto& k, auto& v) { sc.n_holdout = to_unsigned(k, v); }},
        {"calib_start", [&](auto& k, auto& v) { times.start = to_double(k, v); }},
        {"calib_end", [&](auto& k, auto& v) { times.end = to_double(k, v); }},
        {"calib_points", [&](auto& k, auto& v) { times.points = to_unsigned(k, v); }},
        {"n_lab_per_point", [&](auto& k, auto& v) { sc.n_lab_per_point = to_unsigned(k, v); }},
        {"n_unlab_per_point", [&](auto& k, auto& v) { sc.n_unlab_per_point = to_unsigned(k, v); }}}},
      {"forest",
       {{"trees", [&](auto& k, auto& v) { forest.trees = to_list<std::uint64_t>(k, v, to_unsigned); }},
        {"max_depth", [&](auto& k, auto& v) { forest.depth = to_list<std::uint64_t>(k, v, to_unsigned); }},
        {"min_leaf", [&](auto& k, auto& v) { forest.leaf = to_list<std::uint64_t>(k, v, to_unsigned); }},
        {"cv_folds", [&](auto& k, auto& v) { sc.forest.folds = to_unsigned(k, v); }}}},
      {"grid",
       {{"lambda_max", [&](auto& k, auto& v) { cfg.grid.lambda_max = to_double(k, v); }},
        {"theta_max", [&](auto& k, auto& v) { cfg.grid.theta_max = to_double(k, v); }},
        {"steps", [&](auto& k, auto& v) { cfg.grid.steps = to_unsigned(k, v); }}}},
  };

  for (const auto& [section, body] : tree) {
    const auto sec = table.find(section);
    if (sec == table.end()) fail(ErrorKind::ConfigError, "unknown config section [" + section + "]");
    if (!body.data().empty() && body.empty())
      fail(ErrorKind::ConfigError, "key '" + section + "' outside of a section");
    for (const auto& [key, value] : body) {
      const auto setter = sec->second.find(key);
      if (setter == sec->second.end())
        fail(ErrorKind::ConfigError, "unknown config key '" + key + "' in [" + section + "]");
      setter->second(section + "." + key, value.data());
    }
  }

  if (times.points < 1) fail(ErrorKind::ConfigError, "config key 'simulation.calib_points' must be >= 1");
  sc.calib_times = ScenarioConfig::evenly_spaced(times.start, times.end, times.points);
  sc.forest.grid.clear();
  for (auto t : forest.trees)
    for (auto d : forest.depth)
      for (auto l : forest.leaf) sc.forest.grid.push_back({t, d, l});
  if (cfg.grid.steps < 1) fail(ErrorKind::ConfigError, "config key 'grid.steps' must be >= 1");

  try {
    sc.validate();
  } catch (const Error& e) {
    fail(ErrorKind::ConfigError, std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace ipd
