#include "binquant/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "binquant/common.hpp"

namespace binquant {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': " + v);
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument("negative");
    std::uint64_t n = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing");
    return n;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + v);
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + v);
}

}  // namespace

double RunConfig::resolved_mu0() const {
  if (mu0) return *mu0;
  return anneal ? 1.0 : 1.0 / alpha;
}

RunConfig parse_config_text(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config: line " + std::to_string(lineno) +
                        ": empty key or value");
    if (!seen.insert(key).second)
      throw ConfigError("config: duplicate key '" + key + "'");

    if (key == "optimizer") cfg.optimizer = val;
    else if (key == "network") cfg.network = val;
    else if (key == "binarize_all") cfg.binarize_all = to_bool(key, val);
    else if (key == "train_data") cfg.train_data = val;
    else if (key == "test_data") cfg.test_data = val;
    else if (key == "lr") cfg.lr = to_double(key, val);
    else if (key == "momentum") cfg.momentum = to_double(key, val);
    else if (key == "batch_size") cfg.batch_size = std::size_t(to_u64(key, val));
    else if (key == "epochs") cfg.epochs = std::size_t(to_u64(key, val));
    else if (key == "seed") cfg.seed = to_u64(key, val);
    else if (key == "width") cfg.width = int(to_u64(key, val));
    else if (key == "deterministic") cfg.deterministic = to_bool(key, val);
    else if (key == "out_dir") cfg.out_dir = val;
    else if (key == "mu0") cfg.mu0 = to_double(key, val);
    else if (key == "alpha") cfg.alpha = to_double(key, val);
    else if (key == "anneal") cfg.anneal = to_bool(key, val);
    else if (key == "epochs_to_max") cfg.epochs_to_max = std::size_t(to_u64(key, val));
    else if (key == "beta_rule") cfg.beta_rule = val;
    else if (key == "beta_max") cfg.beta_max = to_double(key, val);
    else if (key == "lambda0") cfg.lambda0 = to_double(key, val);
    else if (key == "lambda_step") cfg.lambda_step = to_double(key, val);
    else if (key == "tau0") cfg.tau0 = to_double(key, val);
    else if (key == "tau_decay") cfg.tau_decay = to_double(key, val);
    else if (key == "clip_latent") cfg.clip_latent = to_bool(key, val);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoCode::OpenFailed, "config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void validate_config(RunConfig& cfg) {
  static const std::set<std::string> optimizers = {"adaste", "bc", "proxquant",
                                                   "md-softmax", "md-tanh"};
  if (cfg.optimizer == "adaste-anneal") {
    cfg.optimizer = "adaste";
    cfg.anneal = true;
  }
  if (!optimizers.count(cfg.optimizer))
    throw ConfigError("config: unknown optimizer '" + cfg.optimizer + "'");
  if (cfg.network.empty()) throw ConfigError("config: 'network' is required");
  if (cfg.train_data.empty()) throw ConfigError("config: 'train_data' is required");
  if (cfg.test_data.empty()) throw ConfigError("config: 'test_data' is required");
  if (!(cfg.lr > 0.0)) throw ConfigError("config: lr must be positive");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
    throw ConfigError("config: momentum must lie in [0,1)");
  if (cfg.batch_size == 0) throw ConfigError("config: batch_size must be positive");
  if (cfg.width != 32 && cfg.width != 64)
    throw ConfigError("config: width must be 32 or 64");
  if (cfg.out_dir.empty()) throw ConfigError("config: out_dir must be non-empty");

  if (cfg.optimizer == "adaste") {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
      throw ConfigError("config: alpha must lie in (0,1)");
    double m0 = cfg.resolved_mu0();
    if (!(m0 > 0.0)) throw ConfigError("config: mu0 must be positive");
    if (cfg.beta_rule != "hard" && cfg.beta_rule != "soft")
      throw ConfigError("config: beta_rule must be 'hard' or 'soft'");
    if (!(cfg.beta_max > 0.0)) throw ConfigError("config: beta_max must be positive");
    if (cfg.anneal) {
      if (cfg.epochs_to_max == 0)
        throw ConfigError("config: epochs_to_max must be positive");
      if (!(m0 < 1.0 / cfg.alpha))
        throw ConfigError("config: annealing needs mu0 < 1/alpha");
    }
    if (cfg.beta_rule == "soft" && !(m0 * cfg.alpha < 1.0))
      throw ConfigError("config: soft beta rule needs mu0*alpha < 1");
  } else if (cfg.optimizer == "proxquant") {
    if (cfg.lambda0 < 0.0 || cfg.lambda_step < 0.0)
      throw ConfigError("config: lambda0 and lambda_step must be non-negative");
  } else if (cfg.optimizer == "md-softmax" || cfg.optimizer == "md-tanh") {
    if (!(cfg.tau0 > 0.0)) throw ConfigError("config: tau0 must be positive");
    if (!(cfg.tau_decay > 0.0 && cfg.tau_decay <= 1.0))
      throw ConfigError("config: tau_decay must lie in (0,1]");
  }
}

}  // namespace binquant
