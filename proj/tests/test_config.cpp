#include <doctest.h>

#include <string>

#include "binquant/common.hpp"
#include "binquant/config.hpp"

using namespace binquant;

namespace {

std::string base_cfg(const std::string& extra = "") {
  return
      "optimizer = adaste\n"
      "network = blobs-mlp\n"
      "train_data = blobs:n_per_class=20,classes=2,dim=2,separation=10,seed=1\n"
      "test_data = blobs:n_per_class=20,classes=2,dim=2,separation=10,seed=2\n" +
      extra;
}

RunConfig parse_valid(const std::string& text) {
  RunConfig cfg = parse_config_text(text);
  validate_config(cfg);
  return cfg;
}

}  // namespace

TEST_CASE("config: defaults, comments, whitespace") {
  RunConfig cfg = parse_valid(base_cfg(
      "# a comment line\n"
      "   \n"
      "lr = 0.05   # trailing comment\n"));
  CHECK(cfg.optimizer == "adaste");
  CHECK(cfg.lr == 0.05);
  CHECK(cfg.momentum == 0.9);
  CHECK(cfg.batch_size == 128);
  CHECK(cfg.epochs == 20);
  CHECK(cfg.width == 32);
  CHECK(cfg.seed == 0);
  CHECK_FALSE(cfg.deterministic);
  CHECK(cfg.beta_rule == "hard");
  CHECK(cfg.alpha == 0.01);
  // Annealing off: the sharpness defaults straight to its maximum 1/alpha.
  CHECK(cfg.resolved_mu0() == 100.0);
}

TEST_CASE("config: adaste-anneal is shorthand for adaste with anneal on") {
  RunConfig cfg = parse_config_text(base_cfg());
  cfg.optimizer = "adaste-anneal";
  validate_config(cfg);
  CHECK(cfg.optimizer == "adaste");
  CHECK(cfg.anneal);
  CHECK(cfg.resolved_mu0() == 1.0);  // annealing starts soft by default
}

TEST_CASE("config: duplicate and unknown keys are hard errors") {
  CHECK_THROWS_AS(parse_config_text(base_cfg("lr = 0.1\nlr = 0.2\n")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(base_cfg("learning_rate = 0.1\n")), ConfigError);
  CHECK_THROWS_AS(parse_config_text("just some words\n"), ConfigError);
}

TEST_CASE("config: malformed values are rejected with the key named") {
  CHECK_THROWS_AS(parse_config_text(base_cfg("lr = fast\n")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(base_cfg("epochs = -3\n")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(base_cfg("epochs = 2.5\n")), ConfigError);
  CHECK_THROWS_AS(parse_config_text(base_cfg("deterministic = maybe\n")), ConfigError);
}

TEST_CASE("config: cross-field validation") {
  CHECK_THROWS_AS(parse_valid(base_cfg("lr = 0\n")), ConfigError);
  CHECK_THROWS_AS(parse_valid(base_cfg("momentum = 1.0\n")), ConfigError);
  CHECK_THROWS_AS(parse_valid(base_cfg("batch_size = 0\n")), ConfigError);
  CHECK_THROWS_AS(parse_valid(base_cfg("width = 16\n")), ConfigError);
  CHECK_THROWS_AS(parse_valid(base_cfg("alpha = 1.5\n")), ConfigError);
  CHECK_THROWS_AS(parse_valid(base_cfg("beta_rule = medium\n")), ConfigError);
  CHECK_THROWS_AS(parse_valid("network = blobs-mlp\n"), ConfigError);  // optimizer gone
  CHECK_THROWS_AS(parse_valid(base_cfg("optimizer = sgd\n")), ConfigError);

  // Soft rule requires a genuinely soft double-well.
  CHECK_THROWS_AS(parse_valid(base_cfg("beta_rule = soft\nmu0 = 200\n")), ConfigError);
  RunConfig ok = parse_valid(base_cfg("beta_rule = soft\nmu0 = 1\n"));
  CHECK(ok.resolved_mu0() == 1.0);

  // Annealing must start below the cap.
  CHECK_THROWS_AS(parse_valid(base_cfg("anneal = true\nmu0 = 100\n")), ConfigError);
  CHECK_THROWS_AS(parse_valid(base_cfg("anneal = true\nepochs_to_max = 0\n")),
                  ConfigError);

  // Evaluation-only runs are allowed.
  RunConfig ev = parse_valid(base_cfg("epochs = 0\n"));
  CHECK(ev.epochs == 0);
}

TEST_CASE("config: every optimizer name validates with its own fields") {
  for (const char* opt : {"adaste", "bc", "proxquant", "md-softmax", "md-tanh"}) {
    RunConfig cfg = parse_config_text(base_cfg());
    cfg.optimizer = opt;
    CHECK_NOTHROW(validate_config(cfg));
  }
  RunConfig bad = parse_config_text(base_cfg("tau0 = 0\n"));
  bad.optimizer = "md-tanh";
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = parse_config_text(base_cfg("tau_decay = 1.5\n"));
  bad.optimizer = "md-softmax";
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
  bad = parse_config_text(base_cfg("lambda0 = -0.1\n"));
  bad.optimizer = "proxquant";
  CHECK_THROWS_AS(validate_config(bad), ConfigError);
}

TEST_CASE("config: missing file is an io error, not a config error") {
  CHECK_THROWS_AS(parse_config_file("/nonexistent/binquant.cfg"), IoError);
}
