#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "binquant/common.hpp"
#include "binquant/config.hpp"
#include "binquant/gradcheck.hpp"
#include "binquant/metrics.hpp"
#include "binquant/properties.hpp"
#include "binquant/train.hpp"

namespace {

void apply_thread_cap() {
  const char* env = std::getenv("BINQUANT_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  long n = std::strtol(env, &end, 10);
  if (end && *end == '\0' && n > 0) omp_set_num_threads(int(n));
}

int cmd_train(const std::string& config_path, const std::string& out_override,
              long long seed_override, bool have_seed) {
  binquant::RunConfig cfg = binquant::parse_config_file(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (have_seed) {
    if (seed_override < 0) throw binquant::ConfigError("--seed must be non-negative");
    cfg.seed = std::uint64_t(seed_override);
  }
  std::printf("%s\n", binquant::kMetricsHeader);
  binquant::TrainResult res =
      binquant::train_run(cfg, [](const binquant::MetricsRecord& r) {
        std::printf("%s\n", binquant::format_metrics_row(r).c_str());
        std::fflush(stdout);
      });
  std::printf("best_test_acc %.9g\n", res.best_test_acc);
  std::printf("last_test_acc %.9g\n", res.last_test_acc);
  std::printf("metrics %s\n", res.metrics_path.c_str());
  std::printf("checkpoint %s\n", res.checkpoint_path.c_str());
  std::printf("summary %s\n", res.summary_path.c_str());
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& data) {
  binquant::EvalResult r = binquant::evaluate_checkpoint(checkpoint, data);
  std::printf("network %s\n", r.network.c_str());
  std::printf("samples %zu\n", r.n);
  std::printf("accuracy %.9g\n", r.accuracy);
  return 0;
}

int cmd_gradcheck(int width) {
  if (width != 64)
    throw binquant::ConfigError("gradcheck supports --width 64 only (the finite "
                                "differences are taken in 64-bit)");
  binquant::GradcheckReport rep = binquant::run_gradcheck(50);
  std::printf("seeds %d\n", rep.seeds);
  std::printf("elements_checked %zu\n", rep.elements_checked);
  std::printf("max_rel %.9g (tolerance %.9g)\n", rep.max_rel, rep.tolerance);
  std::printf("worst %s\n", rep.worst.c_str());
  std::printf("gradcheck %s\n", rep.passed ? "PASS" : "FAIL");
  if (!rep.passed)
    throw binquant::VerifyError("gradcheck failed: max_rel " +
                                std::to_string(rep.max_rel) + " at " + rep.worst);
  return 0;
}

int cmd_propcheck(std::size_t samples) {
  auto results = binquant::run_all_properties(samples, /*seed=*/1);
  nlohmann::json j = nlohmann::json::array();
  bool all_ok = true;
  for (const auto& r : results) {
    j.push_back({{"name", r.name},
                 {"passed", r.passed},
                 {"samples", r.samples},
                 {"violations", r.violations},
                 {"worst", r.worst},
                 {"detail", r.detail}});
    all_ok = all_ok && r.passed;
  }
  nlohmann::json out = {{"properties", j}, {"ok", all_ok}};
  std::printf("%s\n", out.dump(2).c_str());
  if (!all_ok) throw binquant::VerifyError("one or more property checks failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_cap();

  CLI::App app{"binary-weight network training toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_override;
  long long seed_override = 0;
  CLI::App* train = app.add_subcommand("train", "train a network from a config file");
  train->add_option("--config", config_path, "path to the run configuration")
      ->required();
  train->add_option("--out", out_override, "override the configured output directory");
  CLI::Option* seed_opt =
      train->add_option("--seed", seed_override, "override the configured seed");

  std::string checkpoint, data;
  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--data", data, "dataset spec (idx:... or blobs:...)")->required();

  int width = 64;
  CLI::App* grad = app.add_subcommand("gradcheck", "backprop vs finite differences");
  grad->add_option("--width", width, "float width (64 only)");

  std::size_t samples = 10000;
  CLI::App* prop = app.add_subcommand("propcheck", "run the analytic property suite");
  prop->add_option("--samples", samples, "draws per property");

  try {
    app.parse(argc, argv);
    if (train->parsed())
      return cmd_train(config_path, out_override, seed_override, seed_opt->count() > 0);
    if (eval->parsed()) return cmd_eval(checkpoint, data);
    if (grad->parsed()) return cmd_gradcheck(width);
    if (prop->parsed()) return cmd_propcheck(samples);
    return 2;
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // --help and --version exit clean
  } catch (const binquant::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "domain error: %s\n", e.what());
    return 2;
  } catch (const binquant::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
