#pragma once

#include <optional>
#include <string>

namespace binquant {

// Flat `key = value` run configuration.  Unknown and duplicate keys are hard
// errors; values left out fall back to the defaults below.
struct RunConfig {
  // adaste | adaste-anneal | bc | proxquant | md-softmax | md-tanh
  // ("adaste-anneal" is shorthand for adaste with anneal = true)
  std::string optimizer;
  std::string network;  // preset name
  bool binarize_all = false;
  std::string train_data;  // dataset spec string
  std::string test_data;

  double lr = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 128;
  std::size_t epochs = 20;  // 0 = evaluate only, no training steps
  std::uint64_t seed = 0;
  int width = 32;  // 32 or 64 (training float width)
  bool deterministic = false;
  std::string out_dir = "out";

  // adaste
  std::optional<double> mu0;  // default depends on anneal; resolved in validate
  double alpha = 0.01;
  bool anneal = false;
  std::size_t epochs_to_max = 200;
  std::string beta_rule = "hard";  // hard | soft
  double beta_max = 1e6;

  // proxquant
  double lambda0 = 0.01;
  double lambda_step = 0.01;

  // mirror descent
  double tau0 = 1.0;
  double tau_decay = 0.95;

  // bc
  bool clip_latent = true;

  double resolved_mu0() const;  // after validate()
};

RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Cross-field validation; fills optimizer-dependent defaults.
void validate_config(RunConfig& cfg);

}  // namespace binquant
