#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "binquant/checkpoint.hpp"
#include "binquant/config.hpp"
#include "binquant/metrics.hpp"

namespace binquant {

// Width-erased training loop.  Latent masters always live in 64-bit; `width`
// only selects the precision of the network forward/backward.
class ITrainer {
 public:
  virtual ~ITrainer() = default;
  virtual MetricsRecord initial_record() = 0;  // row 0: state before any step
  virtual MetricsRecord run_epoch() = 0;       // one pass; returns that row
  virtual double test_accuracy() = 0;          // at sign-binarized weights
  virtual double train_accuracy() = 0;         // same, on the training set
  virtual std::size_t epochs_done() const = 0;
  virtual Checkpoint make_checkpoint() const = 0;
};

class Trainer {
 public:
  explicit Trainer(const RunConfig& cfg);  // validates, loads data, inits params
  ~Trainer();
  Trainer(Trainer&&) noexcept;
  Trainer& operator=(Trainer&&) noexcept;

  MetricsRecord initial_record() { return impl_->initial_record(); }
  MetricsRecord run_epoch() { return impl_->run_epoch(); }
  double test_accuracy() { return impl_->test_accuracy(); }
  double train_accuracy() { return impl_->train_accuracy(); }
  std::size_t epochs_done() const { return impl_->epochs_done(); }
  Checkpoint make_checkpoint() const { return impl_->make_checkpoint(); }

 private:
  std::unique_ptr<ITrainer> impl_;
};

struct TrainResult {
  std::vector<MetricsRecord> history;  // row 0 plus one row per epoch
  double best_test_acc = 0.0;
  double last_test_acc = 0.0;
  std::string out_dir, metrics_path, checkpoint_path, summary_path;
};

// Full pipeline: out-dir lock, metrics.csv, per-epoch atomic checkpoint,
// summary.json.  A NumericError mid-training surfaces as VerifyError; the
// checkpoint of the last completed epoch stays on disk.  `progress` (if set)
// sees each metrics row as soon as it is written.
TrainResult train_run(RunConfig cfg,
                      const std::function<void(const MetricsRecord&)>& progress = {});

struct EvalResult {
  double accuracy = 0.0;
  std::size_t n = 0;
  std::string network;
};

EvalResult evaluate_checkpoint(const std::string& checkpoint_path,
                               const std::string& data_spec);

}  // namespace binquant
