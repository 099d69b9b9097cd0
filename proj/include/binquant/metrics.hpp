#pragma once

#include <cstdio>
#include <string>

namespace binquant {

inline constexpr const char* kMetricsHeader =
    "epoch,train_loss,test_acc,mu,lr,mean_abs_g,flip_count,wall_seconds";

struct MetricsRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double test_acc = 0.0;
  double mu = 0.0;
  double lr = 0.0;
  double mean_abs_g = 0.0;
  std::size_t flip_count = 0;
  double wall_seconds = 0.0;
};

std::string format_metrics_row(const MetricsRecord& r);

// Appends one CSV row per epoch and flushes after each, so a killed run still
// leaves every completed row on disk.
class MetricsWriter {
 public:
  explicit MetricsWriter(const std::string& path);
  ~MetricsWriter();
  MetricsWriter(const MetricsWriter&) = delete;
  MetricsWriter& operator=(const MetricsWriter&) = delete;

  void write(const MetricsRecord& r);

 private:
  std::FILE* f_ = nullptr;
};

}  // namespace binquant
