#include "binquant/metrics.hpp"

#include "binquant/common.hpp"

namespace binquant {

std::string format_metrics_row(const MetricsRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%zu,%.9g", r.epoch,
                r.train_loss, r.test_acc, r.mu, r.lr, r.mean_abs_g, r.flip_count,
                r.wall_seconds);
  return buf;
}

MetricsWriter::MetricsWriter(const std::string& path) {
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw IoError(IoCode::OpenFailed, "metrics: cannot open " + path);
  std::fprintf(f_, "%s\n", kMetricsHeader);
  std::fflush(f_);
}

MetricsWriter::~MetricsWriter() {
  if (f_) std::fclose(f_);
}

void MetricsWriter::write(const MetricsRecord& r) {
  std::string row = format_metrics_row(r);
  std::fprintf(f_, "%s\n", row.c_str());
  std::fflush(f_);
}

}  // namespace binquant
