#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binquant/common.hpp"
#include "binquant/tensor.hpp"

namespace binquant {

// Immutable after load.  Images are stored flattened row-major (n x dim),
// already normalized; sample_dims keeps the original per-sample shape.
struct Dataset {
  std::string name;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::vector<std::size_t> sample_dims;
  int num_classes = 0;
  std::vector<double> images;  // n * dim
  std::vector<int> labels;     // n, each in [0, num_classes)
};

// Big-endian IDX pair: images magic 0x00000803 (u8, 3 dims), labels magic
// 0x00000801.  Pixels are scaled to [0,1] then standardized with (mean, std).
// Distinct IoError codes: OpenFailed, WrongMagic, Truncated (with expected vs
// actual byte counts), DimMismatch (image count != label count).
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 double mean = 0.0, double stddev = 1.0);

// K Gaussian clusters with unit variance; class means sit on a circle of
// radius `separation` in the first two coordinates (a +-separation line for
// dim = 1).  Bytes are a pure function of the arguments.
Dataset synthetic_blobs(std::size_t n_per_class, int num_classes, std::size_t dim,
                        double separation, std::uint64_t seed);

// "blobs:n_per_class=..,classes=..,dim=..,separation=..,seed=.."
// "idx:images=<path>,labels=<path>[,mean=..,std=..]"
Dataset load_dataset(const std::string& spec);

struct BatchPlan {
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  bool drop_last = false;
};

// Fisher-Yates permutation of [0, n); a pure function of (seed, epoch).
std::vector<std::uint32_t> epoch_permutation(std::size_t n, std::uint64_t seed,
                                             std::uint64_t epoch);

// Deterministic batches over one epoch's permutation, no element repeated.
class BatchIter {
 public:
  BatchIter(const Dataset& ds, const BatchPlan& plan, std::uint64_t epoch);

  std::size_t num_batches() const { return num_batches_; }
  bool next();                        // advance to the next batch, false at end
  std::size_t size() const { return cur_size_; }

  template <typename T>
  void fill(Tensor<T>& x, std::vector<int>& y) const {
    x.resize({cur_size_, ds_->dim});
    y.resize(cur_size_);
    for (std::size_t r = 0; r < cur_size_; ++r) {
      std::size_t src = perm_[cur_begin_ + r];
      const double* row = ds_->images.data() + src * ds_->dim;
      T* dst = x.ptr() + r * ds_->dim;
      for (std::size_t c = 0; c < ds_->dim; ++c) dst[c] = T(row[c]);
      y[r] = ds_->labels[src];
    }
  }

 private:
  const Dataset* ds_;
  std::vector<std::uint32_t> perm_;
  std::size_t batch_size_, num_batches_;
  std::size_t cur_index_ = 0, cur_begin_ = 0, cur_size_ = 0;
  bool started_ = false;
};

}  // namespace binquant
