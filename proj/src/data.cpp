#include "binquant/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>

namespace binquant {

namespace {

std::vector<std::uint8_t> read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoCode::OpenFailed, "cannot open " + path);
  in.seekg(0, std::ios::end);
  auto len = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(len), 0);
  in.read(reinterpret_cast<char*>(buf.data()), len);
  if (!in) throw IoError(IoCode::Truncated, "short read on " + path);
  return buf;
}

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t(p[0]) << 24) | (std::uint32_t(p[1]) << 16) |
         (std::uint32_t(p[2]) << 8) | std::uint32_t(p[3]);
}

void need_bytes(const std::vector<std::uint8_t>& buf, std::size_t expected,
                const std::string& path) {
  if (buf.size() != expected)
    throw IoError(IoCode::Truncated, path + ": expected " + std::to_string(expected) +
                                         " bytes, got " + std::to_string(buf.size()));
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 double mean, double stddev) {
  if (!(stddev > 0.0)) throw ConfigError("load_idx: std must be positive");

  auto ibuf = read_all(images_path);
  if (ibuf.size() < 16)
    throw IoError(IoCode::Truncated, images_path + ": expected 16 header bytes, got " +
                                         std::to_string(ibuf.size()));
  std::uint32_t imagic = be32(ibuf.data());
  if (imagic != 0x00000803u)
    throw IoError(IoCode::WrongMagic,
                  images_path + ": wrong magic (want 0x00000803)");
  std::size_t n = be32(ibuf.data() + 4);
  std::size_t rows = be32(ibuf.data() + 8);
  std::size_t cols = be32(ibuf.data() + 12);
  need_bytes(ibuf, 16 + n * rows * cols, images_path);

  auto lbuf = read_all(labels_path);
  if (lbuf.size() < 8)
    throw IoError(IoCode::Truncated, labels_path + ": expected 8 header bytes, got " +
                                         std::to_string(lbuf.size()));
  std::uint32_t lmagic = be32(lbuf.data());
  if (lmagic != 0x00000801u)
    throw IoError(IoCode::WrongMagic,
                  labels_path + ": wrong magic (want 0x00000801)");
  std::size_t ln = be32(lbuf.data() + 4);
  need_bytes(lbuf, 8 + ln, labels_path);

  if (n != ln)
    throw IoError(IoCode::DimMismatch, "image count " + std::to_string(n) +
                                           " != label count " + std::to_string(ln));

  Dataset ds;
  ds.name = images_path;
  ds.n = n;
  ds.dim = rows * cols;
  ds.sample_dims = {rows, cols};
  ds.images.resize(n * ds.dim);
  const std::uint8_t* px = ibuf.data() + 16;
  for (std::size_t i = 0; i < n * ds.dim; ++i)
    ds.images[i] = (double(px[i]) / 255.0 - mean) / stddev;
  ds.labels.resize(n);
  int maxlab = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ds.labels[i] = int(lbuf[8 + i]);
    maxlab = std::max(maxlab, ds.labels[i]);
  }
  ds.num_classes = maxlab + 1;
  return ds;
}

Dataset synthetic_blobs(std::size_t n_per_class, int num_classes, std::size_t dim,
                        double separation, std::uint64_t seed) {
  if (n_per_class == 0) throw ConfigError("synthetic_blobs: empty dataset (n_per_class = 0)");
  if (num_classes < 2) throw ConfigError("synthetic_blobs: need at least 2 classes");
  if (dim == 0) throw ConfigError("synthetic_blobs: dim must be >= 1");
  if (!(separation >= 0.0)) throw ConfigError("synthetic_blobs: separation must be >= 0");

  Dataset ds;
  ds.name = "blobs";
  ds.n = n_per_class * std::size_t(num_classes);
  ds.dim = dim;
  ds.sample_dims = {dim};
  ds.num_classes = num_classes;
  ds.images.resize(ds.n * dim);
  ds.labels.resize(ds.n);

  auto rng = make_rng(mix64(seed));
  std::size_t idx = 0;
  for (int k = 0; k < num_classes; ++k) {
    std::vector<double> mean(dim, 0.0);
    if (dim == 1) {
      mean[0] = (k % 2 == 0 ? 1.0 : -1.0) * separation;
    } else {
      double ang = 2.0 * std::numbers::pi * double(k) / double(num_classes);
      mean[0] = separation * std::cos(ang);
      mean[1] = separation * std::sin(ang);
    }
    for (std::size_t i = 0; i < n_per_class; ++i, ++idx) {
      double* row = ds.images.data() + idx * dim;
      for (std::size_t d = 0; d < dim; ++d) row[d] = mean[d] + next_normal(rng);
      ds.labels[idx] = k;
    }
  }
  return ds;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& body,
                                            const std::string& what) {
  std::map<std::string, std::string> kv;
  std::size_t pos = 0;
  while (pos < body.size()) {
    std::size_t comma = body.find(',', pos);
    std::string item = body.substr(pos, comma == std::string::npos ? comma : comma - pos);
    pos = comma == std::string::npos ? body.size() : comma + 1;
    if (item.empty()) continue;
    std::size_t eq = item.find('=');
    if (eq == std::string::npos)
      throw ConfigError(what + ": expected key=value, got '" + item + "'");
    if (!kv.emplace(item.substr(0, eq), item.substr(eq + 1)).second)
      throw ConfigError(what + ": duplicate key '" + item.substr(0, eq) + "'");
  }
  return kv;
}

double to_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(what + ": bad number '" + s + "'");
  }
  if (used != s.size()) throw ConfigError(what + ": bad number '" + s + "'");
  return v;
}

long to_long(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  long v;
  try {
    v = std::stol(s, &used);
  } catch (const std::exception&) {
    throw ConfigError(what + ": bad integer '" + s + "'");
  }
  if (used != s.size()) throw ConfigError(what + ": bad integer '" + s + "'");
  return v;
}

std::string take(std::map<std::string, std::string>& kv, const std::string& key,
                 const std::string& what) {
  auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError(what + ": missing '" + key + "'");
  std::string v = it->second;
  kv.erase(it);
  return v;
}

}  // namespace

Dataset load_dataset(const std::string& spec) {
  std::size_t colon = spec.find(':');
  if (colon == std::string::npos)
    throw ConfigError("dataset spec '" + spec + "': expected 'blobs:...' or 'idx:...'");
  std::string scheme = spec.substr(0, colon);
  auto kv = parse_kv(spec.substr(colon + 1), "dataset spec");

  if (scheme == "blobs") {
    long npc = to_long(take(kv, "n_per_class", "blobs spec"), "n_per_class");
    long classes = to_long(take(kv, "classes", "blobs spec"), "classes");
    long dim = to_long(take(kv, "dim", "blobs spec"), "dim");
    double sep = to_double(take(kv, "separation", "blobs spec"), "separation");
    long seed = to_long(take(kv, "seed", "blobs spec"), "seed");
    if (!kv.empty())
      throw ConfigError("blobs spec: unknown key '" + kv.begin()->first + "'");
    if (npc < 0 || classes < 0 || dim < 0 || seed < 0)
      throw ConfigError("blobs spec: negative value");
    return synthetic_blobs(std::size_t(npc), int(classes), std::size_t(dim), sep,
                           std::uint64_t(seed));
  }
  if (scheme == "idx") {
    std::string images = take(kv, "images", "idx spec");
    std::string labels = take(kv, "labels", "idx spec");
    double mean = 0.0, stddev = 1.0;
    if (auto it = kv.find("mean"); it != kv.end()) {
      mean = to_double(it->second, "mean");
      kv.erase(it);
    }
    if (auto it = kv.find("std"); it != kv.end()) {
      stddev = to_double(it->second, "std");
      kv.erase(it);
    }
    if (!kv.empty())
      throw ConfigError("idx spec: unknown key '" + kv.begin()->first + "'");
    return load_idx(images, labels, mean, stddev);
  }
  throw ConfigError("dataset spec: unknown scheme '" + scheme + "'");
}

std::vector<std::uint32_t> epoch_permutation(std::size_t n, std::uint64_t seed,
                                             std::uint64_t epoch) {
  std::vector<std::uint32_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = std::uint32_t(i);
  auto rng = make_rng(mix64(seed ^ mix64(epoch)));
  // Hand-rolled Fisher-Yates: std::shuffle's draws are implementation-defined,
  // this sequence is identical on every standard library.
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = std::size_t(rng() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

BatchIter::BatchIter(const Dataset& ds, const BatchPlan& plan, std::uint64_t epoch)
    : ds_(&ds), batch_size_(plan.batch_size) {
  if (plan.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  perm_ = epoch_permutation(ds.n, plan.seed, epoch);
  num_batches_ = plan.drop_last ? ds.n / batch_size_
                                : (ds.n + batch_size_ - 1) / batch_size_;
}

bool BatchIter::next() {
  std::size_t i = started_ ? cur_index_ + 1 : 0;
  started_ = true;
  if (i >= num_batches_) return false;
  cur_index_ = i;
  cur_begin_ = i * batch_size_;
  cur_size_ = std::min(batch_size_, ds_->n - cur_begin_);
  return true;
}

}  // namespace binquant
