#include <doctest.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "binquant/common.hpp"
#include "binquant/data.hpp"
#include "binquant/oracles.hpp"

using namespace binquant;
namespace fs = std::filesystem;

namespace {

fs::path fixture_dir() {
  fs::path d = fs::temp_directory_path() / "binquant-idx-fixture";
  fs::create_directories(d);
  return d;
}

void put_u32_be(std::ofstream& f, std::uint32_t v) {
  char b[4] = {char(v >> 24), char(v >> 16), char(v >> 8), char(v)};
  f.write(b, 4);
}

void write_images(const fs::path& p, std::uint32_t magic,
                  const std::vector<std::uint8_t>& px, std::uint32_t n,
                  std::uint32_t rows, std::uint32_t cols, bool truncate_payload = false) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  put_u32_be(f, magic);
  put_u32_be(f, n);
  put_u32_be(f, rows);
  put_u32_be(f, cols);
  std::size_t count = truncate_payload ? px.size() / 2 : px.size();
  f.write(reinterpret_cast<const char*>(px.data()), std::streamsize(count));
}

void write_labels(const fs::path& p, std::uint32_t magic,
                  const std::vector<std::uint8_t>& labels, std::uint32_t n) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  put_u32_be(f, magic);
  put_u32_be(f, n);
  f.write(reinterpret_cast<const char*>(labels.data()), std::streamsize(labels.size()));
}

}  // namespace

TEST_CASE("idx loader: exact pixel scaling on a crafted pair") {
  fs::path d = fixture_dir();
  fs::path ip = d / "imgs.idx3", lp = d / "labels.idx1";
  std::vector<std::uint8_t> px = {0, 255, 128, 64, 255, 0, 32, 16};
  write_images(ip, 0x00000803u, px, 2, 2, 2);
  write_labels(lp, 0x00000801u, {3, 7}, 2);

  Dataset ds = load_idx(ip.string(), lp.string(), /*mean=*/0.5, /*stddev=*/0.25);
  CHECK(ds.n == 2);
  CHECK(ds.dim == 4);
  REQUIRE(ds.sample_dims.size() == 2);
  CHECK(ds.sample_dims[0] == 2);
  CHECK(ds.sample_dims[1] == 2);
  CHECK(ds.num_classes == 8);  // max label + 1
  CHECK(ds.labels[0] == 3);
  CHECK(ds.labels[1] == 7);
  for (std::size_t i = 0; i < px.size(); ++i)
    CHECK(ds.images[i] ==
          doctest::Approx((px[i] / 255.0 - 0.5) / 0.25).epsilon(1e-15));
}

TEST_CASE("idx loader: each malformation has its own error code") {
  fs::path d = fixture_dir();
  fs::path ip = d / "bad_imgs.idx3", lp = d / "bad_labels.idx1";
  std::vector<std::uint8_t> px(8, 1);

  write_images(ip, 0x00000805u, px, 2, 2, 2);  // wrong magic
  write_labels(lp, 0x00000801u, {0, 1}, 2);
  try {
    load_idx(ip.string(), lp.string());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.code == IoCode::WrongMagic);
  }

  write_images(ip, 0x00000803u, px, 2, 2, 2, /*truncate_payload=*/true);
  try {
    load_idx(ip.string(), lp.string());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.code == IoCode::Truncated);
  }

  write_images(ip, 0x00000803u, px, 2, 2, 2);
  write_labels(lp, 0x00000801u, {0, 1, 1}, 3);  // 3 labels vs 2 images
  try {
    load_idx(ip.string(), lp.string());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.code == IoCode::DimMismatch);
  }

  try {
    load_idx((d / "missing.idx3").string(), lp.string());
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.code == IoCode::OpenFailed);
  }
}

TEST_CASE("mnist subset: counts, shape, label range, normalized mean") {
  const char* imgs = "data/mnist/train-images-10k.idx3-ubyte";
  const char* labs = "data/mnist/train-labels-10k.idx1-ubyte";
  REQUIRE_MESSAGE(fs::exists(imgs), "run the test suite from the repository root");
  Dataset ds = load_idx(imgs, labs, 0.1307, 0.3081);
  CHECK(ds.n == 10000);
  CHECK(ds.dim == 784);
  CHECK(ds.num_classes == 10);
  REQUIRE(ds.sample_dims.size() == 2);
  CHECK(ds.sample_dims[0] == 28);
  CHECK(ds.sample_dims[1] == 28);
  for (int y : ds.labels) {
    CHECK(y >= 0);
    CHECK(y <= 9);
  }
  // Standardizing with the dataset's own statistics centers the pixels.
  double mean = std::accumulate(ds.images.begin(), ds.images.end(), 0.0) /
                double(ds.images.size());
  CHECK(std::abs(mean) < 0.1);
}

TEST_CASE("blobs: bytes are a pure function of the arguments") {
  Dataset a = synthetic_blobs(25, 3, 4, 5.0, 77);
  Dataset b = synthetic_blobs(25, 3, 4, 5.0, 77);
  CHECK(a.n == 75);
  CHECK(a.dim == 4);
  CHECK(a.num_classes == 3);
  CHECK(a.images == b.images);
  CHECK(a.labels == b.labels);
  Dataset c = synthetic_blobs(25, 3, 4, 5.0, 78);
  CHECK(a.images != c.images);
  // Balanced classes.
  for (int k = 0; k < 3; ++k)
    CHECK(std::count(a.labels.begin(), a.labels.end(), k) == 25);
}

TEST_CASE("blobs: wide separation is linearly separable, zero separation is not") {
  Dataset easy = synthetic_blobs(100, 2, 2, 10.0, 5);
  CHECK(perceptron_separable(easy));
  Dataset hard = synthetic_blobs(200, 2, 2, 0.0, 5);
  CHECK_FALSE(perceptron_separable(hard, /*max_passes=*/60));
}

TEST_CASE("blobs: argument validation") {
  CHECK_THROWS_AS(synthetic_blobs(0, 2, 2, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(synthetic_blobs(5, 1, 2, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(synthetic_blobs(5, 2, 0, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(synthetic_blobs(5, 2, 2, -1.0, 1), ConfigError);
}

TEST_CASE("dataset spec strings: parsing and errors") {
  Dataset ds = load_dataset("blobs:n_per_class=50,classes=3,dim=4,separation=6,seed=9");
  CHECK(ds.n == 150);
  CHECK(ds.dim == 4);
  CHECK(ds.num_classes == 3);
  Dataset same = synthetic_blobs(50, 3, 4, 6.0, 9);
  CHECK(ds.images == same.images);

  CHECK_THROWS_AS(load_dataset("blobs:classes=2,dim=2,separation=1,seed=0"),
                  ConfigError);  // n_per_class missing
  CHECK_THROWS_AS(load_dataset("blobs:n_per_class=5,classes=2,dim=2,separation=1,seed=0,"
                               "extra=1"),
                  ConfigError);
  CHECK_THROWS_AS(load_dataset("csv:file=x"), ConfigError);
  CHECK_THROWS_AS(load_dataset("no-scheme-here"), ConfigError);
  CHECK_THROWS_AS(
      load_dataset("blobs:n_per_class=5,n_per_class=5,classes=2,dim=2,separation=1,"
                   "seed=0"),
      ConfigError);
}

TEST_CASE("epoch permutation: bijection, determinism, epoch dependence") {
  std::vector<std::uint32_t> p = epoch_permutation(1000, 42, 3);
  REQUIRE(p.size() == 1000);
  std::vector<std::uint32_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::uint32_t i = 0; i < 1000; ++i) CHECK(sorted[i] == i);
  CHECK(p == epoch_permutation(1000, 42, 3));
  CHECK(p != epoch_permutation(1000, 42, 4));
  CHECK(p != epoch_permutation(1000, 43, 3));
}

TEST_CASE("batch iterator: sizes, coverage, determinism") {
  Dataset ds = synthetic_blobs(5, 2, 2, 4.0, 21);  // N = 10
  BatchPlan plan;
  plan.batch_size = 3;
  plan.seed = 11;

  BatchIter it(ds, plan, 0);
  CHECK(it.num_batches() == 4);  // 3+3+3+1
  std::vector<std::size_t> sizes;
  std::vector<int> seen(ds.n, 0);
  Tensor<double> x;
  std::vector<int> y;
  while (it.next()) {
    it.fill(x, y);
    sizes.push_back(it.size());
    REQUIRE(x.shape[0] == it.size());
    REQUIRE(y.size() == it.size());
    for (std::size_t r = 0; r < it.size(); ++r) {
      // Match the row back to its source sample (rows are distinct normals).
      bool found = false;
      for (std::size_t i = 0; i < ds.n; ++i) {
        if (ds.images[i * 2] == x.ptr()[r * 2] &&
            ds.images[i * 2 + 1] == x.ptr()[r * 2 + 1]) {
          CHECK(ds.labels[i] == y[r]);
          ++seen[i];
          found = true;
          break;
        }
      }
      CHECK(found);
    }
  }
  CHECK(sizes == std::vector<std::size_t>{3, 3, 3, 1});
  for (int s : seen) CHECK(s == 1);  // every sample exactly once

  plan.drop_last = true;
  BatchIter it2(ds, plan, 0);
  CHECK(it2.num_batches() == 3);
  std::size_t total = 0;
  while (it2.next()) total += it2.size();
  CHECK(total == 9);

  // Same (seed, epoch) twice: identical batch stream, float or double target.
  plan.drop_last = false;
  BatchIter ia(ds, plan, 5), ib(ds, plan, 5);
  Tensor<float> xa, xb;
  std::vector<int> ya, yb;
  while (ia.next()) {
    REQUIRE(ib.next());
    ia.fill(xa, ya);
    ib.fill(xb, yb);
    CHECK(xa.data == xb.data);
    CHECK(ya == yb);
  }
  CHECK_FALSE(ib.next());
}
