#include <doctest.h>

#include <vector>

#include "binquant/common.hpp"
#include "binquant/kernels.hpp"

using namespace binquant;

namespace {

template <typename T>
std::vector<T> randv(std::mt19937_64& rng, std::size_t n) {
  std::vector<T> v(n);
  for (T& x : v) x = T(next_normal(rng));
  return v;
}

// The parallel kernels keep every reduction in a fixed serial order, so the
// comparison below is ==, not approximate.
template <typename T>
void check_dense(std::mt19937_64& rng, std::size_t B, std::size_t I, std::size_t O) {
  auto x = randv<T>(rng, B * I);
  auto wt = randv<T>(rng, I * O);
  auto bias = randv<T>(rng, O);
  auto dy = randv<T>(rng, B * O);

  std::vector<T> y1(B * O), y2(B * O);
  kernels::ref::dense_forward(x.data(), wt.data(), bias.data(), y1.data(), B, I, O);
  kernels::dense_forward(x.data(), wt.data(), bias.data(), y2.data(), B, I, O);
  CHECK(y1 == y2);

  std::vector<T> dw1(I * O), dw2(I * O);
  kernels::ref::dense_backward_dw(x.data(), dy.data(), dw1.data(), B, I, O);
  kernels::dense_backward_dw(x.data(), dy.data(), dw2.data(), B, I, O);
  CHECK(dw1 == dw2);

  std::vector<T> dx1(B * I), dx2(B * I);
  kernels::ref::dense_backward_dx(dy.data(), wt.data(), dx1.data(), B, I, O);
  kernels::dense_backward_dx(dy.data(), wt.data(), dx2.data(), B, I, O);
  CHECK(dx1 == dx2);

  std::vector<T> db1(O), db2(O);
  kernels::ref::dense_backward_db(dy.data(), db1.data(), B, O);
  kernels::dense_backward_db(dy.data(), db2.data(), B, O);
  CHECK(db1 == db2);
}

template <typename T>
void check_conv(std::mt19937_64& rng, std::size_t B, std::size_t C, std::size_t H,
                std::size_t W, std::size_t OC, std::size_t K) {
  const std::size_t OH = H - K + 1, OW = W - K + 1;
  auto x = randv<T>(rng, B * C * H * W);
  auto w = randv<T>(rng, OC * C * K * K);
  auto bias = randv<T>(rng, OC);
  auto dy = randv<T>(rng, B * OC * OH * OW);

  std::vector<T> y1(B * OC * OH * OW), y2(y1.size());
  kernels::ref::conv2d_forward(x.data(), w.data(), bias.data(), y1.data(), B, C, H, W, OC,
                               K);
  kernels::conv2d_forward(x.data(), w.data(), bias.data(), y2.data(), B, C, H, W, OC, K);
  CHECK(y1 == y2);

  std::vector<T> dw1(w.size()), dw2(w.size());
  kernels::ref::conv2d_backward_dw(x.data(), dy.data(), dw1.data(), B, C, H, W, OC, K);
  kernels::conv2d_backward_dw(x.data(), dy.data(), dw2.data(), B, C, H, W, OC, K);
  CHECK(dw1 == dw2);

  std::vector<T> dx1(x.size()), dx2(x.size());
  kernels::ref::conv2d_backward_dx(dy.data(), w.data(), dx1.data(), B, C, H, W, OC, K);
  kernels::conv2d_backward_dx(dy.data(), w.data(), dx2.data(), B, C, H, W, OC, K);
  CHECK(dx1 == dx2);

  std::vector<T> db1(OC), db2(OC);
  kernels::ref::conv2d_backward_db(dy.data(), db1.data(), B, OC, OH, OW);
  kernels::conv2d_backward_db(dy.data(), db2.data(), B, OC, OH, OW);
  CHECK(db1 == db2);
}

}  // namespace

TEST_CASE("dense kernels: parallel output is bit-identical to the serial reference") {
  auto rng = make_rng(401);
  check_dense<double>(rng, 1, 1, 1);
  check_dense<double>(rng, 7, 13, 5);
  check_dense<double>(rng, 32, 100, 17);
  check_dense<float>(rng, 9, 21, 33);
  check_dense<float>(rng, 128, 64, 10);
}

TEST_CASE("relu kernels: parallel output is bit-identical to the serial reference") {
  auto rng = make_rng(403);
  auto x = randv<double>(rng, 1000);
  auto dy = randv<double>(rng, 1000);
  std::vector<double> y1(1000), y2(1000), dx1(1000), dx2(1000);
  kernels::ref::relu_forward(x.data(), y1.data(), x.size());
  kernels::relu_forward(x.data(), y2.data(), x.size());
  CHECK(y1 == y2);
  for (std::size_t i = 0; i < x.size(); ++i)
    CHECK(y1[i] == (x[i] > 0.0 ? x[i] : 0.0));
  kernels::ref::relu_backward(x.data(), dy.data(), dx1.data(), x.size());
  kernels::relu_backward(x.data(), dy.data(), dx2.data(), x.size());
  CHECK(dx1 == dx2);
}

TEST_CASE("conv kernels: parallel output is bit-identical to the serial reference") {
  auto rng = make_rng(405);
  check_conv<double>(rng, 1, 1, 3, 3, 1, 3);  // single valid output position
  check_conv<double>(rng, 2, 3, 8, 7, 4, 3);
  check_conv<float>(rng, 3, 2, 10, 10, 5, 5);
}

TEST_CASE("dense forward: tiny case against hand arithmetic") {
  // x = [1 2], wt rows (per input) = [[1 3],[2 4]] i.e. w[in,out], bias = [10, 20].
  std::vector<double> x = {1.0, 2.0};
  std::vector<double> wt = {1.0, 3.0, 2.0, 4.0};
  std::vector<double> bias = {10.0, 20.0};
  std::vector<double> y(2);
  kernels::dense_forward(x.data(), wt.data(), bias.data(), y.data(), 1, 2, 2);
  CHECK(y[0] == 15.0);  // 10 + 1*1 + 2*2
  CHECK(y[1] == 31.0);  // 20 + 1*3 + 2*4
}

TEST_CASE("conv forward: tiny case against hand arithmetic") {
  // 1x1x2x2 input, 1x1x2x2 kernel, bias 0.5: one dot product.
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> w = {10.0, 20.0, 30.0, 40.0};
  std::vector<double> bias = {0.5};
  std::vector<double> y(1);
  kernels::conv2d_forward(x.data(), w.data(), bias.data(), y.data(), 1, 1, 2, 2, 1, 2);
  CHECK(y[0] == doctest::Approx(300.5).epsilon(1e-15));  // 10+40+90+160+0.5
}
