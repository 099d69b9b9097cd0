#include <doctest.h>

#include <cmath>
#include <vector>

#include "binquant/common.hpp"
#include "binquant/gradcheck.hpp"
#include "binquant/net.hpp"

using namespace binquant;

namespace {

NetworkSpec tiny_dense_spec() {
  NetworkSpec s;
  s.input_dims = {2};
  s.layers = {LayerSpec::dense(2, 2, false), LayerSpec::softmax_ce()};
  return s;
}

}  // namespace

TEST_CASE("dense + softmax cross-entropy: pinned closed-form loss") {
  Network<double> net(tiny_dense_spec());
  // Identity weights (stored [in, out]), zero bias: logits = input.
  net.param(0).ptr()[0] = 1.0;
  net.param(0).ptr()[3] = 1.0;
  Tensor<double> x({1, 2});
  x.ptr()[0] = 3.0;
  x.ptr()[1] = -1.0;
  std::vector<int> y = {0};
  double loss = net.forward(x, y);
  CHECK(loss == doctest::Approx(std::log(1.0 + std::exp(-4.0))).epsilon(1e-12));

  // Output probabilities live in the last activation slot and sum to one.
  const Tensor<double>& probs = net.activation(2);
  CHECK(probs.ptr()[0] + probs.ptr()[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(probs.ptr()[0] == doctest::Approx(1.0 / (1.0 + std::exp(-4.0))).epsilon(1e-12));

  // d(loss)/d(logits) = softmax - onehot; with one sample the bias gradient is it.
  net.backward();
  double s0 = 1.0 / (1.0 + std::exp(-4.0));
  CHECK(net.grad(1).ptr()[0] == doctest::Approx(s0 - 1.0).epsilon(1e-9));
  CHECK(net.grad(1).ptr()[1] == doctest::Approx(1.0 - s0).epsilon(1e-9));
  // dW = x^T dlogits.
  CHECK(net.grad(0).ptr()[0] == doctest::Approx(3.0 * (s0 - 1.0)).epsilon(1e-9));
  CHECK(net.grad(0).ptr()[2] == doctest::Approx(-1.0 * (s0 - 1.0)).epsilon(1e-9));
}

TEST_CASE("zero weights give the uniform-prediction loss log(C)") {
  Network<double> net(tiny_dense_spec());
  Tensor<double> x({3, 2});
  for (std::size_t i = 0; i < 6; ++i) x.ptr()[i] = double(i) - 2.0;
  std::vector<int> y = {0, 1, 0};
  CHECK(net.forward(x, y) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("zero input: weight gradient vanishes, bias gradient survives") {
  Network<double> net(tiny_dense_spec());
  net.param(1).ptr()[0] = 0.3;  // bias tilts the logits
  Tensor<double> x({2, 2});     // all zeros
  std::vector<int> y = {0, 1};
  net.forward(x, y);
  net.backward();
  for (std::size_t i = 0; i < 4; ++i) CHECK(net.grad(0).ptr()[i] == 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < 2; ++i) sum += std::abs(net.grad(1).ptr()[i]);
  CHECK(sum > 0.0);
}

TEST_CASE("loss is non-negative and labels are validated") {
  Network<double> net(tiny_dense_spec());
  auto rng = make_rng(501);
  Tensor<double> x({4, 2});
  for (std::size_t i = 0; i < x.size(); ++i) x.ptr()[i] = next_normal(rng);
  for (std::size_t i = 0; i < 4; ++i) net.param(0).ptr()[i] = next_normal(rng);
  std::vector<int> y = {0, 1, 1, 0};
  CHECK(net.forward(x, y) >= 0.0);
  y[2] = 2;
  CHECK_THROWS_AS(net.forward(x, y), std::invalid_argument);
  y[2] = -1;
  CHECK_THROWS_AS(net.forward(x, y), std::invalid_argument);
  std::vector<int> tooshort = {0, 1};
  CHECK_THROWS_AS(net.forward(x, tooshort), std::invalid_argument);
}

TEST_CASE("batchnorm: constant features map to the shift parameter exactly") {
  NetworkSpec s;
  s.input_dims = {2};
  s.layers = {LayerSpec::batchnorm(2), LayerSpec::softmax_ce()};
  Network<double> net(s);
  net.param(1).ptr()[0] = 0.25;  // shift
  net.param(1).ptr()[1] = -0.5;
  Tensor<double> x({3, 2});
  for (std::size_t b = 0; b < 3; ++b) {
    x.ptr()[b * 2 + 0] = 7.0;  // constant per feature -> xhat = 0
    x.ptr()[b * 2 + 1] = -3.0;
  }
  std::vector<int> y = {0, 0, 1};
  net.forward(x, y);
  const Tensor<double>& bn = net.activation(1);
  for (std::size_t b = 0; b < 3; ++b) {
    CHECK(bn.ptr()[b * 2 + 0] == 0.25);
    CHECK(bn.ptr()[b * 2 + 1] == -0.5);
  }
  // Running stats moved toward the batch statistics by one momentum step.
  CHECK(net.buffer(0).ptr()[0] == doctest::Approx(kBnMomentum * 7.0).epsilon(1e-12));
  CHECK(net.buffer(1).ptr()[0] ==
        doctest::Approx((1.0 - kBnMomentum) * 1.0).epsilon(1e-12));
}

TEST_CASE("batchnorm: a (-1, +1) feature normalizes to +-1 up to epsilon") {
  NetworkSpec s;
  s.input_dims = {2};
  s.layers = {LayerSpec::batchnorm(2), LayerSpec::softmax_ce()};
  Network<double> net(s);
  Tensor<double> x({2, 2});
  x.ptr()[0] = -1.0;
  x.ptr()[1] = 1.0;
  x.ptr()[2] = 1.0;
  x.ptr()[3] = -1.0;
  std::vector<int> y = {0, 1};
  net.forward(x, y);
  const Tensor<double>& bn = net.activation(1);
  CHECK(std::abs(bn.ptr()[0] + 1.0) < 1e-5);
  CHECK(std::abs(bn.ptr()[2] - 1.0) < 1e-5);
}

TEST_CASE("batchnorm: eval mode uses running statistics, not the batch") {
  NetworkSpec s;
  s.input_dims = {1};
  s.layers = {LayerSpec::batchnorm(1), LayerSpec::dense(1, 2, false),
              LayerSpec::softmax_ce()};
  Network<double> net(s);
  net.set_training(false);
  Tensor<double> x({2, 1});
  x.ptr()[0] = 5.0;
  x.ptr()[1] = 9.0;
  std::vector<int> y = {0, 0};
  net.forward(x, y);
  // Fresh running stats: mean 0, var 1 -> xhat ~ x itself (not whitened).
  const Tensor<double>& bn = net.activation(1);
  CHECK(bn.ptr()[0] == doctest::Approx(5.0).epsilon(1e-4));
  CHECK(bn.ptr()[1] == doctest::Approx(9.0).epsilon(1e-4));
  // And eval mode must not move the running buffers.
  CHECK(net.buffer(0).ptr()[0] == 0.0);
  CHECK(net.buffer(1).ptr()[0] == 1.0);
}

TEST_CASE("predict returns the argmax class") {
  Network<double> net(tiny_dense_spec());
  net.param(0).ptr()[0] = 1.0;
  net.param(0).ptr()[3] = 1.0;
  Tensor<double> x({2, 2});
  x.ptr()[0] = 2.0;
  x.ptr()[1] = -1.0;
  x.ptr()[2] = -3.0;
  x.ptr()[3] = 4.0;
  std::vector<int> out;
  net.predict(x, out);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == 0);
  CHECK(out[1] == 1);
}

TEST_CASE("sgd momentum update: pinned two-step recursion") {
  std::vector<double> p = {1.0}, g = {0.5}, buf = {0.0};
  sgd_momentum_update<double>(p, g, buf, 0.1, 0.9);
  CHECK(p[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(buf[0] == doctest::Approx(0.5).epsilon(1e-15));
  sgd_momentum_update<double>(p, g, buf, 0.1, 0.9);
  CHECK(buf[0] == doctest::Approx(0.95).epsilon(1e-15));
  CHECK(p[0] == doctest::Approx(0.855).epsilon(1e-15));
  CHECK_THROWS_AS(sgd_momentum_update<double>(p, g, buf, 0.0, 0.9), ConfigError);
  CHECK_THROWS_AS(sgd_momentum_update<double>(p, g, buf, 0.1, 1.0), ConfigError);
  std::vector<double> shortbuf;
  CHECK_THROWS_AS(sgd_momentum_update<double>(p, g, shortbuf, 0.1, 0.9),
                  std::invalid_argument);
}

TEST_CASE("network spec validation rejects malformed layer lists") {
  NetworkSpec s;
  s.input_dims = {2};
  s.layers = {LayerSpec::dense(2, 2, false)};  // no loss layer
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s.layers = {LayerSpec::softmax_ce(), LayerSpec::dense(2, 2, false)};  // loss not last
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s.layers = {LayerSpec::dense(3, 2, false), LayerSpec::softmax_ce()};  // 2 != 3 inputs
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s.layers = {LayerSpec::dense(2, 4, false), LayerSpec::batchnorm(3),
              LayerSpec::softmax_ce()};  // batchnorm feature mismatch
  CHECK_THROWS_AS(s.validate(), ConfigError);

  s.input_dims = {2};
  s.layers = {LayerSpec::conv2d(1, 2, 3, false), LayerSpec::softmax_ce()};
  CHECK_THROWS_AS(s.validate(), ConfigError);  // conv needs rank-3 input

  s.input_dims = {1, 4, 4};
  s.layers = {LayerSpec::conv2d(1, 2, 3, false), LayerSpec::dense(8, 2, false),
              LayerSpec::softmax_ce()};
  CHECK_NOTHROW(s.validate());
  CHECK(s.num_classes == 2);
}

TEST_CASE("network presets: structure and binarization flags") {
  NetworkSpec s = make_network_spec("mlp-784-128-10", false);
  CHECK(s.num_classes == 10);
  REQUIRE(s.layers.size() == 5);
  CHECK(s.layers[0].binarized);
  CHECK_FALSE(s.layers[3].binarized);
  s = make_network_spec("mlp-784-128-10", true);
  CHECK(s.layers[3].binarized);
  s = make_network_spec("blobs-mlp", false);
  CHECK(s.num_classes == 2);
  CHECK_THROWS_AS(make_network_spec("no-such-net", false), ConfigError);
}

TEST_CASE("parameter metadata marks binarized weights, never biases") {
  Network<double> net(make_network_spec("mlp-784-128-10", false));
  std::size_t nbin = 0;
  for (std::size_t i = 0; i < net.num_params(); ++i) {
    const ParamInfo& info = net.param_info(i);
    if (info.binarized) {
      ++nbin;
      CHECK(info.name.find(".weight") != std::string::npos);
    }
    if (info.name.find(".bias") != std::string::npos) CHECK_FALSE(info.binarized);
  }
  CHECK(nbin == 1);
}

TEST_CASE("float and double networks agree to single precision") {
  NetworkSpec s;
  s.input_dims = {3};
  s.layers = {LayerSpec::dense(3, 4, false), LayerSpec::relu(),
              LayerSpec::dense(4, 2, false), LayerSpec::softmax_ce()};
  Network<double> nd(s);
  Network<float> nf(s);
  auto rng = make_rng(503);
  for (std::size_t i = 0; i < nd.num_params(); ++i)
    for (std::size_t j = 0; j < nd.param(i).size(); ++j) {
      double v = next_normal(rng) * 0.5;
      nd.param(i).ptr()[j] = v;
      nf.param(i).ptr()[j] = float(v);
    }
  Tensor<double> xd({5, 3});
  Tensor<float> xf({5, 3});
  for (std::size_t i = 0; i < xd.size(); ++i) {
    double v = next_normal(rng);
    xd.ptr()[i] = v;
    xf.ptr()[i] = float(v);
  }
  std::vector<int> y = {0, 1, 0, 1, 1};
  CHECK(nd.forward(xd, y) == doctest::Approx(nf.forward(xf, y)).epsilon(1e-5));
}

TEST_CASE("backward matches central differences on a quick mixed network") {
  GradcheckReport rep = run_gradcheck(3);
  CHECK(rep.passed);
  CHECK(rep.max_rel <= rep.tolerance);
  CHECK(rep.elements_checked > 0);
}
