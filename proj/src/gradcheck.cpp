#include "binquant/gradcheck.hpp"

#include <cmath>
#include <span>
#include <vector>

#include "binquant/common.hpp"
#include "binquant/net.hpp"
#include "binquant/oracles.hpp"

namespace binquant {

namespace {

struct Case {
  std::string name;
  NetworkSpec spec;
  std::vector<std::size_t> batch_shape;
};

std::vector<Case> gradcheck_cases() {
  Case dense;
  dense.name = "dense-bn";
  dense.spec.input_dims = {5};
  dense.spec.layers = {LayerSpec::dense(5, 4, false), LayerSpec::batchnorm(4),
                       LayerSpec::relu(), LayerSpec::dense(4, 3, false),
                       LayerSpec::softmax_ce()};
  dense.spec.validate();
  dense.batch_shape = {4, 5};

  Case conv;
  conv.name = "conv";
  conv.spec.input_dims = {1, 6, 6};
  conv.spec.layers = {LayerSpec::conv2d(1, 2, 3, false), LayerSpec::relu(),
                      LayerSpec::dense(2 * 4 * 4, 3, false), LayerSpec::softmax_ce()};
  conv.spec.validate();
  conv.batch_shape = {2, 1, 6, 6};

  std::vector<Case> v;
  v.push_back(std::move(dense));
  v.push_back(std::move(conv));
  return v;
}

void randomize(Network<double>& net, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < net.num_params(); ++i) {
    const std::string& name = net.param_info(i).name;
    bool is_scale = name.size() > 6 && name.compare(name.size() - 6, 6, ".scale") == 0;
    for (std::size_t j = 0; j < net.param(i).size(); ++j) {
      double v = is_scale ? 1.0 + next_uniform(rng, -0.3, 0.3)
                          : next_uniform(rng, -1.0, 1.0);
      net.param(i).ptr()[j] = v;
    }
  }
}

// Central differences get unreliable if a sample sits on a ReLU kink; the
// draw is rejected and retried with a fresh stream instead.
bool relu_inputs_clear(const Network<double>& net, const NetworkSpec& spec) {
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].kind != LayerKind::ReLU) continue;
    const Tensor<double>& pre = net.activation(i);
    for (std::size_t j = 0; j < pre.size(); ++j)
      if (std::abs(pre.ptr()[j]) <= 1e-3) return false;
  }
  return true;
}

}  // namespace

GradcheckReport run_gradcheck(int num_seeds) {
  if (num_seeds <= 0) throw ConfigError("gradcheck: need a positive seed count");
  GradcheckReport rep;
  rep.seeds = num_seeds;

  for (const Case& c : gradcheck_cases()) {
    Network<double> net(c.spec);
    const std::size_t K = c.spec.num_classes;
    const std::size_t B = c.batch_shape[0];

    for (int s = 0; s < num_seeds; ++s) {
      Tensor<double> x(c.batch_shape);
      std::vector<int> y(B);
      int attempt = 0;
      for (;;) {
        std::mt19937_64 rng =
            make_rng(mix64(0x6763686bull ^ (std::uint64_t(s) * 1000003ull +
                                            std::uint64_t(attempt) * 7919ull)));
        randomize(net, rng);
        for (std::size_t j = 0; j < x.size(); ++j) x.ptr()[j] = next_normal(rng);
        for (std::size_t b = 0; b < B; ++b) y[b] = int(rng() % K);
        net.set_training(true);
        net.forward(x, y);
        if (relu_inputs_clear(net, c.spec)) break;
        if (++attempt > 200)
          throw VerifyError("gradcheck: could not draw a kink-free sample");
      }

      net.forward(x, y);
      net.backward();
      std::vector<std::vector<double>> bp(net.num_params());
      for (std::size_t i = 0; i < net.num_params(); ++i)
        bp[i].assign(net.grad(i).ptr(), net.grad(i).ptr() + net.grad(i).size());

      for (std::size_t i = 0; i < net.num_params(); ++i) {
        std::vector<double> base(net.param(i).ptr(),
                                 net.param(i).ptr() + net.param(i).size());
        auto f = [&](std::span<const double> cand) {
          std::copy(cand.begin(), cand.end(), net.param(i).ptr());
          return net.forward(x, y);
        };
        std::vector<double> fd = fd_gradient(f, base);
        std::copy(base.begin(), base.end(), net.param(i).ptr());
        for (std::size_t j = 0; j < fd.size(); ++j) {
          double a = bp[i][j], b = fd[j];
          double rel = std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
          ++rep.elements_checked;
          if (rel > rep.max_rel) {
            rep.max_rel = rel;
            rep.worst = c.name + "/" + net.param_info(i).name + "[" +
                        std::to_string(j) + "] seed " + std::to_string(s);
          }
        }
      }
    }
  }
  rep.passed = rep.max_rel <= rep.tolerance;
  return rep;
}

}  // namespace binquant
