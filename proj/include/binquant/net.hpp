#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "binquant/common.hpp"
#include "binquant/kernels.hpp"
#include "binquant/tensor.hpp"

namespace binquant {

enum class LayerKind { Dense, Conv2d, ReLU, BatchNormLite, SoftmaxCrossEntropy };

inline const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Dense: return "Dense";
    case LayerKind::Conv2d: return "Conv2d";
    case LayerKind::ReLU: return "ReLU";
    case LayerKind::BatchNormLite: return "BatchNormLite";
    case LayerKind::SoftmaxCrossEntropy: return "SoftmaxCrossEntropy";
  }
  return "?";
}

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  std::size_t in = 0, out = 0;               // Dense
  std::size_t in_ch = 0, out_ch = 0, k = 0;  // Conv2d
  std::size_t features = 0;                  // BatchNormLite
  bool binarized = false;                    // Dense / Conv2d weight

  static LayerSpec dense(std::size_t in, std::size_t out, bool binarized) {
    LayerSpec l;
    l.kind = LayerKind::Dense;
    l.in = in;
    l.out = out;
    l.binarized = binarized;
    return l;
  }
  static LayerSpec conv2d(std::size_t in_ch, std::size_t out_ch, std::size_t k,
                          bool binarized) {
    LayerSpec l;
    l.kind = LayerKind::Conv2d;
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    l.k = k;
    l.binarized = binarized;
    return l;
  }
  static LayerSpec relu() { return LayerSpec{}; }
  static LayerSpec batchnorm(std::size_t features) {
    LayerSpec l;
    l.kind = LayerKind::BatchNormLite;
    l.features = features;
    return l;
  }
  static LayerSpec softmax_ce() {
    LayerSpec l;
    l.kind = LayerKind::SoftmaxCrossEntropy;
    return l;
  }
};

// Fixed layer list; shapes are checked once up front, per-sample.
struct NetworkSpec {
  std::vector<std::size_t> input_dims;  // without the batch dimension
  std::vector<LayerSpec> layers;
  std::size_t num_classes = 0;  // filled by validate()

  void validate() {
    if (layers.empty()) throw ConfigError("network: no layers");
    if (input_dims.empty()) throw ConfigError("network: no input dims");
    for (std::size_t d : input_dims)
      if (d == 0) throw ConfigError("network: zero input dim");
    std::vector<std::size_t> cur = input_dims;
    auto flat = [](const std::vector<std::size_t>& s) {
      std::size_t n = 1;
      for (std::size_t d : s) n *= d;
      return n;
    };
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const LayerSpec& l = layers[i];
      bool last = (i + 1 == layers.size());
      if ((l.kind == LayerKind::SoftmaxCrossEntropy) != last)
        throw ConfigError("network: softmax cross-entropy must be the single final layer");
      switch (l.kind) {
        case LayerKind::Dense:
          if (l.in == 0 || l.out == 0) throw ConfigError("network: zero dense dims");
          if (flat(cur) != l.in)
            throw ConfigError("network: dense layer " + std::to_string(i) + " expects " +
                              std::to_string(l.in) + " inputs, gets " +
                              std::to_string(flat(cur)));
          cur = {l.out};
          break;
        case LayerKind::Conv2d:
          if (cur.size() != 3 || cur[0] != l.in_ch || cur[1] < l.k || cur[2] < l.k)
            throw ConfigError("network: conv layer " + std::to_string(i) +
                              " input shape mismatch (" + shape_str(cur) + ")");
          if (l.out_ch == 0 || l.k == 0) throw ConfigError("network: zero conv dims");
          cur = {l.out_ch, cur[1] - l.k + 1, cur[2] - l.k + 1};
          break;
        case LayerKind::ReLU:
          break;
        case LayerKind::BatchNormLite:
          if (cur.size() != 1 || cur[0] != l.features)
            throw ConfigError("network: batchnorm layer " + std::to_string(i) +
                              " expects flat " + std::to_string(l.features) +
                              " features, gets " + shape_str(cur));
          break;
        case LayerKind::SoftmaxCrossEntropy:
          num_classes = flat(cur);
          if (num_classes < 2)
            throw ConfigError("network: need at least 2 classes");
          break;
      }
    }
  }
};

struct ParamInfo {
  std::string name;
  std::size_t layer;
  LayerKind layer_kind;
  bool binarized;  // true only for the weight tensor of a binarized layer
};

inline constexpr double kBnEps = 1e-5;
inline constexpr double kBnMomentum = 0.1;  // running <- 0.9*running + 0.1*batch

// Reverse-mode engine over the fixed layer list.  Parameters of binarized
// layers hold *effective* weights supplied from outside; backward produces
// gradients at exactly those values (the chain stops there, no inner
// derivative is applied).
template <typename T>
class Network {
 public:
  explicit Network(NetworkSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    const auto& ls = spec_.layers;
    for (std::size_t i = 0; i < ls.size(); ++i) {
      const LayerSpec& l = ls[i];
      std::string base = "layer" + std::to_string(i);
      switch (l.kind) {
        case LayerKind::Dense:
          add_param(base + ".weight", {l.in, l.out}, i, l.kind, l.binarized);
          add_param(base + ".bias", {l.out}, i, l.kind, false);
          break;
        case LayerKind::Conv2d:
          add_param(base + ".weight", {l.out_ch, l.in_ch, l.k, l.k}, i, l.kind,
                    l.binarized);
          add_param(base + ".bias", {l.out_ch}, i, l.kind, false);
          break;
        case LayerKind::BatchNormLite: {
          add_param(base + ".scale", {l.features}, i, l.kind, false);
          add_param(base + ".shift", {l.features}, i, l.kind, false);
          params_[params_.size() - 2].fill(T(1));  // scale starts at identity
          buffer_names_.push_back(base + ".running_mean");
          buffers_.emplace_back(std::vector<std::size_t>{l.features});
          buffer_names_.push_back(base + ".running_var");
          buffers_.emplace_back(std::vector<std::size_t>{l.features});
          buffers_.back().fill(T(1));
          bn_cache_index_.resize(ls.size(), SIZE_MAX);
          bn_cache_index_[i] = bn_mean_.size();
          bn_buffer_index_.resize(ls.size(), SIZE_MAX);
          bn_buffer_index_[i] = buffers_.size() - 2;
          bn_mean_.emplace_back(l.features, 0.0);
          bn_var_.emplace_back(l.features, 0.0);
          bn_xhat_.emplace_back();
          break;
        }
        default:
          break;
      }
    }
    acts_.resize(ls.size() + 1);
    dacts_.resize(ls.size());
  }

  const NetworkSpec& spec() const { return spec_; }
  bool training() const { return training_; }
  void set_training(bool t) { training_ = t; }

  std::size_t num_params() const { return params_.size(); }
  Tensor<T>& param(std::size_t i) { return params_[i]; }
  const Tensor<T>& param(std::size_t i) const { return params_[i]; }
  Tensor<T>& grad(std::size_t i) { return grads_[i]; }
  const Tensor<T>& grad(std::size_t i) const { return grads_[i]; }
  const ParamInfo& param_info(std::size_t i) const { return infos_[i]; }

  std::size_t num_buffers() const { return buffers_.size(); }
  Tensor<T>& buffer(std::size_t i) { return buffers_[i]; }
  const Tensor<T>& buffer(std::size_t i) const { return buffers_[i]; }
  const std::string& buffer_name(std::size_t i) const { return buffer_names_[i]; }

  // Input of layer i as seen by the last forward() (index 0 = the batch).
  const Tensor<T>& activation(std::size_t i) const { return acts_[i]; }

  // Mean cross-entropy over the batch; keeps activations for backward.
  double forward(const Tensor<T>& batch, std::span<const int> labels) {
    const std::size_t L = spec_.layers.size();
    prepare_batch(batch, labels.size());
    labels_.assign(labels.begin(), labels.end());
    for (int y : labels)
      if (y < 0 || std::size_t(y) >= spec_.num_classes)
        throw std::invalid_argument("forward: label out of range");

    acts_[0] = batch;  // row-major copy; shape kept as given
    double loss = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      loss = run_layer_forward(i);
      check_act_finite(i);
    }
    if (!std::isfinite(loss))
      throw NumericError("forward: non-finite loss");
    return loss;
  }

  // Gradients of the batch-mean loss for every parameter tensor.
  void backward() {
    const std::size_t L = spec_.layers.size();
    if (L < 2) return;  // a lone loss layer has no parameters
    const std::size_t B = batch_;
    const std::size_t K = spec_.num_classes;
    // d(loss)/d(logits) = (softmax - onehot)/B; logits are layer L-2's output
    Tensor<T>& dlogits = dacts_[L - 2];
    dlogits.resize({B, K});
    const Tensor<T>& probs = acts_[L];
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t k = 0; k < K; ++k) {
        double p = double(probs.ptr()[b * K + k]);
        double y = (std::size_t(labels_[b]) == k) ? 1.0 : 0.0;
        dlogits.ptr()[b * K + k] = T((p - y) / double(B));
      }
    for (std::size_t i = L - 1; i-- > 0;) run_layer_backward(i, /*need_dx=*/i > 0);
  }

  // Class predictions in eval mode (running statistics, no caching).
  void predict(const Tensor<T>& batch, std::vector<int>& out) {
    bool saved = training_;
    training_ = false;
    std::vector<int> dummy(batch.shape[0], 0);
    forward(batch, dummy);
    training_ = saved;
    const std::size_t L = spec_.layers.size();
    const Tensor<T>& logits = acts_[L - 1];
    const std::size_t K = spec_.num_classes;
    out.resize(batch_);
    for (std::size_t b = 0; b < batch_; ++b) {
      const T* row = logits.ptr() + b * K;
      std::size_t best = 0;
      for (std::size_t k = 1; k < K; ++k)
        if (row[k] > row[best]) best = k;
      out[b] = int(best);
    }
  }

 private:
  void add_param(std::string name, std::vector<std::size_t> shape, std::size_t layer,
                 LayerKind kind, bool binarized) {
    params_.emplace_back(shape);
    grads_.emplace_back(shape);
    infos_.push_back({std::move(name), layer, kind, binarized});
  }

  void prepare_batch(const Tensor<T>& batch, std::size_t nlabels) {
    if (batch.shape.empty() || batch.shape[0] == 0)
      throw std::invalid_argument("forward: empty batch");
    batch_ = batch.shape[0];
    if (nlabels != batch_)
      throw std::invalid_argument("forward: batch/label count mismatch");
    std::size_t per = 1;
    for (std::size_t i = 1; i < batch.shape.size(); ++i) per *= batch.shape[i];
    std::size_t want = Tensor<T>::count(spec_.input_dims);
    if (per != want)
      throw std::invalid_argument("forward: batch features " + std::to_string(per) +
                                  " != network input " + std::to_string(want));
  }

  std::size_t param_base(std::size_t layer) const {
    for (std::size_t i = 0; i < infos_.size(); ++i)
      if (infos_[i].layer == layer) return i;
    throw std::logic_error("no params for layer");
  }

  void check_act_finite(std::size_t layer) {
    const Tensor<T>& a = acts_[layer + 1];
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!std::isfinite(double(a.ptr()[i])))
        throw NumericError("non-finite activation after layer " + std::to_string(layer) +
                           " (" + layer_kind_name(spec_.layers[layer].kind) + ")");
  }

  double run_layer_forward(std::size_t i) {
    const LayerSpec& l = spec_.layers[i];
    const Tensor<T>& x = acts_[i];
    Tensor<T>& y = acts_[i + 1];
    const std::size_t B = batch_;
    switch (l.kind) {
      case LayerKind::Dense: {
        y.resize({B, l.out});
        const Tensor<T>& wt = params_[param_base(i)];
        const Tensor<T>& bias = params_[param_base(i) + 1];
        kernels::dense_forward(x.ptr(), wt.ptr(), bias.ptr(), y.ptr(), B, l.in, l.out);
        return 0.0;
      }
      case LayerKind::Conv2d: {
        if (x.shape.size() != 4)
          throw std::invalid_argument("forward: conv input must be rank-4 [B,C,H,W]");
        std::size_t H = x.shape[2], W = x.shape[3];
        y.resize({B, l.out_ch, H - l.k + 1, W - l.k + 1});
        const Tensor<T>& w = params_[param_base(i)];
        const Tensor<T>& bias = params_[param_base(i) + 1];
        kernels::conv2d_forward(x.ptr(), w.ptr(), bias.ptr(), y.ptr(), B, l.in_ch, H, W,
                                l.out_ch, l.k);
        return 0.0;
      }
      case LayerKind::ReLU: {
        y.resize(x.shape);
        kernels::relu_forward(x.ptr(), y.ptr(), x.size());
        return 0.0;
      }
      case LayerKind::BatchNormLite:
        bn_forward(i);
        return 0.0;
      case LayerKind::SoftmaxCrossEntropy:
        return sce_forward(i);
    }
    return 0.0;
  }

  void bn_forward(std::size_t i) {
    const LayerSpec& l = spec_.layers[i];
    const std::size_t B = batch_, F = l.features;
    const Tensor<T>& x = acts_[i];
    Tensor<T>& y = acts_[i + 1];
    y.resize({B, F});
    const T* scale = params_[param_base(i)].ptr();
    const T* shift = params_[param_base(i) + 1].ptr();
    std::size_t ci = bn_cache_index_[i];
    std::size_t bi = bn_buffer_index_[i];
    auto& mean = bn_mean_[ci];
    auto& var = bn_var_[ci];
    Tensor<T>& xhat = bn_xhat_[ci];
    xhat.resize({B, F});
    T* rmean = buffers_[bi].ptr();
    T* rvar = buffers_[bi + 1].ptr();
    const bool train = training_;
#pragma omp parallel for
    for (std::size_t f = 0; f < F; ++f) {
      double m, v;
      if (train) {
        double s = 0.0;
        for (std::size_t b = 0; b < B; ++b) s += double(x.ptr()[b * F + f]);
        m = s / double(B);
        double q = 0.0;
        for (std::size_t b = 0; b < B; ++b) {
          double d = double(x.ptr()[b * F + f]) - m;
          q += d * d;
        }
        v = q / double(B);  // biased batch variance
        rmean[f] = T((1.0 - kBnMomentum) * double(rmean[f]) + kBnMomentum * m);
        rvar[f] = T((1.0 - kBnMomentum) * double(rvar[f]) + kBnMomentum * v);
      } else {
        m = double(rmean[f]);
        v = double(rvar[f]);
      }
      mean[f] = m;
      var[f] = v;
      double inv = 1.0 / std::sqrt(v + kBnEps);
      for (std::size_t b = 0; b < B; ++b) {
        double xh = (double(x.ptr()[b * F + f]) - m) * inv;
        xhat.ptr()[b * F + f] = T(xh);
        y.ptr()[b * F + f] = T(double(scale[f]) * xh + double(shift[f]));
      }
    }
  }

  double sce_forward(std::size_t i) {
    const std::size_t B = batch_, K = spec_.num_classes;
    const Tensor<T>& logits = acts_[i];
    Tensor<T>& probs = acts_[i + 1];
    probs.resize({B, K});
    row_loss_.resize(B);
#pragma omp parallel for
    for (std::size_t b = 0; b < B; ++b) {
      const T* row = logits.ptr() + b * K;
      double m = double(row[0]);
      for (std::size_t k = 1; k < K; ++k) m = std::max(m, double(row[k]));
      double sum = 0.0;
      for (std::size_t k = 0; k < K; ++k) sum += std::exp(double(row[k]) - m);
      double lse = std::log(sum);
      for (std::size_t k = 0; k < K; ++k)
        probs.ptr()[b * K + k] = T(std::exp(double(row[k]) - m - lse));
      row_loss_[b] = lse - (double(row[labels_[b]]) - m);
    }
    double total = 0.0;
    for (std::size_t b = 0; b < B; ++b) total += row_loss_[b];  // fixed order
    return total / double(B);
  }

  void run_layer_backward(std::size_t i, bool need_dx) {
    const LayerSpec& l = spec_.layers[i];
    const Tensor<T>& x = acts_[i];
    const Tensor<T>& dy = dacts_[i];
    const std::size_t B = batch_;
    Tensor<T>* dx = need_dx ? &dacts_[i - 1] : nullptr;
    switch (l.kind) {
      case LayerKind::Dense: {
        std::size_t pb = param_base(i);
        kernels::dense_backward_dw(x.ptr(), dy.ptr(), grads_[pb].ptr(), B, l.in, l.out);
        kernels::dense_backward_db(dy.ptr(), grads_[pb + 1].ptr(), B, l.out);
        if (dx) {
          dx->resize(x.shape);
          kernels::dense_backward_dx(dy.ptr(), params_[pb].ptr(), dx->ptr(), B, l.in,
                                     l.out);
        }
        break;
      }
      case LayerKind::Conv2d: {
        std::size_t pb = param_base(i);
        std::size_t H = x.shape[2], W = x.shape[3];
        std::size_t OH = H - l.k + 1, OW = W - l.k + 1;
        kernels::conv2d_backward_dw(x.ptr(), dy.ptr(), grads_[pb].ptr(), B, l.in_ch, H, W,
                                    l.out_ch, l.k);
        kernels::conv2d_backward_db(dy.ptr(), grads_[pb + 1].ptr(), B, l.out_ch, OH, OW);
        if (dx) {
          dx->resize(x.shape);
          kernels::conv2d_backward_dx(dy.ptr(), params_[pb].ptr(), dx->ptr(), B, l.in_ch,
                                      H, W, l.out_ch, l.k);
        }
        break;
      }
      case LayerKind::ReLU:
        if (dx) {
          dx->resize(x.shape);
          kernels::relu_backward(x.ptr(), dy.ptr(), dx->ptr(), x.size());
        }
        break;
      case LayerKind::BatchNormLite:
        bn_backward(i, need_dx);
        break;
      case LayerKind::SoftmaxCrossEntropy:
        break;  // handled in backward() directly
    }
  }

  void bn_backward(std::size_t i, bool need_dx) {
    const LayerSpec& l = spec_.layers[i];
    const std::size_t B = batch_, F = l.features;
    const Tensor<T>& x = acts_[i];
    const Tensor<T>& dy = dacts_[i];
    Tensor<T>* dx = need_dx ? &dacts_[i - 1] : nullptr;
    if (dx) dx->resize(x.shape);
    std::size_t pb = param_base(i);
    const T* scale = params_[pb].ptr();
    T* dscale = grads_[pb].ptr();
    T* dshift = grads_[pb + 1].ptr();
    std::size_t ci = bn_cache_index_[i];
    const auto& mean = bn_mean_[ci];
    const auto& var = bn_var_[ci];
    const Tensor<T>& xhat = bn_xhat_[ci];
#pragma omp parallel for
    for (std::size_t f = 0; f < F; ++f) {
      double inv = 1.0 / std::sqrt(var[f] + kBnEps);
      double dsc = 0.0, dsh = 0.0, dvar = 0.0, dxh_sum = 0.0, xc_sum = 0.0;
      for (std::size_t b = 0; b < B; ++b) {
        double g = double(dy.ptr()[b * F + f]);
        double xh = double(xhat.ptr()[b * F + f]);
        double xc = double(x.ptr()[b * F + f]) - mean[f];
        dsc += g * xh;
        dsh += g;
        double dxh = g * double(scale[f]);
        dvar += dxh * xc;
        dxh_sum += dxh;
        xc_sum += xc;
      }
      dscale[f] = T(dsc);
      dshift[f] = T(dsh);
      if (dx) {
        dvar *= -0.5 * inv * inv * inv;
        double dmean = -dxh_sum * inv + dvar * (-2.0 / double(B)) * xc_sum;
        for (std::size_t b = 0; b < B; ++b) {
          double g = double(dy.ptr()[b * F + f]);
          double xc = double(x.ptr()[b * F + f]) - mean[f];
          double val = g * double(scale[f]) * inv + dvar * 2.0 * xc / double(B) +
                       dmean / double(B);
          dx->ptr()[b * F + f] = T(val);
        }
      }
    }
  }

  NetworkSpec spec_;
  std::vector<Tensor<T>> params_, grads_;
  std::vector<ParamInfo> infos_;
  std::vector<Tensor<T>> buffers_;
  std::vector<std::string> buffer_names_;
  std::vector<std::size_t> bn_cache_index_, bn_buffer_index_;
  std::vector<std::vector<double>> bn_mean_, bn_var_;
  std::vector<Tensor<T>> bn_xhat_;
  std::vector<Tensor<T>> acts_, dacts_;
  std::vector<double> row_loss_;
  std::vector<int> labels_;
  std::size_t batch_ = 0;
  bool training_ = true;
};

// Heavy-ball update for real-valued parameters:
// buf <- momentum*buf + grad; param <- param - lr*buf.
template <typename T>
void sgd_momentum_update(std::span<T> param, std::span<const T> grad, std::span<T> buf,
                         double lr, double momentum) {
  if (!(lr > 0.0)) throw ConfigError("sgd_momentum_update: lr must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw ConfigError("sgd_momentum_update: momentum must lie in [0,1)");
  if (param.size() != grad.size() || buf.size() != param.size())
    throw std::invalid_argument("sgd_momentum_update: shape mismatch");
  for (std::size_t j = 0; j < param.size(); ++j) {
    buf[j] = T(momentum * double(buf[j]) + double(grad[j]));
    param[j] = T(double(param[j]) - lr * double(buf[j]));
  }
}

// Shared presets.  binarize_all extends binarization to the final classifier;
// the default binarizes every Dense/Conv weight except that last layer.
inline NetworkSpec make_network_spec(const std::string& preset, bool binarize_all) {
  NetworkSpec s;
  if (preset == "mlp-784-128-10") {
    s.input_dims = {784};
    s.layers = {LayerSpec::dense(784, 128, true), LayerSpec::batchnorm(128),
                LayerSpec::relu(), LayerSpec::dense(128, 10, binarize_all),
                LayerSpec::softmax_ce()};
  } else if (preset == "blobs-mlp") {
    s.input_dims = {2};
    s.layers = {LayerSpec::dense(2, 16, true), LayerSpec::relu(),
                LayerSpec::dense(16, 2, binarize_all), LayerSpec::softmax_ce()};
  } else {
    throw ConfigError("unknown network preset '" + preset + "'");
  }
  s.validate();
  return s;
}

}  // namespace binquant
