#include "binquant/train.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "binquant/adaste.hpp"
#include "binquant/baselines.hpp"
#include "binquant/common.hpp"
#include "binquant/data.hpp"
#include "binquant/net.hpp"

namespace binquant {

namespace {

enum class Opt { AdaSte, Bc, ProxQuant, MdSoftmax, MdTanh };

Opt opt_from_string(const std::string& s) {
  if (s == "adaste") return Opt::AdaSte;
  if (s == "bc") return Opt::Bc;
  if (s == "proxquant") return Opt::ProxQuant;
  if (s == "md-softmax") return Opt::MdSoftmax;
  if (s == "md-tanh") return Opt::MdTanh;
  throw ConfigError("unknown optimizer '" + s + "'");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

template <typename T>
class TrainerImpl final : public ITrainer {
 public:
  explicit TrainerImpl(RunConfig cfg)
      : cfg_(std::move(cfg)),
        opt_(opt_from_string(cfg_.optimizer)),
        train_(load_dataset(cfg_.train_data)),
        test_(load_dataset(cfg_.test_data)),
        net_(make_network_spec(cfg_.network, cfg_.binarize_all)) {
    std::size_t want = Tensor<T>::count(net_.spec().input_dims);
    if (train_.dim != want || test_.dim != want)
      throw ConfigError("dataset feature count does not match network input (" +
                        std::to_string(train_.dim) + " vs " + std::to_string(want) + ")");
    if (std::size_t(train_.num_classes) > net_.spec().num_classes ||
        std::size_t(test_.num_classes) > net_.spec().num_classes)
      throw ConfigError("dataset has more classes than the network emits");

    sched_.mu0 = cfg_.resolved_mu0();
    sched_.alpha = cfg_.alpha;
    sched_.epochs_to_max = long(cfg_.epochs_to_max);
    if (opt_ == Opt::AdaSte && cfg_.anneal) sched_.validate();

    init_params();
  }

  MetricsRecord initial_record() override {
    MetricsRecord r;
    r.epoch = 0;
    r.train_loss = dataset_loss(train_);
    r.test_acc = test_accuracy();
    r.mu = metric_mu(0);
    r.lr = cfg_.lr;
    return r;
  }

  MetricsRecord run_epoch() override {
    auto t0 = std::chrono::steady_clock::now();
    const std::size_t e = epoch_;
    const double mu_e = mu_for_epoch(long(e));
    const double lambda_e = cfg_.lambda0 + cfg_.lambda_step * double(e);
    const double tau_e = cfg_.tau0 * std::pow(cfg_.tau_decay, double(e));

    if (opt_ == Opt::AdaSte) {
      ada_.spec.mu = mu_e;
      // the soft rule is only defined below the sign threshold; once the
      // anneal crosses it the sharp-regime rule takes over
      ada_.beta_rule = (cfg_.beta_rule == "soft" && !ada_.spec.hard()) ? BetaRule::Soft
                                                                       : BetaRule::Hard;
    }

    std::vector<signed char> signs0 = latent_signs();

    net_.set_training(true);
    BatchPlan plan{cfg_.batch_size, cfg_.seed, /*drop_last=*/false};
    BatchIter it(train_, plan, e);
    Tensor<T> x;
    std::vector<int> y;
    double loss_sum = 0.0, absg_sum = 0.0;
    std::size_t n_seen = 0, steps = 0;
    while (it.next()) {
      it.fill(x, y);
      materialize(mu_e, tau_e);
      double loss = net_.forward(x, y);
      net_.backward();
      loss_sum += loss * double(it.size());
      n_seen += it.size();
      collect_grads();
      absg_sum += effective_abs_grad_sum();
      apply_steps(lambda_e, tau_e);
      ++steps;
    }
    if (opt_ == Opt::MdSoftmax) sharpen_pairs();
    ++epoch_;

    MetricsRecord r;
    r.epoch = epoch_;
    r.train_loss = loss_sum / double(n_seen);
    r.test_acc = test_accuracy();
    r.mu = metric_mu(long(epoch_));
    r.lr = cfg_.lr;
    std::size_t denom = bin_elems_ > 0 ? bin_elems_ : total_elems_;
    r.mean_abs_g = absg_sum / (double(denom) * double(steps));
    r.flip_count = count_flips(signs0);
    if (!cfg_.deterministic) {
      std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      r.wall_seconds = dt.count();
    }
    return r;
  }

  double test_accuracy() override { return dataset_accuracy(test_); }
  double train_accuracy() override { return dataset_accuracy(train_); }
  std::size_t epochs_done() const override { return epoch_; }

  Checkpoint make_checkpoint() const override {
    Checkpoint ck;
    ck.add_bytes("__meta.network", cfg_.network);
    double width = double(cfg_.width);
    ck.add_f64("__meta.width", {}, std::span<const double>(&width, 1));
    double ball = cfg_.binarize_all ? 1.0 : 0.0;
    ck.add_f64("__meta.binarize_all", {}, std::span<const double>(&ball, 1));
    std::vector<double> tmp;
    for (std::size_t i = 0; i < net_.num_params(); ++i) {
      const ParamInfo& info = net_.param_info(i);
      const auto dims = net_.param(i).shape;
      const Slot& s = slots_[i];
      if (info.binarized) {
        std::vector<double> latent = latent_view(i);
        tmp.resize(latent.size());
        for (std::size_t j = 0; j < latent.size(); ++j) tmp[j] = sgn(latent[j]);
        ck.add_f64(info.name, dims, tmp);
        ck.add_f64(info.name + ".latent", dims, latent);
      } else {
        ck.add_f64(info.name, dims, s.master);
      }
    }
    for (std::size_t b = 0; b < net_.num_buffers(); ++b) {
      const Tensor<T>& buf = net_.buffer(b);
      tmp.assign(buf.data.begin(), buf.data.end());
      ck.add_f64(net_.buffer_name(b), buf.shape, tmp);
    }
    return ck;
  }

 private:
  enum class SlotKind { Real, BinLatent, MdPair };

  struct Slot {
    SlotKind kind = SlotKind::Real;
    std::vector<double> master;    // value / latent theta / p_plus
    std::vector<double> aux;       // p_minus (MdPair only)
    std::vector<double> velocity;  // raw-gradient momentum (non-adaste slots)
    std::size_t ada_index = SIZE_MAX;
  };

  double mu_for_epoch(long e) const {
    if (opt_ != Opt::AdaSte) return 0.0;
    return cfg_.anneal ? anneal_mu(sched_, e) : sched_.mu0;
  }

  double metric_mu(long row) const {
    return opt_ == Opt::AdaSte ? mu_for_epoch(row) : 0.0;
  }

  void init_params() {
    std::mt19937_64 rng = make_rng(mix64(cfg_.seed));
    std::vector<std::vector<double>> ada_thetas;
    for (std::size_t i = 0; i < net_.num_params(); ++i) {
      const ParamInfo& info = net_.param_info(i);
      std::size_t n = net_.param(i).size();
      std::vector<double> init(n, 0.0);
      bool is_weight = info.name.size() > 7 &&
                       info.name.compare(info.name.size() - 7, 7, ".weight") == 0;
      if (is_weight) {
        for (double& v : init) v = next_uniform(rng, -0.1, 0.1);
      } else if (info.name.size() > 6 &&
                 info.name.compare(info.name.size() - 6, 6, ".scale") == 0) {
        std::fill(init.begin(), init.end(), 1.0);
      }
      Slot s;
      if (info.binarized) {
        switch (opt_) {
          case Opt::AdaSte:
            s.kind = SlotKind::BinLatent;
            s.ada_index = ada_thetas.size();
            ada_thetas.push_back(std::move(init));
            break;
          case Opt::MdSoftmax:
            s.kind = SlotKind::MdPair;
            s.master.resize(n);
            s.aux.resize(n);
            for (std::size_t j = 0; j < n; ++j) {
              double p = sigmoid(2.0 * init[j] / cfg_.tau0);
              s.master[j] = p;
              s.aux[j] = 1.0 - p;
            }
            s.velocity.assign(n, 0.0);
            break;
          default:
            s.kind = SlotKind::BinLatent;
            s.master = std::move(init);
            s.velocity.assign(n, 0.0);
            break;
        }
      } else {
        s.kind = SlotKind::Real;
        s.master = std::move(init);
        s.velocity.assign(n, 0.0);
      }
      slots_.push_back(std::move(s));
      gscratch_.emplace_back(n, 0.0);
      total_elems_ += n;
      if (info.binarized) bin_elems_ += n;
    }
    if (opt_ == Opt::AdaSte) {
      BinarizerSpec spec;  // training always binarizes through the double well
      spec.kind = BinKind::DoubleWell;
      spec.mu = mu_for_epoch(0);
      spec.alpha = cfg_.alpha;
      BetaRule rule = (cfg_.beta_rule == "soft" && !spec.hard()) ? BetaRule::Soft
                                                                 : BetaRule::Hard;
      ada_ = make_adaste_state(std::move(ada_thetas), spec, rule, cfg_.beta_max);
      ada_grads_.resize(ada_.theta.size());
      for (std::size_t k = 0; k < ada_.theta.size(); ++k)
        ada_grads_[k].resize(ada_.theta[k].size());
    }
  }

  std::vector<double> latent_view(std::size_t i) const {
    const Slot& s = slots_[i];
    switch (s.kind) {
      case SlotKind::Real:
      case SlotKind::BinLatent: {
        if (s.ada_index != SIZE_MAX) return ada_.theta[s.ada_index];
        return s.master;
      }
      case SlotKind::MdPair: {
        std::vector<double> w(s.master.size());
        for (std::size_t j = 0; j < w.size(); ++j) w[j] = s.master[j] - s.aux[j];
        return w;
      }
    }
    return {};
  }

  // net params <- train-time weights for the current schedule point
  void materialize(double mu_e, double tau_e) {
    for (std::size_t i = 0; i < net_.num_params(); ++i) {
      const Slot& s = slots_[i];
      T* dst = net_.param(i).ptr();
      std::size_t n = net_.param(i).size();
      switch (s.kind) {
        case SlotKind::Real:
          for (std::size_t j = 0; j < n; ++j) dst[j] = T(s.master[j]);
          break;
        case SlotKind::BinLatent:
          if (opt_ == Opt::AdaSte) {
            BinarizerSpec spec = ada_.spec;
            spec.mu = mu_e;
            const std::vector<double>& th = ada_.theta[s.ada_index];
            for (std::size_t j = 0; j < n; ++j)
              dst[j] = T(forward_map_scalar(th[j], spec));
          } else if (opt_ == Opt::Bc) {
            for (std::size_t j = 0; j < n; ++j) dst[j] = T(sgn(s.master[j]));
          } else if (opt_ == Opt::ProxQuant) {
            for (std::size_t j = 0; j < n; ++j) dst[j] = T(s.master[j]);
          } else {  // md-tanh
            for (std::size_t j = 0; j < n; ++j)
              dst[j] = T(std::tanh(s.master[j] / tau_e));
          }
          break;
        case SlotKind::MdPair:
          for (std::size_t j = 0; j < n; ++j) dst[j] = T(s.master[j] - s.aux[j]);
          break;
      }
    }
  }

  // net params <- evaluation weights (hard sign of the latents)
  void materialize_sign() {
    for (std::size_t i = 0; i < net_.num_params(); ++i) {
      T* dst = net_.param(i).ptr();
      std::size_t n = net_.param(i).size();
      if (net_.param_info(i).binarized) {
        std::vector<double> latent = latent_view(i);
        for (std::size_t j = 0; j < n; ++j) dst[j] = T(sgn(latent[j]));
      } else {
        for (std::size_t j = 0; j < n; ++j) dst[j] = T(slots_[i].master[j]);
      }
    }
  }

  void collect_grads() {
    for (std::size_t i = 0; i < net_.num_params(); ++i) {
      const Tensor<T>& g = net_.grad(i);
      std::vector<double>& out = gscratch_[i];
      for (std::size_t j = 0; j < g.size(); ++j) {
        out[j] = double(g.ptr()[j]);
        if (!std::isfinite(out[j]))
          throw NumericError("non-finite gradient in " + net_.param_info(i).name);
      }
    }
  }

  // Sum of |effective gradient| this step: what the optimizer actually applies
  // to the binarized latents.  AdaSTE rescales through the per-element finite
  // difference; every other method bypasses the sign map, so the loss gradient
  // is already the effective one.  Falls back to all parameters when the
  // network has no binarized tensors.
  double effective_abs_grad_sum() const {
    double s = 0.0;
    if (bin_elems_ == 0) {
      for (const auto& g : gscratch_)
        for (double v : g) s += std::abs(v);
      return s;
    }
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (!net_.param_info(i).binarized) continue;
      const std::vector<double>& g = gscratch_[i];
      if (slots_[i].ada_index != SIZE_MAX) {
        const std::vector<double>& th = ada_.theta[slots_[i].ada_index];
        for (std::size_t j = 0; j < g.size(); ++j) {
          double beta = ada_.beta_rule == BetaRule::Soft
                            ? choose_beta_soft_scalar(th[j], g[j], ada_.spec, ada_.beta_max)
                            : choose_beta_hard_scalar(th[j], g[j]);
          s += std::abs(effective_gradient_scalar(th[j], g[j], beta, ada_.spec));
        }
      } else {
        for (double v : g) s += std::abs(v);
      }
    }
    return s;
  }

  void apply_steps(double lambda_e, double tau_e) {
    if (opt_ == Opt::AdaSte) {
      for (std::size_t i = 0; i < slots_.size(); ++i)
        if (slots_[i].ada_index != SIZE_MAX)
          ada_grads_[slots_[i].ada_index] = gscratch_[i];
      adaste_step(ada_, ada_grads_, cfg_.lr, cfg_.momentum);
    }
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      Slot& s = slots_[i];
      if (s.ada_index != SIZE_MAX) continue;  // handled above
      const std::vector<double>& g = gscratch_[i];
      if (s.kind == SlotKind::Real) {
        sgd_momentum_update<double>(s.master, g, s.velocity, cfg_.lr, cfg_.momentum);
        continue;
      }
      // heavy ball on the raw gradient, then the method-specific latent update
      for (std::size_t j = 0; j < g.size(); ++j)
        s.velocity[j] = cfg_.momentum * s.velocity[j] + g[j];
      if (s.kind == SlotKind::MdPair) {
        md_softmax_step_pair(s.master, s.aux, s.velocity, cfg_.lr);
      } else if (opt_ == Opt::Bc) {
        ste_step(s.master, s.velocity, cfg_.lr, cfg_.clip_latent, s.master);
      } else if (opt_ == Opt::ProxQuant) {
        proxquant_step(s.master, s.velocity, cfg_.lr, lambda_e, s.master);
      } else {  // md-tanh
        md_tanh_step(s.master, s.velocity, cfg_.lr, tau_e, s.master);
      }
    }
  }

  // end-of-epoch temperature drop: p proportional to p^(1/tau_decay)
  void sharpen_pairs() {
    if (cfg_.tau_decay == 1.0) return;
    double inv = 1.0 / cfg_.tau_decay;
    for (Slot& s : slots_) {
      if (s.kind != SlotKind::MdPair) continue;
      for (std::size_t j = 0; j < s.master.size(); ++j) {
        double a = std::pow(s.master[j], inv);
        double b = std::pow(s.aux[j], inv);
        double sum = a + b;
        if (!(sum > 0.0) || !std::isfinite(sum))
          throw NumericError("pair sharpening collapsed a weight distribution");
        s.master[j] = a / sum;
        s.aux[j] = b / sum;
      }
    }
  }

  std::vector<signed char> latent_signs() const {
    std::vector<signed char> out;
    out.reserve(total_elems_);
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      if (!net_.param_info(i).binarized) continue;
      for (double v : latent_view(i)) out.push_back(sgn(v) > 0.0 ? 1 : -1);
    }
    return out;
  }

  std::size_t count_flips(const std::vector<signed char>& before) const {
    std::vector<signed char> now = latent_signs();
    std::size_t flips = 0;
    for (std::size_t j = 0; j < now.size(); ++j)
      if (now[j] != before[j]) ++flips;
    return flips;
  }

  double dataset_accuracy(const Dataset& ds) {
    materialize_sign();
    bool saved = net_.training();
    net_.set_training(false);
    const std::size_t bs = 512;
    Tensor<T> x;
    std::vector<int> pred;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < ds.n; begin += bs) {
      std::size_t sz = std::min(bs, ds.n - begin);
      fill_sequential(ds, begin, sz, x);
      net_.predict(x, pred);
      for (std::size_t r = 0; r < sz; ++r)
        if (pred[r] == ds.labels[begin + r]) ++correct;
    }
    net_.set_training(saved);
    return double(correct) / double(ds.n);
  }

  // mean loss over a dataset at the current train-time weights, eval mode
  double dataset_loss(const Dataset& ds) {
    double mu0 = mu_for_epoch(long(epoch_));
    double tau0 = cfg_.tau0 * std::pow(cfg_.tau_decay, double(epoch_));
    materialize(mu0, tau0);
    bool saved = net_.training();
    net_.set_training(false);
    const std::size_t bs = 512;
    Tensor<T> x;
    std::vector<int> y;
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < ds.n; begin += bs) {
      std::size_t sz = std::min(bs, ds.n - begin);
      fill_sequential(ds, begin, sz, x);
      y.assign(ds.labels.begin() + long(begin), ds.labels.begin() + long(begin + sz));
      loss_sum += net_.forward(x, y) * double(sz);
    }
    net_.set_training(saved);
    return loss_sum / double(ds.n);
  }

  void fill_sequential(const Dataset& ds, std::size_t begin, std::size_t sz,
                       Tensor<T>& x) const {
    x.resize({sz, ds.dim});
    for (std::size_t r = 0; r < sz; ++r) {
      const double* row = ds.images.data() + (begin + r) * ds.dim;
      T* dst = x.ptr() + r * ds.dim;
      for (std::size_t c = 0; c < ds.dim; ++c) dst[c] = T(row[c]);
    }
  }

  RunConfig cfg_;
  Opt opt_;
  Dataset train_, test_;
  Network<T> net_;
  AnnealSchedule sched_;
  std::vector<Slot> slots_;
  std::vector<std::vector<double>> gscratch_;
  AdaSteState ada_;
  std::vector<std::vector<double>> ada_grads_;
  std::size_t total_elems_ = 0;
  std::size_t bin_elems_ = 0;
  std::size_t epoch_ = 0;
};

std::unique_ptr<ITrainer> make_trainer(RunConfig cfg) {
  validate_config(cfg);
  if (cfg.width == 32) return std::make_unique<TrainerImpl<float>>(std::move(cfg));
  return std::make_unique<TrainerImpl<double>>(std::move(cfg));
}

// O_EXCL lock so two runs cannot interleave writes in one output directory.
class LockFile {
 public:
  explicit LockFile(std::string path) : path_(std::move(path)) {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      if (errno == EEXIST)
        throw ConfigError("output directory is locked by another run (or a stale " +
                          path_ + "; remove it if no run is active)");
      throw IoError(IoCode::OpenFailed, "cannot create lock file " + path_);
    }
  }
  ~LockFile() {
    if (fd_ >= 0) {
      ::close(fd_);
      ::unlink(path_.c_str());
    }
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  std::string path_;
  int fd_ = -1;
};

}  // namespace

Trainer::Trainer(const RunConfig& cfg) : impl_(make_trainer(cfg)) {}
Trainer::~Trainer() = default;
Trainer::Trainer(Trainer&&) noexcept = default;
Trainer& Trainer::operator=(Trainer&&) noexcept = default;

TrainResult train_run(RunConfig cfg,
                      const std::function<void(const MetricsRecord&)>& progress) {
  validate_config(cfg);
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec)
    throw IoError(IoCode::OpenFailed,
                  "cannot create output directory " + cfg.out_dir + ": " + ec.message());
  LockFile lock(cfg.out_dir + "/.lock");

  TrainResult res;
  res.out_dir = cfg.out_dir;
  res.metrics_path = cfg.out_dir + "/metrics.csv";
  res.checkpoint_path = cfg.out_dir + "/checkpoint.bqnt";
  res.summary_path = cfg.out_dir + "/summary.json";

  Trainer tr(cfg);
  MetricsWriter mw(res.metrics_path);

  MetricsRecord row = tr.initial_record();
  mw.write(row);
  res.history.push_back(row);
  if (progress) progress(row);
  save_checkpoint(res.checkpoint_path, tr.make_checkpoint());

  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    try {
      row = tr.run_epoch();
    } catch (const NumericError& ex) {
      throw VerifyError(std::string(ex.what()) +
                        "; training aborted, last-good checkpoint retained at " +
                        res.checkpoint_path);
    }
    mw.write(row);
    res.history.push_back(row);
    if (progress) progress(row);
    save_checkpoint(res.checkpoint_path, tr.make_checkpoint());
  }

  res.best_test_acc = 0.0;
  for (const MetricsRecord& r : res.history)
    res.best_test_acc = std::max(res.best_test_acc, r.test_acc);
  res.last_test_acc = res.history.back().test_acc;

  double total_wall = 0.0;
  for (const MetricsRecord& r : res.history) total_wall += r.wall_seconds;

  nlohmann::json j;
  j["optimizer"] = cfg.optimizer;
  j["network"] = cfg.network;
  j["width"] = cfg.width;
  j["seed"] = cfg.seed;
  j["epochs"] = cfg.epochs;
  j["batch_size"] = cfg.batch_size;
  j["lr"] = cfg.lr;
  j["momentum"] = cfg.momentum;
  j["best_test_acc"] = res.best_test_acc;
  j["last_test_acc"] = res.last_test_acc;
  j["final_train_loss"] = res.history.back().train_loss;
  j["total_wall_seconds"] = total_wall;
  j["metrics"] = "metrics.csv";
  j["checkpoint"] = "checkpoint.bqnt";
  std::ofstream out(res.summary_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoCode::OpenFailed, "cannot write " + res.summary_path);
  out << j.dump(2) << "\n";
  return res;
}

EvalResult evaluate_checkpoint(const std::string& checkpoint_path,
                               const std::string& data_spec) {
  Checkpoint ck = load_checkpoint(checkpoint_path);
  std::string network = ck.bytes_of("__meta.network");
  bool binarize_all = ck.at("__meta.binarize_all").f64.at(0) != 0.0;
  Network<double> net(make_network_spec(network, binarize_all));

  for (std::size_t i = 0; i < net.num_params(); ++i) {
    const CheckpointEntry& e = ck.at(net.param_info(i).name);
    if (e.count() != net.param(i).size())
      throw IoError(IoCode::DimMismatch, "checkpoint tensor '" + net.param_info(i).name +
                                             "' has " + std::to_string(e.count()) +
                                             " elements, network expects " +
                                             std::to_string(net.param(i).size()));
    std::copy(e.f64.begin(), e.f64.end(), net.param(i).ptr());
  }
  for (std::size_t b = 0; b < net.num_buffers(); ++b) {
    const CheckpointEntry& e = ck.at(net.buffer_name(b));
    if (e.count() != net.buffer(b).size())
      throw IoError(IoCode::DimMismatch,
                    "checkpoint buffer '" + net.buffer_name(b) + "' size mismatch");
    std::copy(e.f64.begin(), e.f64.end(), net.buffer(b).ptr());
  }

  Dataset ds = load_dataset(data_spec);
  std::size_t want = Tensor<double>::count(net.spec().input_dims);
  if (ds.dim != want)
    throw ConfigError("dataset feature count does not match network input");
  if (std::size_t(ds.num_classes) > net.spec().num_classes)
    throw ConfigError("dataset has more classes than the network emits");

  net.set_training(false);
  const std::size_t bs = 512;
  Tensor<double> x;
  std::vector<int> pred;
  std::size_t correct = 0;
  for (std::size_t begin = 0; begin < ds.n; begin += bs) {
    std::size_t sz = std::min(bs, ds.n - begin);
    x.resize({sz, ds.dim});
    for (std::size_t r = 0; r < sz; ++r)
      std::copy(ds.images.begin() + long((begin + r) * ds.dim),
                ds.images.begin() + long((begin + r + 1) * ds.dim),
                x.ptr() + r * ds.dim);
    net.predict(x, pred);
    for (std::size_t r = 0; r < sz; ++r)
      if (pred[r] == ds.labels[begin + r]) ++correct;
  }
  return {double(correct) / double(ds.n), ds.n, network};
}

}  // namespace binquant
