// Sample-based Q-learning over small pluggable approximators.
//
// Two loss modes share one training loop. With a lagging parameter copy
// theta_bar, "tn" bootstraps targets from theta_bar while "fr" bootstraps
// from theta itself and instead pays kappa/2 (Q_theta - Q_theta_bar)^2 for
// drifting away from the lagging copy. Both are trained by semi-gradient:
// the backward pass runs through Q_theta(s,a) only, never through a
// bootstrap value and never through theta_bar.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdlab/format.hpp"
#include "tdlab/linear_fa.hpp"

namespace tdlab {

class QlearnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- approximators ----

enum class ApproxKind { tabular, linear, mlp1 };

inline std::string to_string(ApproxKind k) {
  switch (k) {
    case ApproxKind::tabular: return "tabular";
    case ApproxKind::linear: return "linear";
    default: return "mlp1";
  }
}

// theta layout:
//   tabular / linear: [a * input_dim + i], one weight row per action.
//     tabular additionally insists the state encoding is one-hot and reads
//     the single hot column, which makes it bit-identical to linear on
//     one-hot data while skipping the dot products.
//   mlp1: [W1 (hidden x input_dim)] [b1 (hidden)] [W2 (n_actions x hidden)]
//     [b2 (n_actions)], one rectified hidden layer.
//
// Everything past theta_bar is learner state: the adaptive-optimizer moments
// and the running count of hard target syncs. A learner instance is
// single-threaded; run independent seeds as independent instances.
struct QApproximator {
  ApproxKind kind = ApproxKind::tabular;
  int input_dim = 0;
  int n_actions = 0;
  int hidden = 0;  // mlp1 only, 0 otherwise
  std::vector<double> theta;
  std::vector<double> theta_bar;
  std::vector<double> opt_m, opt_v;  // sized on first adaptive step
  long adam_t = 0;
  long target_sync_count = 0;

  size_t param_count() const { return theta.size(); }
};

namespace detail {

inline double unit01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// index of the single 1.0 entry, or -1 when the encoding is not one-hot
inline int one_hot_index(const std::vector<double>& s) {
  int hot = -1;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == 0.0) continue;
    if (s[i] != 1.0 || hot >= 0) return -1;
    hot = static_cast<int>(i);
  }
  return hot;
}

inline void check_encoding(const QApproximator& q,
                           const std::vector<double>& s) {
  if (static_cast<int>(s.size()) != q.input_dim)
    throw QlearnError("state encoding has length " + fmt(long(s.size())) +
                      ", approximator expects " + fmt(long(q.input_dim)));
}

// forward pass with an explicit parameter vector so the same code serves
// theta and theta_bar; for mlp1 the scratch buffers receive pre-activations
// and hidden outputs for reuse in the backward pass
inline std::vector<double> forward_with(const QApproximator& q,
                                        const std::vector<double>& params,
                                        const std::vector<double>& s,
                                        std::vector<double>* pre = nullptr,
                                        std::vector<double>* hid = nullptr) {
  check_encoding(q, s);
  const int in = q.input_dim, na = q.n_actions;
  std::vector<double> out(na, 0.0);
  if (q.kind == ApproxKind::tabular) {
    int hot = one_hot_index(s);
    if (hot < 0)
      throw QlearnError("tabular approximator needs a one-hot state encoding");
    for (int a = 0; a < na; ++a) out[a] = params[a * in + hot];
    return out;
  }
  if (q.kind == ApproxKind::linear) {
    int hot = one_hot_index(s);
    if (hot >= 0) {
      for (int a = 0; a < na; ++a) out[a] = params[a * in + hot];
    } else {
      for (int a = 0; a < na; ++a) {
        double acc = 0.0;
        const double* row = params.data() + size_t(a) * in;
        for (int i = 0; i < in; ++i) acc += row[i] * s[i];
        out[a] = acc;
      }
    }
    return out;
  }
  // mlp1
  const int h = q.hidden;
  const double* w1 = params.data();
  const double* b1 = w1 + size_t(h) * in;
  const double* w2 = b1 + h;
  const double* b2 = w2 + size_t(na) * h;
  std::vector<double> p(h), z(h);
  int hot = one_hot_index(s);
  for (int j = 0; j < h; ++j) {
    double acc = b1[j];
    if (hot >= 0) {
      acc += w1[size_t(j) * in + hot];
    } else {
      const double* row = w1 + size_t(j) * in;
      for (int i = 0; i < in; ++i) acc += row[i] * s[i];
    }
    p[j] = acc;
    z[j] = acc > 0.0 ? acc : 0.0;
  }
  for (int a = 0; a < na; ++a) {
    double acc = b2[a];
    const double* row = w2 + size_t(a) * h;
    for (int j = 0; j < h; ++j) acc += row[j] * z[j];
    out[a] = acc;
  }
  if (pre) *pre = std::move(p);
  if (hid) *hid = std::move(z);
  return out;
}

// accumulate d(qsa)/d(params) scaled by dq into grad, for action a only
inline void backprop_action(const QApproximator& q,
                            const std::vector<double>& params,
                            const std::vector<double>& s, int a, double dq,
                            const std::vector<double>& pre,
                            const std::vector<double>& hid,
                            std::vector<double>& grad) {
  const int in = q.input_dim, na = q.n_actions;
  if (q.kind != ApproxKind::mlp1) {
    int hot = one_hot_index(s);
    if (q.kind == ApproxKind::tabular && hot < 0)
      throw QlearnError("tabular approximator needs a one-hot state encoding");
    if (hot >= 0) {
      grad[size_t(a) * in + hot] += dq;
    } else {
      double* row = grad.data() + size_t(a) * in;
      for (int i = 0; i < in; ++i) row[i] += dq * s[i];
    }
    return;
  }
  const int h = q.hidden;
  const size_t off_b1 = size_t(h) * in;
  const size_t off_w2 = off_b1 + h;
  const size_t off_b2 = off_w2 + size_t(na) * h;
  const double* w2 = params.data() + off_w2;
  grad[off_b2 + a] += dq;
  double* gw2 = grad.data() + off_w2 + size_t(a) * h;
  double* gb1 = grad.data() + off_b1;
  int hot = one_hot_index(s);
  for (int j = 0; j < h; ++j) {
    gw2[j] += dq * hid[j];
    // rectifier passes gradient only on the active side; exactly-zero
    // pre-activations take the zero subgradient
    if (pre[j] <= 0.0) continue;
    double dp = dq * w2[size_t(a) * h + j];
    gb1[j] += dp;
    if (hot >= 0) {
      grad[size_t(j) * in + hot] += dp;
    } else {
      double* gw1 = grad.data() + size_t(j) * in;
      for (int i = 0; i < in; ++i) gw1[i] += dp * s[i];
    }
  }
}

}  // namespace detail

inline QApproximator make_approximator(ApproxKind kind, int input_dim,
                                       int n_actions, int hidden = 64,
                                       uint64_t seed = 0) {
  if (input_dim < 1 || n_actions < 1)
    throw QlearnError("approximator needs input_dim >= 1 and n_actions >= 1");
  QApproximator q;
  q.kind = kind;
  q.input_dim = input_dim;
  q.n_actions = n_actions;
  if (kind != ApproxKind::mlp1) {
    q.theta.assign(size_t(n_actions) * input_dim, 0.0);
  } else {
    if (hidden < 1) throw QlearnError("mlp1 needs hidden width >= 1");
    q.hidden = hidden;
    size_t n = size_t(hidden) * input_dim + hidden +
               size_t(n_actions) * hidden + n_actions;
    q.theta.resize(n);
    // fan-in-scaled uniform, the usual dense-layer default
    std::mt19937_64 rng(seed);
    auto fill = [&](size_t begin, size_t count, int fan_in) {
      double bound = 1.0 / std::sqrt(double(fan_in));
      for (size_t i = 0; i < count; ++i)
        q.theta[begin + i] = bound * (2.0 * detail::unit01(rng) - 1.0);
    };
    size_t w1 = size_t(hidden) * input_dim;
    fill(0, w1, input_dim);
    fill(w1, size_t(hidden), input_dim);
    fill(w1 + hidden, size_t(n_actions) * hidden + n_actions, hidden);
  }
  q.theta_bar = q.theta;
  return q;
}

inline std::vector<double> q_forward(const QApproximator& q,
                                     const std::vector<double>& s,
                                     bool use_lagging = false) {
  return detail::forward_with(q, use_lagging ? q.theta_bar : q.theta, s);
}

// ---- transitions and replay ----

struct Transition {
  std::vector<double> s;
  int a = 0;
  double r = 0.0;
  std::vector<double> s_next;
  bool terminal = false;
};

// fixed-capacity ring with uniform sampling of distinct slots
class ReplayBuffer {
 public:
  ReplayBuffer(size_t capacity, uint64_t seed)
      : capacity_(capacity), rng_(seed) {
    if (capacity == 0) throw QlearnError("replay capacity must be positive");
  }

  void push(Transition t) {
    if (ring_.size() < capacity_) {
      ring_.push_back(std::move(t));
    } else {
      ring_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
  }

  size_t size() const { return ring_.size(); }
  size_t capacity() const { return capacity_; }
  const Transition& at(size_t i) const { return ring_.at(i); }

  std::vector<Transition> sample(size_t batch) {
    if (batch == 0 || batch > ring_.size())
      throw QlearnError("cannot sample " + fmt(long(batch)) + " from " +
                        fmt(long(ring_.size())) + " stored transitions");
    // rejection keeps the draw uniform over distinct index sets; batches are
    // small so collisions stay rare
    std::vector<size_t> idx;
    idx.reserve(batch);
    while (idx.size() < batch) {
      size_t k = static_cast<size_t>(detail::unit01(rng_) * ring_.size());
      if (k >= ring_.size()) k = ring_.size() - 1;
      if (std::find(idx.begin(), idx.end(), k) == idx.end()) idx.push_back(k);
    }
    std::vector<Transition> out;
    out.reserve(batch);
    for (size_t k : idx) out.push_back(ring_[k]);
    return out;
  }

 private:
  size_t capacity_;
  std::vector<Transition> ring_;
  size_t next_ = 0;
  std::mt19937_64 rng_;
};

// ---- training configuration ----

enum class LossKind { tn, fr };
enum class OptimizerKind { sgd, adam };

inline std::string to_string(LossKind k) {
  return k == LossKind::tn ? "tn" : "fr";
}

struct TrainConfig {
  LossKind loss = LossKind::tn;
  double kappa = 0.0;
  long target_period = 0;             // periodic hard sync when >= 1
  std::optional<double> polyak_tau;   // soft sync every step when set
  double lr = 0.1;
  int batch_size = 32;
  long total_steps = 0;
  double gamma = 0.99;
  uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::sgd;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
};

inline void validate_config(const TrainConfig& cfg) {
  bool periodic = cfg.target_period >= 1;
  bool polyak = cfg.polyak_tau.has_value();
  if (periodic == polyak)
    throw QlearnError(
        "exactly one of target_period and polyak_tau must be active");
  if (polyak && (!(*cfg.polyak_tau > 0.0) || !(*cfg.polyak_tau < 1.0)))
    throw QlearnError("polyak_tau must lie in (0,1), got " +
                      fmt(*cfg.polyak_tau));
  if (cfg.kappa < 0.0) throw QlearnError("kappa must be >= 0");
  if (!(cfg.lr > 0.0)) throw QlearnError("lr must be positive");
  if (cfg.batch_size < 1) throw QlearnError("batch_size must be >= 1");
  if (!(cfg.gamma >= 0.0) || !(cfg.gamma < 1.0))
    throw QlearnError("gamma must lie in [0,1)");
}

// ---- targets, loss, training ----

// r + gamma max_a' Q(s',a'), bootstrapping from theta_bar when use_lagging;
// terminal transitions truncate to r so goal values stay bounded
inline double td_target(const QApproximator& q, const Transition& t,
                        double gamma, bool use_lagging) {
  if (t.terminal) return t.r;
  std::vector<double> next = q_forward(q, t.s_next, use_lagging);
  return t.r + gamma * *std::max_element(next.begin(), next.end());
}

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad;
};

// Mean over the batch of
//   tn: 1/2 (target_theta_bar - Q_theta(s,a))^2
//   fr: 1/2 (target_theta  - Q_theta(s,a))^2
//       + kappa/2 (Q_theta(s,a) - Q_theta_bar(s,a))^2
// with every target treated as a constant. The returned gradient therefore
// flows through Q_theta(s,a) alone.
inline LossGrad loss_and_grad(const QApproximator& q,
                              const std::vector<Transition>& batch,
                              const TrainConfig& cfg) {
  if (batch.empty()) throw QlearnError("loss_and_grad needs a non-empty batch");
  LossGrad out;
  out.grad.assign(q.param_count(), 0.0);
  std::vector<double> pre, hid;
  for (const Transition& t : batch) {
    if (t.a < 0 || t.a >= q.n_actions)
      throw QlearnError("action index " + fmt(long(t.a)) + " out of range");
    std::vector<double> qs = detail::forward_with(q, q.theta, t.s, &pre, &hid);
    double qsa = qs[t.a];
    double target = td_target(q, t, cfg.gamma, cfg.loss == LossKind::tn);
    double delta = target - qsa;
    double dq;
    if (cfg.loss == LossKind::tn) {
      out.loss += 0.5 * delta * delta;
      dq = -delta;
    } else {
      double pin = qsa - detail::forward_with(q, q.theta_bar, t.s)[t.a];
      out.loss += 0.5 * delta * delta + 0.5 * cfg.kappa * pin * pin;
      dq = -delta + cfg.kappa * pin;
    }
    detail::backprop_action(q, q.theta, t.s, t.a, dq, pre, hid, out.grad);
  }
  double inv = 1.0 / double(batch.size());
  out.loss *= inv;
  for (double& g : out.grad) g *= inv;
  return out;
}

struct TrainMetrics {
  long step = 0;
  double loss = 0.0;
  double max_abs_q = 0.0;
  long target_sync_count = 0;
};

inline std::string metrics_csv_header() {
  return "step,loss,max_abs_q,target_sync_count";
}

inline std::string metrics_csv_row(const TrainMetrics& m) {
  return fmt(m.step) + "," + fmt(m.loss) + "," + fmt(m.max_abs_q) + "," +
         fmt(m.target_sync_count);
}

// One optimizer step on a freshly sampled batch, then the lagging update:
// periodic mode copies theta_bar <- theta whenever step_index lands on a
// multiple of target_period (so period 1 keeps them glued), polyak mode
// blends every step and never counts as a hard sync. max_abs_q is read after
// the update over the batch's own states.
inline TrainMetrics train_step(QApproximator& q, ReplayBuffer& buf,
                               const TrainConfig& cfg, long step_index) {
  validate_config(cfg);
  std::vector<Transition> batch = buf.sample(size_t(cfg.batch_size));
  LossGrad lg = loss_and_grad(q, batch, cfg);

  if (cfg.optimizer == OptimizerKind::sgd) {
    for (size_t i = 0; i < q.theta.size(); ++i)
      q.theta[i] -= cfg.lr * lg.grad[i];
  } else {
    if (q.opt_m.size() != q.theta.size()) {
      q.opt_m.assign(q.theta.size(), 0.0);
      q.opt_v.assign(q.theta.size(), 0.0);
      q.adam_t = 0;
    }
    ++q.adam_t;
    double c1 = 1.0 - std::pow(cfg.beta1, double(q.adam_t));
    double c2 = 1.0 - std::pow(cfg.beta2, double(q.adam_t));
    for (size_t i = 0; i < q.theta.size(); ++i) {
      double g = lg.grad[i];
      q.opt_m[i] = cfg.beta1 * q.opt_m[i] + (1.0 - cfg.beta1) * g;
      q.opt_v[i] = cfg.beta2 * q.opt_v[i] + (1.0 - cfg.beta2) * g * g;
      q.theta[i] -= cfg.lr * (q.opt_m[i] / c1) /
                    (std::sqrt(q.opt_v[i] / c2) + cfg.adam_eps);
    }
  }

  if (cfg.target_period >= 1) {
    if (step_index % cfg.target_period == 0) {
      q.theta_bar = q.theta;
      ++q.target_sync_count;
    }
  } else {
    q.theta_bar = polyak_update(q.theta, q.theta_bar, *cfg.polyak_tau);
  }

  TrainMetrics m;
  m.step = step_index;
  m.loss = lg.loss;
  for (const Transition& t : batch)
    for (double v : q_forward(q, t.s)) m.max_abs_q = std::max(m.max_abs_q, std::abs(v));
  m.target_sync_count = q.target_sync_count;
  return m;
}

}  // namespace tdlab
