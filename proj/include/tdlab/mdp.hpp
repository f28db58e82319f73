#pragma once
// Tabular MDP core. Everything downstream works in state-action space: a
// policy pi turns the transition tensor P[s][a][s'] into the |S||A| x |S||A|
// chain P_pi[(s,a),(s',a')] = P[s][a][s'] * pi(a'|s'), and value vectors are
// indexed by (s,a) pairs. Terminal states are encoded as absorbing states
// with zero reward; nothing in this module treats them specially.

#include <string>
#include <vector>

#include <json.hpp>

#include "tdlab/matrix.hpp"

namespace tdlab {

struct MdpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finite MDP with dense transition tensor and per-(state, action) rewards.
struct Mdp {
  int n_states = 0;
  int n_actions = 0;
  double gamma = 0.99;
  std::vector<double> transition;  // [s][a][s'], row-major
  std::vector<double> reward;      // [s][a]
  std::vector<double> initial;     // start-state distribution

  int n_sa() const { return n_states * n_actions; }
  double p(int s, int a, int s2) const {
    return transition[(static_cast<size_t>(s) * n_actions + a) * n_states + s2];
  }
  double& p(int s, int a, int s2) {
    return transition[(static_cast<size_t>(s) * n_actions + a) * n_states + s2];
  }
  double r(int s, int a) const {
    return reward[static_cast<size_t>(s) * n_actions + a];
  }
  double& r(int s, int a) {
    return reward[static_cast<size_t>(s) * n_actions + a];
  }
};

/// Stochastic policy, flattened [s][a].
using Policy = std::vector<double>;

inline int q_index(const Mdp& m, int s, int a) { return s * m.n_actions + a; }

/// Shape and stochasticity checks; errors name the offending row.
inline void validate_mdp(const Mdp& m) {
  if (m.n_states <= 0 || m.n_actions <= 0)
    throw MdpError("mdp: need positive state and action counts, got " +
                   std::to_string(m.n_states) + " states, " +
                   std::to_string(m.n_actions) + " actions");
  if (!(m.gamma >= 0.0) || !(m.gamma < 1.0))
    throw MdpError("mdp: gamma must lie in [0,1), got " +
                   std::to_string(m.gamma));
  size_t want_t = static_cast<size_t>(m.n_states) * m.n_actions * m.n_states;
  if (m.transition.size() != want_t)
    throw MdpError("mdp: transition tensor has " +
                   std::to_string(m.transition.size()) + " entries, expected " +
                   std::to_string(want_t));
  if (m.reward.size() != static_cast<size_t>(m.n_sa()))
    throw MdpError("mdp: reward table has " + std::to_string(m.reward.size()) +
                   " entries, expected " + std::to_string(m.n_sa()));
  if (m.initial.size() != static_cast<size_t>(m.n_states))
    throw MdpError("mdp: initial distribution has " +
                   std::to_string(m.initial.size()) + " entries, expected " +
                   std::to_string(m.n_states));
  for (int s = 0; s < m.n_states; ++s)
    for (int a = 0; a < m.n_actions; ++a) {
      double sum = 0.0;
      for (int s2 = 0; s2 < m.n_states; ++s2) {
        double v = m.p(s, a, s2);
        if (v < 0.0)
          throw MdpError("mdp: negative transition probability at (s=" +
                         std::to_string(s) + ",a=" + std::to_string(a) +
                         ",s'=" + std::to_string(s2) + ")");
        sum += v;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw MdpError("mdp: transition row (s=" + std::to_string(s) + ",a=" +
                       std::to_string(a) + ") sums to " + std::to_string(sum));
    }
  double isum = 0.0;
  for (double v : m.initial) {
    if (v < 0.0) throw MdpError("mdp: negative initial probability");
    isum += v;
  }
  if (std::abs(isum - 1.0) > 1e-9)
    throw MdpError("mdp: initial distribution sums to " + std::to_string(isum));
}

inline void validate_policy(const Mdp& m, const Policy& pi) {
  if (pi.size() != static_cast<size_t>(m.n_sa()))
    throw MdpError("policy: has " + std::to_string(pi.size()) +
                   " entries, expected " + std::to_string(m.n_sa()));
  for (int s = 0; s < m.n_states; ++s) {
    double sum = 0.0;
    for (int a = 0; a < m.n_actions; ++a) {
      double v = pi[q_index(m, s, a)];
      if (v < 0.0)
        throw MdpError("policy: negative probability at (s=" +
                       std::to_string(s) + ",a=" + std::to_string(a) + ")");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw MdpError("policy: row s=" + std::to_string(s) + " sums to " +
                     std::to_string(sum));
  }
}

/// Reward vector over state-action pairs.
inline std::vector<double> reward_vector(const Mdp& m) { return m.reward; }

inline Policy uniform_policy(const Mdp& m) {
  return Policy(m.n_sa(), 1.0 / m.n_actions);
}

/// The policy-induced chain over state-action pairs.
inline Matrix policy_transition(const Mdp& m, const Policy& pi) {
  validate_mdp(m);
  validate_policy(m, pi);
  int n = m.n_sa();
  Matrix p(n, n);
  for (int s = 0; s < m.n_states; ++s)
    for (int a = 0; a < m.n_actions; ++a)
      for (int s2 = 0; s2 < m.n_states; ++s2) {
        double base = m.p(s, a, s2);
        if (base == 0.0) continue;
        for (int a2 = 0; a2 < m.n_actions; ++a2)
          p(q_index(m, s, a), q_index(m, s2, a2)) =
              base * pi[q_index(m, s2, a2)];
      }
  return p;
}

/// Stationary distribution of a row-stochastic chain. Power iteration on the
/// lazy chain (I+P)/2, which has the same stationary vector and is aperiodic
/// by construction, so the iteration always settles.
inline std::vector<double> stationary_distribution(const Matrix& p) {
  int n = p.rows();
  if (p.rows() != p.cols())
    throw MdpError("stationary_distribution: chain matrix not square " +
                   shape_str(p));
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (p(i, j) < -1e-12)
        throw MdpError("stationary_distribution: negative entry in row " +
                       std::to_string(i));
      sum += p(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw MdpError("stationary_distribution: row " + std::to_string(i) +
                     " sums to " + std::to_string(sum));
  }
  std::vector<double> d(n, 1.0 / n), next(n);
  for (long it = 0; it < 2'000'000; ++it) {
    // next = d^T (I+P)/2
    for (int j = 0; j < n; ++j) next[j] = 0.5 * d[j];
    for (int i = 0; i < n; ++i) {
      double di = 0.5 * d[i];
      if (di == 0.0) continue;
      for (int j = 0; j < n; ++j) next[j] += di * p(i, j);
    }
    double sum = 0.0, delta = 0.0;
    for (int j = 0; j < n; ++j) sum += next[j];
    for (int j = 0; j < n; ++j) {
      next[j] /= sum;
      delta = std::max(delta, std::abs(next[j] - d[j]));
    }
    d.swap(next);
    if (delta <= 1e-15) return d;
  }
  throw MdpError("stationary_distribution: power iteration did not settle");
}

/// Exact policy evaluation: Q = (I - gamma P_pi)^{-1} R.
inline std::vector<double> evaluate_policy_exact(const Mdp& m,
                                                 const Policy& pi) {
  Matrix p = policy_transition(m, pi);
  int n = m.n_sa();
  Matrix lhs = mat_sub(Matrix::identity(n), mat_scale(p, m.gamma));
  return mat_solve_vec(lhs, reward_vector(m));
}

struct ValueIterationResult {
  std::vector<double> q;   // optimal state-action values
  Policy greedy;           // deterministic, lowest-index argmax
  long iterations = 0;
  double residual = 0.0;   // final Bellman residual, sup norm
};

/// Greedy policy from a Q vector; ties break to the lowest action index so
/// results are reproducible across platforms.
inline Policy greedy_policy(const Mdp& m, const std::vector<double>& q) {
  Policy pi(m.n_sa(), 0.0);
  for (int s = 0; s < m.n_states; ++s) {
    int best = 0;
    for (int a = 1; a < m.n_actions; ++a)
      if (q[q_index(m, s, a)] > q[q_index(m, s, best)]) best = a;
    pi[q_index(m, s, best)] = 1.0;
  }
  return pi;
}

inline ValueIterationResult value_iteration_exact(const Mdp& m,
                                                  double tol = 1e-10,
                                                  long max_iters = 1'000'000) {
  validate_mdp(m);
  ValueIterationResult res;
  res.q.assign(m.n_sa(), 0.0);
  std::vector<double> vmax(m.n_states, 0.0), next(m.n_sa());
  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    for (int s = 0; s < m.n_states; ++s) {
      double best = res.q[q_index(m, s, 0)];
      for (int a = 1; a < m.n_actions; ++a)
        best = std::max(best, res.q[q_index(m, s, a)]);
      vmax[s] = best;
    }
    double residual = 0.0;
    for (int s = 0; s < m.n_states; ++s)
      for (int a = 0; a < m.n_actions; ++a) {
        double backup = m.r(s, a);
        for (int s2 = 0; s2 < m.n_states; ++s2) {
          double pr = m.p(s, a, s2);
          if (pr != 0.0) backup += m.gamma * pr * vmax[s2];
        }
        next[q_index(m, s, a)] = backup;
        residual = std::max(residual,
                            std::abs(backup - res.q[q_index(m, s, a)]));
      }
    res.q.swap(next);
    res.residual = residual;
    if (residual < tol) break;
  }
  res.greedy = greedy_policy(m, res.q);
  return res;
}

// ---- JSON serialization ----

inline nlohmann::json mdp_to_json(const Mdp& m) {
  return nlohmann::json{{"n_states", m.n_states}, {"n_actions", m.n_actions},
                        {"gamma", m.gamma},       {"transition", m.transition},
                        {"reward", m.reward},     {"initial", m.initial}};
}

inline Mdp mdp_from_json(const nlohmann::json& j) {
  Mdp m;
  try {
    m.n_states = j.at("n_states").get<int>();
    m.n_actions = j.at("n_actions").get<int>();
    m.gamma = j.at("gamma").get<double>();
    m.transition = j.at("transition").get<std::vector<double>>();
    m.reward = j.at("reward").get<std::vector<double>>();
    m.initial = j.at("initial").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw MdpError(std::string("mdp: malformed JSON document: ") + e.what());
  }
  validate_mdp(m);
  return m;
}

}  // namespace tdlab
