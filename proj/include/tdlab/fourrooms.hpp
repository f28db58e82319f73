// The four-room gridworld experiment harness: a deterministic 11x11 maze
// with one doorway per dividing wall, data collection at configurable
// off-policiness, an exact value oracle for the learner's greedy policy,
// and regret evaluation against the optimal start-state return.
//
// Geometry and reward conventions, fixed here and surfaced in config:
// entering the goal pays 1 and ends the episode, everything else pays 0,
// episodes cap at 500 steps, gamma = 0.99. With a single absorbing unit
// reward every true action value lies in [0,1], which is what makes the
// "squared error above 1" soft-divergence reading meaningful.
#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tdlab/mdp.hpp"
#include "tdlab/qlearn.hpp"

namespace tdlab {

class FourRoomsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// '#' wall, '.' floor, 'S' start, 'G' goal; row 0 is the top
inline const std::vector<std::string>& fourrooms_layout() {
  static const std::vector<std::string> rows = {
      "G....#.....",
      ".....#.....",
      "...........",
      ".....#.....",
      ".....#.....",
      "#.####.....",
      ".....###.##",
      ".....#.....",
      ".....#.....",
      "...........",
      ".....#....S",
  };
  return rows;
}

enum FourRoomsAction { act_up = 0, act_down = 1, act_left = 2, act_right = 3 };

struct FourRoomsEnv {
  std::vector<std::string> grid;
  int rows = 0, cols = 0;
  std::vector<int> cell_of;                 // r * cols + c -> cell id or -1
  std::vector<std::pair<int, int>> pos_of;  // cell id -> (r, c)
  int start = -1, goal = -1;
  double gamma = 0.99;
  int episode_cap = 500;
  // solved once at construction: the absorbing-goal process, its optimal
  // values, and the regret baseline (optimal deterministic return from start)
  Mdp mdp;
  std::vector<double> q_star;
  double v_star_start = 0.0;

  int n_cells() const { return static_cast<int>(pos_of.size()); }
};

namespace detail {

inline bool walkable_char(char c) { return c == '.' || c == 'S' || c == 'G'; }

// a doorway is a floor cell bridged through a wall line: blocked on two
// opposite sides, open on the other two (the outer border counts as wall)
inline bool is_doorway(const std::vector<std::string>& g, int r, int c) {
  auto open = [&](int rr, int cc) {
    return rr >= 0 && rr < int(g.size()) && cc >= 0 &&
           cc < int(g[0].size()) && walkable_char(g[rr][cc]);
  };
  if (!walkable_char(g[r][c])) return false;
  bool vert = open(r - 1, c) && open(r + 1, c) && !open(r, c - 1) &&
              !open(r, c + 1);
  bool horiz = open(r, c - 1) && open(r, c + 1) && !open(r - 1, c) &&
               !open(r + 1, c);
  return vert || horiz;
}

inline uint64_t stream_seed(uint64_t seed, uint64_t stream) {
  // splitmix64 scramble so per-purpose streams never overlap in practice
  uint64_t z = seed + stream * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// deterministic grid dynamics as an Mdp: moves that hit walls stay put, the
// goal is absorbing with zero reward, entering it from elsewhere pays 1
inline Mdp fourrooms_to_mdp(const FourRoomsEnv& env);

inline FourRoomsEnv make_fourrooms(
    const std::vector<std::string>& grid = fourrooms_layout(),
    double gamma = 0.99, int episode_cap = 500) {
  if (!(gamma >= 0.0) || !(gamma < 1.0))
    throw FourRoomsError("gamma must lie in [0,1)");
  if (episode_cap < 1) throw FourRoomsError("episode cap must be positive");
  FourRoomsEnv env;
  env.grid = grid;
  env.gamma = gamma;
  env.episode_cap = episode_cap;
  env.rows = static_cast<int>(grid.size());
  if (env.rows == 0) throw FourRoomsError("layout is empty");
  env.cols = static_cast<int>(grid[0].size());
  env.cell_of.assign(size_t(env.rows) * env.cols, -1);
  for (int r = 0; r < env.rows; ++r) {
    if (static_cast<int>(grid[r].size()) != env.cols)
      throw FourRoomsError("layout row " + fmt(long(r)) +
                           " breaks the rectangle");
    for (int c = 0; c < env.cols; ++c) {
      char ch = grid[r][c];
      if (ch == '#') continue;
      if (!detail::walkable_char(ch))
        throw FourRoomsError(std::string("unknown layout code '") + ch + "'");
      int id = env.n_cells();
      env.cell_of[size_t(r) * env.cols + c] = id;
      env.pos_of.emplace_back(r, c);
      if (ch == 'S') {
        if (env.start >= 0) throw FourRoomsError("more than one start cell");
        env.start = id;
      }
      if (ch == 'G') {
        if (env.goal >= 0) throw FourRoomsError("more than one goal cell");
        env.goal = id;
      }
    }
  }
  if (env.start < 0 || env.goal < 0)
    throw FourRoomsError("layout needs exactly one start and one goal");
  if (env.start == env.goal)
    throw FourRoomsError("start and goal must differ");

  // every floor cell must be reachable from the start
  std::vector<char> seen(env.pos_of.size(), 0);
  std::deque<int> frontier = {env.start};
  seen[env.start] = 1;
  const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
  while (!frontier.empty()) {
    int cur = frontier.front();
    frontier.pop_front();
    auto [r, c] = env.pos_of[cur];
    for (int k = 0; k < 4; ++k) {
      int rr = r + dr[k], cc = c + dc[k];
      if (rr < 0 || rr >= env.rows || cc < 0 || cc >= env.cols) continue;
      int id = env.cell_of[size_t(rr) * env.cols + cc];
      if (id >= 0 && !seen[id]) {
        seen[id] = 1;
        frontier.push_back(id);
      }
    }
  }
  for (size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) {
      auto [r, c] = env.pos_of[i];
      throw FourRoomsError("cell (" + fmt(long(r)) + "," + fmt(long(c)) +
                           ") is unreachable from the start");
    }

  // four rooms, four doorways: sealing the doorways must leave exactly
  // four connected components
  std::vector<std::pair<int, int>> doors;
  for (int r = 0; r < env.rows; ++r)
    for (int c = 0; c < env.cols; ++c)
      if (detail::is_doorway(env.grid, r, c)) doors.emplace_back(r, c);
  if (doors.size() != 4)
    throw FourRoomsError("expected 4 doorway cells, found " +
                         fmt(long(doors.size())));
  std::vector<std::string> sealed = env.grid;
  for (auto [r, c] : doors) sealed[r][c] = '#';
  int components = 0;
  std::vector<char> mark(size_t(env.rows) * env.cols, 0);
  for (int r = 0; r < env.rows; ++r)
    for (int c = 0; c < env.cols; ++c) {
      if (!detail::walkable_char(sealed[r][c]) ||
          mark[size_t(r) * env.cols + c])
        continue;
      ++components;
      std::deque<std::pair<int, int>> q = {{r, c}};
      mark[size_t(r) * env.cols + c] = 1;
      while (!q.empty()) {
        auto [cr, cc] = q.front();
        q.pop_front();
        for (int k = 0; k < 4; ++k) {
          int rr = cr + dr[k], c2 = cc + dc[k];
          if (rr < 0 || rr >= env.rows || c2 < 0 || c2 >= env.cols) continue;
          if (!detail::walkable_char(sealed[rr][c2]) ||
              mark[size_t(rr) * env.cols + c2])
            continue;
          mark[size_t(rr) * env.cols + c2] = 1;
          q.emplace_back(rr, c2);
        }
      }
    }
  if (components != 4)
    throw FourRoomsError("expected 4 rooms behind the doorways, found " +
                         fmt(long(components)));

  env.mdp = fourrooms_to_mdp(env);
  ValueIterationResult vi = value_iteration_exact(env.mdp);
  env.q_star = vi.q;
  env.v_star_start = 0.0;
  for (int a = 0; a < 4; ++a)
    env.v_star_start =
        std::max(env.v_star_start, vi.q[q_index(env.mdp, env.start, a)]);
  return env;
}

inline Mdp fourrooms_to_mdp(const FourRoomsEnv& env) {
  Mdp m;
  m.n_states = env.n_cells();
  m.n_actions = 4;
  m.gamma = env.gamma;
  m.transition.assign(size_t(m.n_states) * 4 * m.n_states, 0.0);
  m.reward.assign(size_t(m.n_states) * 4, 0.0);
  m.initial.assign(m.n_states, 0.0);
  m.initial[env.start] = 1.0;
  const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
  for (int s = 0; s < m.n_states; ++s) {
    auto [r, c] = env.pos_of[s];
    for (int a = 0; a < 4; ++a) {
      int next = s;
      if (s != env.goal) {
        int rr = r + dr[a], cc = c + dc[a];
        if (rr >= 0 && rr < env.rows && cc >= 0 && cc < env.cols) {
          int id = env.cell_of[size_t(rr) * env.cols + cc];
          if (id >= 0) next = id;
        }
        if (next == env.goal) m.reward[q_index(m, s, a)] = 1.0;
      }
      m.transition[(size_t(s) * 4 + a) * m.n_states + next] = 1.0;
    }
  }
  return m;
}

struct StepResult {
  int next = 0;
  double reward = 0.0;
  bool terminal = false;
};

inline StepResult env_step(const FourRoomsEnv& env, int cell, int action) {
  if (cell < 0 || cell >= env.n_cells())
    throw FourRoomsError("cell id " + fmt(long(cell)) + " is not walkable");
  if (action < 0 || action >= 4)
    throw FourRoomsError("action must be one of up/down/left/right");
  if (cell == env.goal) return {env.goal, 0.0, true};
  const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
  auto [r, c] = env.pos_of[cell];
  int rr = r + dr[action], cc = c + dc[action];
  int next = cell;
  if (rr >= 0 && rr < env.rows && cc >= 0 && cc < env.cols) {
    int id = env.cell_of[size_t(rr) * env.cols + cc];
    if (id >= 0) next = id;
  }
  StepResult out;
  out.next = next;
  out.reward = (next == env.goal) ? 1.0 : 0.0;
  out.terminal = (next == env.goal);
  return out;
}

inline std::vector<double> one_hot_cell(const FourRoomsEnv& env, int cell) {
  if (cell < 0 || cell >= env.n_cells())
    throw FourRoomsError("cell id " + fmt(long(cell)) + " is not walkable");
  std::vector<double> v(env.n_cells(), 0.0);
  v[cell] = 1.0;
  return v;
}

// ---- policies and evaluation ----

// epsilon-greedy over the learner's current values: a uniform action with
// probability epsilon, else the lowest-index argmax of Q_theta(s, .). Holds
// a pointer so it always reads the latest parameters.
class EpsGreedySampler {
 public:
  EpsGreedySampler(const QApproximator* q, double epsilon, uint64_t seed)
      : q_(q), epsilon_(epsilon), rng_(seed) {}

  int operator()(const FourRoomsEnv& env, int cell) {
    if (detail::unit01(rng_) < epsilon_)
      return static_cast<int>(detail::unit01(rng_) * 4.0);
    std::vector<double> vals = q_forward(*q_, one_hot_cell(env, cell));
    return static_cast<int>(
        std::max_element(vals.begin(), vals.end()) - vals.begin());
  }

 private:
  const QApproximator* q_;
  double epsilon_;
  std::mt19937_64 rng_;
};

inline EpsGreedySampler behavior_policy(const QApproximator& q,
                                        double epsilon, uint64_t seed = 0) {
  if (!(epsilon >= 0.0) || !(epsilon <= 1.0))
    throw FourRoomsError("epsilon must lie in [0,1], got " + fmt(epsilon));
  return EpsGreedySampler(&q, epsilon, seed);
}

// the learner's full value table, one forward pass per cell
inline std::vector<double> q_table(const FourRoomsEnv& env,
                                   const QApproximator& q) {
  std::vector<double> table(size_t(env.n_cells()) * 4, 0.0);
  for (int s = 0; s < env.n_cells(); ++s) {
    std::vector<double> vals = q_forward(q, one_hot_cell(env, s));
    for (int a = 0; a < 4; ++a) table[size_t(s) * 4 + a] = vals[a];
  }
  return table;
}

// exact action values of the greedy policy extracted from the learner
inline std::vector<double> true_q_of_greedy(const FourRoomsEnv& env,
                                            const QApproximator& q) {
  Policy pi = greedy_policy(env.mdp, q_table(env, q));
  return evaluate_policy_exact(env.mdp, pi);
}

struct EvalReport {
  double avg_regret = 0.0;
  double max_q_error = 0.0;  // max_(s,a) squared gap to the greedy oracle
  bool soft_divergent = false;
  std::vector<double> episode_regrets;
};

inline EvalReport evaluate(const FourRoomsEnv& env, const QApproximator& q,
                           int n_episodes = 100, double epsilon_eval = 0.1,
                           uint64_t seed = 0) {
  if (n_episodes < 1) throw FourRoomsError("need at least one episode");
  EpsGreedySampler sampler = behavior_policy(q, epsilon_eval, seed);
  EvalReport rep;
  for (int ep = 0; ep < n_episodes; ++ep) {
    int cell = env.start;
    double ret = 0.0, disc = 1.0;
    for (int t = 0; t < env.episode_cap; ++t) {
      StepResult sr = env_step(env, cell, sampler(env, cell));
      ret += disc * sr.reward;
      disc *= env.gamma;
      cell = sr.next;
      if (sr.terminal) break;
    }
    rep.episode_regrets.push_back(env.v_star_start - ret);
    rep.avg_regret += rep.episode_regrets.back();
  }
  rep.avg_regret /= double(n_episodes);

  std::vector<double> learned = q_table(env, q);
  std::vector<double> truth = true_q_of_greedy(env, q);
  for (size_t i = 0; i < learned.size(); ++i) {
    double d = learned[i] - truth[i];
    rep.max_q_error = std::max(rep.max_q_error, d * d);
  }
  rep.soft_divergent = rep.max_q_error > 1.0;
  return rep;
}

// ---- the experiment loop ----

struct ExperimentConfig {
  TrainConfig train;
  ApproxKind approx = ApproxKind::mlp1;
  int hidden = 64;
  double epsilon_behavior = 0.5;
  long eval_every = 500;
  int eval_episodes = 100;
  double epsilon_eval = 0.1;
  size_t replay_capacity = 10000;
};

struct ExperimentPoint {
  long step = 0;
  EvalReport report;
};

// Collect one transition, take one training step once the buffer can fill a
// batch, evaluate on a schedule. Exploration, replay, and each evaluation
// draw from separate seeded streams, so changing the evaluation workload
// can never perturb the training trajectory.
inline std::vector<ExperimentPoint> run_experiment(const FourRoomsEnv& env,
                                                   const ExperimentConfig& cfg) {
  validate_config(cfg.train);
  if (cfg.train.total_steps < 1)
    throw FourRoomsError("total_steps must be positive");
  if (cfg.eval_every < 1) throw FourRoomsError("eval_every must be positive");
  if (!(cfg.epsilon_behavior >= 0.0) || !(cfg.epsilon_behavior <= 1.0))
    throw FourRoomsError("epsilon_behavior must lie in [0,1]");

  uint64_t seed = cfg.train.seed;
  QApproximator q = make_approximator(cfg.approx, env.n_cells(), 4,
                                      cfg.hidden, detail::stream_seed(seed, 0));
  EpsGreedySampler explore = behavior_policy(q, cfg.epsilon_behavior,
                                             detail::stream_seed(seed, 1));
  ReplayBuffer buf(cfg.replay_capacity, detail::stream_seed(seed, 2));

  std::vector<ExperimentPoint> points;
  int cell = env.start;
  int ep_steps = 0;
  for (long step = 0; step < cfg.train.total_steps; ++step) {
    int a = explore(env, cell);
    StepResult sr = env_step(env, cell, a);
    buf.push(Transition{one_hot_cell(env, cell), a, sr.reward,
                        one_hot_cell(env, sr.next), sr.terminal});
    ++ep_steps;
    if (sr.terminal || ep_steps >= env.episode_cap) {
      cell = env.start;
      ep_steps = 0;
    } else {
      cell = sr.next;
    }

    if (buf.size() >= size_t(cfg.train.batch_size))
      train_step(q, buf, cfg.train, step);

    if ((step + 1) % cfg.eval_every == 0 ||
        step + 1 == cfg.train.total_steps) {
      ExperimentPoint pt;
      pt.step = step + 1;
      pt.report = evaluate(env, q, cfg.eval_episodes, cfg.epsilon_eval,
                           detail::stream_seed(seed, 100 + points.size()));
      points.push_back(std::move(pt));
    }
  }
  return points;
}

// ---- persistence ----

inline std::string results_csv_header() {
  return "agent,epsilon,kappa,period,seed,eval_step,avg_regret,max_q_error,"
         "soft_divergent";
}

inline std::string results_csv_row(const ExperimentConfig& cfg,
                                   const ExperimentPoint& pt) {
  return to_string(cfg.train.loss) + "," + fmt(cfg.epsilon_behavior) + "," +
         fmt(cfg.train.kappa) + "," + fmt(cfg.train.target_period) + "," +
         fmt(long(cfg.train.seed)) + "," + fmt(pt.step) + "," +
         fmt(pt.report.avg_regret) + "," + fmt(pt.report.max_q_error) + "," +
         (pt.report.soft_divergent ? "1" : "0");
}

inline nlohmann::json fourrooms_to_json(const FourRoomsEnv& env) {
  nlohmann::json j;
  j["grid"] = env.grid;
  j["codes"] = {{"wall", "#"}, {"floor", "."}, {"start", "S"}, {"goal", "G"}};
  j["gamma"] = env.gamma;
  j["episode_cap"] = env.episode_cap;
  return j;
}

inline FourRoomsEnv fourrooms_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception&) {
    throw FourRoomsError("malformed JSON layout document");
  }
  if (!j.contains("grid") || !j["grid"].is_array())
    throw FourRoomsError("layout document is missing its grid");
  std::vector<std::string> grid;
  for (const auto& row : j["grid"]) grid.push_back(row.get<std::string>());
  double gamma = j.value("gamma", 0.99);
  int cap = j.value("episode_cap", 500);
  return make_fourrooms(grid, gamma, cap);
}

}  // namespace tdlab
