#include <catch2/catch_amalgamated.hpp>

#include "tdlab/mdp.hpp"
#include "tdlab/oracle.hpp"
#include "helpers.hpp"

using namespace tdlab;
using Catch::Matchers::ContainsSubstring;

namespace {

// Two-state chain used throughout: s0 always moves to s1, s1 flips a coin.
Mdp two_state_chain() {
  Mdp m;
  m.n_states = 2;
  m.n_actions = 1;
  m.gamma = 0.99;
  m.transition = {0.0, 1.0, 0.5, 0.5};
  m.reward = {0.0, 0.0};
  m.initial = {1.0, 0.0};
  return m;
}

Mdp random_mdp(std::mt19937_64& rng, int n_states, int n_actions,
               double gamma) {
  Mdp m;
  m.n_states = n_states;
  m.n_actions = n_actions;
  m.gamma = gamma;
  m.transition.resize(static_cast<size_t>(n_states) * n_actions * n_states);
  m.reward.resize(static_cast<size_t>(n_states) * n_actions);
  m.initial.assign(n_states, 1.0 / n_states);
  for (int s = 0; s < n_states; ++s)
    for (int a = 0; a < n_actions; ++a) {
      double sum = 0.0;
      std::vector<double> row(n_states);
      for (int s2 = 0; s2 < n_states; ++s2) {
        row[s2] = -std::log(testutil::uniform01(rng));
        sum += row[s2];
      }
      for (int s2 = 0; s2 < n_states; ++s2) m.p(s, a, s2) = row[s2] / sum;
      m.r(s, a) = testutil::uniform(rng, -1.0, 1.0);
    }
  return m;
}

Policy random_policy(std::mt19937_64& rng, const Mdp& m) {
  Policy pi(m.n_sa());
  for (int s = 0; s < m.n_states; ++s) {
    double sum = 0.0;
    for (int a = 0; a < m.n_actions; ++a) {
      pi[q_index(m, s, a)] = -std::log(testutil::uniform01(rng));
      sum += pi[q_index(m, s, a)];
    }
    for (int a = 0; a < m.n_actions; ++a) pi[q_index(m, s, a)] /= sum;
  }
  return pi;
}

}  // namespace

TEST_CASE("policy transition of a single-action chain is the chain itself") {
  Mdp m = two_state_chain();
  Matrix p = policy_transition(m, uniform_policy(m));
  REQUIRE(p.rows() == 2);
  CHECK(p(0, 0) == 0.0);
  CHECK(p(0, 1) == 1.0);
  CHECK(p(1, 0) == 0.5);
  CHECK(p(1, 1) == 0.5);
}

TEST_CASE("policy transition interleaves dynamics and policy") {
  Mdp m;
  m.n_states = 2;
  m.n_actions = 2;
  m.gamma = 0.9;
  // P[s][a][s']: s0/a0 -> s0, s0/a1 -> s1, s1/a0 coin, s1/a1 biased.
  m.transition = {1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.2, 0.8};
  m.reward = {0.0, 0.0, 0.0, 0.0};
  m.initial = {0.5, 0.5};
  Policy pi = {0.3, 0.7, 0.6, 0.4};

  Matrix p = policy_transition(m, pi);
  double want[4][4] = {{0.3, 0.7, 0.0, 0.0},
                       {0.0, 0.0, 0.6, 0.4},
                       {0.15, 0.35, 0.3, 0.2},
                       {0.06, 0.14, 0.48, 0.32}};
  for (int i = 0; i < 4; ++i) {
    double sum = 0.0;
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(p(i, j) - want[i][j]) < 1e-15);
      sum += p(i, j);
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("stationary distribution of the two-state chain is (1/3, 2/3)") {
  Matrix p(2, 2);
  p(0, 0) = 0.0; p(0, 1) = 1.0;
  p(1, 0) = 0.5; p(1, 1) = 0.5;
  std::vector<double> d = stationary_distribution(p);
  CHECK(std::abs(d[0] - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(d[1] - 2.0 / 3.0) < 1e-12);
}

TEST_CASE("stationary distribution matches inverse iteration on random chains") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    Mdp m = random_mdp(rng, 5, 2, 0.9);
    Matrix p = policy_transition(m, random_policy(rng, m));
    std::vector<double> d = stationary_distribution(p);
    std::vector<double> ref = oracle::stationary_by_inverse_iteration(p);
    double sum = 0.0;
    for (int i = 0; i < p.rows(); ++i) {
      CHECK(d[i] >= 0.0);
      CHECK(std::abs(d[i] - ref[i]) < 1e-10);
      sum += d[i];
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
    // d is a left fixed point: d^T P = d^T.
    for (int j = 0; j < p.rows(); ++j) {
      double acc = 0.0;
      for (int i = 0; i < p.rows(); ++i) acc += d[i] * p(i, j);
      CHECK(std::abs(acc - d[j]) < 1e-12);
    }
  }
}

TEST_CASE("exact policy evaluation agrees with the discounted power series") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    Mdp m = random_mdp(rng, 3, 2, 0.9);
    Policy pi = random_policy(rng, m);
    std::vector<double> q = evaluate_policy_exact(m, pi);
    Matrix p = policy_transition(m, pi);
    std::vector<double> ref =
        oracle::value_by_power_series(p, reward_vector(m), m.gamma);
    REQUIRE(q.size() == ref.size());
    for (size_t i = 0; i < q.size(); ++i)
      CHECK(std::abs(q[i] - ref[i]) < 1e-8);
    // Bellman identity Q = R + gamma P Q.
    std::vector<double> pq = mat_vec(p, q);
    for (size_t i = 0; i < q.size(); ++i)
      CHECK(std::abs(m.reward[i] + m.gamma * pq[i] - q[i]) < 1e-10);
  }
}

TEST_CASE("value iteration solves a hand-checkable MDP") {
  // s1 pays 1 forever under either action; from s0, action 1 reaches s1.
  // With gamma = 1/2: Q*(s1,.) = 2, Q*(s0,a1) = 1, Q*(s0,a0) = 1/2.
  Mdp m;
  m.n_states = 2;
  m.n_actions = 2;
  m.gamma = 0.5;
  m.transition = {1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0};
  m.reward = {0.0, 0.0, 1.0, 1.0};
  m.initial = {1.0, 0.0};

  ValueIterationResult res = value_iteration_exact(m, 1e-12);
  CHECK(std::abs(res.q[0] - 0.5) < 1e-10);
  CHECK(std::abs(res.q[1] - 1.0) < 1e-10);
  CHECK(std::abs(res.q[2] - 2.0) < 1e-10);
  CHECK(std::abs(res.q[3] - 2.0) < 1e-10);
  CHECK(res.residual < 1e-12);
  // s0 picks the better action; the s1 tie breaks to action 0.
  CHECK(res.greedy[q_index(m, 0, 1)] == 1.0);
  CHECK(res.greedy[q_index(m, 1, 0)] == 1.0);
  CHECK(res.greedy[q_index(m, 1, 1)] == 0.0);
}

TEST_CASE("value iteration output dominates every sampled policy") {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 5; ++trial) {
    Mdp m = random_mdp(rng, 4, 3, 0.85);
    ValueIterationResult res = value_iteration_exact(m, 1e-12);
    // The greedy policy attains the fixed point it was read from.
    std::vector<double> q_greedy = evaluate_policy_exact(m, res.greedy);
    for (size_t i = 0; i < q_greedy.size(); ++i)
      CHECK(std::abs(q_greedy[i] - res.q[i]) < 1e-8);
    for (int k = 0; k < 10; ++k) {
      std::vector<double> q_pi =
          evaluate_policy_exact(m, random_policy(rng, m));
      for (size_t i = 0; i < q_pi.size(); ++i)
        CHECK(q_pi[i] <= res.q[i] + 1e-9);
    }
  }
}

TEST_CASE("mdp JSON round trip preserves every number") {
  std::mt19937_64 rng(9);
  Mdp m = random_mdp(rng, 4, 2, 0.973);
  nlohmann::json j = mdp_to_json(m);
  Mdp back = mdp_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.n_states == m.n_states);
  CHECK(back.n_actions == m.n_actions);
  CHECK(back.gamma == m.gamma);
  CHECK(back.transition == m.transition);
  CHECK(back.reward == m.reward);
  CHECK(back.initial == m.initial);
}

TEST_CASE("mdp validation points at the broken row") {
  Mdp m = two_state_chain();

  SECTION("row that does not sum to one") {
    m.p(1, 0, 0) = 0.7;  // row (s=1,a=0) now sums to 1.2
    CHECK_THROWS_WITH(validate_mdp(m),
                      ContainsSubstring("(s=1,a=0)") &&
                          ContainsSubstring("sums to"));
  }
  SECTION("negative probability names the exact entry") {
    m.p(0, 0, 0) = -0.25;
    CHECK_THROWS_WITH(validate_mdp(m),
                      ContainsSubstring("(s=0,a=0,s'=0)"));
  }
  SECTION("gamma outside the open unit interval") {
    m.gamma = 1.0;
    CHECK_THROWS_WITH(validate_mdp(m), ContainsSubstring("gamma"));
  }
  SECTION("wrong tensor length") {
    m.transition.pop_back();
    CHECK_THROWS_WITH(validate_mdp(m),
                      ContainsSubstring("transition tensor"));
  }
  SECTION("missing JSON field") {
    nlohmann::json j = mdp_to_json(m);
    j.erase("reward");
    CHECK_THROWS_WITH(mdp_from_json(j), ContainsSubstring("malformed"));
  }
  SECTION("policy row off by mass") {
    Mdp m2;
    m2.n_states = 2;
    m2.n_actions = 2;
    m2.gamma = 0.9;
    m2.transition = {1.0, 0.0, 0.0, 1.0, 0.5, 0.5, 0.2, 0.8};
    m2.reward = {0.0, 0.0, 0.0, 0.0};
    m2.initial = {0.5, 0.5};
    Policy bad = {0.4, 0.4, 0.5, 0.5};
    CHECK_THROWS_WITH(validate_policy(m2, bad),
                      ContainsSubstring("row s=0"));
  }
}
