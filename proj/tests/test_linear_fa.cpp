#include <catch2/catch_amalgamated.hpp>

#include "tdlab/linear_fa.hpp"
#include "tdlab/oracle.hpp"
#include "helpers.hpp"

using namespace tdlab;
using Catch::Matchers::ContainsSubstring;

namespace {

// The reward-less two-state chain: s0 -> s1 surely, s1 flips a coin. With a
// single scalar feature per state every matrix below is a scalar, so the
// expected numbers can be checked by hand:
//   phi = (1, 2),  d = (0.9, 0.1):  gram = 1.3, cross = 2.1,  A0 = -0.779
//   phi = (1, -2), d = (0.9, 0.1):  gram = 1.3, cross = -1.7
LinearFaProblem two_state(double d0, double phi0, double phi1,
                          double gamma = 0.99) {
  Mdp m;
  m.n_states = 2;
  m.n_actions = 1;
  m.gamma = gamma;
  m.transition = {0.0, 1.0, 0.5, 0.5};
  m.reward = {0.0, 0.0};
  m.initial = {1.0, 0.0};
  Matrix phi(2, 1);
  phi(0, 0) = phi0;
  phi(1, 0) = phi1;
  return make_problem(m, phi, {d0, 1.0 - d0}, uniform_policy(m));
}

std::vector<double> random_vec(std::mt19937_64& rng, int n, double lo,
                               double hi) {
  std::vector<double> v(n);
  for (double& x : v) x = testutil::uniform(rng, lo, hi);
  return v;
}

double err_norm(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("two-state instance produces the hand-computed scalars") {
  LinearFaProblem up = two_state(0.9, 1.0, 2.0);
  CHECK(std::abs(up.gram(0, 0) - 1.3) < 1e-12);
  CHECK(std::abs(up.cross(0, 0) - 2.1) < 1e-12);
  CHECK(std::abs(td_matrix(up)(0, 0) - (-0.779)) < 1e-12);
  CHECK(std::abs(spectrum(tn_limit_matrix(up)).radius - 2.079 / 1.3) < 1e-12);
  CHECK(std::abs(spectrum(tn_limit_matrix(up)).radius - 1.599) < 1e-3);

  LinearFaProblem down = two_state(0.9, 1.0, -2.0);
  CHECK(std::abs(down.gram(0, 0) - 1.3) < 1e-12);
  CHECK(std::abs(down.cross(0, 0) - (-1.7)) < 1e-12);
  CHECK(std::abs(tn_limit_matrix(down)(0, 0) - (-1.2946)) < 1e-3);
  CHECK(std::abs(fr_matrix(down, 0.1)(0, 0) - 3.113) < 1e-12);
  CHECK(std::abs(spectrum(fr_limit_matrix(down, 0.1)).radius - 0.0418) < 1e-3);
}

TEST_CASE("construction rejects broken inputs") {
  Mdp m;
  m.n_states = 2;
  m.n_actions = 1;
  m.gamma = 0.9;
  m.transition = {0.0, 1.0, 0.5, 0.5};
  m.reward = {0.0, 0.0};
  m.initial = {1.0, 0.0};
  Policy pi = uniform_policy(m);

  SECTION("feature row count") {
    Matrix phi(3, 1);
    CHECK_THROWS_WITH(make_problem(m, phi, {0.5, 0.5}, pi),
                      ContainsSubstring("rows"));
  }
  SECTION("weights must sum to one") {
    Matrix phi(2, 1);
    phi(0, 0) = 1.0;
    phi(1, 0) = 1.0;
    CHECK_THROWS_WITH(make_problem(m, phi, {0.6, 0.6}, pi),
                      ContainsSubstring("sum"));
    CHECK_THROWS_WITH(make_problem(m, phi, {1.4, -0.4}, pi),
                      ContainsSubstring("negative"));
  }
  SECTION("singular gram matrix") {
    Matrix phi(2, 2);  // two identical columns
    phi(0, 0) = phi(0, 1) = 1.0;
    phi(1, 0) = phi(1, 1) = 2.0;
    CHECK_THROWS_WITH(make_problem(m, phi, {0.5, 0.5}, pi),
                      ContainsSubstring("gram"));
  }
}

TEST_CASE("td semigradient vanishes at the fixed point and matches finite differences") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    InstanceOptions opt;
    opt.n_states = 4;
    opt.n_features = 2;
    opt.gamma = 0.9;
    LinearFaProblem pr = random_instance(rng, opt);

    std::vector<double> wstar = td_fixed_point(pr);
    WeightVector at_star{wstar, wstar};
    for (double g : td_semigradient(pr, at_star)) CHECK(std::abs(g) < 1e-10);

    // Finite differences of the weighted squared residual with the bootstrap
    // target held fixed at the expansion point.
    std::vector<double> w0 = random_vec(rng, pr.p(), -2.0, 2.0);
    std::vector<double> q0 = mat_vec(pr.phi, w0);
    std::vector<double> pq0 = mat_vec(pr.chain, q0);
    std::vector<double> target(pr.n());
    for (int i = 0; i < pr.n(); ++i)
      target[i] = pr.mdp.reward[i] + pr.mdp.gamma * pq0[i];
    auto frozen_loss = [&](const std::vector<double>& w) {
      std::vector<double> q = mat_vec(pr.phi, w);
      double acc = 0.0;
      for (int i = 0; i < pr.n(); ++i) {
        double resid = target[i] - q[i];
        acc += 0.5 * pr.dist[i] * resid * resid;
      }
      return acc;
    };
    std::vector<double> fd = oracle::central_diff_grad(frozen_loss, w0);
    std::vector<double> g = td_semigradient(pr, {w0, w0});
    for (int j = 0; j < pr.p(); ++j)
      CHECK(std::abs(fd[j] - g[j]) < 1e-6 * std::max(1.0, std::abs(g[j])));
  }
}

TEST_CASE("zero rewards and zero weights give a zero td semigradient") {
  LinearFaProblem pr = two_state(0.7, 1.0, 2.0);
  WeightVector wv{{0.0}, {0.0}};
  CHECK(td_semigradient(pr, wv)[0] == 0.0);
}

TEST_CASE("semigradient decomposition identities hold to machine precision") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    InstanceOptions opt;
    opt.n_states = 5;
    opt.n_features = 3;
    opt.gamma = 0.95;
    LinearFaProblem pr = random_instance(rng, opt);
    WeightVector wv{random_vec(rng, 3, -2.0, 2.0),
                    random_vec(rng, 3, -2.0, 2.0)};
    std::vector<double> gap(3);
    for (int j = 0; j < 3; ++j) gap[j] = wv.w[j] - wv.frozen[j];

    // tn - td = gamma cross (w - wbar)
    std::vector<double> td = td_semigradient(pr, wv);
    std::vector<double> tn = tn_semigradient(pr, wv);
    std::vector<double> want = mat_vec(pr.cross, gap);
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(tn[j] - td[j] - pr.mdp.gamma * want[j]) < 1e-12);

    // fr - td = kappa gram (w - wbar)
    IterationSpec spec;
    spec.algorithm = Algorithm::FR;
    spec.kappa = 0.37;
    std::vector<double> fr = fr_semigradient(pr, spec, wv);
    std::vector<double> pull = mat_vec(pr.gram, gap);
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(fr[j] - td[j] - spec.kappa * pull[j]) < 1e-12);

    // with w = wbar both reduce to td exactly
    WeightVector synced{wv.w, wv.w};
    std::vector<double> td2 = td_semigradient(pr, synced);
    CHECK(err_norm(tn_semigradient(pr, synced), td2) < 1e-15);
    CHECK(err_norm(fr_semigradient(pr, spec, synced), td2) < 1e-15);

    // kappa = 0 degenerates fr to td at any (w, wbar)
    IterationSpec zero = spec;
    zero.kappa = 0.0;
    CHECK(err_norm(fr_semigradient(pr, zero, wv), td) == 0.0);
  }
}

TEST_CASE("fr semigradient matches finite differences of the full objective") {
  std::mt19937_64 rng(53);
  InstanceOptions opt;
  opt.n_states = 4;
  opt.n_features = 2;
  opt.gamma = 0.9;
  LinearFaProblem pr = random_instance(rng, opt);
  std::vector<double> w0 = random_vec(rng, 2, -1.0, 1.0);
  std::vector<double> wbar = random_vec(rng, 2, -1.0, 1.0);
  double kappa = 0.8;

  std::vector<double> q0 = mat_vec(pr.phi, w0);
  std::vector<double> pq0 = mat_vec(pr.chain, q0);
  std::vector<double> target(pr.n());
  for (int i = 0; i < pr.n(); ++i)
    target[i] = pr.mdp.reward[i] + pr.mdp.gamma * pq0[i];
  std::vector<double> qbar = mat_vec(pr.phi, wbar);
  auto objective = [&](const std::vector<double>& w) {
    std::vector<double> q = mat_vec(pr.phi, w);
    double acc = 0.0;
    for (int i = 0; i < pr.n(); ++i) {
      double resid = target[i] - q[i];
      double gap = q[i] - qbar[i];
      acc += 0.5 * pr.dist[i] * (resid * resid + kappa * gap * gap);
    }
    return acc;
  };
  std::vector<double> fd = oracle::central_diff_grad(objective, w0);
  IterationSpec spec;
  spec.algorithm = Algorithm::FR;
  spec.kappa = kappa;
  std::vector<double> g = fr_semigradient(pr, spec, {w0, wbar});
  for (int j = 0; j < pr.p(); ++j)
    CHECK(std::abs(fd[j] - g[j]) < 1e-6 * std::max(1.0, std::abs(g[j])));
}

TEST_CASE("td fixed point: zero rewards, tabular features, singular case") {
  SECTION("zero rewards give w* = 0") {
    LinearFaProblem pr = two_state(0.6, 1.0, 2.0);
    CHECK(td_fixed_point(pr)[0] == 0.0);
  }
  SECTION("tabular features recover exact policy evaluation") {
    std::mt19937_64 rng(12);
    Mdp m;
    m.n_states = 3;
    m.n_actions = 1;
    m.gamma = 0.9;
    m.transition = {0.2, 0.5, 0.3, 0.4, 0.1, 0.5, 0.25, 0.25, 0.5};
    m.reward = {1.0, -0.5, 0.25};
    m.initial = {1.0, 0.0, 0.0};
    Policy pi = uniform_policy(m);
    LinearFaProblem pr =
        make_problem(m, Matrix::identity(3), {0.2, 0.3, 0.5}, pi);
    std::vector<double> w = td_fixed_point(pr);
    std::vector<double> q = evaluate_policy_exact(m, pi);
    CHECK(err_norm(mat_vec(pr.phi, w), q) < 1e-10);
  }
  SECTION("a singular system is reported as having no fixed point") {
    // For phi = (1,2) the scalar curvature is 1.03 - 2.01 d0; the root makes
    // the system exactly singular.
    LinearFaProblem pr = two_state(1.03 / 2.01, 1.0, 2.0);
    CHECK_THROWS_WITH(td_fixed_point(pr),
                      ContainsSubstring("no TD fixed point"));
  }
}

TEST_CASE("inner fixed points satisfy their bias identities") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 8; ++trial) {
    InstanceOptions opt;
    opt.n_states = 5;
    opt.n_features = 2;
    opt.gamma = 0.93;
    LinearFaProblem pr = random_instance(rng, opt);
    std::vector<double> wstar = td_fixed_point(pr);
    std::vector<double> wbar = random_vec(rng, 2, -3.0, 3.0);
    std::vector<double> bias(2);
    for (int j = 0; j < 2; ++j) bias[j] = wbar[j] - wstar[j];

    // tn: w(wbar) - w* = limit_matrix (wbar - w*)
    std::vector<double> tn = tn_inner_fixed_point(pr, wbar);
    std::vector<double> tn_want = mat_vec(tn_limit_matrix(pr), bias);
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(tn[j] - wstar[j] - tn_want[j]) < 1e-10);

    // fr: same shape with the fr limit matrix
    double kappa = 0.25;
    std::vector<double> fr = fr_inner_fixed_point(pr, kappa, wbar);
    std::vector<double> fr_want = mat_vec(fr_limit_matrix(pr, kappa), bias);
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(fr[j] - wstar[j] - fr_want[j]) < 1e-10);

    // feeding w* back in returns w* for both
    CHECK(err_norm(tn_inner_fixed_point(pr, wstar), wstar) < 1e-10);
    CHECK(err_norm(fr_inner_fixed_point(pr, kappa, wstar), wstar) < 1e-10);

    // kappa = 0 ignores wbar entirely
    CHECK(err_norm(fr_inner_fixed_point(pr, 0.0, wbar), wstar) < 1e-10);
  }
}

TEST_CASE("iteration matrix special cases") {
  std::mt19937_64 rng(61);
  InstanceOptions opt;
  opt.n_states = 4;
  opt.n_features = 2;
  opt.gamma = 0.9;
  LinearFaProblem pr = random_instance(rng, opt);

  SECTION("td with eta = 0 is the identity") {
    IterationSpec spec;
    spec.algorithm = Algorithm::TD0;
    spec.eta = 0.0;
    Matrix m = iteration_matrix(pr, spec);
    CHECK(max_abs_diff(m, Matrix::identity(2)) == 0.0);
  }
  SECTION("fr with kappa = 0 and period 1 equals the td matrix") {
    IterationSpec fr;
    fr.algorithm = Algorithm::FR;
    fr.eta = 0.05;
    fr.period = 1;
    fr.kappa = 0.0;
    IterationSpec td = fr;
    td.algorithm = Algorithm::TD0;
    CHECK(max_abs_diff(iteration_matrix(pr, fr), iteration_matrix(pr, td)) <
          1e-15);
  }
  SECTION("a huge period collapses tn onto its limit matrix") {
    IterationSpec spec;
    spec.algorithm = Algorithm::TN;
    spec.eta = stable_step_size(pr.gram);
    spec.period = 1'000'000;
    Matrix m = iteration_matrix(pr, spec);
    Matrix limit = tn_limit_matrix(pr);
    CHECK(max_abs_diff(m, limit) < 1e-9);
    CHECK(std::abs(spectrum(m).radius - spectrum(limit).radius) < 1e-9);
  }
}

TEST_CASE("one outer step of the literal loop matches the iteration matrix") {
  // The loop walks through semigradients in value space; the matrix is
  // assembled from the cached gram products. Agreement is a real cross-check.
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 6; ++trial) {
    InstanceOptions opt;
    opt.n_states = 4;
    opt.n_features = 2;
    opt.gamma = 0.9;
    LinearFaProblem pr = random_instance(rng, opt);
    std::vector<double> wstar;
    try {
      wstar = td_fixed_point(pr);
    } catch (const MatrixError&) {
      continue;  // singular draw, nothing to compare against
    }
    std::vector<double> w0 = random_vec(rng, 2, -1.0, 1.0);

    for (Algorithm alg : {Algorithm::TD0, Algorithm::TN, Algorithm::FR}) {
      IterationSpec spec;
      spec.algorithm = alg;
      spec.eta = 0.04;
      spec.period = 7;
      spec.kappa = 0.3;
      IterationResult run = run_iteration(pr, spec, w0, 1);
      REQUIRE(run.trajectory.size() == 1);
      Matrix m = iteration_matrix(pr, spec);
      std::vector<double> err0(2);
      for (int j = 0; j < 2; ++j) err0[j] = w0[j] - wstar[j];
      std::vector<double> predicted = mat_vec(m, err0);
      for (int j = 0; j < 2; ++j)
        CHECK(std::abs(run.trajectory[0].w[j] - wstar[j] - predicted[j]) <
              1e-9);
    }
  }
}

TEST_CASE("classification of the frozen two-state instances") {
  SECTION("td diverges when the curvature scalar is negative") {
    LinearFaProblem pr = two_state(0.9, 1.0, 2.0);
    IterationSpec spec;
    spec.algorithm = Algorithm::TD0;
    spec.eta = stable_step_size(td_matrix(pr));
    SpectralReport rep = classify(pr, spec);
    CHECK(rep.classification == Classification::diverges);
    CHECK(rep.matrix_kind == "td_step");
    CHECK(std::abs(rep.spectrum.radius - 2.0) < 1e-12);
  }
  SECTION("tn composed at large period diverges where fr converges") {
    LinearFaProblem pr = two_state(0.9, 1.0, -2.0);
    IterationSpec tn;
    tn.algorithm = Algorithm::TN;
    tn.eta = stable_step_size(pr.gram);
    tn.period = 10'000;
    SpectralReport tn_rep = classify(pr, tn);
    CHECK(tn_rep.classification == Classification::diverges);
    CHECK(std::abs(tn_rep.spectrum.radius - 1.2946) < 1e-3);

    IterationSpec fr;
    fr.algorithm = Algorithm::FR;
    fr.kappa = 0.1;
    fr.eta = stable_step_size(fr_matrix(pr, fr.kappa));
    fr.period = 10'000;
    SpectralReport fr_rep = classify(pr, fr);
    CHECK(fr_rep.classification == Classification::converges);
    CHECK(std::abs(fr_rep.spectrum.radius - 0.0418) < 1e-3);
  }
  SECTION("marginal band around radius one") {
    CHECK(classify_matrix(Matrix::diag({1.0}), "x").classification ==
          Classification::marginal);
    CHECK(classify_matrix(Matrix::diag({1.0 + 5e-10}), "x").classification ==
          Classification::marginal);
    CHECK(classify_matrix(Matrix::diag({1.0 + 5e-9}), "x").classification ==
          Classification::diverges);
    CHECK(classify_matrix(Matrix::diag({1.0 - 5e-9}), "x").classification ==
          Classification::converges);
  }
  SECTION("non-finite iteration matrix is a divergence verdict") {
    Matrix bad(1, 1);
    bad(0, 0) = std::numeric_limits<double>::infinity();
    SpectralReport rep = classify_matrix(bad, "x");
    CHECK(rep.classification == Classification::diverges);
    CHECK_FALSE(rep.solver_failed);
    CHECK(std::isinf(rep.spectrum.radius));
  }
}

TEST_CASE("on-policy td with the adaptive step converges") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    InstanceOptions opt;
    opt.n_states = 5;
    opt.n_features = 2;
    opt.gamma = 0.95;
    opt.mode = DistMode::stationary;
    LinearFaProblem pr = random_instance(rng, opt);
    IterationSpec spec;
    spec.algorithm = Algorithm::TD0;
    spec.eta = stable_step_size(td_matrix(pr));
    CHECK(classify(pr, spec).classification == Classification::converges);
  }
}

TEST_CASE("the literal loop settles on the shared fixed point") {
  std::mt19937_64 rng(997);
  InstanceOptions opt;
  opt.n_states = 4;
  opt.n_features = 2;
  opt.gamma = 0.9;
  opt.mode = DistMode::stationary;
  LinearFaProblem pr = random_instance(rng, opt);
  std::vector<double> wstar = td_fixed_point(pr);
  std::vector<double> w0 = random_vec(rng, 2, -1.0, 1.0);

  SECTION("starting at w* stays at w*") {
    IterationSpec spec;
    spec.algorithm = Algorithm::TN;
    spec.eta = stable_step_size(pr.gram);
    spec.period = 50;
    IterationResult res = run_iteration(pr, spec, wstar, 5);
    CHECK_FALSE(res.diverged);
    CHECK(err_norm(res.trajectory.back().w, wstar) < 1e-10);
  }
  SECTION("tn and fr both land on w*") {
    IterationSpec tn;
    tn.algorithm = Algorithm::TN;
    tn.eta = stable_step_size(pr.gram);
    tn.period = 100;
    IterationResult tn_res = run_iteration(pr, tn, w0, 400);
    CHECK_FALSE(tn_res.diverged);
    CHECK(err_norm(tn_res.trajectory.back().w, wstar) < 1e-6);

    IterationSpec fr;
    fr.algorithm = Algorithm::FR;
    fr.kappa = 0.5;
    fr.eta = stable_step_size(fr_matrix(pr, fr.kappa));
    fr.period = 100;
    IterationResult fr_res = run_iteration(pr, fr, w0, 400);
    CHECK_FALSE(fr_res.diverged);
    CHECK(err_norm(fr_res.trajectory.back().w, wstar) < 1e-6);
  }
  SECTION("a divergent instance raises the flag quickly") {
    LinearFaProblem bad = two_state(0.9, 1.0, -2.0);
    IterationSpec spec;
    spec.algorithm = Algorithm::TN;
    spec.eta = stable_step_size(bad.gram);
    spec.period = 100;
    IterationResult res = run_iteration(bad, spec, {1.0}, 10'000);
    CHECK(res.diverged);
    CHECK(res.trajectory.size() < 10'000);
  }
}

TEST_CASE("inner-loop length bound is sufficient and monotone") {
  std::mt19937_64 rng(271);
  InstanceOptions opt;
  opt.n_states = 4;
  opt.n_features = 4;  // tabular-width features
  opt.gamma = 0.9;
  opt.mode = DistMode::stationary;
  LinearFaProblem pr = random_instance(rng, opt);

  double eta = stable_step_size(pr.gram);
  long k = k_lower_bound(pr, eta);
  CHECK(k >= 1);

  IterationSpec spec;
  spec.algorithm = Algorithm::TN;
  spec.eta = eta;
  spec.period = k;
  CHECK(classify(pr, spec).classification == Classification::converges);

  // weaker per-step contraction -> larger bound
  CHECK(k_lower_bound(pr, eta / 10.0) >= k);

  // inapplicable when the limit matrix itself diverges
  LinearFaProblem bad = two_state(0.9, 1.0, 2.0);
  CHECK_THROWS_WITH(k_lower_bound(bad, stable_step_size(bad.gram)),
                    ContainsSubstring("inapplicable"));
}

TEST_CASE("polyak update minimizes its proximal objective") {
  std::mt19937_64 rng(733);
  for (int trial = 0; trial < 100; ++trial) {
    int n = 1 + static_cast<int>(rng() % 8);
    std::vector<double> theta = random_vec(rng, n, -5.0, 5.0);
    std::vector<double> bar = random_vec(rng, n, -5.0, 5.0);
    double tau = testutil::uniform(rng, 0.01, 0.99);
    std::vector<double> out = polyak_update(theta, bar, tau);
    // gradient of 1/2||y - theta||^2 + (1-tau)/(2 tau) ||y - theta_bar||^2
    for (int i = 0; i < n; ++i) {
      double grad = (out[i] - theta[i]) +
                    (1.0 - tau) / tau * (out[i] - bar[i]);
      CHECK(std::abs(grad) < 1e-12);
    }
  }

  std::vector<double> v{1.0, 2.0};
  CHECK(polyak_update(v, v, 0.3) == v);
  std::vector<double> w{3.0, -1.0};
  std::vector<double> nearly = polyak_update(v, w, 1.0 - 1e-9);
  CHECK(std::abs(nearly[0] - v[0]) < 1e-8);
  CHECK(std::abs(nearly[1] - v[1]) < 1e-8);
  CHECK_THROWS_AS(polyak_update(v, w, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(polyak_update(v, w, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(polyak_update(v, w, -0.2), std::invalid_argument);
}

TEST_CASE("adaptive step size lands on the classic choices") {
  SECTION("symmetric positive definite: one over the largest eigenvalue") {
    Matrix m = Matrix::diag({2.0, 1.0});
    CHECK(std::abs(stable_step_size(m) - 0.5) < 1e-12);
  }
  SECTION("complex right-half-plane spectrum") {
    // eigenvalues 1 +- 2i: threshold Re/|z|^2 = 1/5
    Matrix m(2, 2);
    m(0, 0) = 1.0; m(0, 1) = -2.0;
    m(1, 0) = 2.0; m(1, 1) = 1.0;
    double eta = stable_step_size(m);
    CHECK(std::abs(eta - 0.2) < 1e-12);
    Matrix step = mat_sub(Matrix::identity(2), mat_scale(m, eta));
    CHECK(spectrum(step).radius < 1.0);
  }
  SECTION("left-half-plane eigenvalue falls back to the radius scale") {
    Matrix m = Matrix::diag({-1.0});
    CHECK(std::abs(stable_step_size(m) - 1.0) < 1e-12);
  }
}

TEST_CASE("spectral report serializes to the agreed schema") {
  LinearFaProblem pr = two_state(0.9, 1.0, -2.0);
  SpectralReport rep = classify_matrix(tn_limit_matrix(pr), "tn_limit");
  nlohmann::json j = report_to_json(rep);
  CHECK(j.at("kind") == "tn_limit");
  CHECK(j.at("eigenvalues").size() == 1);
  CHECK(j.at("eigenvalues")[0].size() == 2);
  CHECK(std::abs(j.at("radius").get<double>() - 1.2946) < 1e-3);
  CHECK(j.at("classification") == "diverges");
  CHECK(j.at("solver_failed") == false);
}

TEST_CASE("random instances respect their advertised structure") {
  std::mt19937_64 rng(404);
  for (DistMode mode : {DistMode::stationary, DistMode::dirichlet}) {
    for (int trial = 0; trial < 10; ++trial) {
      InstanceOptions opt;
      opt.n_states = 5;
      opt.n_features = 3;
      opt.gamma = 0.9;
      opt.mode = mode;
      LinearFaProblem pr = random_instance(rng, opt);
      double sum = 0.0;
      for (double d : pr.dist) {
        CHECK(d >= 0.0);
        sum += d;
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
      // gram must be comfortably invertible by construction
      Spectrum sp = spectrum(pr.gram);
      double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
      for (const auto& z : sp.eigenvalues) {
        lo = std::min(lo, std::abs(z));
        hi = std::max(hi, std::abs(z));
      }
      CHECK(hi / lo < 1e6);
      if (mode == DistMode::stationary) {
        // the stationary mode really does hand back the chain's left fixed
        // point
        std::vector<double> d = pr.dist;
        for (int j = 0; j < pr.n(); ++j) {
          double acc = 0.0;
          for (int i = 0; i < pr.n(); ++i) acc += d[i] * pr.chain(i, j);
          CHECK(std::abs(acc - d[j]) < 1e-10);
        }
      }
    }
  }
}
