#pragma once
// Linear function approximation for Q estimation, and the spectral machinery
// that decides whether an update rule converges.
//
// Setting: a fixed policy pi turns the MDP into a chain P over state-action
// pairs, values are approximated as Q = Phi w with a feature matrix Phi, and
// updates are weighted by a diagonal sampling distribution D that need not be
// the stationary one.  Three update rules are analyzed:
//
//   td:  step along  Phi^T D (R + gamma P Phi w    - Phi w)
//   tn:  same, but the bootstrap uses a frozen copy wbar, refreshed every
//        `period` steps
//   fr:  bootstrap through the live w, plus a proximal pull
//        kappa Phi^T D Phi (w - wbar) toward the frozen copy
//
// Every rule is linear in (w, wbar), so one outer step (period inner updates,
// then wbar <- w) acts on the error w - w* by a fixed matrix.  Convergence of
// the rule is exactly spectral radius < 1 of that matrix; this module builds
// the matrices, classifies them, and can also run the literal iteration to
// let the two be cross-checked against each other.

#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "tdlab/matrix.hpp"
#include "tdlab/mdp.hpp"
#include "tdlab/numeric.hpp"
#include "tdlab/spectrum.hpp"

namespace tdlab {

enum class Algorithm { TD0, TN, FR };
enum class Classification { converges, diverges, marginal };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::TD0: return "td";
    case Algorithm::TN: return "tn";
    default: return "fr";
  }
}
inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::converges: return "converges";
    case Classification::diverges: return "diverges";
    default: return "marginal";
  }
}

struct LinearFaProblem {
  Mdp mdp;
  Matrix phi;                // |S||A| x p feature matrix
  std::vector<double> dist;  // sampling weights over state-action pairs
  Policy policy;

  // Cached products; everything downstream is built from these.
  Matrix chain;              // P over state-action pairs under policy
  Matrix gram;               // Phi^T D Phi
  Matrix cross;              // Phi^T D P Phi
  std::vector<double> proj_reward;  // Phi^T D R

  int n() const { return phi.rows(); }
  int p() const { return phi.cols(); }
};

namespace detail {

// y = Phi^T D v for a value-space vector v.
inline std::vector<double> phi_t_d(const LinearFaProblem& pr,
                                   const std::vector<double>& v) {
  std::vector<double> out(pr.p(), 0.0);
  for (int i = 0; i < pr.n(); ++i) {
    double dv = pr.dist[i] * v[i];
    if (dv == 0.0) continue;
    for (int j = 0; j < pr.p(); ++j) out[j] += pr.phi(i, j) * dv;
  }
  return out;
}

inline std::vector<double> phi_w(const LinearFaProblem& pr,
                                 const std::vector<double>& w) {
  return mat_vec(pr.phi, w);
}

}  // namespace detail

/// Builds the problem and caches the gram products. Rejects distributions
/// that are not a distribution and feature matrices whose weighted gram
/// matrix is singular (every analysis below divides by it).
inline LinearFaProblem make_problem(const Mdp& mdp, const Matrix& phi,
                                    const std::vector<double>& dist,
                                    const Policy& policy) {
  LinearFaProblem pr;
  pr.mdp = mdp;
  pr.phi = phi;
  pr.dist = dist;
  pr.policy = policy;
  pr.chain = policy_transition(mdp, policy);
  int n = mdp.n_sa();
  if (phi.rows() != n)
    throw MatrixError("make_problem: feature matrix has " +
                      std::to_string(phi.rows()) + " rows, expected " +
                      std::to_string(n));
  if (dist.size() != static_cast<size_t>(n))
    throw MatrixError("make_problem: weight vector has " +
                      std::to_string(dist.size()) + " entries, expected " +
                      std::to_string(n));
  double sum = 0.0;
  for (double d : dist) {
    if (d < 0.0)
      throw MatrixError("make_problem: negative sampling weight");
    sum += d;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw MatrixError("make_problem: sampling weights sum to " +
                      std::to_string(sum));

  // gram = Phi^T D Phi, cross = Phi^T D P Phi, proj_reward = Phi^T D R.
  int p = phi.cols();
  pr.gram = Matrix(p, p);
  pr.cross = Matrix(p, p);
  Matrix pphi = mat_mul(pr.chain, phi);
  for (int i = 0; i < n; ++i) {
    double d = dist[i];
    if (d == 0.0) continue;
    for (int j = 0; j < p; ++j) {
      double dphij = d * phi(i, j);
      for (int k = 0; k < p; ++k) {
        pr.gram(j, k) += dphij * phi(i, k);
        pr.cross(j, k) += dphij * pphi(i, k);
      }
    }
  }
  pr.proj_reward = detail::phi_t_d(pr, reward_vector(mdp));
  try {
    mat_inverse(pr.gram);
  } catch (const SingularMatrix& e) {
    throw MatrixError(
        std::string("make_problem: weighted feature gram matrix Phi^T D Phi "
                    "is singular (") + e.what() + ")");
  }
  return pr;
}

struct IterationSpec {
  Algorithm algorithm = Algorithm::TD0;
  double eta = 0.1;    // step size
  long period = 1;     // inner steps per frozen update; ignored for TD0
  double kappa = 0.0;  // proximal weight; FR only
};

inline void validate_spec(const IterationSpec& s) {
  if (!(s.eta > 0.0))
    throw MatrixError("iteration spec: eta must be positive, got " +
                      std::to_string(s.eta));
  if (s.period < 1)
    throw MatrixError("iteration spec: period must be at least 1, got " +
                      std::to_string(s.period));
  if (s.kappa < 0.0)
    throw MatrixError("iteration spec: kappa must be nonnegative, got " +
                      std::to_string(s.kappa));
}

struct WeightVector {
  std::vector<double> w;       // live weights
  std::vector<double> frozen;  // lagging copy wbar
};

// ---- semi-gradients ----
// All three are computed through value space (residual vectors of length
// |S||A|), not through the cached gram matrices, so the algebraic
// decomposition identities tested elsewhere are genuine cross-checks.

/// -Phi^T D (R + gamma P Phi w - Phi w)
inline std::vector<double> td_semigradient(const LinearFaProblem& pr,
                                           const WeightVector& wv) {
  std::vector<double> qv = detail::phi_w(pr, wv.w);
  std::vector<double> pq = mat_vec(pr.chain, qv);
  std::vector<double> resid(pr.n());
  for (int i = 0; i < pr.n(); ++i)
    resid[i] = pr.mdp.reward[i] + pr.mdp.gamma * pq[i] - qv[i];
  std::vector<double> g = detail::phi_t_d(pr, resid);
  for (double& v : g) v = -v;
  return g;
}

/// -Phi^T D (R + gamma P Phi wbar - Phi w): the bootstrap goes through the
/// frozen copy.
inline std::vector<double> tn_semigradient(const LinearFaProblem& pr,
                                           const WeightVector& wv) {
  std::vector<double> qv = detail::phi_w(pr, wv.w);
  std::vector<double> qbar = detail::phi_w(pr, wv.frozen);
  std::vector<double> pq = mat_vec(pr.chain, qbar);
  std::vector<double> resid(pr.n());
  for (int i = 0; i < pr.n(); ++i)
    resid[i] = pr.mdp.reward[i] + pr.mdp.gamma * pq[i] - qv[i];
  std::vector<double> g = detail::phi_t_d(pr, resid);
  for (double& v : g) v = -v;
  return g;
}

/// td_semigradient plus the proximal pull kappa Phi^T D Phi (w - wbar),
/// also evaluated through value space.
inline std::vector<double> fr_semigradient(const LinearFaProblem& pr,
                                           const IterationSpec& spec,
                                           const WeightVector& wv) {
  std::vector<double> g = td_semigradient(pr, wv);
  if (spec.kappa != 0.0) {
    std::vector<double> gap = detail::phi_w(pr, wv.w);
    std::vector<double> qbar = detail::phi_w(pr, wv.frozen);
    for (int i = 0; i < pr.n(); ++i) gap[i] -= qbar[i];
    std::vector<double> pull = detail::phi_t_d(pr, gap);
    for (int j = 0; j < pr.p(); ++j) g[j] += spec.kappa * pull[j];
  }
  return g;
}

// ---- curvature matrices and fixed points ----

/// A_0 = Phi^T D (I - gamma P) Phi
inline Matrix td_matrix(const LinearFaProblem& pr) {
  return mat_sub(pr.gram, mat_scale(pr.cross, pr.mdp.gamma));
}

/// A_kappa = (1 + kappa) Phi^T D Phi - gamma Phi^T D P Phi
inline Matrix fr_matrix(const LinearFaProblem& pr, double kappa) {
  return mat_sub(mat_scale(pr.gram, 1.0 + kappa),
                 mat_scale(pr.cross, pr.mdp.gamma));
}

/// w* solving A_0 w = Phi^T D R; the common fixed point of all three rules.
inline std::vector<double> td_fixed_point(const LinearFaProblem& pr) {
  try {
    return mat_solve_vec(td_matrix(pr), pr.proj_reward);
  } catch (const SingularMatrix& e) {
    throw MatrixError(std::string("no TD fixed point: the matrix "
                                  "Phi^T D (I - gamma P) Phi is singular (") +
                      e.what() + ")");
  }
}

/// Where the inner loop of tn settles for a given frozen wbar:
/// solves (Phi^T D Phi) w = Phi^T D (R + gamma P Phi wbar).
inline std::vector<double> tn_inner_fixed_point(const LinearFaProblem& pr,
                                                const std::vector<double>& wbar) {
  std::vector<double> qbar = detail::phi_w(pr, wbar);
  std::vector<double> pq = mat_vec(pr.chain, qbar);
  std::vector<double> rhs(pr.n());
  for (int i = 0; i < pr.n(); ++i)
    rhs[i] = pr.mdp.reward[i] + pr.mdp.gamma * pq[i];
  return mat_solve_vec(pr.gram, detail::phi_t_d(pr, rhs));
}

/// Where the inner loop of fr settles: A_kappa w = Phi^T D R + kappa gram wbar.
inline std::vector<double> fr_inner_fixed_point(const LinearFaProblem& pr,
                                                double kappa,
                                                const std::vector<double>& wbar) {
  std::vector<double> rhs = pr.proj_reward;
  std::vector<double> gw = mat_vec(pr.gram, wbar);
  for (int j = 0; j < pr.p(); ++j) rhs[j] += kappa * gw[j];
  try {
    return mat_solve_vec(fr_matrix(pr, kappa), rhs);
  } catch (const SingularMatrix& e) {
    throw MatrixError(std::string("fr_inner_fixed_point: the matrix "
                                  "(1+kappa) Phi^T D Phi - gamma Phi^T D P Phi "
                                  "is singular (") + e.what() + ")");
  }
}

// ---- iteration matrices ----

/// gamma (Phi^T D Phi)^{-1} Phi^T D P Phi: what one tn outer step does to the
/// error once the inner loop is run to exhaustion.
inline Matrix tn_limit_matrix(const LinearFaProblem& pr) {
  Matrix inv;
  try {
    inv = mat_inverse(pr.gram);
  } catch (const SingularMatrix& e) {
    throw MatrixError(std::string("tn_limit_matrix: Phi^T D Phi is "
                                  "singular (") + e.what() + ")");
  }
  return mat_scale(mat_mul(inv, pr.cross), pr.mdp.gamma);
}

/// kappa A_kappa^{-1} Phi^T D Phi: the fr analog. Shrinks to zero with kappa.
inline Matrix fr_limit_matrix(const LinearFaProblem& pr, double kappa) {
  Matrix inv;
  try {
    inv = mat_inverse(fr_matrix(pr, kappa));
  } catch (const SingularMatrix& e) {
    throw MatrixError(std::string("fr_limit_matrix: (1+kappa) Phi^T D Phi - "
                                  "gamma Phi^T D P Phi is singular (") +
                      e.what() + ")");
  }
  return mat_scale(mat_mul(inv, pr.gram), kappa);
}

/// The exact one-outer-step error map M with w_next - w* = M (w - w*).
///   td: I - eta A_0                  (one plain update)
///   tn: (I - eta gram)^T (I - L) + L with L = tn_limit_matrix
///   fr: (I - eta A_k)^T (I - F) + F  with F = fr_limit_matrix
/// Entries can overflow to non-finite when the inner loop itself diverges;
/// callers treat that as a divergence signal.
inline Matrix iteration_matrix(const LinearFaProblem& pr,
                               const IterationSpec& spec) {
  int p = pr.p();
  Matrix eye = Matrix::identity(p);
  switch (spec.algorithm) {
    case Algorithm::TD0:
      return mat_sub(eye, mat_scale(td_matrix(pr), spec.eta));
    case Algorithm::TN: {
      Matrix limit = tn_limit_matrix(pr);
      Matrix inner = mat_power(
          mat_sub(eye, mat_scale(pr.gram, spec.eta)),
          static_cast<unsigned long long>(spec.period));
      return mat_add(mat_mul(inner, mat_sub(eye, limit)), limit);
    }
    default: {
      Matrix limit = fr_limit_matrix(pr, spec.kappa);
      Matrix inner = mat_power(
          mat_sub(eye, mat_scale(fr_matrix(pr, spec.kappa), spec.eta)),
          static_cast<unsigned long long>(spec.period));
      return mat_add(mat_mul(inner, mat_sub(eye, limit)), limit);
    }
  }
}

// ---- classification ----

struct SpectralReport {
  std::string matrix_kind;
  Spectrum spectrum;
  Classification classification = Classification::marginal;
  bool solver_failed = false;
};

/// Radius vs. 1 with a guard band: within the band the verdict is marginal,
/// so solver noise can never flip a borderline cell between the hard classes.
inline Classification classify_radius(double radius) {
  double band = numeric_policy().marginal_band;
  if (radius < 1.0 - band) return Classification::converges;
  if (radius > 1.0 + band) return Classification::diverges;
  return Classification::marginal;
}

/// Classify an explicit matrix. Non-finite entries mean some factor already
/// overflowed, which only happens when the underlying iteration blows up, so
/// it is reported as divergence rather than an error. An eigensolver failure
/// is reported as marginal with the solver_failed flag raised.
inline SpectralReport classify_matrix(const Matrix& m, std::string kind) {
  SpectralReport rep;
  rep.matrix_kind = std::move(kind);
  if (!all_finite(m)) {
    rep.spectrum.radius = std::numeric_limits<double>::infinity();
    rep.classification = Classification::diverges;
    return rep;
  }
  try {
    rep.spectrum = spectrum(m);
    rep.classification = classify_radius(rep.spectrum.radius);
  } catch (const MatrixError&) {
    rep.solver_failed = true;
    rep.spectrum.radius = std::numeric_limits<double>::quiet_NaN();
    rep.classification = Classification::marginal;
  }
  return rep;
}

inline SpectralReport classify(const LinearFaProblem& pr,
                               const IterationSpec& spec) {
  validate_spec(spec);
  const char* kind = spec.algorithm == Algorithm::TD0  ? "td_step"
                     : spec.algorithm == Algorithm::TN ? "tn_composed"
                                                       : "fr_composed";
  return classify_matrix(iteration_matrix(pr, spec), kind);
}

inline nlohmann::json report_to_json(const SpectralReport& rep) {
  nlohmann::json eigs = nlohmann::json::array();
  for (const auto& z : rep.spectrum.eigenvalues)
    eigs.push_back({z.real(), z.imag()});
  return nlohmann::json{{"kind", rep.matrix_kind},
                        {"eigenvalues", eigs},
                        {"radius", rep.spectrum.radius},
                        {"classification", to_string(rep.classification)},
                        {"solver_failed", rep.solver_failed}};
}

// ---- step-size selection ----

/// A step size eta with |1 - eta lambda| < 1 for every eigenvalue lambda of
/// m, when such an eta exists. For lambda in the open right half-plane the
/// condition is eta < 2 Re(lambda)/|lambda|^2, so half the smallest such
/// threshold works for all of them simultaneously; for symmetric positive
/// definite m this lands on the classic 1/lambda_max. When some eigenvalue
/// has Re <= 0 no eta converges, and 1/max|lambda| is returned so the caller
/// still gets a sane scale (the divergence then shows up in classify).
inline double stable_step_size(const Matrix& m) {
  Spectrum sp = spectrum(m);
  if (sp.radius == 0.0) return 1.0;
  double tiny = 1e-14 * sp.radius;
  double best = std::numeric_limits<double>::infinity();
  bool right_half = true;
  for (const auto& z : sp.eigenvalues) {
    if (std::abs(z) <= tiny) continue;  // marginal mode either way
    if (z.real() <= 0.0) {
      right_half = false;
      break;
    }
    best = std::min(best, z.real() / std::norm(z));
  }
  if (right_half && std::isfinite(best)) return best;
  return 1.0 / sp.radius;
}

// ---- the literal iteration ----

struct IterationResult {
  std::vector<WeightVector> trajectory;  // state after each outer step
  bool diverged = false;
};

/// Runs the actual two-timescale loop: freeze wbar, take `period` descent
/// steps on the matching semi-gradient, record, repeat. Divergence (any
/// weight beyond the blow-up bound, or non-finite) ends the run and raises
/// the flag; it is an expected outcome, not an error.
inline IterationResult run_iteration(const LinearFaProblem& pr,
                                     const IterationSpec& spec,
                                     const std::vector<double>& w0,
                                     long outer_steps) {
  validate_spec(spec);
  if (w0.size() != static_cast<size_t>(pr.p()))
    throw MatrixError("run_iteration: w0 has " + std::to_string(w0.size()) +
                      " entries, expected " + std::to_string(pr.p()));
  IterationResult res;
  res.trajectory.reserve(static_cast<size_t>(outer_steps));
  WeightVector wv{w0, w0};
  long inner = spec.algorithm == Algorithm::TD0 ? 1 : spec.period;
  double bound = numeric_policy().blowup_bound;
  for (long outer = 0; outer < outer_steps; ++outer) {
    for (long t = 0; t < inner; ++t) {
      std::vector<double> g;
      switch (spec.algorithm) {
        case Algorithm::TD0: g = td_semigradient(pr, wv); break;
        case Algorithm::TN: g = tn_semigradient(pr, wv); break;
        default: g = fr_semigradient(pr, spec, wv); break;
      }
      for (int j = 0; j < pr.p(); ++j) wv.w[j] -= spec.eta * g[j];
      for (double v : wv.w)
        if (!std::isfinite(v) || std::abs(v) > bound) res.diverged = true;
      if (res.diverged) break;
    }
    res.trajectory.push_back(wv);
    if (res.diverged) break;
    wv.frozen = wv.w;
  }
  return res;
}

// ---- how long the inner loop must run ----

/// Smallest integer period that provably makes the composed tn map a
/// contraction, via an eigenvalue perturbation argument: the composed matrix
/// is L + E with L the limit matrix and ||E|| <= s^T ||I - L||, where
/// s = ||I - eta gram||. Each eigenvalue of the composed matrix then sits
/// within cond_V(L) ||E|| of an eigenvalue of L, so it is enough that
///   s^T < (1 - rho(L)) / (cond_V(L) ||I - L||).
/// Applicable only when rho(L) < 1 and s < 1.
inline long k_lower_bound(const LinearFaProblem& pr, double eta) {
  Matrix limit = tn_limit_matrix(pr);
  double rho = spectrum(limit).radius;
  if (rho >= 1.0)
    throw MatrixError(
        "k_lower_bound: bound inapplicable, the limit matrix has spectral "
        "radius " + std::to_string(rho) + " >= 1");
  Matrix eye = Matrix::identity(pr.p());
  double s = spectral_norm(mat_sub(eye, mat_scale(pr.gram, eta)));
  if (s >= 1.0)
    throw MatrixError(
        "k_lower_bound: bound inapplicable, ||I - eta Phi^T D Phi|| = " +
        std::to_string(s) + " >= 1");
  double cond = eigvec_condition(limit);
  double c = cond * spectral_norm(mat_sub(eye, limit));
  double bound = std::log(c / (1.0 - rho)) / std::log(1.0 / s);
  long k = static_cast<long>(std::floor(bound)) + 1;
  return std::max(k, 1L);
}

// ---- Polyak averaging ----

/// The unique minimizer of
///   1/2 ||y - theta||^2 + (1-tau)/(2 tau) ||y - theta_bar||^2,
/// which works out to y = tau theta + (1-tau) theta_bar: soft tracking of
/// the live weights by the frozen copy.
inline std::vector<double> polyak_update(const std::vector<double>& theta,
                                         const std::vector<double>& theta_bar,
                                         double tau) {
  if (!(tau > 0.0) || !(tau < 1.0))
    throw std::invalid_argument("polyak_update: tau must lie in (0,1), got " +
                                std::to_string(tau));
  if (theta.size() != theta_bar.size())
    throw std::invalid_argument("polyak_update: size mismatch");
  std::vector<double> out(theta.size());
  for (size_t i = 0; i < theta.size(); ++i)
    out[i] = tau * theta[i] + (1.0 - tau) * theta_bar[i];
  return out;
}

// ---- random problem generation ----

enum class DistMode { stationary, dirichlet };

struct InstanceOptions {
  int n_states = 3;
  int n_features = 2;
  double gamma = 0.99;
  DistMode mode = DistMode::dirichlet;
  int max_tries = 200;
};

/// Seeded random single-action instance: Dirichlet(1) transition rows,
/// uniform[-1,1] rewards and features. Feature draws are rejected until the
/// weighted gram matrix is comfortably non-singular (condition below 1e6).
/// dist is either the chain's stationary distribution (the on-policy case)
/// or an independent Dirichlet draw (off-policy).
inline LinearFaProblem random_instance(std::mt19937_64& rng,
                                       const InstanceOptions& opt) {
  auto unit = [&rng]() {
    return (rng() >> 11) * 0x1.0p-53;
  };
  Mdp m;
  m.n_states = opt.n_states;
  m.n_actions = 1;
  m.gamma = opt.gamma;
  m.transition.resize(static_cast<size_t>(opt.n_states) * opt.n_states);
  m.reward.resize(opt.n_states);
  m.initial.assign(opt.n_states, 1.0 / opt.n_states);
  for (int s = 0; s < opt.n_states; ++s) {
    double sum = 0.0;
    for (int s2 = 0; s2 < opt.n_states; ++s2) {
      double e = -std::log(unit());
      m.p(s, 0, s2) = e;
      sum += e;
    }
    for (int s2 = 0; s2 < opt.n_states; ++s2) m.p(s, 0, s2) /= sum;
    m.r(s, 0) = 2.0 * unit() - 1.0;
  }
  Policy pi = uniform_policy(m);

  std::vector<double> d(opt.n_states);
  if (opt.mode == DistMode::stationary) {
    d = stationary_distribution(policy_transition(m, pi));
  } else {
    double sum = 0.0;
    for (int s = 0; s < opt.n_states; ++s) {
      d[s] = -std::log(unit());
      sum += d[s];
    }
    for (int s = 0; s < opt.n_states; ++s) d[s] /= sum;
  }

  for (int attempt = 0; attempt < opt.max_tries; ++attempt) {
    Matrix phi(opt.n_states, opt.n_features);
    for (double& v : phi.data()) v = 2.0 * unit() - 1.0;
    LinearFaProblem pr;
    try {
      pr = make_problem(m, phi, d, pi);
    } catch (const MatrixError&) {
      continue;
    }
    // gram is symmetric positive semidefinite, so its eigenvalues are its
    // singular values; insist on a condition number below 1e6.
    Spectrum sp = spectrum(pr.gram);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& z : sp.eigenvalues) {
      lo = std::min(lo, std::abs(z));
      hi = std::max(hi, std::abs(z));
    }
    if (lo > 0.0 && hi / lo < 1e6) return pr;
  }
  throw MatrixError("random_instance: no well-conditioned feature draw in " +
                    std::to_string(opt.max_tries) + " tries");
}

}  // namespace tdlab
