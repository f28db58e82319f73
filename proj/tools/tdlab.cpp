// tdlab: spectral analysis and experiments for bootstrapped value learning
// under linear and small nonlinear function approximation.
//
// Subcommands:
//   disk       two-state representation sweep over the unit disk
//   analyze    spectral reports for one problem instance
//   fourrooms  gridworld Q-learning experiment grid
//   verify     seeded property suites and brute-force oracle cross-checks
//
// Exit codes: 0 success, 1 runtime/I-O failure (or failed verification),
// 2 usage error. Usage messages name the offending flag. Config precedence:
// command-line flags beat --config file values beat built-in defaults, and
// meta.json records the fully resolved set next to every output.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "tdlab/disk.hpp"
#include "tdlab/fourrooms.hpp"
#include "tdlab/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kArtifactVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_out() {
  const char* env = std::getenv("TDLAB_OUT");
  return (env && *env) ? std::string(env) : std::string("out");
}

int default_jobs() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

// ---- config-file merge ----
// A flag given on the command line wins; otherwise a matching key in the
// --config document replaces the default.

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config file " + path + ": " + e.what());
  }
}

template <typename T>
void merge(const CLI::App& sub, const json& cfg, const std::string& flag,
           const std::string& key, T& value) {
  if (sub.count(flag) > 0 || !cfg.contains(key)) return;
  try {
    value = cfg.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::runtime_error("config key '" + key + "': " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " +
                                     path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_meta(const fs::path& dir, const json& resolved) {
  write_text(dir / "meta.json", resolved.dump(2) + "\n");
}

std::vector<double> parse_pair(const std::string& text,
                               const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(flag + " must be comma-separated numbers, got '" +
                       text + "'");
    }
  }
  if (out.size() != 2)
    throw UsageError(flag + " must be two comma-separated numbers, got '" +
                     text + "'");
  return out;
}

// ---- disk ----

struct DiskArgs {
  double gamma = 0.99;
  double kappa = 0.1;
  long period = 10000;
  std::string res = "128x256";
  std::string out;
  int jobs = 0;
  std::string config;
};

int cmd_disk(const CLI::App& sub, DiskArgs a) {
  json cfg = load_config(a.config);
  merge(sub, cfg, "--gamma", "gamma", a.gamma);
  merge(sub, cfg, "--kappa", "kappa", a.kappa);
  merge(sub, cfg, "--period", "period", a.period);
  merge(sub, cfg, "--res", "res", a.res);
  merge(sub, cfg, "--out", "out", a.out);
  merge(sub, cfg, "--jobs", "jobs", a.jobs);

  if (!(a.gamma > 0.0) || !(a.gamma < 1.0))
    throw UsageError("gamma must be in (0,1)");
  if (a.kappa < 0.0) throw UsageError("kappa must be nonnegative");
  if (a.period < 1) throw UsageError("period must be at least 1");
  if (a.jobs < 1) throw UsageError("jobs must be at least 1");
  int n_radius = 0, n_angle = 0;
  char sep = 0;
  std::stringstream ss(a.res);
  if (!(ss >> n_radius >> sep >> n_angle) || sep != 'x' || !ss.eof() ||
      n_radius < 32 || n_angle < 64)
    throw UsageError("res must look like 128x256 with at least 32x64");

  tdlab::DiskGrid grid =
      tdlab::sweep(a.gamma, a.kappa, a.period, n_radius, n_angle, a.jobs);
  fs::create_directories(a.out);
  tdlab::render(grid, (fs::path(a.out) / "disk.csv").string(),
                (fs::path(a.out) / "disk").string());
  tdlab::DomainCounts counts = tdlab::compare_domains(grid);
  std::cout << "domains: tn_only_diverge=" << counts.tn_only_diverge
            << " fr_only_diverge=" << counts.fr_only_diverge
            << " both=" << counts.both << " neither=" << counts.neither
            << "\n";

  write_meta(a.out, json{{"command", "disk"},
                         {"artifact_version", kArtifactVersion},
                         {"gamma", a.gamma},
                         {"kappa", a.kappa},
                         {"period", a.period},
                         {"res", a.res},
                         {"jobs", a.jobs},
                         {"out", a.out}});
  return 0;
}

// ---- analyze ----

struct AnalyzeArgs {
  std::string instance;
  std::string fixture;
  double d0 = 0.9;
  std::string phi = "1,-2";
  double gamma = 0.99;
  double eta = 0.0;  // 0 means per-algorithm adaptive choice
  long period = 10000;
  double kappa = 0.1;
  std::string out;
  std::string config;
};

tdlab::LinearFaProblem load_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fixture file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("fixture " + path + ": " + e.what());
  }
  try {
    tdlab::Mdp mdp = tdlab::mdp_from_json(j.at("mdp"));
    auto rows = j.at("phi").get<std::vector<std::vector<double>>>();
    if (rows.empty() || rows[0].empty())
      throw std::runtime_error("fixture phi must be a non-empty matrix");
    tdlab::Matrix phi(int(rows.size()), int(rows[0].size()));
    for (size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size())
        throw std::runtime_error("fixture phi has ragged rows");
      for (size_t c = 0; c < rows[r].size(); ++c)
        phi(int(r), int(c)) = rows[r][c];
    }
    auto dist = j.at("dist").get<std::vector<double>>();
    tdlab::Policy pi = j.contains("policy")
                           ? j.at("policy").get<std::vector<double>>()
                           : tdlab::uniform_policy(mdp);
    return tdlab::make_problem(mdp, phi, dist, pi);
  } catch (const json::exception& e) {
    throw std::runtime_error("fixture " + path + ": " + e.what());
  }
}

int cmd_analyze(const CLI::App& sub, AnalyzeArgs a) {
  json cfg = load_config(a.config);
  merge(sub, cfg, "--instance", "instance", a.instance);
  merge(sub, cfg, "--fixture", "fixture", a.fixture);
  merge(sub, cfg, "--d0", "d0", a.d0);
  merge(sub, cfg, "--phi", "phi", a.phi);
  merge(sub, cfg, "--gamma", "gamma", a.gamma);
  merge(sub, cfg, "--eta", "eta", a.eta);
  merge(sub, cfg, "--period", "period", a.period);
  merge(sub, cfg, "--kappa", "kappa", a.kappa);
  merge(sub, cfg, "--out", "out", a.out);

  if (a.instance.empty() == a.fixture.empty())
    throw UsageError("analyze needs exactly one of --instance or --fixture");
  if (!a.instance.empty() && a.instance != "two-state")
    throw UsageError("instance must be two-state");
  if (!(a.gamma > 0.0) || !(a.gamma < 1.0))
    throw UsageError("gamma must be in (0,1)");
  if (a.kappa < 0.0) throw UsageError("kappa must be nonnegative");
  if (a.period < 1) throw UsageError("period must be at least 1");
  if (sub.count("--eta") > 0 && !(a.eta > 0.0))
    throw UsageError("eta must be positive");
  if (!(a.d0 >= 0.0) || !(a.d0 <= 1.0))
    throw UsageError("d0 must be in [0,1]");

  tdlab::LinearFaProblem pr;
  json instance_desc;
  if (!a.instance.empty()) {
    std::vector<double> phi_col = parse_pair(a.phi, "phi");
    tdlab::Mdp mdp = tdlab::build_two_state_mdp(a.gamma);
    tdlab::Matrix phi(2, 1);
    phi(0, 0) = phi_col[0];
    phi(1, 0) = phi_col[1];
    pr = tdlab::make_problem(mdp, phi, {a.d0, 1.0 - a.d0},
                             tdlab::uniform_policy(mdp));
    instance_desc = {{"instance", "two-state"},
                     {"d0", a.d0},
                     {"phi", phi_col},
                     {"gamma", a.gamma}};
  } else {
    pr = load_fixture(a.fixture);
    instance_desc = {{"fixture", a.fixture}};
  }

  using namespace tdlab;
  IterationSpec td_spec{Algorithm::TD0,
                        a.eta > 0.0 ? a.eta : stable_step_size(td_matrix(pr)),
                        1, 0.0};
  IterationSpec tn_spec{Algorithm::TN,
                        a.eta > 0.0 ? a.eta : stable_step_size(pr.gram),
                        a.period, 0.0};
  IterationSpec fr_spec{
      Algorithm::FR,
      a.eta > 0.0 ? a.eta : stable_step_size(fr_matrix(pr, a.kappa)),
      a.period, a.kappa};

  json report;
  report["instance"] = instance_desc;
  report["spec"] = {{"period", a.period},
                    {"kappa", a.kappa},
                    {"eta",
                     {{"td", td_spec.eta}, {"tn", tn_spec.eta},
                      {"fr", fr_spec.eta}}}};
  report["td"] = report_to_json(classify(pr, td_spec));
  report["tn"] = {
      {"composed", report_to_json(classify(pr, tn_spec))},
      {"limit", report_to_json(classify_matrix(tn_limit_matrix(pr),
                                               "tn_limit"))}};
  report["fr"] = {
      {"composed", report_to_json(classify(pr, fr_spec))},
      {"limit", report_to_json(classify_matrix(fr_limit_matrix(pr, a.kappa),
                                               "fr_limit"))}};

  // The lagging copy biases each algorithm's inner fixed point away from
  // the common solution by exactly the limit matrix acting on its own
  // offset; report the worst identity residual over probe offsets.
  try {
    std::vector<double> wstar = td_fixed_point(pr);
    report["td_fixed_point"] = wstar;
    int p = pr.p();
    Matrix gram_inv = mat_inverse(pr.gram);
    Matrix akappa_inv = mat_inverse(fr_matrix(pr, a.kappa));
    Matrix tn_lim = tn_limit_matrix(pr);
    Matrix fr_lim = fr_limit_matrix(pr, a.kappa);
    double worst_tn = 0.0, worst_fr = 0.0;
    for (int probe = 0; probe < 2; ++probe) {
      std::vector<double> wbar(p, probe == 0 ? 0.0 : 1.0);
      std::vector<double> gap(p);
      for (int i = 0; i < p; ++i) gap[i] = wbar[i] - wstar[i];
      // inner fixed points: gram w = proj_reward + gamma cross wbar, and
      // a_kappa w = proj_reward + kappa gram wbar
      std::vector<double> rhs_tn = mat_vec(pr.cross, wbar);
      for (int i = 0; i < p; ++i)
        rhs_tn[i] = pr.proj_reward[i] + pr.mdp.gamma * rhs_tn[i];
      std::vector<double> w_tn = mat_vec(gram_inv, rhs_tn);
      std::vector<double> rhs_fr = mat_vec(pr.gram, wbar);
      for (int i = 0; i < p; ++i)
        rhs_fr[i] = pr.proj_reward[i] + a.kappa * rhs_fr[i];
      std::vector<double> w_fr = mat_vec(akappa_inv, rhs_fr);
      std::vector<double> pred_tn = mat_vec(tn_lim, gap);
      std::vector<double> pred_fr = mat_vec(fr_lim, gap);
      for (int i = 0; i < p; ++i) {
        worst_tn = std::max(worst_tn,
                            std::abs((w_tn[i] - wstar[i]) - pred_tn[i]));
        worst_fr = std::max(worst_fr,
                            std::abs((w_fr[i] - wstar[i]) - pred_fr[i]));
      }
    }
    report["bias_identity_residuals"] = {{"tn", worst_tn}, {"fr", worst_fr}};
  } catch (const MatrixError&) {
    report["td_fixed_point"] = nullptr;
    report["bias_identity_residuals"] = nullptr;
  }

  try {
    report["k_lower_bound"] = k_lower_bound(pr, tn_spec.eta);
  } catch (const MatrixError&) {
    report["k_lower_bound"] = nullptr;
  }

  std::cout << report.dump(2) << "\n";
  if (!a.out.empty()) {
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "report.json", report.dump(2) + "\n");
    json meta{{"command", "analyze"},
              {"artifact_version", kArtifactVersion},
              {"d0", a.d0},
              {"phi", a.phi},
              {"gamma", a.gamma},
              {"eta", a.eta},
              {"period", a.period},
              {"kappa", a.kappa},
              {"out", a.out}};
    if (!a.instance.empty()) meta["instance"] = a.instance;
    if (!a.fixture.empty()) meta["fixture"] = a.fixture;
    write_meta(a.out, meta);
  }
  return 0;
}

// ---- fourrooms ----

struct FourRoomsArgs {
  std::string agent;
  std::vector<double> epsilon;
  std::vector<double> kappa;
  std::vector<long> period;
  int seeds = 10;
  long seed_base = 0;
  long steps = 40000;
  double lr = 0.001;
  int hidden = 64;
  int batch = 32;
  long eval_every = 2000;
  int eval_episodes = 100;
  double epsilon_eval = 0.1;
  long replay = 10000;
  std::string approx = "mlp1";
  std::string optimizer = "adam";
  std::string out;
  int jobs = 0;
  std::string config;
};

int cmd_fourrooms(const CLI::App& sub, FourRoomsArgs a) {
  json cfg = load_config(a.config);
  merge(sub, cfg, "--agent", "agent", a.agent);
  merge(sub, cfg, "--epsilon", "epsilon", a.epsilon);
  merge(sub, cfg, "--kappa", "kappa", a.kappa);
  merge(sub, cfg, "--period", "period", a.period);
  merge(sub, cfg, "--seeds", "seeds", a.seeds);
  merge(sub, cfg, "--seed-base", "seed_base", a.seed_base);
  merge(sub, cfg, "--steps", "steps", a.steps);
  merge(sub, cfg, "--lr", "lr", a.lr);
  merge(sub, cfg, "--hidden", "hidden", a.hidden);
  merge(sub, cfg, "--batch", "batch", a.batch);
  merge(sub, cfg, "--eval-every", "eval_every", a.eval_every);
  merge(sub, cfg, "--eval-episodes", "eval_episodes", a.eval_episodes);
  merge(sub, cfg, "--epsilon-eval", "epsilon_eval", a.epsilon_eval);
  merge(sub, cfg, "--replay", "replay", a.replay);
  merge(sub, cfg, "--approx", "approx", a.approx);
  merge(sub, cfg, "--optimizer", "optimizer", a.optimizer);
  merge(sub, cfg, "--out", "out", a.out);
  merge(sub, cfg, "--jobs", "jobs", a.jobs);

  if (a.agent != "tn" && a.agent != "fr")
    throw UsageError("agent must be tn or fr");
  if (a.agent == "fr" && a.kappa.empty())
    throw UsageError("fr agent requires --kappa");
  if (a.agent == "tn" && !a.kappa.empty())
    throw UsageError("kappa only applies to the fr agent");
  if (a.epsilon.empty()) a.epsilon = {0.5};
  if (a.period.empty()) a.period = {100};
  for (double e : a.epsilon)
    if (!(e >= 0.0) || !(e <= 1.0))
      throw UsageError("epsilon must be in [0,1]");
  for (double k : a.kappa)
    if (!(k >= 0.0)) throw UsageError("kappa must be nonnegative");
  for (long t : a.period)
    if (t < 1) throw UsageError("period must be at least 1");
  if (a.seeds < 1) throw UsageError("seeds must be at least 1");
  if (a.steps < 1) throw UsageError("steps must be at least 1");
  if (!(a.lr > 0.0)) throw UsageError("lr must be positive");
  if (a.hidden < 1) throw UsageError("hidden must be at least 1");
  if (a.batch < 1) throw UsageError("batch must be at least 1");
  if (a.eval_every < 1) throw UsageError("eval-every must be at least 1");
  if (a.eval_episodes < 1)
    throw UsageError("eval-episodes must be at least 1");
  if (!(a.epsilon_eval >= 0.0) || !(a.epsilon_eval <= 1.0))
    throw UsageError("epsilon-eval must be in [0,1]");
  if (a.replay < 1) throw UsageError("replay must be at least 1");
  if (a.jobs < 1) throw UsageError("jobs must be at least 1");
  tdlab::ApproxKind approx;
  if (a.approx == "mlp1") approx = tdlab::ApproxKind::mlp1;
  else if (a.approx == "linear") approx = tdlab::ApproxKind::linear;
  else if (a.approx == "tabular") approx = tdlab::ApproxKind::tabular;
  else throw UsageError("approx must be tabular, linear, or mlp1");
  tdlab::OptimizerKind optimizer;
  if (a.optimizer == "sgd") optimizer = tdlab::OptimizerKind::sgd;
  else if (a.optimizer == "adam") optimizer = tdlab::OptimizerKind::adam;
  else throw UsageError("optimizer must be sgd or adam");

  tdlab::FourRoomsEnv env = tdlab::make_fourrooms();
  std::vector<double> kappas = a.kappa.empty() ? std::vector<double>{0.0}
                                               : a.kappa;

  // grid cells in deterministic order: epsilon, kappa, period, then seed
  std::vector<tdlab::ExperimentConfig> runs;
  for (double eps : a.epsilon)
    for (double kap : kappas)
      for (long per : a.period)
        for (int s = 0; s < a.seeds; ++s) {
          tdlab::ExperimentConfig ec;
          ec.train.loss = a.agent == "fr" ? tdlab::LossKind::fr
                                          : tdlab::LossKind::tn;
          ec.train.kappa = kap;
          ec.train.target_period = per;
          ec.train.lr = a.lr;
          ec.train.batch_size = a.batch;
          ec.train.total_steps = a.steps;
          ec.train.gamma = env.gamma;
          ec.train.seed = uint64_t(a.seed_base + s);
          ec.train.optimizer = optimizer;
          ec.approx = approx;
          ec.hidden = a.hidden;
          ec.epsilon_behavior = eps;
          ec.eval_every = a.eval_every;
          ec.eval_episodes = a.eval_episodes;
          ec.epsilon_eval = a.epsilon_eval;
          ec.replay_capacity = size_t(a.replay);
          runs.push_back(ec);
        }

  std::vector<std::vector<tdlab::ExperimentPoint>> results(runs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t i = next.fetch_add(1); i < runs.size();
         i = next.fetch_add(1))
      results[i] = tdlab::run_experiment(env, runs[i]);
  };
  int pool = std::min<int>(a.jobs, int(runs.size()));
  if (pool <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  fs::create_directories(a.out);
  std::string csv = tdlab::results_csv_header() + "\n";
  for (size_t i = 0; i < runs.size(); ++i)
    for (const auto& pt : results[i])
      csv += tdlab::results_csv_row(runs[i], pt) + "\n";
  write_text(fs::path(a.out) / "results.csv", csv);

  // per-cell summary over seeds: mean final regret, soft-divergence rate
  size_t per_cell = size_t(a.seeds);
  for (size_t base = 0; base < runs.size(); base += per_cell) {
    double sum_final = 0.0;
    long soft = 0, cells = 0;
    for (size_t i = base; i < base + per_cell; ++i) {
      sum_final += results[i].back().report.avg_regret;
      for (const auto& pt : results[i]) {
        soft += pt.report.soft_divergent ? 1 : 0;
        ++cells;
      }
    }
    const auto& rc = runs[base];
    std::cout << a.agent << " epsilon=" << rc.epsilon_behavior;
    if (a.agent == "fr") std::cout << " kappa=" << rc.train.kappa;
    std::cout << " period=" << rc.train.target_period
              << ": mean_final_avg_regret="
              << tdlab::fmt(sum_final / double(per_cell))
              << " soft_divergent_fraction="
              << tdlab::fmt(double(soft) / double(cells)) << "\n";
  }

  write_meta(a.out, json{{"command", "fourrooms"},
                         {"artifact_version", kArtifactVersion},
                         {"agent", a.agent},
                         {"epsilon", a.epsilon},
                         {"kappa", kappas},
                         {"period", a.period},
                         {"seeds", a.seeds},
                         {"seed_base", a.seed_base},
                         {"steps", a.steps},
                         {"lr", a.lr},
                         {"hidden", a.hidden},
                         {"batch", a.batch},
                         {"eval_every", a.eval_every},
                         {"eval_episodes", a.eval_episodes},
                         {"epsilon_eval", a.epsilon_eval},
                         {"replay", a.replay},
                         {"approx", a.approx},
                         {"optimizer", a.optimizer},
                         {"jobs", a.jobs},
                         {"out", a.out}});
  return 0;
}

// ---- verify ----

struct VerifyArgs {
  std::string filter;
  long n = 0;  // 0 keeps the per-suite defaults
  uint64_t seed = 7;
  std::string config;
};

int cmd_verify(const CLI::App& sub, VerifyArgs a) {
  json cfg = load_config(a.config);
  merge(sub, cfg, "--filter", "filter", a.filter);
  merge(sub, cfg, "--n", "n", a.n);
  merge(sub, cfg, "--seed", "seed", a.seed);
  if (a.n < 0) throw UsageError("n must be positive");

  tdlab::VerifyOptions opt;
  opt.seed = a.seed;
  if (a.n > 0) {
    opt.n_prop = a.n;
    opt.n_corollary = a.n;
    opt.n_grad = a.n;
    opt.n_fixed_point = a.n;
    opt.n_limit = a.n;
  }
  std::vector<tdlab::CheckResult> results = tdlab::run_checks(a.filter, opt);
  if (results.empty())
    throw UsageError("filter '" + a.filter + "' matches no checks");
  long failed = 0;
  for (const auto& r : results) {
    std::cout << (r.passed ? "pass  " : "FAIL  ") << r.name << "  ("
              << r.instances << " checked, " << r.excluded << " excluded)  "
              << r.detail << "\n";
    if (!r.passed) ++failed;
  }
  if (failed > 0) {
    std::cout << failed << " of " << results.size() << " checks failed\n";
    return 1;
  }
  std::cout << "all " << results.size() << " checks passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "spectral analysis and experiments for bootstrapped value learning"};
  app.require_subcommand(1);

  DiskArgs da;
  da.out = default_out();
  da.jobs = default_jobs();
  CLI::App* disk = app.add_subcommand(
      "disk", "two-state representation sweep over the unit disk");
  disk->add_option("--gamma", da.gamma, "discount factor");
  disk->add_option("--kappa", da.kappa, "functional regularization weight");
  disk->add_option("--period", da.period, "inner steps per frozen update");
  disk->add_option("--res", da.res, "grid resolution, radial x angular");
  disk->add_option("--out", da.out, "output directory");
  disk->add_option("--jobs", da.jobs, "worker threads");
  disk->add_option("--config", da.config, "JSON config file");

  AnalyzeArgs aa;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "spectral reports for one problem instance");
  analyze->add_option("--instance", aa.instance,
                      "built-in instance name (two-state)");
  analyze->add_option("--fixture", aa.fixture,
                      "JSON fixture file with mdp, phi, dist");
  analyze->add_option("--d0", aa.d0, "sampling weight on the first state");
  analyze->add_option("--phi", aa.phi, "feature column a,b");
  analyze->add_option("--gamma", aa.gamma, "discount factor");
  analyze->add_option("--eta", aa.eta,
                      "step size (default: adaptive per algorithm)");
  analyze->add_option("--period", aa.period,
                      "inner steps per frozen update");
  analyze->add_option("--kappa", aa.kappa,
                      "functional regularization weight");
  analyze->add_option("--out", aa.out,
                      "output directory (report.json + meta.json)");
  analyze->add_option("--config", aa.config, "JSON config file");

  FourRoomsArgs fa;
  fa.out = default_out();
  fa.jobs = default_jobs();
  CLI::App* fourrooms = app.add_subcommand(
      "fourrooms", "gridworld Q-learning experiment grid");
  fourrooms->add_option("--agent", fa.agent, "tn or fr");
  fourrooms->add_option("--epsilon", fa.epsilon, "behavior epsilon grid")
      ->delimiter(',');
  fourrooms->add_option("--kappa", fa.kappa,
                        "regularization weight grid (fr only)")
      ->delimiter(',');
  fourrooms->add_option("--period", fa.period, "target refresh period grid")
      ->delimiter(',');
  fourrooms->add_option("--seeds", fa.seeds, "number of seeds");
  fourrooms->add_option("--seed-base", fa.seed_base, "first seed value");
  fourrooms->add_option("--steps", fa.steps, "training steps per run");
  fourrooms->add_option("--lr", fa.lr, "learning rate");
  fourrooms->add_option("--hidden", fa.hidden, "hidden layer width");
  fourrooms->add_option("--batch", fa.batch, "batch size");
  fourrooms->add_option("--eval-every", fa.eval_every,
                        "steps between evaluations");
  fourrooms->add_option("--eval-episodes", fa.eval_episodes,
                        "episodes per evaluation");
  fourrooms->add_option("--epsilon-eval", fa.epsilon_eval,
                        "evaluation policy epsilon");
  fourrooms->add_option("--replay", fa.replay, "replay buffer capacity");
  fourrooms->add_option("--approx", fa.approx, "tabular, linear, or mlp1");
  fourrooms->add_option("--optimizer", fa.optimizer, "sgd or adam");
  fourrooms->add_option("--out", fa.out, "output directory");
  fourrooms->add_option("--jobs", fa.jobs, "worker threads");
  fourrooms->add_option("--config", fa.config, "JSON config file");

  VerifyArgs va;
  CLI::App* verify = app.add_subcommand(
      "verify", "seeded property suites and oracle cross-checks");
  verify->add_option("--filter", va.filter,
                     "run only checks whose name contains this substring");
  verify->add_option("--n", va.n, "instances per suite");
  verify->add_option("--seed", va.seed, "base seed");
  verify->add_option("--config", va.config, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "tdlab: " << e.what() << "\n";
    return 2;
  }

  try {
    if (disk->parsed()) return cmd_disk(*disk, da);
    if (analyze->parsed()) return cmd_analyze(*analyze, aa);
    if (fourrooms->parsed()) return cmd_fourrooms(*fourrooms, fa);
    return cmd_verify(*verify, va);
  } catch (const UsageError& e) {
    std::cerr << "tdlab: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tdlab: " << e.what() << "\n";
    return 1;
  }
}
