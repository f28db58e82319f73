#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tdlab/disk.hpp"
#include "helpers.hpp"

using namespace tdlab;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

size_t count_occurrences(const std::string& hay, const std::string& needle) {
  size_t n = 0;
  for (size_t pos = hay.find(needle); pos != std::string::npos;
       pos = hay.find(needle, pos + needle.size()))
    ++n;
  return n;
}

// Radii agree "as symmetric readings" when they are close, or when both sit
// past the blowup bound: deep in the divergent regime the composed power has
// overflowed and only the classification carries information.
bool same_reading(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  double bound = numeric_policy().blowup_bound;
  if ((a > bound || std::isinf(a)) && (b > bound || std::isinf(b)))
    return true;
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// The full-resolution sweep is moderately expensive, so tests share one.
const DiskGrid& full_grid() {
  static DiskGrid grid = sweep(0.99, 0.1, 10'000, 128, 256);
  return grid;
}

}  // namespace

TEST_CASE("the two-state chain has the advertised structure") {
  Mdp m = build_two_state_mdp(0.99);
  validate_mdp(m);
  CHECK(m.reward == std::vector<double>{0.0, 0.0});
  std::vector<double> d =
      stationary_distribution(policy_transition(m, uniform_policy(m)));
  CHECK(std::abs(d[0] - 1.0 / 3.0) < 1e-12);
  CHECK(std::abs(d[1] - 2.0 / 3.0) < 1e-12);
  CHECK_THROWS_AS(build_two_state_mdp(1.5), std::invalid_argument);
}

TEST_CASE("sweep validates its resolution and parameters") {
  CHECK_THROWS_AS(sweep(0.99, 0.1, 100, 16, 64), std::invalid_argument);
  CHECK_THROWS_AS(sweep(0.99, 0.1, 100, 32, 32), std::invalid_argument);
  CHECK_THROWS_AS(sweep(0.99, -0.1, 100, 32, 64), std::invalid_argument);
  CHECK_THROWS_AS(sweep(0.99, 0.1, 0, 32, 64), std::invalid_argument);
  CHECK_THROWS_AS(sweep(1.0, 0.1, 100, 32, 64), std::invalid_argument);
}

TEST_CASE("small sweep: grid layout and angle-pi symmetry") {
  DiskGrid grid = sweep(0.99, 0.1, 1000, 32, 64);
  REQUIRE(grid.cells.size() == 32u * 64u);
  CHECK(grid.at(0, 0).radius_coord == kDiskRadiusClip);
  CHECK(std::abs(grid.at(31, 0).radius_coord - (1.0 - kDiskRadiusClip)) <
        1e-15);

  // flipping the sign of the feature vector changes nothing, so the maps
  // repeat after half a turn
  for (int i = 0; i < 32; ++i)
    for (int j = 0; j < 32; ++j) {
      const DiskCell& a = grid.at(i, j);
      const DiskCell& b = grid.at(i, j + 32);
      CHECK(same_reading(a.rho_td, b.rho_td));
      CHECK(same_reading(a.rho_tn, b.rho_tn));
      CHECK(same_reading(a.rho_fr, b.rho_fr));
      CHECK(a.class_td == b.class_td);
      CHECK(a.class_tn == b.class_tn);
      CHECK(a.class_fr == b.class_fr);
    }
}

TEST_CASE("fr degenerates to td as kappa vanishes, away from the singular curve") {
  // F = kappa A_kappa^{-1} gram blows up where A_0 crosses zero, so the
  // kappa -> 0 limit is uniform only on cells with |A_0| bounded away from
  // zero relative to the gram scalar; those are the cells checked.
  DiskGrid td_like = sweep(0.99, 1e-8, 1, 32, 64);
  Mdp m = build_two_state_mdp(0.99);
  Policy pi = uniform_policy(m);
  long checked = 0, skipped = 0;
  for (const DiskCell& c : td_like.cells) {
    Matrix phi(2, 1);
    phi(0, 0) = std::cos(c.angle);
    phi(1, 0) = std::sin(c.angle);
    LinearFaProblem pr =
        make_problem(m, phi, {c.radius_coord, 1.0 - c.radius_coord}, pi);
    double a0 = td_matrix(pr)(0, 0);
    if (std::abs(a0) < 0.05 * pr.gram(0, 0)) {
      ++skipped;
      continue;
    }
    ++checked;
    CHECK(std::abs(c.rho_fr - c.rho_td) < 1e-6);
  }
  CHECK(checked > 10 * skipped);  // the exclusion band must stay thin
}

TEST_CASE("full sweep: stationary ring, domains, and the frozen spot check") {
  const DiskGrid& grid = full_grid();

  SECTION("td converges on the ring nearest the stationary weight 1/3") {
    int best = 0;
    for (int i = 1; i < grid.n_radius; ++i)
      if (std::abs(disk_radius_at(i, grid.n_radius) - 1.0 / 3.0) <
          std::abs(disk_radius_at(best, grid.n_radius) - 1.0 / 3.0))
        best = i;
    for (int j = 0; j < grid.n_angle; ++j)
      CHECK(grid.at(best, j).class_td == Classification::converges);
  }

  SECTION("tn-only divergence exists, fr-only does not, counts add up") {
    DomainCounts counts = compare_domains(grid);
    CHECK(counts.fr_only_diverge == 0);
    CHECK(counts.tn_only_diverge > 0);
    long marginal = 0;
    for (const DiskCell& c : grid.cells)
      if (c.class_tn == Classification::marginal ||
          c.class_fr == Classification::marginal)
        ++marginal;
    CHECK(counts.tn_only_diverge + counts.fr_only_diverge + counts.both +
              counts.neither + marginal ==
          static_cast<long>(grid.cells.size()));
  }

  SECTION("tn-only cells form two bands that swap under a half turn") {
    auto tn_only = [&](int i, int j) {
      const DiskCell& c = grid.at(i, j);
      return c.class_tn == Classification::diverges &&
             c.class_fr == Classification::converges;
    };
    long total = 0;
    for (int i = 0; i < grid.n_radius; ++i)
      for (int j = 0; j < grid.n_angle; ++j)
        if (tn_only(i, j)) {
          ++total;
          CHECK(tn_only(i, (j + grid.n_angle / 2) % grid.n_angle));
        }
    CHECK(total > 0);
  }

  SECTION("the cell nearest (d0=0.9, phi along (1,-2)) splits tn from fr") {
    double want_r = 0.9;
    double want_a = std::atan2(-2.0, 1.0) + 2.0 * std::acos(-1.0);
    int bi = 0, bj = 0;
    double bd = 1e9;
    for (int i = 0; i < grid.n_radius; ++i)
      for (int j = 0; j < grid.n_angle; ++j) {
        const DiskCell& c = grid.at(i, j);
        double d = std::abs(c.radius_coord - want_r) +
                   std::abs(c.angle - want_a);
        if (d < bd) {
          bd = d;
          bi = i;
          bj = j;
        }
      }
    CHECK(grid.at(bi, bj).class_tn == Classification::diverges);
    CHECK(grid.at(bi, bj).class_fr == Classification::converges);
  }

  SECTION("no cell needed the solver-failure escape hatch") {
    for (const DiskCell& c : grid.cells) CHECK_FALSE(c.solver_failed);
  }
}

TEST_CASE("render writes the agreed CSV and byte-stable SVGs") {
  DiskGrid grid = sweep(0.99, 0.1, 1000, 32, 64);
  std::string dir = "disk_render_test";
  std::remove((dir + ".csv").c_str());
  render(grid, dir + ".csv", dir + ".svg");

  std::string csv = slurp(dir + ".csv");
  CHECK(csv.rfind("radius,angle,rho_td,rho_tn,rho_fr,class_td,class_tn,"
                  "class_fr\n", 0) == 0);
  CHECK(count_occurrences(csv, "\n") == 1 + 32u * 64u);

  // deterministic re-render
  std::string csv_again_path = dir + "_again.csv";
  render(grid, csv_again_path, dir + "_again.svg");
  CHECK(slurp(csv_again_path) == csv);
  for (const char* alg : {"_td.svg", "_tn.svg", "_fr.svg"}) {
    std::string first = slurp(dir + alg);
    std::string second = slurp(dir + "_again" + alg);
    CHECK(first == second);
    // structural checks: one contour path, the stationary circle, a legend
    CHECK(count_occurrences(first, "class=\"contour\"") == 1);
    CHECK(count_occurrences(first, "class=\"stationary\"") == 1);
    CHECK(count_occurrences(first, "class=\"legend\"") == 1);
    CHECK(first.find("symmetric log scale") != std::string::npos);
  }

  // a parallel sweep of the same grid gives identical cells
  DiskGrid par = sweep(0.99, 0.1, 1000, 32, 64, 4);
  render(par, dir + "_par.csv", "");
  CHECK(slurp(dir + "_par.csv") == csv);
}
