#pragma once
// The two-state disk sweep. One point of the unit disk encodes one analysis
// problem: its radius is the sampling weight d(s0) of the first state, its
// angle the direction of the shared feature vector Phi = (cos a, sin a).
// For every grid point we classify td, tn, and fr by the spectral radius of
// their one-outer-step iteration matrices, then draw the resulting maps.
//
// The underlying MDP never changes: s0 -> s1 with certainty, s1 returns to
// either state with probability 1/2, no rewards. Its stationary distribution
// puts 1/3 on s0, which is why the d(s0) = 1/3 circle is the on-policy locus.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tdlab/format.hpp"
#include "tdlab/linear_fa.hpp"

namespace tdlab {

struct DiskCell {
  double radius_coord = 0.0;  // d(s0)
  double angle = 0.0;         // feature direction
  double rho_td = 0.0, rho_tn = 0.0, rho_fr = 0.0;
  Classification class_td = Classification::marginal;
  Classification class_tn = Classification::marginal;
  Classification class_fr = Classification::marginal;
  bool solver_failed = false;  // some matrix was singular or the solver gave up
};

struct DiskParams {
  double gamma = 0.99;
  double kappa = 0.1;
  long period = 10'000;
  // Step sizes are chosen per cell by stable_step_size on the relevant
  // curvature matrix; recorded here so output metadata can say so.
  std::string eta_rule = "adaptive";
};

struct DiskGrid {
  int n_radius = 0;
  int n_angle = 0;
  DiskParams params;
  std::vector<DiskCell> cells;  // radius-major: index = i * n_angle + j

  const DiskCell& at(int i, int j) const { return cells[i * n_angle + j]; }
  DiskCell& at(int i, int j) { return cells[i * n_angle + j]; }
};

/// The fixed reward-less chain behind every cell.
inline Mdp build_two_state_mdp(double gamma) {
  if (!(gamma > 0.0) || !(gamma < 1.0))
    throw std::invalid_argument("build_two_state_mdp: gamma must be in (0,1)");
  Mdp m;
  m.n_states = 2;
  m.n_actions = 1;
  m.gamma = gamma;
  m.transition = {0.0, 1.0, 0.5, 0.5};
  m.reward = {0.0, 0.0};
  m.initial = {1.0, 0.0};
  return m;
}

// The rim d(s0) in {0,1} makes the weighting degenerate (one state unseen),
// so the radius range is clipped away from both endpoints.
inline constexpr double kDiskRadiusClip = 1e-3;

inline double disk_radius_at(int i, int n_radius) {
  return kDiskRadiusClip +
         i * (1.0 - 2.0 * kDiskRadiusClip) / (n_radius - 1);
}
inline double disk_angle_at(int j, int n_angle) {
  return j * (2.0 * std::acos(-1.0)) / n_angle;
}

namespace detail {

inline void sweep_cell(const Mdp& mdp, const Policy& pi,
                       const DiskParams& params, DiskCell& cell) {
  Matrix phi(2, 1);
  phi(0, 0) = std::cos(cell.angle);
  phi(1, 0) = std::sin(cell.angle);
  LinearFaProblem pr;
  try {
    pr = make_problem(mdp, phi,
                      {cell.radius_coord, 1.0 - cell.radius_coord}, pi);
  } catch (const MatrixError&) {
    // Degenerate feature weighting: no analysis possible for any rule.
    double nan = std::numeric_limits<double>::quiet_NaN();
    cell.rho_td = cell.rho_tn = cell.rho_fr = nan;
    cell.solver_failed = true;
    return;
  }

  auto one = [&](Algorithm alg, double& rho, Classification& cls) {
    try {
      IterationSpec spec;
      spec.algorithm = alg;
      spec.period = params.period;
      spec.kappa = params.kappa;
      switch (alg) {
        case Algorithm::TD0:
          spec.eta = stable_step_size(td_matrix(pr));
          break;
        case Algorithm::TN:
          spec.eta = stable_step_size(pr.gram);
          break;
        default:
          spec.eta = stable_step_size(fr_matrix(pr, spec.kappa));
          break;
      }
      SpectralReport rep = classify(pr, spec);
      rho = rep.spectrum.radius;
      cls = rep.classification;
      if (rep.solver_failed) cell.solver_failed = true;
    } catch (const MatrixError&) {
      rho = std::numeric_limits<double>::quiet_NaN();
      cls = Classification::marginal;
      cell.solver_failed = true;
    }
  };
  one(Algorithm::TD0, cell.rho_td, cell.class_td);
  one(Algorithm::TN, cell.rho_tn, cell.class_tn);
  one(Algorithm::FR, cell.rho_fr, cell.class_fr);
}

}  // namespace detail

/// Classify the full grid. Cells are independent; `jobs` > 1 splits the rows
/// across threads, and the output is identical either way because every cell
/// writes only its own slot.
inline DiskGrid sweep(double gamma, double kappa, long period, int n_radius,
                      int n_angle, int jobs = 1) {
  if (n_radius < 32 || n_angle < 64)
    throw std::invalid_argument(
        "sweep: resolution must be at least 32x64, got " +
        std::to_string(n_radius) + "x" + std::to_string(n_angle));
  if (kappa < 0.0)
    throw std::invalid_argument("sweep: kappa must be nonnegative");
  if (period < 1)
    throw std::invalid_argument("sweep: period must be at least 1");
  DiskGrid grid;
  grid.n_radius = n_radius;
  grid.n_angle = n_angle;
  grid.params = DiskParams{gamma, kappa, period, "adaptive"};
  grid.cells.resize(static_cast<size_t>(n_radius) * n_angle);
  Mdp mdp = build_two_state_mdp(gamma);
  Policy pi = uniform_policy(mdp);
  for (int i = 0; i < n_radius; ++i)
    for (int j = 0; j < n_angle; ++j) {
      DiskCell& c = grid.at(i, j);
      c.radius_coord = disk_radius_at(i, n_radius);
      c.angle = disk_angle_at(j, n_angle);
    }

  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (DiskCell& c : grid.cells) detail::sweep_cell(mdp, pi, grid.params, c);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next_row{0};
    for (int t = 0; t < jobs; ++t)
      pool.emplace_back([&]() {
        for (;;) {
          int i = next_row.fetch_add(1);
          if (i >= n_radius) return;
          for (int j = 0; j < n_angle; ++j)
            detail::sweep_cell(mdp, pi, grid.params, grid.at(i, j));
        }
      });
    for (std::thread& t : pool) t.join();
  }
  return grid;
}

struct DomainCounts {
  long tn_only_diverge = 0;
  long fr_only_diverge = 0;
  long both = 0;
  long neither = 0;
};

/// Where does tn diverge but fr not, and vice versa? Marginal cells carry no
/// verdict and are left out entirely.
inline DomainCounts compare_domains(const DiskGrid& grid) {
  DomainCounts counts;
  for (const DiskCell& c : grid.cells) {
    if (c.class_tn == Classification::marginal ||
        c.class_fr == Classification::marginal)
      continue;
    bool tn_div = c.class_tn == Classification::diverges;
    bool fr_div = c.class_fr == Classification::diverges;
    if (tn_div && fr_div) ++counts.both;
    else if (tn_div) ++counts.tn_only_diverge;
    else if (fr_div) ++counts.fr_only_diverge;
    else ++counts.neither;
  }
  return counts;
}

// ---- rendering ----

namespace detail {

// Symmetric log color scale centered on rho = 1: one decade down is full
// blue, one decade up is full red, white in the middle. Undefined cells are
// grey. Quantized so equal-color runs can share one path.
inline int color_level(double rho) {
  if (std::isnan(rho)) return 999;
  double v = rho <= 0.0 ? -1.0 : std::log10(rho);
  v = std::clamp(v, -1.0, 1.0);
  return static_cast<int>(std::lround(v * 16.0));
}

inline std::string level_hex(int level) {
  if (level == 999) return "#bbbbbb";
  auto channel = [](double a, double b, double t) {
    return static_cast<int>(std::lround(a + (b - a) * t));
  };
  int r, g, b;
  if (level <= 0) {
    double t = (level + 16) / 16.0;  // blue #2166ac -> white
    r = channel(0x21, 0xff, t);
    g = channel(0x66, 0xff, t);
    b = channel(0xac, 0xff, t);
  } else {
    double t = level / 16.0;  // white -> red #b2182b
    r = channel(0xff, 0xb2, t);
    g = channel(0xff, 0x18, t);
    b = channel(0xff, 0x2b, t);
  }
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

struct SvgGeom {
  double cx = 280.0, cy = 300.0, scale = 250.0;
  double px(double radius, double angle) const {
    return cx + scale * radius * std::cos(angle);
  }
  double py(double radius, double angle) const {
    return cy - scale * radius * std::sin(angle);
  }
};

inline std::string pt(const SvgGeom& g, double radius, double angle) {
  return fmt_fixed(g.px(radius, angle), 2) + " " +
         fmt_fixed(g.py(radius, angle), 2);
}

// One annular patch spanning [a0, a1] at radii [r0, r1], as two arcs.
inline std::string annular_patch(const SvgGeom& g, double r0, double r1,
                                 double a0, double a1) {
  std::string r1s = fmt_fixed(g.scale * r1, 2);
  std::string r0s = fmt_fixed(g.scale * r0, 2);
  // spans are kept below a half turn, so large-arc is always 0
  return "M" + pt(g, r1, a0) + "A" + r1s + " " + r1s + " 0 0 0 " +
         pt(g, r1, a1) + "L" + pt(g, r0, a1) + "A" + r0s + " " + r0s +
         " 0 0 1 " + pt(g, r0, a0) + "Z";
}

// Heatmap for one field: per radius ring, merge angle-consecutive cells of
// equal quantized color into a single annular patch.
inline void write_heatmap(std::ofstream& out, const DiskGrid& grid,
                          double DiskCell::*field, const SvgGeom& g) {
  int nr = grid.n_radius, na = grid.n_angle;
  double dr = (1.0 - 2.0 * kDiskRadiusClip) / (nr - 1);
  double da = 2.0 * std::acos(-1.0) / na;
  out << "<g class=\"heatmap\" stroke=\"none\">\n";
  for (int i = 0; i < nr; ++i) {
    double rc = disk_radius_at(i, nr);
    double r0 = std::max(0.0, rc - 0.5 * dr);
    double r1 = std::min(1.0, rc + 0.5 * dr);
    int j = 0;
    while (j < na) {
      int level = color_level(grid.at(i, j).*field);
      int run = 1;
      while (j + run < na && run < na / 2 &&
             color_level(grid.at(i, j + run).*field) == level)
        ++run;
      double a0 = grid.at(i, j).angle - 0.5 * da;
      double a1 = grid.at(i, j + run - 1).angle + 0.5 * da;
      out << "<path fill=\"" << level_hex(level) << "\" d=\""
          << annular_patch(g, r0, r1, a0, a1) << "\"/>\n";
      j += run;
    }
  }
  out << "</g>\n";
}

// Marching squares on log10(rho) at iso value 0, in (radius, angle) space
// with angle wrap-around, emitted as one path of small segments.
inline std::string contour_path(const DiskGrid& grid, double DiskCell::*field,
                                const SvgGeom& g) {
  int nr = grid.n_radius, na = grid.n_angle;
  double da = 2.0 * std::acos(-1.0) / na;
  auto value = [&](int i, int j) {
    double rho = grid.at(i, j % na).*field;
    if (std::isnan(rho)) return std::numeric_limits<double>::quiet_NaN();
    if (rho <= 0.0) return -10.0;
    return std::clamp(std::log10(rho), -10.0, 10.0);
  };
  std::string d;
  for (int i = 0; i + 1 < nr; ++i) {
    double ra = disk_radius_at(i, nr), rb = disk_radius_at(i + 1, nr);
    for (int j = 0; j < na; ++j) {
      double aa = j * da, ab = (j + 1) * da;
      // corners: 0=(i,j) 1=(i,j+1) 2=(i+1,j+1) 3=(i+1,j)
      double f0 = value(i, j), f1 = value(i, j + 1);
      double f2 = value(i + 1, j + 1), f3 = value(i + 1, j);
      if (std::isnan(f0) || std::isnan(f1) || std::isnan(f2) ||
          std::isnan(f3))
        continue;
      int mask = (f0 >= 0.0 ? 1 : 0) | (f1 >= 0.0 ? 2 : 0) |
                 (f2 >= 0.0 ? 4 : 0) | (f3 >= 0.0 ? 8 : 0);
      if (mask == 0 || mask == 15) continue;
      auto cross = [](double fa, double fb) { return fa / (fa - fb); };
      // edge midpoints in (radius, angle): bottom 0-1, right 1-2, top 3-2,
      // left 0-3
      auto bottom = [&] { return std::pair{ra, aa + da * cross(f0, f1)}; };
      auto right = [&] { return std::pair{ra + (rb - ra) * cross(f1, f2), ab}; };
      auto top = [&] { return std::pair{rb, aa + da * cross(f3, f2)}; };
      auto left = [&] { return std::pair{ra + (rb - ra) * cross(f0, f3), aa}; };
      auto seg = [&](std::pair<double, double> p, std::pair<double, double> q) {
        d += "M" + pt(g, p.first, p.second) + "L" + pt(g, q.first, q.second);
      };
      switch (mask) {
        case 1: case 14: seg(left(), bottom()); break;
        case 2: case 13: seg(bottom(), right()); break;
        case 3: case 12: seg(left(), right()); break;
        case 4: case 11: seg(right(), top()); break;
        case 6: case 9: seg(bottom(), top()); break;
        case 7: case 8: seg(left(), top()); break;
        case 5: seg(left(), bottom()); seg(right(), top()); break;
        case 10: seg(bottom(), right()); seg(left(), top()); break;
      }
    }
  }
  return d;
}

inline void write_disk_svg(const std::string& path, const DiskGrid& grid,
                           double DiskCell::*field, const std::string& label) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open SVG output file: " + path);
  SvgGeom g;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"560\" "
         "height=\"650\" viewBox=\"0 0 560 650\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"560\" height=\"650\" "
         "fill=\"#ffffff\"/>\n";
  out << "<text x=\"280\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << label << " spectral radius (gamma=" << fmt(grid.params.gamma)
      << ", kappa=" << fmt(grid.params.kappa)
      << ", period=" << fmt(grid.params.period) << ")</text>\n";
  write_heatmap(out, grid, field, g);
  out << "<path class=\"contour\" fill=\"none\" stroke=\"#000000\" "
         "stroke-width=\"2\" d=\""
      << contour_path(grid, field, g) << "\"/>\n";
  // the on-policy circle: d(s0) = 1/3
  out << "<circle class=\"stationary\" cx=\"" << fmt_fixed(g.cx, 2)
      << "\" cy=\"" << fmt_fixed(g.cy, 2) << "\" r=\""
      << fmt_fixed(g.scale / 3.0, 2)
      << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.2\"/>\n";
  // legend: the scale is symmetric log around rho = 1
  out << "<g class=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int level = -16; level <= 16; ++level) {
    double x = 120.0 + (level + 16) * 10.0;
    out << "<rect x=\"" << fmt_fixed(x, 1)
        << "\" y=\"600\" width=\"10\" height=\"14\" fill=\""
        << level_hex(level) << "\"/>\n";
  }
  out << "<text x=\"120\" y=\"594\">0.1</text>\n"
         "<text x=\"280\" y=\"594\" text-anchor=\"middle\">1</text>\n"
         "<text x=\"450\" y=\"594\" text-anchor=\"end\">10</text>\n"
         "<text x=\"280\" y=\"634\" text-anchor=\"middle\">spectral radius, "
         "symmetric log scale; black curve: radius 1 contour; inner circle: "
         "d(s0)=1/3</text>\n";
  out << "</g>\n</svg>\n";
}

}  // namespace detail

/// CSV with one row per cell in radius-major order, plus the three SVG maps
/// when svg_base is nonempty ("dir/disk.svg" becomes dir/disk_td.svg and
/// friends). Output depends only on the grid, so rerenders are byte-equal.
inline void render(const DiskGrid& grid, const std::string& csv_path,
                   const std::string& svg_base = "") {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot open CSV output file: " + csv_path);
  out << "radius,angle,rho_td,rho_tn,rho_fr,class_td,class_tn,class_fr\n";
  for (const DiskCell& c : grid.cells) {
    out << fmt(c.radius_coord) << ',' << fmt(c.angle) << ',' << fmt(c.rho_td)
        << ',' << fmt(c.rho_tn) << ',' << fmt(c.rho_fr) << ','
        << to_string(c.class_td) << ',' << to_string(c.class_tn) << ','
        << to_string(c.class_fr) << '\n';
  }
  out.close();
  if (svg_base.empty()) return;

  std::string stem = svg_base;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".svg")
    stem = stem.substr(0, stem.size() - 4);
  detail::write_disk_svg(stem + "_td.svg", grid, &DiskCell::rho_td, "td");
  detail::write_disk_svg(stem + "_tn.svg", grid, &DiskCell::rho_tn, "tn");
  detail::write_disk_svg(stem + "_fr.svg", grid, &DiskCell::rho_fr, "fr");
}

}  // namespace tdlab
