#ifndef SE2DIST_ANALYSIS_HPP_INCLUDED
#define SE2DIST_ANALYSIS_HPP_INCLUDED

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "se2dist/approx.hpp"
#include "se2dist/eikonal.hpp"
#include "se2dist/grid.hpp"
#include "se2dist/metric.hpp"
#include "se2dist/se2_core.hpp"

namespace se2dist {

struct ErrorReport {
  ApproxKind kind;
  MetricParams w;
  GridSpec spec;
  double mean_rel_err = 0.0;
  double max_rel_err = 0.0;
  //! Nodes with d below one metric cell, left out of the average.
  std::size_t n_excluded = 0;
  std::size_t n_used = 0;
};

namespace detail {

inline MetricParams require_distance_field(ScalarField const& d)
{
  if (d.kind != FieldKind::distance || !d.metric) {
    throw std::invalid_argument("expected a solved distance field with metric weights");
  }
  for (double const v : d.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("distance field has non-finite values (not converged)");
    }
  }
  return *d.metric;
}

}  // namespace detail

//! Mean of |rho_i - d_i| / d_i over the grid nodes.
inline ErrorReport mean_relative_error(ApproxKind const& kind, ScalarField const& d)
{
  MetricParams const w = detail::require_distance_field(d);
  double const cell = d.spec.metric_cell(w);
  ErrorReport rep{kind, w, d.spec};
  double sum = 0.0;
  for (std::size_t idx = 0; idx < d.spec.size(); ++idx) {
    double const di = d.values[idx];
    if (di < cell) {
      ++rep.n_excluded;
      continue;
    }
    double const rel = std::abs(evaluate(kind, d.spec.node(idx), w) - di) / di;
    sum += rel;
    rep.max_rel_err = std::max(rep.max_rel_err, rel);
    ++rep.n_used;
  }
  if (rep.n_used == 0) {
    throw std::invalid_argument("no grid nodes left after excluding the source");
  }
  rep.mean_rel_err = sum / static_cast<double>(rep.n_used);
  return rep;
}

struct BoundsOptions {
  double rel_slack = 0.03;
  //! Fraction of the spatial half-width that is checked.
  double inner_fraction = 0.95;
};

struct BoundsViolation {
  std::size_t index = 0;
  PointM2 point;
  std::string check;
  //! Amount by which the inequality fails beyond the slack.
  double excess = 0.0;
};

struct BoundsReport {
  std::size_t n_checked = 0;
  std::size_t n_violations = 0;
  std::optional<BoundsViolation> worst;

  [[nodiscard]] bool passed() const { return n_violations == 0; }
};

//! Checks l <= d <= min(u1, u2) and d / zeta <= rho_b <= zeta d at every
//! node of the inner domain. Each inequality a <= b may fail by
//! rel_slack * max(a, b) plus one metric cell.
inline BoundsReport verify_bounds(ScalarField const& d, MetricParams const& w,
                                  BoundsOptions const& opts = {})
{
  GridSpec const& spec = d.spec;
  double const cell = spec.metric_cell(w);
  double const zeta = w.zeta();
  double const limit = opts.inner_fraction * spec.x_max() * (1.0 + 1e-12);
  BoundsReport rep;

  auto const check = [&](double const lo, double const hi, char const* name,
                         std::size_t const idx, PointM2 const& p) {
    double const slack = opts.rel_slack * std::max(std::abs(lo), std::abs(hi)) + cell;
    double const excess = lo - hi - slack;
    if (excess > 0.0 || std::isnan(excess)) {
      ++rep.n_violations;
      if (!rep.worst || excess > rep.worst->excess) {
        rep.worst = BoundsViolation{idx, p, name, excess};
      }
    }
  };

  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    PointM2 const p = spec.node(idx);
    if (std::abs(p.x) > limit || std::abs(p.y) > limit) {
      continue;
    }
    ++rep.n_checked;
    double const di = d.values[idx];
    double const rb = rho_b(p, w);
    check(lower_bound_l(p, w), di, "l <= d", idx, p);
    check(di, std::min(upper_bound_u1(p, w), upper_bound_u2(p, w)), "d <= min(u1,u2)",
          idx, p);
    check(di / zeta, rb, "d/zeta <= rho_b", idx, p);
    check(rb, zeta * di, "rho_b <= zeta d", idx, p);
  }
  return rep;
}

//! Checks zeta^-beta k <= k_b <= zeta^beta k at every node, where k is the
//! kernel of the solved distance and k_b the kernel of rho_b. The distance
//! fed into k may be off by rel_slack * d + one metric cell in either
//! direction.
inline BoundsReport verify_kernel_sandwich(ScalarField const& d, KernelParams const& kp,
                                           BoundsOptions const& opts = {})
{
  MetricParams const w = detail::require_distance_field(d);
  GridSpec const& spec = d.spec;
  double const cell = spec.metric_cell(w);
  double const factor = std::pow(w.zeta(), kp.beta());
  BoundsReport rep;
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    PointM2 const p = spec.node(idx);
    double const di = d.values[idx];
    double const err = opts.rel_slack * di + cell;
    double const kb = morph_kernel(p, w, kp, ApproxKind(ApproxTag::rho_b));
    double const k_lo = morph_kernel_from_distance(std::max(0.0, di - err), kp);
    double const k_hi = morph_kernel_from_distance(di + err, kp);
    ++rep.n_checked;
    auto const record = [&](double const excess, char const* name) {
      if (excess > 0.0 || std::isnan(excess)) {
        ++rep.n_violations;
        if (!rep.worst || excess > rep.worst->excess) {
          rep.worst = BoundsViolation{idx, p, name, excess};
        }
      }
    };
    record(k_lo / factor - kb, "zeta^-beta k <= k_b");
    record(kb - factor * k_hi, "k_b <= zeta^beta k");
  }
  return rep;
}

struct SymmetryOptions {
  std::size_t n_points = 100000;
  std::uint64_t seed = 1;
  //! Sampling region |(x, y)| <= radius, theta in [-pi, pi).
  double radius = 3.0;
  double tol = 1e-10;
  //! Deviations are divided by max(|f(p)|, rel_floor) when set.
  std::optional<double> rel_floor;
};

struct SymmetryReport {
  std::array<double, 8> max_dev{};
  double worst_dev = 0.0;
  int worst_symmetry = 0;
  PointM2 worst_point;
  double tol = 0.0;

  [[nodiscard]] bool passed() const { return worst_dev <= tol; }
};

//! Largest deviation |f(eps_i(p)) - f(p)| over random points and the eight
//! fundamental symmetries (absolute, or relative when rel_floor is set).
inline SymmetryReport verify_symmetries(std::function<double(PointM2 const&)> const& f,
                                        SymmetryOptions const& opts = {})
{
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> radius(0.0, 1.0);
  std::uniform_real_distribution<double> angle(-kPi, kPi);
  SymmetryReport rep;
  rep.tol = opts.tol;
  for (std::size_t n = 0; n < opts.n_points; ++n) {
    double const r = opts.radius * std::sqrt(radius(rng));
    double const phi = angle(rng);
    PointM2 const p{r * std::cos(phi), r * std::sin(phi), angle(rng)};
    double const base = f(p);
    double const denom = opts.rel_floor ? std::max(std::abs(base), *opts.rel_floor) : 1.0;
    for (int s = 1; s < 8; ++s) {
      double const dev = std::abs(f(apply_symmetry(SymmetryId(s), p)) - base) / denom;
      rep.max_dev[s] = std::max(rep.max_dev[s], dev);
      if (dev > rep.worst_dev || std::isnan(dev)) {
        rep.worst_dev = std::isnan(dev) ? std::numeric_limits<double>::infinity() : dev;
        rep.worst_symmetry = s;
        rep.worst_point = p;
      }
    }
  }
  return rep;
}

inline SymmetryReport verify_symmetries(ApproxKind const& kind, MetricParams const& w,
                                        SymmetryOptions const& opts = {})
{
  return verify_symmetries([&](PointM2 const& p) { return evaluate(kind, p, w); }, opts);
}

inline SymmetryOptions field_symmetry_defaults()
{
  SymmetryOptions opts;
  opts.tol = 0.02;
  return opts;
}

//! Grid fields are compared through interpolation, relative to
//! max(d, one metric cell), inside 95% of the domain.
inline SymmetryReport verify_symmetries(ScalarField const& field,
                                        SymmetryOptions opts = field_symmetry_defaults())
{
  double const cell =
      field.metric ? field.spec.metric_cell(*field.metric) : field.spec.spacing_x();
  opts.radius = std::min(opts.radius, 0.95 * field.spec.x_max());
  if (!opts.rel_floor) {
    opts.rel_floor = cell;
  }
  return verify_symmetries([&](PointM2 const& p) { return sample_field(field, p); },
                           opts);
}

//! A polyline in the (x, y) plane of one orientation slice.
struct Polyline {
  std::vector<std::array<double, 2>> points;
  bool closed = false;
};

//! Area enclosed by a closed polyline (shoelace formula).
inline double polyline_area(Polyline const& line)
{
  double a = 0.0;
  std::size_t const n = line.points.size();
  for (std::size_t m = 0; m + 1 < n; ++m) {
    a += line.points[m][0] * line.points[m + 1][1] - line.points[m + 1][0] * line.points[m][1];
  }
  return 0.5 * std::abs(a);
}

namespace detail {

//! Marching squares on slice k. Edges are keyed so that segments of
//! neighbouring cells share endpoints exactly.
inline std::vector<Polyline> contour_slice(ScalarField const& f, int const k,
                                           double const level)
{
  GridSpec const& spec = f.spec;
  int const nx = spec.n_x();
  int const ny = spec.n_y();
  // Edge id: horizontal edges (i,j)-(i+1,j) are 2*(i*ny+j), vertical ones
  // (i,j)-(i,j+1) are 2*(i*ny+j)+1.
  auto const hedge = [&](int i, int j) { return 2L * (static_cast<long>(i) * ny + j); };
  auto const vedge = [&](int i, int j) { return 2L * (static_cast<long>(i) * ny + j) + 1; };
  std::map<long, std::array<double, 2>> where;
  auto const crossing = [&](long id, int i0, int j0, int i1, int j1) {
    if (!where.count(id)) {
      double const a = f.at(i0, j0, k) - level;
      double const b = f.at(i1, j1, k) - level;
      double const s = a / (a - b);
      where[id] = {spec.x_at(i0) + s * (spec.x_at(i1) - spec.x_at(i0)),
                   spec.y_at(j0) + s * (spec.y_at(j1) - spec.y_at(j0))};
    }
  };

  std::vector<std::pair<long, long>> segments;
  for (int i = 0; i + 1 < nx; ++i) {
    for (int j = 0; j + 1 < ny; ++j) {
      double const v00 = f.at(i, j, k);
      double const v10 = f.at(i + 1, j, k);
      double const v11 = f.at(i + 1, j + 1, k);
      double const v01 = f.at(i, j + 1, k);
      int const code = (v00 >= level ? 1 : 0) | (v10 >= level ? 2 : 0) |
                       (v11 >= level ? 4 : 0) | (v01 >= level ? 8 : 0);
      if (code == 0 || code == 15) {
        continue;
      }
      long const bottom = hedge(i, j);
      long const top = hedge(i, j + 1);
      long const left = vedge(i, j);
      long const right = vedge(i + 1, j);
      auto add = [&](long a, long b) { segments.emplace_back(a, b); };
      bool const centre_high = 0.25 * (v00 + v10 + v11 + v01) >= level;
      switch (code) {
        case 1: case 14: add(bottom, left); break;
        case 2: case 13: add(bottom, right); break;
        case 3: case 12: add(left, right); break;
        case 4: case 11: add(right, top); break;
        case 6: case 9: add(bottom, top); break;
        case 7: case 8: add(left, top); break;
        case 5:
          if (centre_high) { add(bottom, right); add(left, top); }
          else { add(bottom, left); add(right, top); }
          break;
        case 10:
          if (centre_high) { add(bottom, left); add(right, top); }
          else { add(bottom, right); add(left, top); }
          break;
        default: break;
      }
      crossing(bottom, i, j, i + 1, j);
      crossing(top, i, j + 1, i + 1, j + 1);
      crossing(left, i, j, i, j + 1);
      crossing(right, i + 1, j, i + 1, j + 1);
    }
  }

  // Chain segments into polylines.
  std::map<long, std::vector<std::size_t>> incident;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    incident[segments[s].first].push_back(s);
    incident[segments[s].second].push_back(s);
  }
  std::vector<char> used(segments.size(), 0);
  auto const next_segment = [&](long node) -> std::optional<std::size_t> {
    for (std::size_t const s : incident[node]) {
      if (!used[s]) return s;
    }
    return std::nullopt;
  };

  std::vector<Polyline> lines;
  // Open chains start at an edge with one incident segment.
  std::vector<long> starts;
  for (auto const& [node, segs] : incident) {
    if (segs.size() == 1) starts.push_back(node);
  }
  for (auto const& [node, segs] : incident) {
    starts.push_back(node);
  }
  for (long const start : starts) {
    auto s = next_segment(start);
    if (!s) continue;
    std::vector<long> chain{start};
    long cur = start;
    while (s) {
      used[*s] = 1;
      cur = segments[*s].first == cur ? segments[*s].second : segments[*s].first;
      chain.push_back(cur);
      s = next_segment(cur);
    }
    Polyline line;
    line.closed = chain.size() > 2 && chain.front() == chain.back();
    for (long const id : chain) {
      line.points.push_back(where.at(id));
    }
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace detail

struct SliceContours {
  int slice = 0;
  double theta = 0.0;
  std::vector<Polyline> lines;
};

//! Level set {f = level} on the given orientation slices.
inline std::vector<SliceContours> isocontours(ScalarField const& f, double const level,
                                              std::vector<int> const& slices)
{
  if (!(level > 0.0)) {
    throw std::invalid_argument("contour level must be positive");
  }
  std::vector<SliceContours> out;
  for (int const k : slices) {
    if (k < 0 || k >= f.spec.n_theta()) {
      throw std::out_of_range("orientation slice out of range");
    }
    out.push_back({k, f.spec.theta_at(k), detail::contour_slice(f, k, level)});
  }
  return out;
}

//! Slice index closest to theta.
inline int nearest_slice(GridSpec const& spec, double const theta)
{
  double const pos = (wrap_angle(theta) + kPi) / spec.spacing_theta();
  return spec.wrap_theta_index(static_cast<int>(std::lround(pos)));
}

//! CSV with columns slice_theta,segment_id,x,y; closed polylines repeat
//! their first point at the end.
inline void write_isocontour_csv(std::ostream& out, std::vector<SliceContours> const& cs)
{
  out << "slice_theta,segment_id,x,y\n";
  int id = 0;
  for (auto const& slice : cs) {
    for (auto const& line : slice.lines) {
      for (auto const& pt : line.points) {
        out << detail::format_real(slice.theta) << ',' << id << ','
            << detail::format_real(pt[0]) << ',' << detail::format_real(pt[1]) << '\n';
      }
      ++id;
    }
  }
}

struct ErrorTableRow {
  double zeta = 1.0;
  MetricParams w{1.0, 1.0, 1.0};
  double eps_rho_b = 0.0;
  double eps_rho_b_com = 0.0;
  SolveStats stats;
};

inline std::vector<double> const& error_table_zetas()
{
  static std::vector<double> const z{1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0};
  return z;
}

//! One row of the mean relative error table: w = (w1, zeta w1, w3).
inline ErrorTableRow error_table_row(GridSpec const& spec, double const zeta, double const w1 = 1.0,
                            double const w3 = 1.0, double const nu = kDefaultNuNew,
                            SolverOpts const& opts = {})
{
  MetricParams const w(w1, zeta * w1, w3);
  ErrorTableRow row;
  row.zeta = zeta;
  row.w = w;
  ScalarField const d = solve_exact_distance(spec, w, opts, &row.stats);
  row.eps_rho_b = mean_relative_error(ApproxKind(ApproxTag::rho_b), d).mean_rel_err;
  row.eps_rho_b_com =
      mean_relative_error(ApproxKind(ApproxTag::rho_b_com, nu), d).mean_rel_err;
  return row;
}

}  // namespace se2dist

#endif  // SE2DIST_ANALYSIS_HPP_INCLUDED
