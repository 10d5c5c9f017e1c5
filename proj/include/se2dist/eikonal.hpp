#ifndef SE2DIST_EIKONAL_HPP_INCLUDED
#define SE2DIST_EIKONAL_HPP_INCLUDED

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "se2dist/approx.hpp"
#include "se2dist/grid.hpp"
#include "se2dist/metric.hpp"

namespace se2dist {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Offset3 = std::array<int, 3>;

//! One term rho * e e^T of a Selling decomposition.
struct StencilTerm {
  double weight = 0.0;
  Offset3 offset{};
};

namespace detail {

inline double quad(Mat3 const& d, Offset3 const& u, Offset3 const& v)
{
  double s = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      s += u[a] * d[a][b] * v[b];
    }
  }
  return s;
}

inline Offset3 cross(Offset3 const& u, Offset3 const& v)
{
  return {u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2],
          u[0] * v[1] - u[1] * v[0]};
}

}  // namespace detail

//! Selling's decomposition D = sum_k weight_k e_k e_k^T of a symmetric
//! positive definite 3x3 matrix, with integer offsets e_k and nonnegative
//! weights. Found by flipping superbase vectors until the superbase is
//! D-obtuse.
inline std::array<StencilTerm, 6> selling_decomposition(Mat3 const& d)
{
  std::array<Offset3, 4> v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, -1, -1}}};
  double const scale = d[0][0] + d[1][1] + d[2][2];
  double const tol = 1e-13 * scale;

  constexpr int kMaxFlips = 10000;
  int flips = 0;
  bool obtuse = false;
  while (!obtuse) {
    obtuse = true;
    for (int i = 0; i < 4 && obtuse; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        if (detail::quad(d, v[i], v[j]) > tol) {
          int others[2];
          int n = 0;
          for (int m = 0; m < 4; ++m) {
            if (m != i && m != j) others[n++] = m;
          }
          for (int c = 0; c < 3; ++c) {
            v[others[0]][c] += v[i][c];
            v[others[1]][c] += v[i][c];
            v[i][c] = -v[i][c];
          }
          obtuse = false;
          break;
        }
      }
    }
    if (++flips > kMaxFlips) {
      throw std::runtime_error("Selling decomposition did not terminate; "
                               "is the matrix positive definite?");
    }
  }

  std::array<StencilTerm, 6> terms{};
  int t = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      int others[2];
      int n = 0;
      for (int m = 0; m < 4; ++m) {
        if (m != i && m != j) others[n++] = m;
      }
      terms[t].weight = std::max(0.0, -detail::quad(d, v[i], v[j]));
      terms[t].offset = detail::cross(v[others[0]], v[others[1]]);
      ++t;
    }
  }
  return terms;
}

//! Dual metric at orientation theta in fractional grid-index coordinates:
//! the eikonal equation reads grad_i(u)^T D grad_i(u) = 1.
inline Mat3 index_space_dual_metric(MetricParams const& w, double const theta,
                                    double const hx, double const hy,
                                    double const ht)
{
  double const c = std::cos(theta);
  double const s = std::sin(theta);
  double const i1 = 1.0 / (w.w1() * w.w1());
  double const i2 = 1.0 / (w.w2() * w.w2());
  double const dxx = i1 * c * c + i2 * s * s;
  double const dxy = (i1 - i2) * c * s;
  double const dyy = i1 * s * s + i2 * c * c;
  double const dtt = 1.0 / (w.w3() * w.w3());
  return {{{dxx / (hx * hx), dxy / (hx * hy), 0.0},
           {dxy / (hx * hy), dyy / (hy * hy), 0.0},
           {0.0, 0.0, dtt / (ht * ht)}}};
}

enum class SolverMethod { fast_marching, fast_sweeping };

struct SolverOpts {
  //! Max-norm bound on value updates at convergence.
  double tol = 1e-6;
  //! Budget of full Gauss-Seidel passes.
  int max_sweeps = 500;
  SolverMethod method = SolverMethod::fast_marching;
  //! Nodes with rho_b below seed_radius whose local relative error estimate
  //! (local_error_epsilon) is below seed_tol are fixed to rho_b before the
  //! solve. This removes the point-source singularity of the upwind scheme;
  //! for w1 == w2 the seeded values are exact. Zero disables seeding.
  double seed_radius = 0.3;
  double seed_tol = 1e-3;
};

struct SolveStats {
  int sweeps = 0;
  double residual = 0.0;
};

class EikonalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

//! Smallest lambda with sum_k weight_k max(0, lambda - v_k)^2 = 1.
inline double solve_upwind_quadratic(std::array<std::pair<double, double>, 6> terms,
                                     int count)
{
  std::sort(terms.begin(), terms.begin() + count);
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double lambda = kInf;
  for (int m = 0; m < count; ++m) {
    auto const [v, rho] = terms[m];
    a += rho;
    b += rho * v;
    c += rho * v * v;
    double const disc = std::max(0.0, b * b - a * (c - 1.0));
    lambda = (b + std::sqrt(disc)) / a;
    if (m + 1 == count || lambda <= terms[m + 1].first) {
      break;
    }
  }
  return lambda;
}

//! Grid-bound discretization of the left-invariant eikonal equation: one
//! Selling stencil per theta slice, neighbours outside the spatial domain
//! count as +inf (outflow), theta wraps.
class EikonalScheme {
public:
  EikonalScheme(GridSpec const& spec, MetricParams const& w) : spec_(spec)
  {
    int const nt = spec.n_theta();
    stencils_.resize(nt);
    for (int k = 0; k < nt; ++k) {
      auto const d = index_space_dual_metric(w, spec.theta_at(k), spec.spacing_x(),
                                             spec.spacing_y(), spec.spacing_theta());
      double const scale = d[0][0] + d[1][1] + d[2][2];
      for (auto const& term : selling_decomposition(d)) {
        if (term.weight > 1e-12 * scale) {
          stencils_[k].push_back(term);
        }
      }
    }
    build_reverse_stencils();
  }

  [[nodiscard]] GridSpec const& spec() const { return spec_; }
  [[nodiscard]] std::vector<StencilTerm> const& stencil(int const k) const
  {
    return stencils_[k];
  }

  //! Value of the local update at node (i, j, k) given the current field.
  [[nodiscard]] double local_update(std::vector<double> const& u, int const i,
                                    int const j, int const k) const
  {
    std::array<std::pair<double, double>, 6> terms{};
    int count = 0;
    for (auto const& term : stencils_[k]) {
      auto const& e = term.offset;
      double v = kInf;
      for (int const sign : {-1, 1}) {
        int const ni = i + sign * e[0];
        int const nj = j + sign * e[1];
        if (!spec_.inside_xy(ni, nj)) {
          continue;
        }
        int const nk = spec_.wrap_theta_index(k + sign * e[2]);
        v = std::min(v, u[spec_.index(ni, nj, nk)]);
      }
      if (v < kInf) {
        terms[count++] = {v, term.weight};
      }
    }
    if (count == 0) {
      return kInf;
    }
    return solve_upwind_quadratic(terms, count);
  }

  //! Nodes whose stencil contains a node of slice k, as (di, dj, target slice).
  [[nodiscard]] std::vector<Offset3> const& dependents(int const k) const
  {
    return reverse_[k];
  }

private:
  void build_reverse_stencils()
  {
    int const nt = spec_.n_theta();
    std::vector<std::set<Offset3>> rev(nt);
    for (int s = 0; s < nt; ++s) {
      for (auto const& term : stencils_[s]) {
        auto const& e = term.offset;
        for (int const sign : {-1, 1}) {
          int const t = spec_.wrap_theta_index(s + sign * e[2]);
          rev[t].insert({-sign * e[0], -sign * e[1], s});
        }
      }
    }
    reverse_.resize(nt);
    for (int t = 0; t < nt; ++t) {
      reverse_[t].assign(rev[t].begin(), rev[t].end());
    }
  }

  GridSpec spec_;
  std::vector<std::vector<StencilTerm>> stencils_;
  std::vector<std::vector<Offset3>> reverse_;
};

//! Dijkstra-like pass; nodes flagged in `fixed` keep their initial value.
inline void fast_march(EikonalScheme const& scheme, std::vector<double>& u,
                       std::vector<char> const& fixed)
{
  GridSpec const& spec = scheme.spec();
  std::vector<char> accepted(spec.size(), 0);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    if (fixed[idx]) {
      heap.push({u[idx], idx});
    }
  }
  while (!heap.empty()) {
    auto const [value, idx] = heap.top();
    heap.pop();
    if (accepted[idx] || value > u[idx]) {
      continue;
    }
    accepted[idx] = 1;
    auto const [i, j, k] = spec.unindex(idx);
    for (auto const& dep : scheme.dependents(k)) {
      int const ni = i + dep[0];
      int const nj = j + dep[1];
      if (!spec.inside_xy(ni, nj)) {
        continue;
      }
      std::size_t const nidx = spec.index(ni, nj, dep[2]);
      if (accepted[nidx] || fixed[nidx]) {
        continue;
      }
      double const cand = scheme.local_update(u, ni, nj, dep[2]);
      if (cand < u[nidx]) {
        u[nidx] = cand;
        heap.push({cand, nidx});
      }
    }
  }
}

//! One Gauss-Seidel pass in the given axis orientation; returns the largest
//! value decrease (infinite while unreached nodes get their first value).
inline double sweep(EikonalScheme const& scheme, std::vector<double>& u,
                    std::vector<char> const& fixed, int const orientation)
{
  GridSpec const& spec = scheme.spec();
  bool const rev_i = orientation & 1;
  bool const rev_j = orientation & 2;
  bool const rev_k = orientation & 4;
  double max_change = 0.0;
  for (int a = 0; a < spec.n_x(); ++a) {
    int const i = rev_i ? spec.n_x() - 1 - a : a;
    for (int b = 0; b < spec.n_y(); ++b) {
      int const j = rev_j ? spec.n_y() - 1 - b : b;
      for (int c = 0; c < spec.n_theta(); ++c) {
        int const k = rev_k ? spec.n_theta() - 1 - c : c;
        std::size_t const idx = spec.index(i, j, k);
        if (fixed[idx]) {
          continue;
        }
        double const cand = scheme.local_update(u, i, j, k);
        if (cand < u[idx]) {
          double const change = u[idx] - cand;
          max_change = std::max(max_change, change);
          u[idx] = cand;
        }
      }
    }
  }
  return max_change;
}

//! Largest |local_update - u| over free nodes.
inline double residual(EikonalScheme const& scheme, std::vector<double> const& u,
                       std::vector<char> const& fixed)
{
  GridSpec const& spec = scheme.spec();
  double worst = 0.0;
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    if (fixed[idx]) {
      continue;
    }
    auto const [i, j, k] = spec.unindex(idx);
    double const r = std::abs(scheme.local_update(u, i, j, k) - u[idx]);
    worst = std::max(worst, std::isnan(r) ? kInf : r);
  }
  return worst;
}

}  // namespace detail

//! Distance d(p0, .) of the left-invariant metric on the grid, as the
//! solution of sum_i (A_i d / w_i)^2 = 1 with d(p0) = 0.
//!
//! Fast marching solves the upwind system in one pass because the scheme is
//! causal; Gauss-Seidel sweeps then confirm the residual. The sweeping
//! method reaches the same discrete solution by sweeps alone.
inline ScalarField solve_exact_distance(GridSpec const& spec, MetricParams const& w,
                                        SolverOpts const& opts = {},
                                        SolveStats* stats = nullptr)
{
  detail::EikonalScheme const scheme(spec, w);
  std::vector<double> u(spec.size(), detail::kInf);
  std::vector<char> fixed(spec.size(), 0);
  std::size_t const source = spec.reference_index();
  u[source] = 0.0;
  fixed[source] = 1;
  if (opts.seed_radius > 0.0) {
    for (std::size_t idx = 0; idx < spec.size(); ++idx) {
      PointM2 const p = spec.node(idx);
      double const r = rho_b(p, w);
      if (r < opts.seed_radius && local_error_epsilon(p, w) <= opts.seed_tol) {
        u[idx] = r;
        fixed[idx] = 1;
      }
    }
  }

  if (opts.method == SolverMethod::fast_marching) {
    detail::fast_march(scheme, u, fixed);
  }

  SolveStats local;
  double change = detail::residual(scheme, u, fixed);
  while (change >= opts.tol) {
    if (local.sweeps >= opts.max_sweeps) {
      std::ostringstream ss;
      ss << "eikonal solve not converged after " << local.sweeps
         << " sweeps (last update " << change << ", tol " << opts.tol << ")";
      throw EikonalError(ss.str());
    }
    change = detail::sweep(scheme, u, fixed, local.sweeps % 8);
    ++local.sweeps;
  }
  local.residual = change;

  for (double const v : u) {
    if (!std::isfinite(v)) {
      throw EikonalError("eikonal solve left unreachable nodes");
    }
  }
  if (stats != nullptr) {
    *stats = local;
  }

  ScalarField out(spec);
  out.values = std::move(u);
  out.kind = FieldKind::distance;
  out.metric = w;
  return out;
}

inline constexpr double kDefaultSubRiemannianKappa = 100.0;

//! Sub-Riemannian distance approximated by the Riemannian one with the
//! sideways weight raised to kappa * w1.
inline ScalarField solve_subriemannian_distance(GridSpec const& spec,
                                                MetricParams const& w,
                                                SolverOpts const& opts = {},
                                                double const kappa = kDefaultSubRiemannianKappa,
                                                SolveStats* stats = nullptr)
{
  if (!(kappa >= 1.0)) {
    throw std::invalid_argument("sub-Riemannian proxy needs kappa >= 1");
  }
  MetricParams const proxy(w.w1(), std::max(w.w2(), kappa * w.w1()), w.w3());
  return solve_exact_distance(spec, proxy, opts, stats);
}

}  // namespace se2dist

#endif  // SE2DIST_EIKONAL_HPP_INCLUDED
