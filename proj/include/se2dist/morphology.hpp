#ifndef SE2DIST_MORPHOLOGY_HPP_INCLUDED
#define SE2DIST_MORPHOLOGY_HPP_INCLUDED

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "se2dist/approx.hpp"
#include "se2dist/eikonal.hpp"
#include "se2dist/grid.hpp"
#include "se2dist/metric.hpp"
#include "se2dist/se2_core.hpp"

namespace se2dist {

//! Kernel built from a solved distance field, sampled by interpolation.
//! Arguments outside the field's domain give +inf.
struct ExactFieldKernel {
  std::shared_ptr<ScalarField const> distance;
};

using KernelSource = std::variant<ApproxKind, ExactFieldKernel>;

//! Morphological kernel k(p) = (t/beta) (rho(p)/t)^beta restricted to
//! the window rho(p) <= window_radius.
struct MorphKernelSpec {
  KernelSource source;
  KernelParams kp;
  MetricParams w;
  //! Truncation radius in metric length. Empty: chosen from the data range
  //! of the input so that truncation does not change the result.
  std::optional<double> window_radius;
  //! Replace the kernel by 0 on the window (min/max pooling). Needs an
  //! explicit window_radius.
  bool flat = false;
};

inline MorphKernelSpec make_kernel_spec(ApproxKind const& kind, KernelParams const& kp,
                                        MetricParams const& w)
{
  return {kind, kp, w, std::nullopt, false};
}

inline MorphKernelSpec make_kernel_spec(std::shared_ptr<ScalarField const> distance,
                                        KernelParams const& kp)
{
  if (!distance || !distance->metric) {
    throw std::invalid_argument("exact kernel needs a distance field with a metric");
  }
  return {ExactFieldKernel{distance}, kp, *distance->metric, std::nullopt, false};
}

//! Transport W(g p0) = U(g exp(-t v) p0).
struct ConvectionSpec {
  LogCoords v;
  double t = 0.0;

  ConvectionSpec(LogCoords const& vel, double const time) : v(vel), t(time)
  {
    if (!(time >= 0.0) || !std::isfinite(time)) {
      throw std::invalid_argument("convection time must be finite and >= 0");
    }
  }

  //! exp(-t v) as a group element.
  [[nodiscard]] PointM2 backward_shift() const
  {
    return exp_map({-t * v.c1, -t * v.c2, -t * v.c3});
  }
};

//! Distance rho(p) used by the kernel.
inline double kernel_distance(MorphKernelSpec const& k, PointM2 const& p)
{
  if (auto const* kind = std::get_if<ApproxKind>(&k.source)) {
    return evaluate(*kind, p, k.w);
  }
  auto const& field = *std::get<ExactFieldKernel>(k.source).distance;
  if (!inside_domain(field.spec, p)) {
    return std::numeric_limits<double>::infinity();
  }
  return sample_field(field, p);
}

inline double kernel_value(MorphKernelSpec const& k, PointM2 const& p)
{
  return morph_kernel_from_distance(kernel_distance(k, p), k.kp);
}

//! g_q^{-1} p for the grid nodes p = q + (di, dj, .) with q in slice kq and
//! p in slice kp. Depends on the absolute position of q only through its
//! orientation.
inline PointM2 kernel_argument(GridSpec const& spec, int const di, int const dj,
                               int const kq, int const kp)
{
  double const tq = spec.theta_at(kq);
  double const c = std::cos(tq);
  double const s = std::sin(tq);
  double const dx = di * spec.spacing_x();
  double const dy = dj * spec.spacing_y();
  return {dx * c + dy * s, -dx * s + dy * c, wrap_angle(spec.theta_at(kp) - tq)};
}

//! Radius at which the kernel reaches `range`; beyond it no candidate can
//! beat the centre term of the infimum.
inline double exact_window_radius(KernelParams const& kp, double const range)
{
  if (!(range > 0.0)) {
    return 0.0;
  }
  return kp.t() * std::pow(kp.beta() * range / kp.t(), 1.0 / kp.beta());
}

namespace detail {

struct WindowEntry {
  int di;
  int dj;
  double value;
};

//! Offsets of the window, grouped by (kq, kp): entries[kq * n_theta + kp].
struct Window {
  std::vector<std::vector<WindowEntry>> entries;
  std::size_t count = 0;
};

inline bool dominates_lower_bound(MorphKernelSpec const& k)
{
  if (std::holds_alternative<ExactFieldKernel>(k.source)) {
    return true;
  }
  switch (std::get<ApproxKind>(k.source).tag()) {
    case ApproxTag::rho_c:
    case ApproxTag::rho_b:
    case ApproxTag::rho_c_com:
    case ApproxTag::rho_b_com:
    case ApproxTag::l:
    case ApproxTag::u1:
    case ApproxTag::u2:
      return true;
    default:
      return false;
  }
}

inline double data_range(ScalarField const& u)
{
  auto const [lo, hi] = std::minmax_element(u.values.begin(), u.values.end());
  return *hi - *lo;
}

inline void check_finite(ScalarField const& u)
{
  for (double const v : u.values) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("morphological input must be finite");
    }
  }
}

//! `shift`, when set, is applied on the left of the kernel argument.
inline Window build_window(MorphKernelSpec const& k, GridSpec const& spec,
                           double const radius, std::optional<PointM2> const& shift)
{
  int const nt = spec.n_theta();
  Window win;
  win.entries.resize(static_cast<std::size_t>(nt) * nt);

  int ri = spec.n_x() - 1;
  int rj = spec.n_y() - 1;
  if (dominates_lower_bound(k) && std::isfinite(radius)) {
    // rho >= l bounds the spatial extent of the window.
    double reach = radius / k.w.w1();
    if (shift) {
      reach += std::hypot(shift->x, shift->y);
    }
    ri = std::min(ri, static_cast<int>(std::ceil(reach / spec.spacing_x())));
    rj = std::min(rj, static_cast<int>(std::ceil(reach / spec.spacing_y())));
  }

  for (int kq = 0; kq < nt; ++kq) {
    for (int kp = 0; kp < nt; ++kp) {
      auto& list = win.entries[static_cast<std::size_t>(kq) * nt + kp];
      for (int di = -ri; di <= ri; ++di) {
        for (int dj = -rj; dj <= rj; ++dj) {
          PointM2 arg = kernel_argument(spec, di, dj, kq, kp);
          if (shift) {
            arg = group_product(*shift, arg);
          }
          double const rho = kernel_distance(k, arg);
          if (!(rho <= radius)) {
            continue;
          }
          double const value = k.flat ? 0.0 : morph_kernel_from_distance(rho, k.kp);
          list.push_back({di, dj, value});
        }
      }
      win.count += list.size();
    }
  }
  return win;
}

inline ScalarField convolve_with_window(Window const& win, ScalarField const& u)
{
  GridSpec const& spec = u.spec;
  int const nt = spec.n_theta();
  ScalarField out(spec, std::numeric_limits<double>::infinity());
  out.kind = u.kind;
  out.metric = u.metric;
  for (int i = 0; i < spec.n_x(); ++i) {
    for (int j = 0; j < spec.n_y(); ++j) {
      for (int kp = 0; kp < nt; ++kp) {
        double best = std::numeric_limits<double>::infinity();
        for (int kq = 0; kq < nt; ++kq) {
          for (auto const& e : win.entries[static_cast<std::size_t>(kq) * nt + kp]) {
            int const qi = i - e.di;
            int const qj = j - e.dj;
            if (!spec.inside_xy(qi, qj)) {
              continue;
            }
            best = std::min(best, e.value + u.values[spec.index(qi, qj, kq)]);
          }
        }
        out.at(i, j, kp) = best;
      }
    }
  }
  return out;
}

inline ScalarField convolve_impl(MorphKernelSpec const& k, ScalarField const& u,
                                 std::optional<PointM2> const& shift)
{
  check_finite(u);
  double radius = 0.0;
  if (k.window_radius) {
    radius = *k.window_radius;
    if (!(radius >= u.spec.metric_cell(k.w))) {
      std::ostringstream ss;
      ss << "kernel window radius " << radius << " is smaller than one grid cell ("
         << u.spec.metric_cell(k.w) << ")";
      throw std::invalid_argument(ss.str());
    }
  } else {
    if (k.flat) {
      throw std::invalid_argument("a flat kernel needs an explicit window radius");
    }
    radius = exact_window_radius(k.kp, data_range(u));
  }
  Window const win = build_window(k, u.spec, radius, shift);
  if (win.count == 0) {
    throw std::invalid_argument("kernel window contains no grid offsets");
  }
  return convolve_with_window(win, u);
}

}  // namespace detail

//! (k [] U)(p) = min over nodes q of k(g_q^{-1} p) + U(q). Nodes outside
//! the grid do not take part.
inline ScalarField morph_convolve(MorphKernelSpec const& k, ScalarField const& u)
{
  return detail::convolve_impl(k, u, std::nullopt);
}

inline ScalarField erode(MorphKernelSpec const& k, ScalarField const& u)
{
  return morph_convolve(k, u);
}

inline ScalarField dilate(MorphKernelSpec const& k, ScalarField const& u)
{
  ScalarField neg = u;
  for (double& v : neg.values) {
    v = -v;
  }
  ScalarField out = morph_convolve(k, neg);
  for (double& v : out.values) {
    v = -v;
  }
  return out;
}

//! W(g p0) = U(g exp(-t v) p0) with trilinear sampling and replicate
//! padding in space.
inline ScalarField convect(ConvectionSpec const& cs, ScalarField const& u)
{
  PointM2 const back = cs.backward_shift();
  ScalarField out(u.spec);
  out.kind = u.kind;
  out.metric = u.metric;
  for (std::size_t idx = 0; idx < u.spec.size(); ++idx) {
    out.values[idx] = sample_field_clamped(u, group_product(u.spec.node(idx), back));
  }
  return out;
}

//! Erosion of U with the kernel k(exp(-t v) p). Equals erosion of the
//! convected field up to interpolation.
inline ScalarField shifted_kernel_erode(MorphKernelSpec const& k,
                                        ConvectionSpec const& cs,
                                        ScalarField const& u)
{
  return detail::convolve_impl(k, u, cs.backward_shift());
}

enum class HjSign { erosion, dilation };

inline constexpr double kHjCfl = 0.4;

namespace detail {

//! Upwind squared dual norm of the gradient at (i, j, k) and the stability
//! rate d(update)/dW there, for the Hamiltonian (1/alpha) |dW|_*^alpha.
class HjScheme {
public:
  HjScheme(GridSpec const& spec, MetricParams const& w) : spec_(spec)
  {
    stencils_.resize(spec.n_theta());
    weight_sums_.resize(spec.n_theta(), 0.0);
    for (int k = 0; k < spec.n_theta(); ++k) {
      auto const d = index_space_dual_metric(w, spec.theta_at(k), spec.spacing_x(),
                                             spec.spacing_y(), spec.spacing_theta());
      for (auto const& term : selling_decomposition(d)) {
        if (term.weight > 0.0) {
          stencils_[k].push_back(term);
          weight_sums_[k] += term.weight;
        }
      }
    }
  }

  [[nodiscard]] double grad_sq(std::vector<double> const& u, int const i, int const j,
                               int const k, HjSign const sign) const
  {
    double const centre = u[spec_.index(i, j, k)];
    double s = 0.0;
    for (auto const& term : stencils_[k]) {
      double m = 0.0;
      for (int const side : {-1, 1}) {
        int const ni = i + side * term.offset[0];
        int const nj = j + side * term.offset[1];
        if (!spec_.inside_xy(ni, nj)) {
          continue;
        }
        int const nk = spec_.wrap_theta_index(k + side * term.offset[2]);
        double const nb = u[spec_.index(ni, nj, nk)];
        m = std::max(m, sign == HjSign::erosion ? centre - nb : nb - centre);
      }
      s += term.weight * m * m;
    }
    return s;
  }

  [[nodiscard]] double weight_sum(int const k) const { return weight_sums_[k]; }

private:
  GridSpec spec_;
  std::vector<std::vector<StencilTerm>> stencils_;
  std::vector<double> weight_sums_;
};

inline double hj_rate(double const s, double const alpha, double const weight_sum)
{
  return std::pow(s, 0.5 * (alpha - 1.0)) * std::sqrt(weight_sum);
}

}  // namespace detail

//! Explicit monotone integration of dW/dt = -+ (1/alpha) |dW|_*^alpha from
//! W(0) = U over [0, t] in n_steps equal steps. Throws when a step exceeds
//! the CFL bound.
inline ScalarField hj_timestep_oracle(ScalarField const& u, MetricParams const& w,
                                      double const alpha, double const t,
                                      HjSign const sign, int const n_steps)
{
  if (!(alpha > 1.0)) {
    throw std::invalid_argument("alpha must exceed 1");
  }
  if (!(t >= 0.0) || n_steps < 1) {
    throw std::invalid_argument("need t >= 0 and at least one step");
  }
  detail::check_finite(u);
  GridSpec const& spec = u.spec;
  detail::HjScheme const scheme(spec, w);
  double const dt = t / n_steps;
  std::vector<double> cur = u.values;
  std::vector<double> next(cur.size());
  double const dir = sign == HjSign::erosion ? -1.0 : 1.0;
  for (int step = 0; step < n_steps && dt > 0.0; ++step) {
    for (int i = 0; i < spec.n_x(); ++i) {
      for (int j = 0; j < spec.n_y(); ++j) {
        for (int k = 0; k < spec.n_theta(); ++k) {
          double const s = scheme.grad_sq(cur, i, j, k, sign);
          double const rate = detail::hj_rate(s, alpha, scheme.weight_sum(k));
          if (dt * rate > kHjCfl) {
            std::ostringstream ss;
            ss << "CFL violated: dt * rate = " << dt * rate << " > " << kHjCfl
               << "; use more steps";
            throw std::domain_error(ss.str());
          }
          std::size_t const idx = spec.index(i, j, k);
          next[idx] = cur[idx] + dir * dt * std::pow(s, 0.5 * alpha) / alpha;
        }
      }
    }
    std::swap(cur, next);
  }
  ScalarField out(spec);
  out.values = std::move(cur);
  out.kind = u.kind;
  out.metric = u.metric;
  return out;
}

//! Smallest step count for which hj_timestep_oracle keeps the CFL bound at
//! the initial state. The erosion and dilation flows do not increase the
//! Lipschitz constant, but a safety factor is still advisable.
inline int hj_min_steps(ScalarField const& u, MetricParams const& w,
                        double const alpha, double const t, HjSign const sign)
{
  detail::HjScheme const scheme(u.spec, w);
  double worst = 0.0;
  for (int i = 0; i < u.spec.n_x(); ++i) {
    for (int j = 0; j < u.spec.n_y(); ++j) {
      for (int k = 0; k < u.spec.n_theta(); ++k) {
        double const s = scheme.grad_sq(u.values, i, j, k, sign);
        worst = std::max(worst, detail::hj_rate(s, alpha, scheme.weight_sum(k)));
      }
    }
  }
  return std::max(1, static_cast<int>(std::ceil(t * worst / kHjCfl)));
}

}  // namespace se2dist

#endif  // SE2DIST_MORPHOLOGY_HPP_INCLUDED
