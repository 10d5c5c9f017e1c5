#ifndef SE2DIST_APPROX_HPP_INCLUDED
#define SE2DIST_APPROX_HPP_INCLUDED

#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "se2dist/metric.hpp"
#include "se2dist/se2_core.hpp"

namespace se2dist {

//! Which coordinate chart a closed-form approximation is written in.
enum class Coords { half_angle, logarithmic };

//! Closed-form distance approximations (and bounds) of d(p0, .).
enum class ApproxTag {
  rho_c,
  rho_b,
  rho_c_sr,
  rho_b_sr,
  rho_b_sr_old1,
  rho_b_sr_old2,
  rho_c_com,
  rho_b_com,
  l,
  u1,
  u2,
};

inline constexpr std::array<ApproxTag, 11> kAllApproxTags{
    ApproxTag::rho_c,         ApproxTag::rho_b,         ApproxTag::rho_c_sr,
    ApproxTag::rho_b_sr,      ApproxTag::rho_b_sr_old1, ApproxTag::rho_b_sr_old2,
    ApproxTag::rho_c_com,     ApproxTag::rho_b_com,     ApproxTag::l,
    ApproxTag::u1,            ApproxTag::u2,
};

inline constexpr double kDefaultNuNew = 1.6;
inline constexpr double kDefaultNuOld = 44.0;

inline std::string_view to_string(ApproxTag const tag)
{
  switch (tag) {
    case ApproxTag::rho_c: return "rho-c";
    case ApproxTag::rho_b: return "rho-b";
    case ApproxTag::rho_c_sr: return "rho-c-sr";
    case ApproxTag::rho_b_sr: return "rho-b-sr";
    case ApproxTag::rho_b_sr_old1: return "rho-b-sr-old1";
    case ApproxTag::rho_b_sr_old2: return "rho-b-sr-old2";
    case ApproxTag::rho_c_com: return "rho-c-com";
    case ApproxTag::rho_b_com: return "rho-b-com";
    case ApproxTag::l: return "l";
    case ApproxTag::u1: return "u1";
    case ApproxTag::u2: return "u2";
  }
  return "?";
}

inline std::optional<ApproxTag> parse_approx_tag(std::string_view const name)
{
  for (auto const tag : kAllApproxTags) {
    if (to_string(tag) == name) {
      return tag;
    }
  }
  return std::nullopt;
}

inline bool is_new_subriemannian(ApproxTag const tag)
{
  return tag == ApproxTag::rho_c_sr || tag == ApproxTag::rho_b_sr ||
         tag == ApproxTag::rho_c_com || tag == ApproxTag::rho_b_com;
}

inline bool is_old_subriemannian(ApproxTag const tag)
{
  return tag == ApproxTag::rho_b_sr_old1 || tag == ApproxTag::rho_b_sr_old2;
}

//! An approximation selector together with its nu parameter (only used by
//! the sub-Riemannian kinds).
class ApproxKind {
public:
  explicit ApproxKind(ApproxTag const tag) : ApproxKind(tag, default_nu(tag)) {}

  ApproxKind(ApproxTag const tag, double const nu) : tag_(tag), nu_(nu)
  {
    if (is_new_subriemannian(tag) && !(nu > 0.0 && nu < 2.0 * std::sqrt(2.0))) {
      std::ostringstream ss;
      ss << "nu must lie in (0, 2 sqrt 2) for " << to_string(tag) << ", got "
         << nu;
      throw std::invalid_argument(ss.str());
    }
    if (is_old_subriemannian(tag) && !(nu > 0.0)) {
      throw std::invalid_argument("nu must be positive");
    }
  }

  static double default_nu(ApproxTag const tag)
  {
    return is_old_subriemannian(tag) ? kDefaultNuOld : kDefaultNuNew;
  }

  [[nodiscard]] ApproxTag tag() const { return tag_; }
  [[nodiscard]] double nu() const { return nu_; }
  [[nodiscard]] std::string_view name() const { return to_string(tag_); }

private:
  ApproxTag tag_;
  double nu_;
};

namespace detail {

//! (k1, k2, k3) in the requested chart.
inline std::array<double, 3> chart(PointM2 const& p, Coords const coords)
{
  if (coords == Coords::half_angle) {
    auto const b = half_angle(p);
    return {b.b1, b.b2, b.b3};
  }
  auto const c = log_map(p);
  return {c.c1, c.c2, c.c3};
}

inline double weighted_norm(std::array<double, 3> const& k,
                            MetricParams const& w)
{
  return std::hypot(w.w1() * k[0], w.w2() * k[1], w.w3() * k[2]);
}

}  // namespace detail

//! Logarithmic estimate: metric length of the exponential curve to p.
inline double rho_c(PointM2 const& p, MetricParams const& w)
{
  return detail::weighted_norm(detail::chart(p, Coords::logarithmic), w);
}

//! Half-angle estimate. Exact when w1 == w2.
inline double rho_b(PointM2 const& p, MetricParams const& w)
{
  return detail::weighted_norm(detail::chart(p, Coords::half_angle), w);
}

//! The two earlier sub-Riemannian estimates; variant 2 is the smoothed one.
//! Both degenerate as w3 -> 0.
inline double rho_sr_old(PointM2 const& p, MetricParams const& w,
                         double const nu, int const variant,
                         Coords const coords = Coords::half_angle)
{
  auto const k = detail::chart(p, coords);
  double const w1 = w.w1();
  double const w3 = w.w3();
  double const horizontal = (w1 * k[0]) * (w1 * k[0]) + (w3 * k[2]) * (w3 * k[2]);
  double const nu_w = nu * w1 * w1 * w3 * w3;
  if (variant == 1) {
    return std::sqrt(std::sqrt(nu_w) * std::abs(k[1]) + horizontal);
  }
  if (variant == 2) {
    return std::sqrt(std::sqrt(nu_w * k[1] * k[1] + horizontal * horizontal));
  }
  throw std::invalid_argument("old sub-Riemannian variant must be 1 or 2");
}

//! Sub-Riemannian estimate whose sideways cost is bounded below by
//! nu (w1 + w3) sqrt|k2| regardless of w3.
inline double rho_sr_new(PointM2 const& p, MetricParams const& w,
                         double const nu,
                         Coords const coords = Coords::half_angle)
{
  auto const k = detail::chart(p, coords);
  double const w1 = w.w1();
  double const w3 = w.w3();
  double const horizontal = (w1 * k[0]) * (w1 * k[0]) + (w3 * k[2]) * (w3 * k[2]);
  double const a = nu * (w1 + w3);
  double const a2 = a * a;
  return std::sqrt(std::sqrt(a2 * a2 * k[1] * k[1] + horizontal * horizontal));
}

//! max(l, min(rho_sr, rho)) where rho is rho_b or rho_c.
inline double rho_com(PointM2 const& p, MetricParams const& w, double const nu,
                      Coords const coords = Coords::half_angle)
{
  double const riemannian =
      coords == Coords::half_angle ? rho_b(p, w) : rho_c(p, w);
  return std::max(lower_bound_l(p, w),
                  std::min(rho_sr_new(p, w, nu, coords), riemannian));
}

//! Evaluates the selected approximation at p.
inline double evaluate(ApproxKind const& kind, PointM2 const& p,
                       MetricParams const& w)
{
  using enum ApproxTag;
  switch (kind.tag()) {
    case rho_c: return se2dist::rho_c(p, w);
    case rho_b: return se2dist::rho_b(p, w);
    case rho_c_sr: return rho_sr_new(p, w, kind.nu(), Coords::logarithmic);
    case rho_b_sr: return rho_sr_new(p, w, kind.nu(), Coords::half_angle);
    case rho_b_sr_old1: return rho_sr_old(p, w, kind.nu(), 1);
    case rho_b_sr_old2: return rho_sr_old(p, w, kind.nu(), 2);
    case rho_c_com: return rho_com(p, w, kind.nu(), Coords::logarithmic);
    case rho_b_com: return rho_com(p, w, kind.nu(), Coords::half_angle);
    case l: return lower_bound_l(p, w);
    case u1: return upper_bound_u1(p, w);
    case u2: return upper_bound_u2(p, w);
  }
  throw std::logic_error("unknown approximation tag");
}

//! Parameters of the morphological kernel (t/beta) (rho/t)^beta.
class KernelParams {
public:
  KernelParams(double const alpha, double const t) : alpha_(alpha), t_(t)
  {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) {
      throw std::invalid_argument("kernel requires alpha > 1");
    }
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("kernel requires t > 0");
    }
  }

  [[nodiscard]] double alpha() const { return alpha_; }
  [[nodiscard]] double t() const { return t_; }
  //! Conjugate exponent, 1/alpha + 1/beta = 1.
  [[nodiscard]] double beta() const { return alpha_ / (alpha_ - 1.0); }

private:
  double alpha_;
  double t_;
};

//! Kernel value for a given (exact or approximate) distance.
inline double morph_kernel_from_distance(double const rho,
                                         KernelParams const& kp)
{
  double const beta = kp.beta();
  return kp.t() / beta * std::pow(rho / kp.t(), beta);
}

inline double morph_kernel(PointM2 const& p, MetricParams const& w,
                           KernelParams const& kp, ApproxKind const& kind)
{
  return morph_kernel_from_distance(evaluate(kind, p, w), kp);
}

//! Leading term (zeta^2 - 1) zeta^4 rho_b^2 / (2 w3^2) of the local relative
//! error between rho_b^2 and d^2. The O(|theta|^3) remainder is not
//! evaluated.
inline double local_error_epsilon(PointM2 const& p, MetricParams const& w)
{
  double const z = w.zeta();
  double const z2 = z * z;
  double const r = rho_b(p, w);
  return (z2 - 1.0) * z2 * z2 * r * r / (2.0 * w.w3() * w.w3());
}

//! Radius in rho_b below which local_error_epsilon stays under eps_tol.
//! Empty (unbounded) when zeta == 1.
inline std::optional<double> tolerance_region_radius(MetricParams const& w,
                                                     double const eps_tol)
{
  if (!(eps_tol > 0.0)) {
    throw std::invalid_argument("eps_tol must be positive");
  }
  double const z = w.zeta();
  double const z2 = z * z;
  if (z2 - 1.0 <= 0.0) {
    return std::nullopt;
  }
  return 2.0 * w.w3() * w.w3() * eps_tol / ((z2 - 1.0) * z2 * z2);
}

//! Dual norm of d rho_b at p in the left-invariant frame, from central
//! differences with step h along A1, A2, A3.
inline double dual_norm_grad_rho_b(PointM2 const& p, MetricParams const& w,
                                   double const h = 1e-5)
{
  if (rho_b(p, w) < 1e-6) {
    throw std::domain_error("rho_b is not differentiable at the reference point");
  }
  double const c = std::cos(p.theta);
  double const s = std::sin(p.theta);
  auto const along = [&](double const dx, double const dy, double const dt) {
    PointM2 const fwd{p.x + h * dx, p.y + h * dy, p.theta + h * dt};
    PointM2 const bwd{p.x - h * dx, p.y - h * dy, p.theta - h * dt};
    return (rho_b(fwd, w) - rho_b(bwd, w)) / (2.0 * h);
  };
  FrameVector const grad{along(c, s, 0.0), along(-s, c, 0.0),
                         along(0.0, 0.0, 1.0)};
  return dual_norm(grad, w);
}

}  // namespace se2dist

#endif  // SE2DIST_APPROX_HPP_INCLUDED
