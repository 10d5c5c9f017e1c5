#ifndef SE2DIST_METRIC_HPP_INCLUDED
#define SE2DIST_METRIC_HPP_INCLUDED

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "se2dist/se2_core.hpp"

namespace se2dist {

//! Weights of the left-invariant diagonal metric
//!   G = w1^2 w^1(x)w^1 + w2^2 w^2(x)w^2 + w3^2 w^3(x)w^3.
//! w1 prices forward motion, w2 sideways motion and w3 rotation.
class MetricParams {
public:
  MetricParams(double const w1, double const w2, double const w3)
      : w1_(w1), w2_(w2), w3_(w3)
  {
    if (!(w1 > 0.0) || !(w2 > 0.0) || !(w3 > 0.0) || !std::isfinite(w1) ||
        !std::isfinite(w2) || !std::isfinite(w3)) {
      std::ostringstream ss;
      ss << "metric weights must be positive and finite, got (" << w1 << ", "
         << w2 << ", " << w3 << ")";
      throw std::invalid_argument(ss.str());
    }
    // Swapping would relabel the forward and sideways axes.
    if (w2 < w1) {
      std::ostringstream ss;
      ss << "metric requires w2 >= w1, got w1=" << w1 << ", w2=" << w2;
      throw std::invalid_argument(ss.str());
    }
  }

  [[nodiscard]] double w1() const { return w1_; }
  [[nodiscard]] double w2() const { return w2_; }
  [[nodiscard]] double w3() const { return w3_; }

  //! Spatial anisotropy w2 / w1 >= 1.
  [[nodiscard]] double zeta() const { return w2_ / w1_; }

  [[nodiscard]] MetricParams scaled(double const lambda) const
  {
    return {lambda * w1_, lambda * w2_, lambda * w3_};
  }

  friend bool operator==(MetricParams const&, MetricParams const&) = default;

private:
  double w1_;
  double w2_;
  double w3_;
};

//! Components of a tangent vector (or covector) in the left-invariant frame
//! A1 = cos t d_x + sin t d_y, A2 = -sin t d_x + cos t d_y, A3 = d_t.
struct FrameVector {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
};

inline double frame_norm(FrameVector const& v, MetricParams const& w)
{
  return std::hypot(w.w1() * v.a1, w.w2() * v.a2, w.w3() * v.a3);
}

//! Dual norm of a covector; for a diagonal metric the supremum has this
//! closed form.
inline double dual_norm(FrameVector const& cov, MetricParams const& w)
{
  return std::hypot(cov.a1 / w.w1(), cov.a2 / w.w2(), cov.a3 / w.w3());
}

//! Expresses the coordinate components (dx, dy, dtheta) at p in the frame.
inline FrameVector coordinate_to_frame(PointM2 const& p, double const dx,
                                       double const dy, double const dtheta)
{
  double const c = std::cos(p.theta);
  double const s = std::sin(p.theta);
  return {dx * c + dy * s, -dx * s + dy * c, dtheta};
}

//! Inverse of coordinate_to_frame.
inline std::array<double, 3> frame_to_coordinate(PointM2 const& p,
                                                 FrameVector const& v)
{
  double const c = std::cos(p.theta);
  double const s = std::sin(p.theta);
  return {v.a1 * c - v.a2 * s, v.a1 * s + v.a2 * c, v.a3};
}

//! Distance of the spatially isotropic metric with weight w1; a global lower
//! bound of the exact distance from the reference point.
inline double lower_bound_l(PointM2 const& p, MetricParams const& w)
{
  return std::hypot(w.w1() * p.x, w.w1() * p.y, w.w3() * p.theta);
}

//! Same construction with weight w2: a global upper bound.
inline double upper_bound_u1(PointM2 const& p, MetricParams const& w)
{
  return std::hypot(w.w2() * p.x, w.w2() * p.y, w.w3() * p.theta);
}

//! Rotate towards the target, drive forward, rotate into the final
//! orientation: at most w1 r + w3 pi. Independent of w2.
inline double upper_bound_u2(PointM2 const& p, MetricParams const& w)
{
  return w.w1() * std::hypot(p.x, p.y) + w.w3() * kPi;
}

//! |y| on the y-axis (x = theta = 0) beyond which w2|y| exceeds u2.
//! Empty when w2 == w1.
inline std::optional<double> intersection_y(MetricParams const& w)
{
  if (w.w2() == w.w1()) {
    return std::nullopt;
  }
  return w.w3() * kPi / (w.w2() - w.w1());
}

}  // namespace se2dist

#endif  // SE2DIST_METRIC_HPP_INCLUDED
