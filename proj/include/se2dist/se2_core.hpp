#ifndef SE2DIST_SE2_CORE_HPP_INCLUDED
#define SE2DIST_SE2_CORE_HPP_INCLUDED

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

namespace se2dist {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

//! Reduces an angle to the representative in [-pi, pi).
inline double wrap_angle(double const theta)
{
  double r = theta - kTwoPi * std::floor((theta + kPi) / kTwoPi);
  // floor() can land exactly on +pi through rounding.
  if (r >= kPi) {
    r -= kTwoPi;
  }
  if (r < -kPi) {
    r = -kPi;
  }
  return r;
}

//! sin(x)/x with a Taylor branch near zero.
inline double sinc(double const x)
{
  if (std::abs(x) < 1e-4) {
    double const x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

//! A point (x, y, theta) of M2, identified with the group element of SE(2)
//! that maps the reference point (0,0,0) onto it.
//!
//! The struct is an aggregate: it stores exactly what it is given. Every
//! operation in this library returns points with theta in [-pi, pi).
struct PointM2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  [[nodiscard]] PointM2 canonical() const { return {x, y, wrap_angle(theta)}; }

  friend bool operator==(PointM2 const&, PointM2 const&) = default;
};

inline constexpr PointM2 kReferencePoint{0.0, 0.0, 0.0};

//! Coordinates of the Lie algebra element c1 d_x + c2 d_y + c3 d_theta at e.
struct LogCoords {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  friend bool operator==(LogCoords const&, LogCoords const&) = default;
};

//! Spatial coordinates rotated by half the orientation angle.
struct HalfAngleCoords {
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;

  friend bool operator==(HalfAngleCoords const&, HalfAngleCoords const&) = default;
};

inline PointM2 group_product(PointM2 const& g1, PointM2 const& g2)
{
  double const c = std::cos(g1.theta);
  double const s = std::sin(g1.theta);
  return {g1.x + g2.x * c - g2.y * s,
          g1.y + g2.x * s + g2.y * c,
          wrap_angle(g1.theta + g2.theta)};
}

inline PointM2 inverse(PointM2 const& g)
{
  double const c = std::cos(g.theta);
  double const s = std::sin(g.theta);
  return {-g.x * c - g.y * s, g.x * s - g.y * c, wrap_angle(-g.theta)};
}

inline PointM2 exp_map(LogCoords const& c)
{
  double const half = 0.5 * c.c3;
  double const ch = std::cos(half);
  double const sh = std::sin(half);
  double const sc = sinc(half);
  return {(c.c1 * ch - c.c2 * sh) * sc,
          (c.c1 * sh + c.c2 * ch) * sc,
          wrap_angle(c.c3)};
}

//! Logarithm of the group element. theta is used as given, so the seam
//! representatives -pi and +pi give coordinates of opposite sign.
inline LogCoords log_map(PointM2 const& g)
{
  double const half = 0.5 * g.theta;
  double const ch = std::cos(half);
  double const sh = std::sin(half);
  double const sc = sinc(half);
  return {(g.x * ch + g.y * sh) / sc,
          (-g.x * sh + g.y * ch) / sc,
          g.theta};
}

inline HalfAngleCoords half_angle(PointM2 const& g)
{
  double const half = 0.5 * g.theta;
  double const ch = std::cos(half);
  double const sh = std::sin(half);
  return {g.x * ch + g.y * sh, -g.x * sh + g.y * ch, g.theta};
}

//! Index 0..7 of one of the eight fundamental reflections of M2.
class SymmetryId {
public:
  constexpr explicit SymmetryId(int const index) : index_(index)
  {
    if (index < 0 || index > 7) {
      throw std::out_of_range("symmetry index must be in 0..7, got " +
                              std::to_string(index));
    }
  }

  [[nodiscard]] constexpr int index() const { return index_; }

private:
  int index_;
};

namespace detail {

inline PointM2 epsilon1(PointM2 const& p)
{
  double const c = std::cos(p.theta);
  double const s = std::sin(p.theta);
  return {p.x * c + p.y * s, p.x * s - p.y * c, wrap_angle(p.theta)};
}

inline PointM2 epsilon2(PointM2 const& p)
{
  double const c = std::cos(p.theta);
  double const s = std::sin(p.theta);
  return {-p.x * c - p.y * s, -p.x * s + p.y * c, wrap_angle(p.theta)};
}

inline PointM2 epsilon6(PointM2 const& p)
{
  double const c = std::cos(p.theta);
  double const s = std::sin(p.theta);
  return {p.x * c + p.y * s, -p.x * s + p.y * c, wrap_angle(-p.theta)};
}

}  // namespace detail

//! Applies the fundamental symmetry with the given index. epsilon^1,
//! epsilon^2 and epsilon^6 are the generators; the others are compositions.
inline PointM2 apply_symmetry(SymmetryId const id, PointM2 const& p)
{
  using detail::epsilon1;
  using detail::epsilon2;
  using detail::epsilon6;
  switch (id.index()) {
    case 0: return p.canonical();
    case 1: return epsilon1(p);
    case 2: return epsilon2(p);
    case 3: return epsilon2(epsilon1(p));
    case 4: return epsilon2(epsilon6(p));
    case 5: return epsilon2(epsilon1(epsilon6(p)));
    case 6: return epsilon6(p);
    case 7: return epsilon1(epsilon6(p));
    default: break;
  }
  throw std::logic_error("unreachable symmetry index");
}

//! Sign pattern (b1/c1, b2/c2, b3/c3) that each symmetry induces on
//! half-angle and logarithmic coordinates.
inline constexpr std::array<std::array<int, 3>, 8> kSymmetrySigns{{
    {+1, +1, +1},
    {+1, -1, +1},
    {-1, +1, +1},
    {-1, -1, +1},
    {-1, +1, -1},
    {-1, -1, -1},
    {+1, +1, -1},
    {+1, -1, -1},
}};

//! Geometric relation of a point to the reference point.
struct Relation {
  bool coradial = false;    // c1 == 0, fixed by epsilon^2
  bool cocircular = false;  // c2 == 0, fixed by epsilon^1
  bool parallel = false;    // c3 == 0, fixed by epsilon^6
};

inline Relation classify_relation(PointM2 const& p, double const tol = 1e-9)
{
  LogCoords const c = log_map(p);
  return {std::abs(c.c1) < tol, std::abs(c.c2) < tol, std::abs(c.c3) < tol};
}

}  // namespace se2dist

#endif  // SE2DIST_SE2_CORE_HPP_INCLUDED
