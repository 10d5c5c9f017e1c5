#ifndef SE2DIST_GRID_HPP_INCLUDED
#define SE2DIST_GRID_HPP_INCLUDED

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "se2dist/metric.hpp"
#include "se2dist/se2_core.hpp"

namespace se2dist {

//! Regular grid over [-x_max, x_max]^2 x [-pi, pi), periodic in theta.
//!
//! Spatial node counts are odd so that x = y = 0 is a node. Theta nodes sit
//! at (k - n_theta/2) * 2pi/n_theta, so theta = 0 is always a node.
class GridSpec {
public:
  GridSpec(int const n_x, int const n_y, int const n_theta, double const x_max)
      : n_x_(n_x), n_y_(n_y), n_theta_(n_theta), x_max_(x_max)
  {
    if (n_x < 3 || n_y < 3 || n_x % 2 == 0 || n_y % 2 == 0) {
      throw std::invalid_argument("grid needs odd n_x, n_y >= 3");
    }
    if (n_theta < 2) {
      throw std::invalid_argument("grid needs n_theta >= 2");
    }
    if (!(x_max > 0.0) || !std::isfinite(x_max)) {
      throw std::invalid_argument("grid needs x_max > 0");
    }
  }

  //! Cubic grid with n nodes per axis over [-x_max, x_max]^2 x [-pi, pi).
  static GridSpec cube(int const n, double const x_max = 3.0)
  {
    return {n, n, n, x_max};
  }

  [[nodiscard]] int n_x() const { return n_x_; }
  [[nodiscard]] int n_y() const { return n_y_; }
  [[nodiscard]] int n_theta() const { return n_theta_; }
  [[nodiscard]] double x_max() const { return x_max_; }
  [[nodiscard]] std::size_t size() const
  {
    return static_cast<std::size_t>(n_x_) * n_y_ * n_theta_;
  }

  [[nodiscard]] double spacing_x() const { return 2.0 * x_max_ / (n_x_ - 1); }
  [[nodiscard]] double spacing_y() const { return 2.0 * x_max_ / (n_y_ - 1); }
  [[nodiscard]] double spacing_theta() const { return kTwoPi / n_theta_; }

  [[nodiscard]] int center_x() const { return n_x_ / 2; }
  [[nodiscard]] int center_y() const { return n_y_ / 2; }
  [[nodiscard]] int center_theta() const { return n_theta_ / 2; }

  [[nodiscard]] double x_at(int const i) const { return (i - center_x()) * spacing_x(); }
  [[nodiscard]] double y_at(int const j) const { return (j - center_y()) * spacing_y(); }
  [[nodiscard]] double theta_at(int const k) const
  {
    return (k - center_theta()) * spacing_theta();
  }

  //! Row-major, theta fastest.
  [[nodiscard]] std::size_t index(int const i, int const j, int const k) const
  {
    return (static_cast<std::size_t>(i) * n_y_ + j) * n_theta_ + k;
  }

  [[nodiscard]] std::array<int, 3> unindex(std::size_t idx) const
  {
    int const k = static_cast<int>(idx % n_theta_);
    idx /= n_theta_;
    int const j = static_cast<int>(idx % n_y_);
    int const i = static_cast<int>(idx / n_y_);
    return {i, j, k};
  }

  [[nodiscard]] PointM2 node(int const i, int const j, int const k) const
  {
    return {x_at(i), y_at(j), theta_at(k)};
  }

  [[nodiscard]] PointM2 node(std::size_t const idx) const
  {
    auto const [i, j, k] = unindex(idx);
    return node(i, j, k);
  }

  [[nodiscard]] std::size_t reference_index() const
  {
    return index(center_x(), center_y(), center_theta());
  }

  [[nodiscard]] int wrap_theta_index(int const k) const
  {
    int const r = k % n_theta_;
    return r < 0 ? r + n_theta_ : r;
  }

  [[nodiscard]] bool inside_xy(int const i, int const j) const
  {
    return i >= 0 && i < n_x_ && j >= 0 && j < n_y_;
  }

  //! Smallest metric length of a single grid step (lower bound l of a step).
  [[nodiscard]] double metric_cell(MetricParams const& w) const
  {
    return std::min({w.w1() * spacing_x(), w.w1() * spacing_y(),
                     w.w3() * spacing_theta()});
  }

  friend bool operator==(GridSpec const&, GridSpec const&) = default;

private:
  int n_x_;
  int n_y_;
  int n_theta_;
  double x_max_;
};

//! What the values of a ScalarField represent. Only `distance` fields come
//! out of a converged eikonal solve.
enum class FieldKind { data, distance, approx, kernel };

inline std::string_view to_string(FieldKind const kind)
{
  switch (kind) {
    case FieldKind::data: return "data";
    case FieldKind::distance: return "distance";
    case FieldKind::approx: return "approx";
    case FieldKind::kernel: return "kernel";
  }
  return "data";
}

inline FieldKind parse_field_kind(std::string_view const s)
{
  for (auto const k : {FieldKind::data, FieldKind::distance, FieldKind::approx,
                       FieldKind::kernel}) {
    if (to_string(k) == s) {
      return k;
    }
  }
  throw std::invalid_argument("unknown field kind '" + std::string(s) + "'");
}

//! Values on a GridSpec, laid out as GridSpec::index.
struct ScalarField {
  ScalarField(GridSpec const& s, double const fill = 0.0)
      : spec(s), values(s.size(), fill)
  {}

  GridSpec spec;
  std::vector<double> values;
  FieldKind kind = FieldKind::data;
  std::optional<MetricParams> metric;

  [[nodiscard]] double& at(int const i, int const j, int const k)
  {
    return values[spec.index(i, j, k)];
  }
  [[nodiscard]] double at(int const i, int const j, int const k) const
  {
    return values[spec.index(i, j, k)];
  }
};

//! Fills a field by evaluating f at every node.
template <typename F>
ScalarField make_field(GridSpec const& spec, F&& f)
{
  ScalarField out(spec);
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    out.values[idx] = f(spec.node(idx));
  }
  return out;
}

namespace detail {

struct Stencil1d {
  int lo;
  int hi;
  double frac;
};

inline Stencil1d locate(double const pos, int const n)
{
  // pos is a fractional node index in [0, n - 1].
  int lo = static_cast<int>(std::floor(pos));
  lo = std::clamp(lo, 0, n - 2);
  return {lo, lo + 1, pos - lo};
}

inline double trilinear(ScalarField const& f, double const px, double const py,
                        double const theta)
{
  GridSpec const& s = f.spec;
  auto const sx = locate(px, s.n_x());
  auto const sy = locate(py, s.n_y());
  double const pt = wrap_angle(theta) / s.spacing_theta() + s.center_theta();
  int const k0 = static_cast<int>(std::floor(pt));
  double const ft = pt - k0;
  int const ka = s.wrap_theta_index(k0);
  int const kb = s.wrap_theta_index(k0 + 1);

  auto const lerp_t = [&](int const i, int const j) {
    return (1.0 - ft) * f.at(i, j, ka) + ft * f.at(i, j, kb);
  };
  double const v00 = lerp_t(sx.lo, sy.lo);
  double const v01 = lerp_t(sx.lo, sy.hi);
  double const v10 = lerp_t(sx.hi, sy.lo);
  double const v11 = lerp_t(sx.hi, sy.hi);
  double const v0 = (1.0 - sy.frac) * v00 + sy.frac * v01;
  double const v1 = (1.0 - sy.frac) * v10 + sy.frac * v11;
  return (1.0 - sx.frac) * v0 + sx.frac * v1;
}

}  // namespace detail

//! Trilinear interpolation, periodic in theta. Throws std::out_of_range for
//! spatial positions outside the grid; there is no extrapolation.
inline double sample_field(ScalarField const& f, PointM2 const& p)
{
  GridSpec const& s = f.spec;
  double const px = p.x / s.spacing_x() + s.center_x();
  double const py = p.y / s.spacing_y() + s.center_y();
  constexpr double slack = 1e-9;
  if (!(px >= -slack && px <= s.n_x() - 1 + slack && py >= -slack &&
        py <= s.n_y() - 1 + slack)) {
    std::ostringstream ss;
    ss << "sample point (" << p.x << ", " << p.y << ") outside the grid domain";
    throw std::out_of_range(ss.str());
  }
  return detail::trilinear(f, std::clamp(px, 0.0, s.n_x() - 1.0),
                           std::clamp(py, 0.0, s.n_y() - 1.0), p.theta);
}

//! Like sample_field but clamps spatial positions to the domain
//! (replicate padding).
inline double sample_field_clamped(ScalarField const& f, PointM2 const& p)
{
  GridSpec const& s = f.spec;
  double const px = std::clamp(p.x / s.spacing_x() + s.center_x(), 0.0, s.n_x() - 1.0);
  double const py = std::clamp(p.y / s.spacing_y() + s.center_y(), 0.0, s.n_y() - 1.0);
  return detail::trilinear(f, px, py, p.theta);
}

inline bool inside_domain(GridSpec const& s, PointM2 const& p)
{
  return std::abs(p.x) <= s.x_max() && std::abs(p.y) <= s.x_max();
}

// ---------------------------------------------------------------------------
// MG1 field files: one text header line
//   MG1 n_x=.. n_y=.. n_theta=.. x_max=.. w1=.. w2=.. w3=.. kind=..
// followed by size() little-endian float64 values, theta fastest.

namespace detail {

inline std::string format_real(double const v)
{
  std::ostringstream ss;
  ss.imbue(std::locale::classic());
  ss << std::setprecision(17) << v;
  return ss.str();
}

inline std::uint64_t to_little_endian(std::uint64_t const v)
{
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) {
      r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    }
    return r;
  }
}

//! Writes through a temporary file and renames it into place.
template <typename Writer>
void write_atomically(std::filesystem::path const& path, Writer&& writer)
{
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    }
    writer(out);
    out.flush();
    if (!out) {
      throw std::runtime_error("failed writing '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

inline std::string mg1_header(ScalarField const& f)
{
  using detail::format_real;
  GridSpec const& s = f.spec;
  std::ostringstream ss;
  ss << "MG1 n_x=" << s.n_x() << " n_y=" << s.n_y() << " n_theta=" << s.n_theta()
     << " x_max=" << format_real(s.x_max());
  if (f.metric) {
    ss << " w1=" << format_real(f.metric->w1()) << " w2=" << format_real(f.metric->w2())
       << " w3=" << format_real(f.metric->w3());
  } else {
    ss << " w1=0 w2=0 w3=0";
  }
  ss << " kind=" << to_string(f.kind);
  return ss.str();
}

inline void write_mg1(std::ostream& out, ScalarField const& f)
{
  std::string const header = mg1_header(f);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.put('\n');
  for (double const v : f.values) {
    auto const bits = detail::to_little_endian(std::bit_cast<std::uint64_t>(v));
    char bytes[8];
    std::memcpy(bytes, &bits, 8);
    out.write(bytes, 8);
  }
}

inline void write_mg1(std::filesystem::path const& path, ScalarField const& f)
{
  detail::write_atomically(path, [&](std::ostream& out) { write_mg1(out, f); });
}

inline ScalarField read_mg1(std::istream& in)
{
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error("MG1: missing header line");
  }
  std::istringstream hs(header);
  hs.imbue(std::locale::classic());
  std::string magic;
  hs >> magic;
  if (magic != "MG1") {
    throw std::runtime_error("MG1: bad magic '" + magic + "'");
  }
  int n_x = 0;
  int n_y = 0;
  int n_theta = 0;
  double x_max = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;
  double w3 = 0.0;
  std::string kind = "data";
  std::string token;
  while (hs >> token) {
    auto const eq = token.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("MG1: malformed header token '" + token + "'");
    }
    std::string const key = token.substr(0, eq);
    std::string const val = token.substr(eq + 1);
    std::istringstream vs(val);
    vs.imbue(std::locale::classic());
    if (key == "n_x") vs >> n_x;
    else if (key == "n_y") vs >> n_y;
    else if (key == "n_theta") vs >> n_theta;
    else if (key == "x_max") vs >> x_max;
    else if (key == "w1") vs >> w1;
    else if (key == "w2") vs >> w2;
    else if (key == "w3") vs >> w3;
    else if (key == "kind") kind = val;
    else throw std::runtime_error("MG1: unknown header key '" + key + "'");
    if (key != "kind" && (vs.fail() || !vs.eof())) {
      throw std::runtime_error("MG1: bad value for '" + key + "'");
    }
  }
  ScalarField f(GridSpec(n_x, n_y, n_theta, x_max));
  f.kind = parse_field_kind(kind);
  if (w1 > 0.0 || w2 > 0.0 || w3 > 0.0) {
    f.metric = MetricParams(w1, w2, w3);
  }
  for (double& v : f.values) {
    char bytes[8];
    if (!in.read(bytes, 8)) {
      throw std::runtime_error("MG1: truncated payload");
    }
    std::uint64_t bits = 0;
    std::memcpy(&bits, bytes, 8);
    v = std::bit_cast<double>(detail::to_little_endian(bits));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("MG1: trailing bytes after payload");
  }
  return f;
}

inline ScalarField read_mg1(std::filesystem::path const& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path.string() + "'");
  }
  return read_mg1(in);
}

//! CSV with columns x,y,theta,value.
inline void write_field_csv(std::ostream& out, ScalarField const& f)
{
  using detail::format_real;
  out << "x,y,theta,value\n";
  for (std::size_t idx = 0; idx < f.spec.size(); ++idx) {
    PointM2 const p = f.spec.node(idx);
    out << format_real(p.x) << ',' << format_real(p.y) << ','
        << format_real(p.theta) << ',' << format_real(f.values[idx]) << '\n';
  }
}

}  // namespace se2dist

#endif  // SE2DIST_GRID_HPP_INCLUDED
