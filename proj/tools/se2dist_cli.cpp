// Command-line front end: solves distance fields, evaluates approximations
// and runs the verification reports. Exit codes: 0 ok, 1 verification
// failure, 2 usage error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "se2dist/se2dist.hpp"

namespace {

using namespace se2dist;
using detail::format_real;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Common {
  double w1 = 1.0;
  double w2 = 1.0;
  double w3 = 1.0;
  int grid = 101;
  double xmax = 3.0;
  std::optional<double> nu;
  double tol = 1e-6;
  std::uint64_t seed = 1;
  std::string out;
  std::string in;
  std::string approx;
};

void add_metric(CLI::App* app, Common& c)
{
  app->add_option("--w1", c.w1, "forward weight")->capture_default_str();
  app->add_option("--w2", c.w2, "sideways weight (>= w1)")->capture_default_str();
  app->add_option("--w3", c.w3, "angular weight")->capture_default_str();
}

void add_grid(CLI::App* app, Common& c)
{
  app->add_option("--grid", c.grid, "nodes per axis (odd)")->capture_default_str();
  app->add_option("--xmax", c.xmax, "spatial half-width")->capture_default_str();
}

void add_approx(CLI::App* app, Common& c, bool required)
{
  std::string names;
  for (auto const t : kAllApproxTags) {
    names += (names.empty() ? "" : ", ") + std::string(to_string(t));
  }
  auto* opt = app->add_option("--approx", c.approx, "approximation: " + names);
  if (required) {
    opt->required();
  }
  app->add_option("--nu", c.nu, "nu of the sub-Riemannian kinds");
}

MetricParams metric(Common const& c) { return {c.w1, c.w2, c.w3}; }

GridSpec grid(Common const& c) { return GridSpec::cube(c.grid, c.xmax); }

ApproxKind approx_kind(Common const& c)
{
  auto const tag = parse_approx_tag(c.approx);
  if (!tag) {
    throw UsageError("unknown approximation '" + c.approx + "'");
  }
  return c.nu ? ApproxKind(*tag, *c.nu) : ApproxKind(*tag);
}

SolverOpts solver_opts(Common const& c)
{
  SolverOpts opts;
  opts.tol = c.tol;
  return opts;
}

ScalarField load(std::string const& path)
{
  if (!std::filesystem::exists(path)) {
    throw UsageError("input file '" + path + "' does not exist");
  }
  return read_mg1(std::filesystem::path(path));
}

//! Distance field from --in, or solved from the metric and grid flags.
ScalarField distance_field(Common const& c)
{
  if (!c.in.empty()) {
    return load(c.in);
  }
  return solve_exact_distance(grid(c), metric(c), solver_opts(c));
}

void write_text(std::string const& path, std::string const& text)
{
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  detail::write_atomically(path, [&](std::ostream& out) { out << text; });
}

std::string point_str(PointM2 const& p)
{
  return "(" + format_real(p.x) + ", " + format_real(p.y) + ", " + format_real(p.theta) + ")";
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Distances on the space of positions and orientations"};
  app.require_subcommand(1);
  Common c;
  int status = kExitOk;

  // exact
  bool sub_riemannian = false;
  double kappa = kDefaultSubRiemannianKappa;
  auto* exact = app.add_subcommand("exact", "solve the eikonal equation and write an MG1 field");
  add_metric(exact, c);
  add_grid(exact, c);
  exact->add_option("--tol", c.tol, "convergence tolerance")->capture_default_str();
  exact->add_option("--out", c.out, "output MG1 file")->required();
  exact->add_flag("--sr", sub_riemannian, "sub-Riemannian proxy (w2 raised to kappa w1)");
  exact->add_option("--kappa", kappa, "proxy ratio for --sr")->capture_default_str();
  exact->callback([&] {
    SolveStats stats;
    ScalarField const d = sub_riemannian
                              ? solve_subriemannian_distance(grid(c), metric(c), solver_opts(c),
                                                             kappa, &stats)
                              : solve_exact_distance(grid(c), metric(c), solver_opts(c), &stats);
    write_mg1(std::filesystem::path(c.out), d);
    std::cerr << "solved " << d.spec.size() << " nodes, " << stats.sweeps
              << " sweeps, residual " << stats.residual << "\n";
  });

  // approx
  auto* approx = app.add_subcommand("approx", "evaluate an approximation on the grid");
  add_metric(approx, c);
  add_grid(approx, c);
  add_approx(approx, c, true);
  approx->add_option("--out", c.out, "output MG1 file")->required();
  approx->callback([&] {
    ApproxKind const kind = approx_kind(c);
    MetricParams const w = metric(c);
    ScalarField f = make_field(grid(c), [&](PointM2 const& p) { return evaluate(kind, p, w); });
    f.kind = FieldKind::approx;
    f.metric = w;
    write_mg1(std::filesystem::path(c.out), f);
  });

  // error
  auto* error = app.add_subcommand("error", "mean relative error of an approximation");
  add_metric(error, c);
  add_grid(error, c);
  add_approx(error, c, true);
  error->add_option("--in", c.in, "solved distance field (otherwise solved from flags)");
  error->add_option("--out", c.out, "CSV output (default stdout)");
  error->callback([&] {
    ScalarField const d = distance_field(c);
    ErrorReport const rep = mean_relative_error(approx_kind(c), d);
    std::ostringstream ss;
    ss << "approx,w1,w2,w3,grid,mean_rel_err,max_rel_err,n_excluded\n"
       << rep.kind.name() << ',' << format_real(rep.w.w1()) << ',' << format_real(rep.w.w2())
       << ',' << format_real(rep.w.w3()) << ',' << rep.spec.n_x() << ','
       << format_real(rep.mean_rel_err) << ',' << format_real(rep.max_rel_err) << ','
       << rep.n_excluded << '\n';
    write_text(c.out, ss.str());
  });

  // error-table
  auto* table = app.add_subcommand(
      "error-table", "mean relative error of rho_b for zeta in {1, 1.5, 2, 3, 4, 6, 8}");
  table->alias("table4");
  add_grid(table, c);
  table->add_option("--w1", c.w1, "forward weight")->capture_default_str();
  table->add_option("--w3", c.w3, "angular weight")->capture_default_str();
  table->add_option("--nu", c.nu, "nu of rho-b-com");
  table->add_option("--tol", c.tol, "convergence tolerance")->capture_default_str();
  table->add_option("--out", c.out, "CSV output (default stdout)");
  table->callback([&] {
    std::ostringstream ss;
    ss << "zeta,w1,w2,w3,eps_rho_b,eps_rho_b_com\n";
    for (double const z : error_table_zetas()) {
      ErrorTableRow const row =
          error_table_row(grid(c), z, c.w1, c.w3, c.nu.value_or(kDefaultNuNew), solver_opts(c));
      ss << format_real(z) << ',' << format_real(row.w.w1()) << ',' << format_real(row.w.w2())
         << ',' << format_real(row.w.w3()) << ',' << format_real(row.eps_rho_b) << ','
         << format_real(row.eps_rho_b_com) << '\n';
      std::cerr << "zeta " << z << ": " << row.eps_rho_b << "\n";
    }
    write_text(c.out, ss.str());
  });

  // bounds
  double slack = 0.03;
  auto* bounds = app.add_subcommand("bounds", "check the global bounds on a distance field");
  add_metric(bounds, c);
  add_grid(bounds, c);
  bounds->add_option("--in", c.in, "solved distance field (otherwise solved from flags)");
  bounds->add_option("--slack", slack, "relative slack")->capture_default_str();
  bounds->callback([&] {
    ScalarField const d = distance_field(c);
    if (!d.metric) {
      throw UsageError("field has no metric weights");
    }
    BoundsOptions opts;
    opts.rel_slack = slack;
    BoundsReport const rep = verify_bounds(d, *d.metric, opts);
    std::cout << "checked " << rep.n_checked << " nodes, " << rep.n_violations
              << " violations\n";
    if (rep.worst) {
      std::cout << "worst: " << rep.worst->check << " at " << point_str(rep.worst->point)
                << " by " << rep.worst->excess << "\n";
    }
    status = rep.passed() ? kExitOk : kExitFail;
  });

  // symmetries
  std::size_t n_points = 100000;
  auto* sym = app.add_subcommand("symmetries", "check invariance under the eight symmetries");
  add_metric(sym, c);
  add_approx(sym, c, false);
  sym->add_option("--in", c.in, "grid field to check instead of a closed form");
  sym->add_option("--points", n_points, "number of random points")->capture_default_str();
  sym->add_option("--seed", c.seed, "random seed")->capture_default_str();
  sym->add_option("--tol", c.tol, "tolerance (default 1e-10, 0.02 relative for fields)");
  sym->callback([&] {
    if (c.in.empty() == c.approx.empty()) {
      throw UsageError("give exactly one of --approx and --in");
    }
    SymmetryReport rep;
    if (!c.in.empty()) {
      SymmetryOptions opts = field_symmetry_defaults();
      opts.n_points = n_points;
      opts.seed = c.seed;
      if (sym->count("--tol") > 0) opts.tol = c.tol;
      rep = verify_symmetries(load(c.in), opts);
    } else {
      SymmetryOptions opts;
      opts.n_points = n_points;
      opts.seed = c.seed;
      if (sym->count("--tol") > 0) opts.tol = c.tol;
      rep = verify_symmetries(approx_kind(c), metric(c), opts);
    }
    for (int s = 1; s < 8; ++s) {
      std::cout << "eps" << s << ' ' << format_real(rep.max_dev[s]) << '\n';
    }
    std::cout << (rep.passed() ? "PASS" : "FAIL") << " worst " << rep.worst_dev << " (eps"
              << rep.worst_symmetry << " at " << point_str(rep.worst_point) << ", tol "
              << rep.tol << ")\n";
    status = rep.passed() ? kExitOk : kExitFail;
  });

  // kernel
  double alpha = 0.0;
  double time = 1.0;
  auto* kernel = app.add_subcommand("kernel", "write the morphological kernel as a field");
  add_metric(kernel, c);
  add_grid(kernel, c);
  add_approx(kernel, c, false);
  kernel->add_option("--in", c.in, "solved distance field for the exact kernel");
  kernel->add_option("--alpha", alpha, "alpha > 1")->required();
  kernel->add_option("--time", time, "scale t > 0")->capture_default_str();
  kernel->add_option("--out", c.out, "output MG1 file")->required();
  kernel->callback([&] {
    KernelParams const kp(alpha, time);
    ScalarField f(GridSpec::cube(3, 1.0));
    if (!c.in.empty()) {
      f = load(c.in);
      for (double& v : f.values) {
        v = morph_kernel_from_distance(v, kp);
      }
    } else {
      if (c.approx.empty()) {
        throw UsageError("give --approx or --in");
      }
      ApproxKind const kind = approx_kind(c);
      MetricParams const w = metric(c);
      f = make_field(grid(c), [&](PointM2 const& p) { return morph_kernel(p, w, kp, kind); });
      f.metric = w;
    }
    f.kind = FieldKind::kernel;
    write_mg1(std::filesystem::path(c.out), f);
  });

  // erode / dilate
  std::string kernel_field;
  std::optional<double> window;
  auto add_morph = [&](char const* name, char const* help) {
    auto* sub = app.add_subcommand(name, help);
    add_metric(sub, c);
    add_approx(sub, c, false);
    sub->add_option("--in", c.in, "input MG1 field")->required();
    sub->add_option("--kernel-field", kernel_field, "solved distance field for the kernel");
    sub->add_option("--alpha", alpha, "alpha > 1")->required();
    sub->add_option("--time", time, "scale t > 0")->capture_default_str();
    sub->add_option("--window", window, "kernel window radius (metric length)");
    sub->add_option("--out", c.out, "output MG1 file")->required();
    return sub;
  };
  auto make_kernel = [&]() {
    KernelParams const kp(alpha, time);
    MorphKernelSpec k = [&] {
      if (!kernel_field.empty()) {
        if (!c.approx.empty()) {
          throw UsageError("--approx and --kernel-field are exclusive");
        }
        return make_kernel_spec(std::make_shared<ScalarField const>(load(kernel_field)), kp);
      }
      ApproxKind const kind = c.approx.empty() ? ApproxKind(ApproxTag::rho_b) : approx_kind(c);
      return make_kernel_spec(kind, kp, metric(c));
    }();
    k.window_radius = window;
    return k;
  };
  auto* erode_cmd = add_morph("erode", "morphological erosion of an MG1 field");
  erode_cmd->callback([&] {
    write_mg1(std::filesystem::path(c.out), erode(make_kernel(), load(c.in)));
  });
  auto* dilate_cmd = add_morph("dilate", "morphological dilation of an MG1 field");
  dilate_cmd->callback([&] {
    write_mg1(std::filesystem::path(c.out), dilate(make_kernel(), load(c.in)));
  });

  // convect
  double v1 = 0.0;
  double v2 = 0.0;
  double v3 = 0.0;
  auto* convect_cmd = app.add_subcommand("convect", "transport an MG1 field along exp(t v)");
  convect_cmd->add_option("--in", c.in, "input MG1 field")->required();
  convect_cmd->add_option("--v1", v1, "forward velocity")->capture_default_str();
  convect_cmd->add_option("--v2", v2, "sideways velocity")->capture_default_str();
  convect_cmd->add_option("--v3", v3, "angular velocity")->capture_default_str();
  convect_cmd->add_option("--time", time, "time t >= 0")->capture_default_str();
  convect_cmd->add_option("--out", c.out, "output MG1 file")->required();
  convect_cmd->callback([&] {
    ConvectionSpec const cs({v1, v2, v3}, time);
    write_mg1(std::filesystem::path(c.out), convect(cs, load(c.in)));
  });

  // iso
  double level = 1.0;
  std::vector<double> thetas{0.0};
  auto* iso = app.add_subcommand("iso", "isocontours per orientation slice as CSV");
  add_metric(iso, c);
  add_grid(iso, c);
  add_approx(iso, c, false);
  iso->add_option("--in", c.in, "grid field instead of a closed form");
  iso->add_option("--level", level, "contour level > 0")->capture_default_str();
  iso->add_option("--theta", thetas, "orientations; nearest slices are used");
  iso->add_option("--out", c.out, "CSV output (default stdout)");
  iso->callback([&] {
    if (c.in.empty() == c.approx.empty()) {
      throw UsageError("give exactly one of --approx and --in");
    }
    ScalarField f = [&] {
      if (!c.in.empty()) {
        return load(c.in);
      }
      ApproxKind const kind = approx_kind(c);
      MetricParams const w = metric(c);
      return make_field(grid(c), [&](PointM2 const& p) { return evaluate(kind, p, w); });
    }();
    std::vector<int> slices;
    for (double const t : thetas) {
      slices.push_back(nearest_slice(f.spec, t));
    }
    std::ostringstream ss;
    write_isocontour_csv(ss, isocontours(f, level, slices));
    write_text(c.out, ss.str());
  });

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int const code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (UsageError const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (std::invalid_argument const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (std::out_of_range const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (EikonalError const& e) {
    std::cerr << "solver failed: " << e.what() << "\n";
    return kExitFail;
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return status;
}
