#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "se2dist/approx.hpp"

using namespace se2dist;

namespace {

PointM2 random_point(std::mt19937_64& rng, double r = 3.0)
{
  std::uniform_real_distribution<double> u(-r, r);
  std::uniform_real_distribution<double> t(-kPi, kPi);
  return {u(rng), u(rng), t(rng)};
}

}  // namespace

TEST(ApproxTag, NamesRoundTrip)
{
  for (auto const tag : kAllApproxTags) {
    EXPECT_EQ(parse_approx_tag(to_string(tag)), tag);
  }
  EXPECT_FALSE(parse_approx_tag("rho-x").has_value());
}

TEST(ApproxKind, NuValidationAndDefaults)
{
  EXPECT_DOUBLE_EQ(ApproxKind(ApproxTag::rho_b_sr).nu(), 1.6);
  EXPECT_DOUBLE_EQ(ApproxKind(ApproxTag::rho_b_sr_old1).nu(), 44.0);
  EXPECT_THROW(ApproxKind(ApproxTag::rho_b_sr, 0.0), std::invalid_argument);
  EXPECT_THROW(ApproxKind(ApproxTag::rho_c_com, 2 * std::sqrt(2.0)), std::invalid_argument);
  EXPECT_NO_THROW(ApproxKind(ApproxTag::rho_b_sr, 2.8));
  EXPECT_THROW(ApproxKind(ApproxTag::rho_b_sr_old2, -1.0), std::invalid_argument);
  EXPECT_NO_THROW(ApproxKind(ApproxTag::rho_b_sr_old2, 100.0));
}

TEST(RhoC, Examples)
{
  MetricParams const w(1, 3, 0.7);
  EXPECT_DOUBLE_EQ(rho_c({0.4, -1.1, 0}, w), rho_b({0.4, -1.1, 0}, w));
  EXPECT_DOUBLE_EQ(rho_c(kReferencePoint, w), 0.0);
}

TEST(RhoC, BracketsRhoB)
{
  std::mt19937_64 rng(31);
  MetricParams const w(1, 4, 0.6);
  for (int n = 0; n < 5000; ++n) {
    PointM2 const p = random_point(rng);
    double const rc = rho_c(p, w);
    double const rb = rho_b(p, w);
    EXPECT_LE(sinc(0.5 * p.theta) * rc, rb * (1 + 1e-12));
    EXPECT_LE(rb, rc * (1 + 1e-12));
  }
}

TEST(RhoB, Examples)
{
  EXPECT_DOUBLE_EQ(rho_b({1, 0, 0}, {1, 2, 1}), 1.0);
  EXPECT_DOUBLE_EQ(rho_b({0, 1, 0}, {1, 2, 1}), 2.0);
}

TEST(RhoB, ExactWhenIsotropic)
{
  std::mt19937_64 rng(32);
  MetricParams const w(1.5, 1.5, 0.4);
  for (int n = 0; n < 2000; ++n) {
    PointM2 const p = random_point(rng);
    EXPECT_NEAR(rho_b(p, w), lower_bound_l(p, w), 1e-12);
    EXPECT_NEAR(rho_b(p, w), upper_bound_u1(p, w), 1e-12);
  }
}

TEST(RhoB, GlobalSandwich)
{
  std::mt19937_64 rng(33);
  for (MetricParams const w : {MetricParams(1, 2, 1), MetricParams(1, 8, 0.5),
                               MetricParams(0.3, 0.9, 2.0)}) {
    double const z = w.zeta();
    for (int n = 0; n < 3000; ++n) {
      PointM2 const p = random_point(rng);
      double const rb = rho_b(p, w);
      double const l = lower_bound_l(p, w);
      double const u1 = upper_bound_u1(p, w);
      double const eps = 1e-12 * (1 + u1);
      EXPECT_LE(l, rb + eps);
      EXPECT_LE(rb, u1 + eps);
      EXPECT_LE(u1 / z, rb + eps);
      EXPECT_LE(rb, z * l + eps);
    }
  }
}

TEST(RhoSrOld, Examples)
{
  MetricParams const w(1, 8, 0.5);
  PointM2 const plane{1.2, 0.0, 0.0};
  EXPECT_NEAR(rho_sr_old(plane, w, 44, 2), 1.2, 1e-14);
  PointM2 const tilted{0.0, 0.0, 0.6};
  EXPECT_NEAR(rho_sr_old(tilted, w, 44, 2, Coords::logarithmic), 0.3, 1e-14);
  EXPECT_DOUBLE_EQ(rho_sr_old(kReferencePoint, w, 44, 1), 0.0);
  EXPECT_DOUBLE_EQ(rho_sr_old(kReferencePoint, w, 44, 2), 0.0);
  // Closed form at (0, 1, 0): (nu w1^2 w3^2)^(1/4).
  EXPECT_NEAR(rho_sr_old({0, 1, 0}, w, 44, 1), std::pow(44 * 0.25, 0.25), 1e-14);
  EXPECT_NEAR(rho_sr_old({0, 1, 0}, w, 44, 2), std::pow(44 * 0.25, 0.25), 1e-14);
  EXPECT_THROW(rho_sr_old(plane, w, 44, 3), std::invalid_argument);
}

TEST(RhoSrOld, DegeneratesAsAngularWeightVanishes)
{
  for (double const nu : {1.0, 44.0, 1000.0}) {
    EXPECT_LT(rho_sr_old({0, 1, 0}, {1, 8, 1e-8}, nu, 2), 1e-2);
    EXPECT_LT(rho_sr_old({0, 1, 0}, {1, 8, 1e-8}, nu, 1), 1e-2);
  }
}

TEST(RhoSrNew, Examples)
{
  MetricParams const w(1, 8, 0.5);
  EXPECT_DOUBLE_EQ(rho_sr_new(kReferencePoint, w, 1.6), 0.0);
  // Points on the plane c2 = 0.
  EXPECT_NEAR(rho_sr_new(exp_map({0.8, 0, 0.4}), w, 1.6, Coords::logarithmic),
              std::hypot(0.8, 0.5 * 0.4), 1e-12);
  EXPECT_NEAR(rho_sr_new({-1.1, 0, 0}, w, 1.6), 1.1, 1e-14);
  EXPECT_NEAR(rho_sr_new({0, 1, 0}, w, 1.6), 2.4, 1e-14);
  // Stays bounded below by nu w1 sqrt|b2| as w3 -> 0.
  EXPECT_GE(rho_sr_new({0, 1, 0}, {1, 8, 1e-9}, 1.6), 1.6);
}

TEST(RhoCom, Examples)
{
  std::mt19937_64 rng(34);
  MetricParams const iso(1, 1, 1);
  for (int n = 0; n < 1000; ++n) {
    PointM2 const p = random_point(rng);
    EXPECT_NEAR(rho_com(p, iso, 1.6), lower_bound_l(p, iso), 1e-12);
  }
  EXPECT_DOUBLE_EQ(rho_com(kReferencePoint, iso, 1.6), 0.0);

  MetricParams const w(1, 8, 1);
  PointM2 const p{0, 1.5, 0};
  double const sr = rho_sr_new(p, w, 1.6);
  EXPECT_NEAR(rho_b(p, w), 12.0, 1e-14);
  EXPECT_NEAR(sr, 3.2 * std::sqrt(1.5), 1e-13);
  EXPECT_DOUBLE_EQ(rho_com(p, w, 1.6), std::max(1.5, sr));
}

TEST(RhoCom, BetweenLowerBoundAndRiemannianEstimate)
{
  std::mt19937_64 rng(35);
  MetricParams const w(1, 6, 0.7);
  for (int n = 0; n < 5000; ++n) {
    PointM2 const p = random_point(rng);
    double const com = rho_com(p, w, 1.6);
    EXPECT_GE(com, lower_bound_l(p, w));
    EXPECT_LE(com, rho_b(p, w));
    EXPECT_LE(rho_com(p, w, 1.6, Coords::logarithmic), rho_c(p, w));
  }
}

TEST(Approximations, PositivelyHomogeneousInWeights)
{
  std::mt19937_64 rng(36);
  MetricParams const w(1, 3, 0.5);
  double const lambda = 1.7;
  for (auto const tag : kAllApproxTags) {
    // The old estimates scale like sqrt(lambda) in the sideways term.
    if (is_old_subriemannian(tag)) continue;
    ApproxKind const kind(tag);
    for (int n = 0; n < 200; ++n) {
      PointM2 const p = random_point(rng);
      EXPECT_NEAR(evaluate(kind, p, w.scaled(lambda)), lambda * evaluate(kind, p, w),
                  1e-11)
          << to_string(tag);
    }
  }
}

TEST(Approximations, InvariantUnderAllSymmetries)
{
  std::mt19937_64 rng(37);
  MetricParams const w(1, 5, 0.4);
  for (auto const tag : kAllApproxTags) {
    ApproxKind const kind(tag);
    for (int n = 0; n < 2000; ++n) {
      PointM2 const p = random_point(rng);
      double const base = evaluate(kind, p, w);
      for (int s = 0; s < 8; ++s) {
        EXPECT_NEAR(evaluate(kind, apply_symmetry(SymmetryId(s), p), w), base, 1e-10)
            << to_string(tag) << " eps" << s;
      }
    }
  }
}

TEST(Kernel, Examples)
{
  KernelParams const kp(2.0, 0.7);
  EXPECT_DOUBLE_EQ(kp.beta(), 2.0);
  EXPECT_NEAR(morph_kernel_from_distance(1.3, kp), 1.3 * 1.3 / (2 * 0.7), 1e-15);
  for (auto const tag : kAllApproxTags) {
    if (tag == ApproxTag::u2) continue;  // u2 is not tight at the reference point
    EXPECT_DOUBLE_EQ(morph_kernel(kReferencePoint, {1, 2, 1}, kp, ApproxKind(tag)), 0.0);
  }
  EXPECT_THROW(KernelParams(1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(KernelParams(2.0, 0.0), std::invalid_argument);
  KernelParams const k3(3.0, 1.0);
  EXPECT_NEAR(1 / k3.alpha() + 1 / k3.beta(), 1.0, 1e-15);
}

TEST(Kernel, StrictlyIncreasingInDistance)
{
  for (double const alpha : {1.2, 1.65, 2.0, 4.0}) {
    KernelParams const kp(alpha, 0.5);
    double prev = morph_kernel_from_distance(0.0, kp);
    for (double r = 0.01; r < 5; r += 0.01) {
      double const k = morph_kernel_from_distance(r, kp);
      EXPECT_GT(k, prev);
      prev = k;
    }
  }
}

TEST(LocalError, Examples)
{
  std::mt19937_64 rng(38);
  for (int n = 0; n < 100; ++n) {
    EXPECT_DOUBLE_EQ(local_error_epsilon(random_point(rng), {2, 2, 1}), 0.0);
  }
  EXPECT_DOUBLE_EQ(local_error_epsilon(kReferencePoint, {1, 2, 1}), 0.0);
  EXPECT_NEAR(local_error_epsilon({0.1, 0, 0}, {1, 2, 1}), 0.24, 1e-14);
}

TEST(ToleranceRegion, Examples)
{
  EXPECT_FALSE(tolerance_region_radius({1, 1, 1}, 0.1).has_value());
  EXPECT_NEAR(*tolerance_region_radius({1, 2, 1}, 0.1), 0.2 / 48, 1e-15);
  EXPECT_THROW(tolerance_region_radius({1, 2, 1}, 0.0), std::invalid_argument);
  double prev = std::numeric_limits<double>::infinity();
  for (double z = 1.1; z < 10; z += 0.3) {
    double const r = *tolerance_region_radius({1, z, 1}, 0.1);
    EXPECT_LT(r, prev);
    prev = r;
  }
  prev = 0.0;
  for (double w3 = 0.1; w3 < 3; w3 += 0.2) {
    double const r = *tolerance_region_radius({1, 2, w3}, 0.1);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(DualNormGradRhoB, UnitForIsotropicMetrics)
{
  std::mt19937_64 rng(39);
  MetricParams const w(1.2, 1.2, 0.7);
  for (int n = 0; n < 500; ++n) {
    PointM2 const p = random_point(rng);
    if (rho_b(p, w) < 0.05) continue;
    EXPECT_NEAR(dual_norm_grad_rho_b(p, w), 1.0, 1e-6);
  }
  EXPECT_NEAR(dual_norm_grad_rho_b({-1.7, 0, 0}, {1, 5, 1}), 1.0, 1e-8);
  EXPECT_THROW(dual_norm_grad_rho_b(kReferencePoint, w), std::domain_error);
}

TEST(DualNormGradRhoB, MatchesAnalyticGradient)
{
  // Oracle: chain rule through b(x, y, theta) with coordinate derivatives.
  std::mt19937_64 rng(40);
  MetricParams const w(1, 3, 0.8);
  for (int n = 0; n < 500; ++n) {
    PointM2 const p = random_point(rng);
    double const rb = rho_b(p, w);
    if (rb < 0.05) continue;
    HalfAngleCoords const b = half_angle(p);
    double const ch = std::cos(0.5 * p.theta), sh = std::sin(0.5 * p.theta);
    double const g1 = w.w1() * w.w1() * b.b1 / rb;
    double const g2 = w.w2() * w.w2() * b.b2 / rb;
    double const g3 = w.w3() * w.w3() * b.b3 / rb;
    double const dx = g1 * ch - g2 * sh;
    double const dy = g1 * sh + g2 * ch;
    double const dt = g1 * 0.5 * b.b2 - g2 * 0.5 * b.b1 + g3;
    double const expected = dual_norm(coordinate_to_frame(p, dx, dy, dt), w);
    EXPECT_NEAR(dual_norm_grad_rho_b(p, w), expected, 1e-6);
  }
}
