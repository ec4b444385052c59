#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlkg/errors.hpp"
#include "nlkg/radial_grid.hpp"
#include "oracles.hpp"

using namespace nlkg;

TEST(RadialGrid, NodesAndSpacing) {
  auto g = make_grid(3, 4, 2.0);
  EXPECT_DOUBLE_EQ(g->dr(), 0.5);
  const double want[] = {0.25, 0.75, 1.25, 1.75};
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g->node(i), want[i]);
}

TEST(RadialGrid, SphereAreaFourDimensions) {
  auto g = make_grid(4, 16, 8.0);
  EXPECT_DOUBLE_EQ(g->dr(), 0.5);
  EXPECT_NEAR(g->omega(), 2.0 * std::numbers::pi * std::numbers::pi, 1e-12);
  EXPECT_NEAR(unit_sphere_area(3), 4.0 * std::numbers::pi, 1e-12);
  EXPECT_NEAR(unit_sphere_area(5), 8.0 * std::numbers::pi * std::numbers::pi / 3.0, 1e-12);
}

TEST(RadialGrid, RejectsBadArguments) {
  EXPECT_THROW(make_grid(6, 16, 8.0), InvalidArgument);
  EXPECT_THROW(make_grid(2, 16, 8.0), InvalidArgument);
  EXPECT_THROW(make_grid(3, 0, 8.0), InvalidArgument);
  EXPECT_THROW(make_grid(3, 16, -1.0), InvalidArgument);
  EXPECT_THROW(make_grid(3, 16, INFINITY), InvalidArgument);
}

TEST(RadialGrid, FieldsOnDifferentGridsDoNotMix) {
  auto a = make_grid(3, 16, 1.0);
  auto b = make_grid(3, 16, 2.0);
  EXPECT_NO_THROW(inner(Field(a), Field(make_grid(3, 16, 1.0))));
  EXPECT_THROW(inner(Field(a), Field(b)), ShapeMismatch);
  EXPECT_THROW(Field(a, std::vector<double>(3)), ShapeMismatch);
}

TEST(Integrate, ZeroAndBallVolume) {
  auto g = make_grid(3, 256, 1.0);
  EXPECT_EQ(integrate(Field(g)), 0.0);
  const double ball = 4.0 * std::numbers::pi / 3.0;
  const double err = std::abs(integrate(Field::from_function(g, [](double) { return 1.0; })) - ball);
  // midpoint rule: error = 8 pi dr^2 / 24
  EXPECT_NEAR(err, std::numbers::pi * g->dr() * g->dr() / 3.0, 0.1 * g->dr() * g->dr());
  auto g2 = make_grid(3, 512, 1.0);
  const double err2 = std::abs(integrate(Field::from_function(g2, [](double) { return 1.0; })) - ball);
  EXPECT_NEAR(err / err2, 4.0, 0.1);
}

TEST(Integrate, GroundStateMassMatchesRichardsonOracle) {
  const int d = 5;
  const double R = 200.0;
  auto g = make_grid(d, 8192, R);
  const double got = integrate(Field::from_function(g, [](double r) { return std::pow(oracle::w_value(5, r), 2); }));
  const double om = oracle::sphere_area(d);
  const double ref = oracle::richardson_trapezoid(
      [&](double r) { return om * std::pow(r, d - 1) * std::pow(oracle::w_value(d, r), 2); }, 0.0, R, 16);
  EXPECT_NEAR(got / ref, 1.0, 1e-4);
}

TEST(Integrate, IsLinear) {
  std::mt19937_64 rng(7);
  auto g = make_grid(4, 1000, 20.0);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = oracle::random_bumps(g, rng, 0.0, 20.0);
    auto h = oracle::random_bumps(g, rng, 0.0, 20.0);
    const double a = 1.7, b = -0.3;
    const double lhs = integrate(a * f + b * h);
    const double rhs = a * integrate(f) + b * integrate(h);
    EXPECT_NEAR(lhs, rhs, 1e-12 * (std::abs(a * integrate(f)) + std::abs(b * integrate(h)) + 1.0));
  }
}

TEST(Laplacian, ConstantIsHarmonicInside) {
  auto g = make_grid(5, 400, 10.0);
  auto lap = radial_laplacian(Field::from_function(g, [](double) { return 3.0; }));
  for (int i = 0; i + 1 < g->size(); ++i) EXPECT_NEAR(lap[i], 0.0, 1e-9);
  // the outer row sees the exterior harmonic flux
  EXPECT_NEAR(lap[g->size() - 1], -3.0 * g->robin(), 1e-9);
}

TEST(Laplacian, QuadraticGivesTwiceDimension) {
  for (int d = 3; d <= 5; ++d) {
    auto g = make_grid(d, 400, 4.0);
    auto lap = radial_laplacian(Field::from_function(g, [](double r) { return r * r; }));
    // the flux form is second order relative to the distance from the origin
    for (int i = 1; i + 1 < g->size(); ++i) {
      const double r = g->node(i);
      EXPECT_NEAR(lap[i], 2.0 * d, 2.0 * d * g->dr() * g->dr() / (r * r)) << "d=" << d << " i=" << i;
    }
  }
}

namespace {

double w_equation_error(int n) {
  auto g = make_grid(3, n, 40.0);
  auto W = Field::from_function(g, [](double r) { return oracle::w_value(3, r); });
  auto lap = radial_laplacian(W);
  double err = 0.0;
  for (int i = 0; i < g->size(); ++i) {
    const double r = g->node(i);
    if (r < 0.5 || r > 30.0) continue;
    err = std::max(err, std::abs(lap[i] + std::pow(W[i], 5)));
  }
  return err;
}

}  // namespace

TEST(Laplacian, GroundStateEquationSecondOrder) {
  const double e1 = w_equation_error(1024);
  const double e2 = w_equation_error(2048);
  EXPECT_LT(e1, 1e-3);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
}

TEST(Laplacian, SelfAdjointOnInteriorSupport) {
  std::mt19937_64 rng(11);
  for (int d = 3; d <= 5; ++d) {
    auto g = make_grid(d, 2000, 50.0);
    for (int trial = 0; trial < 5; ++trial) {
      auto f = oracle::random_bumps(g, rng, 1.0, 40.0);
      auto h = oracle::random_bumps(g, rng, 1.0, 40.0);
      const double diff = inner(radial_laplacian(f), h) - inner(f, radial_laplacian(h));
      EXPECT_LE(std::abs(diff), 1e-8 * norm_l2(f) * norm_l2(h));
    }
  }
}

TEST(Laplacian, SelfAdjointWithBoundaryValues) {
  // fields that do not vanish at the wall still give a symmetric operator
  std::mt19937_64 rng(12);
  auto g = make_grid(5, 500, 10.0);
  std::normal_distribution<double> N(0.0, 1.0);
  Field f(g), h(g);
  for (int i = 0; i < g->size(); ++i) {
    f[i] = N(rng);
    h[i] = N(rng);
  }
  const double a = inner(radial_laplacian(f), h);
  const double b = inner(f, radial_laplacian(h));
  EXPECT_NEAR(a, b, 1e-10 * std::abs(a));
}

TEST(GradientNorm, MatchesMinusLaplacianPairing) {
  std::mt19937_64 rng(13);
  auto g = make_grid(4, 800, 20.0);
  for (int trial = 0; trial < 5; ++trial) {
    auto f = oracle::random_bumps(g, rng, 0.0, 20.0) + Field::from_function(g, [](double r) {
               return 1.0 / (1.0 + r * r);
             });
    const double a = gradient_norm_sq(f);
    EXPECT_GT(a, 0.0);
    EXPECT_NEAR(a, -inner(radial_laplacian(f), f), 1e-10 * a);
  }
}

TEST(GradientNorm, ZeroAndConstant) {
  auto g = make_grid(3, 100, 5.0);
  EXPECT_EQ(gradient_norm_sq(Field(g)), 0.0);
  // a constant only feels the exterior closure term
  const double c = gradient_norm_sq(Field::from_function(g, [](double) { return 1.0; }));
  EXPECT_NEAR(c, g->boundary_weight(), 1e-12 * c);
}

TEST(GradientNorm, GroundStateIntegrationByParts) {
  // -Lap W = W^5, so ||grad W||^2 = integral of W^6 up to the far tail.
  const int d = 3;
  auto g = make_grid(d, 8192, 200.0);
  const double om = oracle::sphere_area(d);
  auto W = Field::from_function(g, [](double r) { return oracle::w_value(3, r); });
  const double ref = oracle::simpson([&](double r) { return om * r * r * std::pow(oracle::w_value(d, r), 6); },
                                     0.0, 200.0, 200000);
  EXPECT_NEAR(gradient_norm_sq(W) / ref, 1.0, 1e-3);
  EXPECT_NEAR(gradient_norm_sq(W) / oracle::grad_w_sq(d), 1.0, 1e-3);
}

TEST(Sample, InterpolatesAndExtends) {
  auto g = make_grid(5, 200, 10.0);
  auto f = Field::from_function(g, [](double r) { return 2.0 + r * r; });
  EXPECT_NEAR(sample(f, g->node(37)), f[37], 1e-13);
  // cubic interpolation is exact on even quadratics, including near the origin
  EXPECT_NEAR(sample(f, 3.333), 2.0 + 3.333 * 3.333, 1e-10);
  EXPECT_NEAR(sample(f, 0.01), 2.0001, 1e-10);
  const double rl = g->node(g->size() - 1);
  EXPECT_NEAR(sample(f, 2.0 * rl), f[g->size() - 1] / 8.0, 1e-12);
}

TEST(RadialGrid, StableCflBelowHalf) {
  for (int d = 3; d <= 5; ++d) {
    auto g = make_grid(d, 1024, 50.0);
    EXPECT_LE(g->stable_cfl(), 0.5);
    EXPECT_GT(g->stable_cfl(), 0.4);
    // leapfrog limit: dt^2 lambda_max < 4
    const double dt = g->stable_cfl() * g->dr();
    EXPECT_LT(dt * dt * g->laplacian_max_eigenvalue(), 4.0);
  }
}
