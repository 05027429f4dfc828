#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gns/families.hpp"
#include "gns/radial.hpp"

using namespace gns;
namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("pointwise family values") {
  OptimizerParams p;
  p.lambda = 1.0;
  CHECK(eval_family(Family::v, p, 0.0) == 1.0);
  p.kappa = 2.0;
  p.mass = 8.0 * pi;
  CHECK(eval_family(Family::sigma, p, 0.0) ==
        doctest::Approx(p.mass / (pi * p.kappa)).epsilon(1e-15));
  CHECK(eval_family(Family::g4d, p, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(eval_family(Family::v, p, -1.0), std::invalid_argument);
}

TEST_CASE("sigma and v^4 are the same family") {
  // sigma_{1/lambda^2, M} = (M/pi) lambda^2 v_lambda^4 pointwise.
  for (double lambda : {0.5, 2.0}) {
    OptimizerParams ps;
    ps.kappa = 1.0 / (lambda * lambda);
    ps.mass = 8.0 * pi;
    for (double r : {0.0, 0.3, 1.0, 5.0, 40.0}) {
      const double v = eval_family(Family::v, {.lambda = lambda}, r);
      const double lhs = eval_family(Family::sigma, ps, r);
      const double rhs = (ps.mass / pi) * lambda * lambda * std::pow(v, 4);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
    }
  }
}

TEST_CASE("offset evaluation returns the angular mean") {
  OptimizerParams p;
  p.lambda = 1.0;
  p.center_offset = 2.0;
  // At r = 0 the angular mean is the value at distance |x0|.
  CHECK(eval_family(Family::v, p, 0.0) ==
        doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
  // Averaging can only lower the peak value.
  CHECK(eval_family(Family::v, p, 2.0) < 1.0);
}

TEST_CASE("reference constants table") {
  auto t = reference_constants();
  CHECK(t.at("norm6_6_v").value == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK(t.at("norm4_4_v").value == doctest::Approx(pi).epsilon(1e-15));
  CHECK(t.at("grad_sq_v").value == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK(t.at("norm4_4_g4d").value == doctest::Approx(pi * pi / 6).epsilon(1e-15));

  // delta_GNS assembled from the table cancels algebraically.
  const double a = std::sqrt(t.at("grad_sq_v").value) *
                   std::sqrt(t.at("norm4_4_v").value);
  const double b = std::sqrt(pi * t.at("norm6_6_v").value);
  CHECK(std::abs(a - b) <= 1e-15);

  // Balance condition sqrt2 ||grad v|| = ||v||_4^2.
  CHECK(std::sqrt(2.0 * t.at("grad_sq_v").value) ==
        doctest::Approx(std::sqrt(t.at("norm4_4_v").value)).epsilon(1e-15));
}

TEST_CASE("sampled family members reproduce the table on a grid") {
  auto g = make_grid(1000.0, 4096, 2.0);
  auto v = sample_v(g, 1.0);
  std::vector<double> v4(v.values.size()), v6(v.values.size());
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    v4[i] = std::pow(v.values[i], 4);
    v6[i] = std::pow(v.values[i], 6);
  }
  CHECK(integrate(RadialDensity(g, v4, Kind::density)) ==
        doctest::Approx(pi).epsilon(2e-6));
  CHECK(integrate(RadialDensity(g, v6, Kind::density)) ==
        doctest::Approx(pi / 2).epsilon(2e-6));
  CHECK(grad_sq(v) == doctest::Approx(pi / 2).epsilon(1e-5));
}

TEST_CASE("uniform disk sampling") {
  auto g = make_grid(4.0, 2048, 1.0);
  auto d = uniform_disk(g, 1.0, 8.0 * pi);
  CHECK(integrate(d) == doctest::Approx(8.0 * pi).epsilon(1e-12));
  CHECK_THROWS_AS(uniform_disk(g, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("family parameter validation") {
  auto g = make_grid(10.0, 64, 1.0);
  CHECK_THROWS_AS(sample_v(g, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_sigma(g, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(sample_sigma(g, 1.0, 0.0), std::invalid_argument);
}
