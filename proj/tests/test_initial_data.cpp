#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "gkdv/diagnostics.hpp"
#include "gkdv/initial_data.hpp"
#include "support.hpp"

using namespace gkdv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("ground state peak and sech-squared mass") {
  const Grid g = make_grid(1024, 100.0);
  const Field q = ground_state(3.0, g, 0.0);
  CHECK_THAT(q[512], WithinRel(std::sqrt(2.0), 1e-15));
  CHECK_THAT(ground_state_value(3.0, 0.0), WithinRel(std::sqrt(2.0), 1e-15));
  CHECK_THAT(integrate(q.map([](double v) { return v * v; })), WithinAbs(4.0, 1e-10));
  // Q(x) = (3 / (2 cosh^2(x/2))) for p = 2.
  CHECK_THAT(ground_state_value(2.0, 1.3), WithinRel(1.5 / std::pow(std::cosh(0.65), 2), 1e-14));
}

TEST_CASE("ground state decays monotonically away from its center") {
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    double prev = ground_state_value(p, 0.0);
    for (double x = 0.25; x <= 10.0 / (p - 1.0); x += 0.25) {
      const double v = ground_state_value(p, x);
      CHECK(v < prev);
      prev = v;
    }
  }
}

TEST_CASE("ground state rejects bad power and crowded centers") {
  const Grid g = make_grid(256, 40.0);
  CHECK_THROWS_AS(ground_state(1.0, g, 0.0), InvalidArgument);
  CHECK_THROWS_AS(ground_state(std::nan(""), g, 0.0), InvalidArgument);
  CHECK_THROWS_AS(ground_state(3.0, g, 16.0), InvalidArgument);
  CHECK_NOTHROW(ground_state(3.0, g, 15.0));
  // p = 1.5 has core width 2/(p-1) = 4, so the margin is 20.
  CHECK_THROWS_AS(ground_state(1.5, g, 0.5), InvalidArgument);
}

TEST_CASE("gaussian examples") {
  const Grid g = make_grid(512, 40.0);
  CHECK(testing::max_abs(gaussian(g, 0.0, 1.0, 0.0)) == 0.0);
  const Field a = gaussian(g, 2.5, 0.8, 3.125);
  CHECK(a[256 + 40] == 2.5);  // x = 3.125 = 40 dx
  const Field unit = gaussian(g, 1.0, 1.0, 0.0);
  CHECK_THAT(mass(unit), WithinAbs(std::sqrt(std::numbers::pi), 1e-12));
  CHECK_THROWS_AS(gaussian(g, 1.0, 0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(gaussian(g, 1.0, 1.0, 17.0), InvalidArgument);
}

TEST_CASE("custom profiles") {
  const Grid g = make_grid(256, 40.0);
  ProfileSpec spec;
  spec.kind = ProfileKind::custom;
  CHECK_THROWS_AS(make_profile(spec, g, 3.0), InvalidArgument);
  spec.shape = [](double s) { return 1.0 / std::cosh(s); };
  spec.amplitude = 2.0;
  spec.width = 1.5;
  spec.center = -4.0;
  const Field f = make_profile(spec, g, 3.0);
  const auto x = g.coordinates();
  for (std::size_t j = 0; j < f.size(); ++j)
    CHECK(f[j] == 2.0 / std::cosh((x[j] + 4.0) / 1.5));
}

TEST_CASE("traveling wave residual") {
  const Grid g = make_grid(1024, 100.0);
  const Field q = ground_state(3.0, g, 0.0);
  CHECK(traveling_wave_residual(q, 3.0) < 1e-8);
  CHECK(traveling_wave_residual(Field::zeros(g), 3.0) == 0.0);
  CHECK(traveling_wave_residual(2.0 * q, 3.0) > 0.1);
  CHECK_THROWS_AS(traveling_wave_residual(-q, 3.0), InvalidArgument);
  for (double p : {2.0, 4.0, 5.0}) CHECK(traveling_wave_residual(ground_state(p, g, 7.0), p) < 1e-8);
}

TEST_CASE("property: ground state is even, positive and translation covariant") {
  testing::Gen gen(31);
  for (int trial = 0; trial < testing::kTrials; ++trial) {
    const double p = gen.uniform(1.6, 6.0);
    const std::size_t n = 512;
    const Grid g = make_grid(n, 80.0);
    const double dx = g.spacing();
    const Field q = ground_state(p, g, 0.0);
    const std::size_t mid = n / 2;  // node at x = 0
    for (std::size_t j = 1; j < mid; ++j) CHECK(q[mid + j] == q[mid - j]);
    for (double v : q.values()) CHECK(v > 0.0);

    const long s = gen.integer(-60, 60);
    const Field shifted = ground_state(p, g, static_cast<double>(s) * dx);
    // Node coordinates carry rounding of order |x| eps.
    CHECK(testing::max_abs_diff(shifted, testing::shift_nodes(q, s)) < 1e-13);
  }
}

TEST_CASE("property: residual shrinks under refinement") {
  for (double p : {2.0, 3.0, 4.5}) {
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t n : {64, 128, 256}) {
      const double r = traveling_wave_residual(ground_state(p, make_grid(n, 60.0), 0.0), p);
      INFO("p = " << p << ", n = " << n);
      CHECK(r < prev);
      prev = r;
    }
  }
}
