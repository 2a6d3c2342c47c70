#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "gkdv/diagnostics.hpp"
#include "gkdv/dynamics.hpp"
#include "gkdv/initial_data.hpp"
#include "support.hpp"

using namespace gkdv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

ModelParams model(double p, Sign s) {
  ModelParams m;
  m.p = p;
  m.sigma = s;
  return m;
}

double rel_l2(const Field& a, const Field& b) {
  return std::sqrt(mass(a - b) / mass(b));
}

}  // namespace

TEST_CASE("nonlinear_flux examples") {
  const Grid g = make_grid(8, 8.0);
  CHECK(testing::max_abs(nonlinear_flux(Field::zeros(g), model(3, Sign::defocusing))) == 0.0);
  const Field two = Field::sample(g, [](double) { return 2.0; });
  CHECK(nonlinear_flux(two, model(3, Sign::defocusing))[0] == 8.0);
  CHECK(nonlinear_flux(two, model(3, Sign::focusing))[0] == -8.0);
  const Field m3 = Field::sample(g, [](double) { return -3.0; });
  CHECK(nonlinear_flux(m3, model(2, Sign::defocusing))[0] == -9.0);
  CHECK_THAT(nonlinear_flux(m3, model(2.5, Sign::defocusing))[0], WithinRel(-std::pow(3.0, 2.5), 1e-15));
  const Field big = Field::sample(g, [](double) { return 1e200; });
  CHECK_THROWS_AS(nonlinear_flux(big, model(3, Sign::defocusing)), NonFiniteError);
  CHECK_THROWS_AS(nonlinear_flux(two, model(1.0, Sign::defocusing)), InvalidArgument);
}

TEST_CASE("oversampling factor removes aliasing of odd powers") {
  CHECK(NonlinearTerm::oversample_factor(3.0) == 2);
  CHECK(NonlinearTerm::oversample_factor(5.0) == 3);
  CHECK(NonlinearTerm::oversample_factor(2.0) == 4);
  CHECK(NonlinearTerm::oversample_factor(2.5) == 4);
}

TEST_CASE("rhs of the zero state and of a small sine") {
  const Grid g = make_grid(64, 2.0 * kPi);
  CHECK(testing::max_abs(rhs({0.0, Field::zeros(g)}, model(2, Sign::defocusing))) == 0.0);
  const double amp = 1e-8;
  const Field s = Field::sample(g, [&](double x) { return amp * std::sin(x); });
  const Field expect = Field::sample(g, [&](double x) { return amp * std::cos(x); });
  for (double p : {2.0, 3.0}) {
    const Field r = rhs({0.0, s}, model(p, Sign::defocusing));
    CHECK(testing::max_abs_diff(r, expect) < 1e-15);
  }
}

TEST_CASE("rhs of the focusing ground state is -Q'") {
  const Grid g = make_grid(1024, 100.0);
  const Field q = ground_state(3.0, g, 0.0);
  const Field r = rhs({0.0, q}, model(3, Sign::focusing));
  const Field dq = spectral_derivative(q, 1);
  CHECK(testing::max_abs_diff(r, -dq) < 1e-8);
}

TEST_CASE("zero state stays zero") {
  const Grid g = make_grid(64, 20.0);
  const FieldState s = step({0.5, Field::zeros(g)}, 0.01, model(2, Sign::focusing));
  CHECK(s.time == 0.51);
  CHECK(testing::max_abs(s.field) == 0.0);
}

TEST_CASE("linear flow is the exact per-mode propagator") {
  const Grid g = make_grid(128, 30.0);
  ModelParams lin = model(3, Sign::defocusing);
  lin.nonlinear = false;
  testing::Gen gen(21);
  const Field u0 = gen.trig_field(g, 40);
  const Spectrum s0 = forward_transform(u0);
  const auto k = g.half_wavenumbers();

  SECTION("one step of a single mode") {
    const double k1 = k[1];
    const Field sine = Field::sample(g, [&](double x) { return std::sin(k1 * x); });
    const double dt = 0.05;
    const Spectrum a = forward_transform(sine);
    const Spectrum b = forward_transform(step({0.0, sine}, dt, lin).field);
    const std::complex<double> factor = std::polar(1.0, k1 * k1 * k1 * dt);
    for (std::size_t m = 0; m < a.size(); ++m)
      CHECK(std::abs(b[m] - (m == 1 ? factor : 1.0) * a[m]) < 1e-12);
  }
  SECTION("many steps of many modes") {
    const double dt = 0.013;
    const double t = 200 * dt;
    const FieldState fin = evolve({0.0, u0}, t, dt, lin);
    const Spectrum s = forward_transform(fin.field);
    for (std::size_t m = 0; m + 1 < s.size(); ++m) {
      const std::complex<double> exact = std::polar(1.0, k[m] * k[m] * k[m] * t) * s0[m];
      CHECK(std::abs(s[m] - exact) < 1e-10 * (1.0 + std::abs(s0[m])));
    }
  }
}

TEST_CASE("phi functions agree across the series/closed-form switch") {
  for (double y : {0.3, 0.9, 0.999999, 1.000001, 1.7, 40.0}) {
    const std::complex<double> z(0.0, y);
    const auto a = detail::phi_functions(z);
    // Direct closed forms, well conditioned for these |z|.
    const std::complex<double> e = std::exp(z);
    const std::complex<double> p1 = (e - 1.0) / z;
    const std::complex<double> p2 = (e - 1.0 - z) / (z * z);
    const std::complex<double> p3 = (e - 1.0 - z - 0.5 * z * z) / (z * z * z);
    const double tol = y < 0.5 ? 1e-13 : 1e-12;
    CHECK(std::abs(a.phi1 - p1) < tol);
    CHECK(std::abs(a.phi2 - p2) < tol);
    CHECK(std::abs(a.phi3 - p3) < tol);
  }
  const auto zero = detail::phi_functions(0.0);
  CHECK(zero.phi1 == 1.0);
  CHECK(std::abs(zero.phi2 - 0.5) < 1e-16);
  CHECK(std::abs(zero.phi3 - 1.0 / 6.0) < 1e-16);
}

TEST_CASE("fourth-order self-convergence") {
  const Grid g = make_grid(256, 50.0);
  const ModelParams m = model(2, Sign::defocusing);
  const Field u0 = gaussian(g, 1.0, 1.0, 0.0);
  const double t = 1.0;
  auto run = [&](double dt) { return evolve({0.0, u0}, t, dt, m).field; };
  // Steps of 0.05 and larger are still pre-asymptotic (ratio < 8 there).
  const double dt = 0.0125;
  const Field ref = run(dt / 32);
  const double e1 = std::sqrt(mass(run(dt) - ref));
  const double e2 = std::sqrt(mass(run(dt / 2) - ref));
  INFO("error(dt) = " << e1 << ", error(dt/2) = " << e2);
  CHECK(e1 > 1e-11);
  CHECK(e2 <= e1 / 12.0);
}

TEST_CASE("evolve bookkeeping") {
  const Grid g = make_grid(64, 40.0);
  const ModelParams m = model(3, Sign::defocusing);
  const FieldState init{0.0, gaussian(g, 0.5, 1.0, 0.0)};

  const FieldState same = evolve(init, 0.0, 0.01, m);
  CHECK(same.time == 0.0);
  CHECK(testing::max_abs_diff(same.field, init.field) == 0.0);

  std::vector<double> seen;
  evolve(init, 1.0, 0.01, m, [&](const FieldState& s) { seen.push_back(s.time); }, 10);
  REQUIRE(seen.size() == 11);
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK_THAT(seen[i], WithinAbs(0.1 * i, 1e-12));

  CHECK_THROWS_AS(evolve(init, 1.005, 0.01, m), InvalidArgument);
  CHECK_THROWS_AS(evolve(init, -1.0, 0.01, m), InvalidArgument);
  CHECK_THROWS_AS(evolve(init, 1.0, 0.0, m), InvalidArgument);
  CHECK_THROWS_AS(evolve(init, 1.0, 0.01, m, {}, 0), InvalidArgument);
}

TEST_CASE("non-finite growth aborts with the time of the last good state") {
  const Grid g = make_grid(64, 40.0);
  const FieldState init{2.0, gaussian(g, 1e120, 1.0, 0.0)};
  try {
    evolve(init, 3.0, 0.01, model(3, Sign::defocusing));
    FAIL("expected BlowUpError");
  } catch (const BlowUpError& e) {
    CHECK(e.time() == 2.0);
  }
}

TEST_CASE("focusing soliton travels at speed one") {
  const Grid g = make_grid(1024, 100.0);
  const double p = 3.0;
  const FieldState fin = evolve({0.0, ground_state(p, g, -25.0)}, 5.0, 1e-3, model(p, Sign::focusing));
  const Field exact = ground_state(p, g, -20.0);
  CHECK(rel_l2(fin.field, exact) < 1e-4);
}

TEST_CASE("defocusing p = 2 conserves mass and energy") {
  const Grid g = make_grid(1024, 100.0);
  const ModelParams m = model(2, Sign::defocusing);
  const Field u0 = gaussian(g, 1.0, 1.0, 0.0);
  const Field u1 = evolve({0.0, u0}, 10.0, 1e-3, m).field;
  CHECK(std::fabs(mass(u1) - mass(u0)) / mass(u0) < 1e-8);
  CHECK(std::fabs(energy(u1, m) - energy(u0, m)) / energy(u0, m) < 1e-6);
}

TEST_CASE("property: the flow commutes with u -> -u") {
  testing::Gen gen(22);
  for (int trial = 0; trial < 6; ++trial) {
    const Grid g = make_grid(128, 60.0);
    const Field u0 = gen.bumps(g);
    const double p = trial % 2 == 0 ? 2.0 : gen.uniform(1.8, 4.0);
    const ModelParams m = model(p, trial % 3 == 0 ? Sign::focusing : Sign::defocusing);
    const Field a = evolve({0.0, u0}, 0.5, 0.01, m).field;
    const Field b = evolve({0.0, -u0}, 0.5, 0.01, m).field;
    CHECK(testing::max_abs_diff(a, -b) <= 1e-14 * testing::max_abs(a));
  }
}

TEST_CASE("property: grid translations commute with the flow") {
  testing::Gen gen(23);
  for (int trial = 0; trial < 6; ++trial) {
    const Grid g = make_grid(128, 60.0);
    const Field u0 = gen.bumps(g);
    const long shift = gen.integer(-20, 20);
    const ModelParams m = model(trial % 2 == 0 ? 2.0 : 3.0, Sign::defocusing);
    const Field a = testing::shift_nodes(evolve({0.0, u0}, 0.5, 0.01, m).field, shift);
    const Field b = evolve({0.0, testing::shift_nodes(u0, shift)}, 0.5, 0.01, m).field;
    CHECK(testing::max_abs_diff(a, b) <= 1e-12 * testing::max_abs(a));
  }
}

TEST_CASE("property: scaling symmetry on a rescaled grid") {
  // v(t, x) = lambda^{2/(p-1)} u(lambda^3 t, lambda x) solves the same equation
  // on the domain of length L / lambda.
  testing::Gen gen(24);
  for (int trial = 0; trial < 6; ++trial) {
    const double p = trial < 2 ? 2.0 : trial < 4 ? 3.0 : gen.uniform(1.8, 4.0);
    const double lambda = gen.uniform(0.6, 2.2);
    const double alpha = 2.0 / (p - 1.0);
    const ModelParams m = model(p, trial % 2 == 0 ? Sign::defocusing : Sign::focusing);
    const Grid g = make_grid(256, 60.0);
    const Grid h = make_grid(256, 60.0 / lambda);
    const Field u0 = gen.bumps(g);
    const Field v0(h, std::vector<double>(u0.values().begin(), u0.values().end()));
    const double scale = std::pow(lambda, alpha);
    const double dt = 0.01;
    const int steps = 40;
    const Field u1 = evolve({0.0, u0}, steps * dt, dt, m).field;
    const double dt_v = dt / (lambda * lambda * lambda);
    const Field v1 = evolve({0.0, scale * v0}, steps * dt_v, dt_v, m).field;
    double diff = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < u1.size(); ++j) {
      diff += std::pow(v1[j] - scale * u1[j], 2);
      norm += std::pow(scale * u1[j], 2);
    }
    INFO("p = " << p << ", lambda = " << lambda);
    CHECK(std::sqrt(diff / norm) < 1e-5);
  }
}
