#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <doctest.h>

#include "hyporb/dirichlet.hpp"

using namespace hyporb;

namespace {

const SurfaceGroup& genus2() {
  static const SurfaceGroup g = build_octagon_group(2);
  return g;
}

const OrbitBall& ball5() {
  static const OrbitBall b =
      enumerate_ball(genus2(), Point(0.0, 1.0), Point(0.0, 1.0), 5.0);
  return b;
}

const OrbitBall& ball6() {
  static const OrbitBall b =
      enumerate_ball(genus2(), Point(0.0, 1.0), Point(0.0, 1.0), 6.0);
  return b;
}

const OrbitBall& ball8() {
  static const OrbitBall b =
      enumerate_ball(genus2(), Point(0.0, 1.0), Point(0.0, 1.0), 8.0);
  return b;
}

PeriodForm e1_form() { return PeriodForm{{1.0, 0.0, 0.0, 0.0}, {}, {}}; }

double simpson_tail(double beta, int k, double a) {
  // reference quadrature on [a, a + 80/beta], fine enough for 1e-10
  const double len = 80.0 / beta;
  const int steps = 400000;  // even
  const double h = len / steps;
  auto f = [&](double t) { return std::exp(-beta * t) * std::pow(t, k); };
  double acc = f(a) + f(a + len);
  for (int i = 1; i < steps; ++i)
    acc += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// shells at spacing dt whose record counts carry the counting law times
// the model second moment, with error-diffusion rounding so no mass is
// lost at small distances; every record pairs to exactly 1 with e1
OrbitBall second_moment_ball(double x, double vol, double nsq) {
  OrbitBall ball;
  ball.radius = x;
  ball.covolume = vol;
  OrbitRecord rec;
  rec.element.abelianization = {1, 0, 0, 0};
  const double dt = 0.01;
  double carry = 0.0;
  for (double t = dt; t <= x; t += dt) {
    const double want =
        std::numbers::pi / vol * std::exp(t) * dt * (2.0 * nsq * t / vol) + carry;
    const double m = std::floor(want + 0.5);
    carry = want - m;
    rec.distance = t;
    rec.cosh_distance = std::cosh(t);
    for (long i = 0; i < static_cast<long>(m); ++i) ball.records.push_back(rec);
  }
  return ball;
}

}  // namespace

TEST_CASE("tail integral power: closed form against quadrature") {
  const struct {
    double beta;
    int k;
    double a;
  } cases[] = {{0.2, 0, 5.0}, {0.5, 1, 10.0}, {1.0, 2, 3.0},
               {0.0625, 2, 13.0}, {0.3, 4, 7.0}};
  for (const auto& c : cases) {
    const double exact = tail_integral_power(c.beta, c.k, c.a);
    const double quad = simpson_tail(c.beta, c.k, c.a);
    CHECK(exact == doctest::Approx(quad).epsilon(1e-9));
  }
  CHECK_THROWS_AS(tail_integral_power(0.0, 1, 2.0), Error);
  CHECK_THROWS_AS(tail_integral_power(-0.2, 1, 2.0), Error);
  CHECK_THROWS_AS(tail_integral_power(0.5, -1, 2.0), Error);
  CHECK_THROWS_AS(tail_integral_power(0.5, 1, -2.0), Error);
}

TEST_CASE("richardson3: removes linear and quadratic terms exactly") {
  auto f = [](double u) { return 3.0 + 2.0 * u - 5.0 * u * u; };
  const double d = 0.5;
  CHECK(richardson3(f(d), f(d / 2), f(d / 4)) ==
        doctest::Approx(3.0).epsilon(1e-14));
  auto cubic = [](double u) { return 1.0 + u * u * u; };
  // the cubic term survives with weight d^3 / 8 under these node ratios
  CHECK(richardson3(cubic(d), cubic(d / 2), cubic(d / 4)) ==
        doctest::Approx(1.0 + d * d * d / 8.0).epsilon(1e-13));
  CHECK(richardson3(7.0, 7.0, 7.0) == 7.0);
}

TEST_CASE("evaluate: identity ball and basic shape") {
  const OrbitBall tiny =
      enumerate_ball(genus2(), Point(0.0, 1.0), Point(0.0, 1.0), 0.0);
  const SeriesValue one = evaluate(tiny, e1_form(), 0, {2.0, 0.0}, 0.0);
  CHECK(one.value.real() == 1.0);
  CHECK(one.value.imag() == 0.0);
  CHECK(one.tail_bound >= 0.0);

  const SeriesValue v = evaluate(ball6(), e1_form(), 0, {4.0, 0.0}, 0.0);
  CHECK(v.value.real() > 1.0);
  CHECK(v.value.imag() == 0.0);
  CHECK(v.truncation_radius == 6.0);

  // odd order is exactly imaginary, even order exactly real
  const SeriesValue odd = evaluate(ball6(), e1_form(), 3, {1.5, 0.0}, 0.0);
  CHECK(odd.value.real() == 0.0);
  const SeriesValue even = evaluate(ball6(), e1_form(), 2, {1.5, 0.0}, 0.0);
  CHECK(even.value.imag() == 0.0);
  // (-i)^2 = -1 against nonnegative summands
  CHECK(even.value.real() < 0.0);
}

TEST_CASE("evaluate: argument rejections") {
  const PeriodForm f = e1_form();
  CHECK_THROWS_AS(evaluate(ball6(), f, -1, {2.0, 0.0}, 0.0), Error);
  CHECK_THROWS_AS(evaluate(ball6(), f, 0, {1.0, 0.0}, 0.0), Error);
  CHECK_THROWS_AS(evaluate(ball6(), f, 0, {1.04, 0.0}, 0.0), Error);
  CHECK_THROWS_AS(
      evaluate(ball6(), f, 0, {2.0, 0.0}, std::nan("")), Error);
  OrbitBall no_vol;
  CHECK_THROWS_AS(evaluate(no_vol, f, 0, {2.0, 0.0}, 0.0), Error);
}

TEST_CASE("two-algorithm agreement: direct vs summation by parts") {
  const PeriodForm f = e1_form();
  for (int n : {0, 2, 4}) {
    for (double sr : {1.2, 1.5, 2.0}) {
      const SeriesValue a = evaluate(ball6(), f, n, {sr, 0.0}, 0.0);
      const SeriesValue b = evaluate_stieltjes(ball6(), f, n, {sr, 0.0}, 0.0);
      CHECK(std::abs(a.value - b.value) <= 1e-9 * std::abs(a.value));
    }
  }
  // odd orders cancel at z = w, so compare against the summand mass
  for (int n : {1, 3}) {
    double mass = 0.0;
    for (const OrbitRecord& rec : ball6().records)
      mass += std::pow(std::fabs(symbol(rec.element, f)), n) *
              std::pow(rec.cosh_distance, -1.5);
    const SeriesValue a = evaluate(ball6(), f, n, {1.5, 0.0}, 0.0);
    const SeriesValue b = evaluate_stieltjes(ball6(), f, n, {1.5, 0.0}, 0.0);
    CHECK(std::abs(a.value - b.value) <= 1e-9 * mass);
  }
  // complex argument and a nonzero twist
  const SeriesValue ca = evaluate(ball6(), f, 0, {1.3, 0.7}, 0.35);
  const SeriesValue cb = evaluate_stieltjes(ball6(), f, 0, {1.3, 0.7}, 0.35);
  CHECK(std::abs(ca.value - cb.value) <= 1e-9 * std::abs(ca.value));
}

TEST_CASE("conjugate symmetry at epsilon = 0 is exact") {
  // the (-i)^n prefactor flips sign under conjugation when n is odd, so
  // the law is G(conj s) = (-1)^n conj(G(s))
  const PeriodForm f = e1_form();
  for (int n : {0, 1, 2}) {
    const double flip = n % 2 == 0 ? 1.0 : -1.0;
    const SeriesValue up = evaluate(ball6(), f, n, {1.4, 0.9}, 0.0);
    const SeriesValue dn = evaluate(ball6(), f, n, {1.4, -0.9}, 0.0);
    CHECK(dn.value.real() == flip * up.value.real());
    CHECK(dn.value.imag() == flip * -up.value.imag());
    const SeriesValue su = evaluate_stieltjes(ball6(), f, n, {1.4, 0.9}, 0.0);
    const SeriesValue sd = evaluate_stieltjes(ball6(), f, n, {1.4, -0.9}, 0.0);
    CHECK(sd.value.real() == flip * su.value.real());
    CHECK(sd.value.imag() == flip * -su.value.imag());
  }
}

TEST_CASE("monotone truncation and tail bound honesty") {
  const PeriodForm f = e1_form();
  for (int n : {0, 2}) {
    const double strip = n == 2 ? -1.0 : 1.0;
    for (double sr : {1.2, 2.0}) {
      const SeriesValue small = evaluate(ball5(), f, n, {sr, 0.0}, 0.0);
      const SeriesValue big = evaluate(ball6(), f, n, {sr, 0.0}, 0.0);
      CHECK(strip * small.value.real() <= strip * big.value.real() + 1e-12);
      CHECK(std::abs(big.value - small.value) < small.tail_bound);
    }
  }
}

TEST_CASE("model counting ball: shape and counting ratio") {
  const double vol = 4.0 * std::numbers::pi;
  const OrbitBall ball = model_counting_ball(6.0, vol);
  // identity plus floor(0.25 e^6) = 100 planted points
  CHECK(count(ball) == 101);
  CHECK(ball.records.front().distance == 0.0);
  for (size_t j = 1; j < ball.records.size(); ++j)
    CHECK(ball.records[j].distance > ball.records[j - 1].distance);
  CHECK(ball.records.back().distance <= 6.0);

  const OrbitBall only_e = model_counting_ball(1.0, vol);
  CHECK(count(only_e) == 1);
  CHECK_THROWS_AS(model_counting_ball(-1.0, vol), Error);
  CHECK_THROWS_AS(model_counting_ball(5.0, 0.0), Error);
}

TEST_CASE("huber residue probe: planted truth recovered within tolerance") {
  const double vol = 4.0 * std::numbers::pi;
  std::vector<OrbitBall> balls;
  for (double x : {11.0, 12.0, 13.0}) balls.push_back(model_counting_ball(x, vol));

  const ResidueProbe p = huber_residue_probe(balls, vol);
  CHECK(p.n == 0);
  CHECK(p.pole_order_tested == 1);
  CHECK(p.target == doctest::Approx(0.5).epsilon(1e-15));
  REQUIRE(p.per_radius_estimates.size() == 3);
  CHECK(p.relative_error <= 0.05);
  CHECK(p.relative_error <= 0.01);  // the default delta0 does far better

  ProbeOptions wide;
  wide.delta0 = 0.5;
  CHECK(huber_residue_probe(balls, vol, wide).relative_error <= 0.05);
}

TEST_CASE("huber residue probe: real small-radius data stays in range") {
  std::vector<OrbitBall> balls = {ball5(), ball6(), ball8()};
  const ResidueProbe p = huber_residue_probe(balls, genus2().volume);
  CHECK(std::isfinite(p.leading_coefficient_estimate));
  CHECK(p.leading_coefficient_estimate > 0.0);
  // radii this small see real fluctuation; just require the right ballpark
  CHECK(p.relative_error <= 0.5);
}

TEST_CASE("huber residue probe: rejections and failure reporting") {
  const double vol = 4.0 * std::numbers::pi;
  std::vector<OrbitBall> two = {model_counting_ball(5.0, vol),
                                model_counting_ball(6.0, vol)};
  CHECK_THROWS_AS(huber_residue_probe(two, vol), Error);

  std::vector<OrbitBall> unsorted = {model_counting_ball(6.0, vol),
                                     model_counting_ball(5.0, vol),
                                     model_counting_ball(7.0, vol)};
  CHECK_THROWS_AS(huber_residue_probe(unsorted, vol), Error);

  std::vector<OrbitBall> balls;
  for (double x : {5.0, 6.0, 7.0}) balls.push_back(model_counting_ball(x, vol));
  CHECK_THROWS_AS(huber_residue_probe(balls, -1.0), Error);
  ProbeOptions bad;
  bad.delta0 = 0.6;
  CHECK_THROWS_AS(huber_residue_probe(balls, vol, bad), Error);
  bad.delta0 = 0.0;
  CHECK_THROWS_AS(huber_residue_probe(balls, vol, bad), Error);

  // an absurdly under-filled largest ball must trip the convergence gate
  std::vector<OrbitBall> skewed = {model_counting_ball(11.0, vol),
                                   model_counting_ball(12.0, vol)};
  OrbitBall hollow = model_counting_ball(0.0, vol);
  hollow.radius = 30.0;
  skewed.push_back(hollow);
  try {
    huber_residue_probe(skewed, vol);
    FAIL("expected the convergence gate to throw");
  } catch (const Error& e) {
    CHECK(e.status() == Status::extrapolation_failed);
  }
}

TEST_CASE("even probe: planted second-moment stream, m = 1") {
  const double vol = 4.0 * std::numbers::pi;
  const double nsq = 0.37;
  PeriodForm f = e1_form();
  f.norm_sq = nsq;
  std::vector<OrbitBall> balls;
  for (double x : {9.0, 10.0, 11.0})
    balls.push_back(second_moment_ball(x, vol, nsq));

  const ResidueProbe p = even_leading_coefficient_probe(balls, f, vol, 1);
  CHECK(p.n == 2);
  CHECK(p.pole_order_tested == 2);
  CHECK(p.target ==
        doctest::Approx(4.0 * std::numbers::pi * nsq / (vol * vol)).epsilon(1e-15));
  CHECK(p.relative_error <= 0.02);

  // the ratio of closed-form targets pins the arithmetic
  const ResidueProbe h = huber_residue_probe(
      {model_counting_ball(9.0, vol), model_counting_ball(10.0, vol),
       model_counting_ball(11.0, vol)},
      vol);
  CHECK(p.target / h.target == doctest::Approx(2.0 * nsq / vol).epsilon(1e-14));
}

TEST_CASE("even probe: m = 2 runs and reports a stable order-3 estimate") {
  const double vol = 4.0 * std::numbers::pi;
  PeriodForm f = e1_form();
  f.norm_sq = 0.37;
  std::vector<OrbitBall> balls;
  for (double x : {9.0, 10.0, 11.0})
    balls.push_back(second_moment_ball(x, vol, 0.37));
  // the fixture plants second moments only, so no target assertion here;
  // the probe must still settle and produce a sane positive estimate
  const ResidueProbe p = even_leading_coefficient_probe(balls, f, vol, 2);
  CHECK(p.pole_order_tested == 3);
  CHECK(std::isfinite(p.leading_coefficient_estimate));
  CHECK(p.leading_coefficient_estimate > 0.0);
}

TEST_CASE("even probe: rejections and the degenerate guard") {
  const double vol = 4.0 * std::numbers::pi;
  PeriodForm f = e1_form();
  std::vector<OrbitBall> planted;
  for (double x : {9.0, 10.0, 11.0})
    planted.push_back(second_moment_ball(x, vol, 0.37));

  CHECK_THROWS_AS(even_leading_coefficient_probe(planted, f, vol, 1), Error);
  f.norm_sq = 0.37;
  CHECK_THROWS_AS(even_leading_coefficient_probe(planted, f, vol, 0), Error);
  CHECK_THROWS_AS(even_leading_coefficient_probe(planted, f, vol, 3), Error);

  // all-zero symbols: the guard must name the precondition, not divide
  std::vector<OrbitBall> zeros;
  for (double x : {9.0, 10.0, 11.0}) zeros.push_back(model_counting_ball(x, vol));
  try {
    even_leading_coefficient_probe(zeros, f, vol, 1);
    FAIL("expected the degenerate guard to throw");
  } catch (const Error& e) {
    CHECK(e.status() == Status::stats_precondition);
  }
}

TEST_CASE("stencil laplacian: closed-form calibrations") {
  const double h = 1e-3;
  for (const Point& z : {Point(0.0, 1.0), Point(0.3, 1.7), Point(-1.2, 0.4)}) {
    CHECK(std::fabs(stencil_laplacian([](const Point&) { return 1.0; }, z, h)) <=
          1e-10);
    const double want = 2.0 * z.im * z.im;
    CHECK(stencil_laplacian([](const Point& p) { return p.im * p.im; }, z, h) ==
          doctest::Approx(want).epsilon(1e-8));
    // log y has hyperbolic Laplacian exactly -1, read through an h^2/y^2
    // discretization term that peaks near 3e-6 at the lowest point
    CHECK(stencil_laplacian([](const Point& p) { return std::log(p.im); }, z, h) ==
          doctest::Approx(-1.0).epsilon(1e-5));
  }
  CHECK_THROWS_AS(
      stencil_laplacian([](const Point&) { return 1.0; }, Point(0.0, 1.0), 0.0),
      Error);
  CHECK_THROWS_AS(
      stencil_laplacian([](const Point&) { return 1.0; }, Point(0.0, 5e-4), 1e-3),
      Error);
}

TEST_CASE("shifted equation: small defect, real and complex s, rejections") {
  const SurfaceGroup& g = genus2();
  const Point i(0.0, 1.0);
  const PeriodForm f = e1_form();
  const double d = shifted_equation_check(g, i, i, f, {2.5, 0.0}, 6.0);
  CHECK(d >= 0.0);
  CHECK(d <= 1e-2);

  const double dc = shifted_equation_check(g, i, i, f, {2.5, 0.5}, 6.0);
  CHECK(dc <= 1e-2);
  // a twisted sum satisfies the same identity term by term
  const double dt = shifted_equation_check(g, i, i, f, {2.5, 0.0}, 6.0, 1e-3, 0.4);
  CHECK(dt <= 1e-2);

  CHECK_THROWS_AS(shifted_equation_check(g, i, i, f, {1.9, 0.0}, 6.0), Error);
  CHECK_THROWS_AS(shifted_equation_check(g, i, i, f, {2.5, 0.0}, 6.0, 0.0), Error);
  CHECK_THROWS_AS(
      shifted_equation_check(g, Point(0.0, 5e-4), i, f, {2.5, 0.0}, 6.0), Error);
}
