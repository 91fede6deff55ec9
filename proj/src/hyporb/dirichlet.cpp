#include "hyporb/dirichlet.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "hyporb/accum.hpp"

namespace hyporb {

namespace {

void check_series_args(const OrbitBall& ball, int n, std::complex<double> s,
                       double epsilon, double min_re) {
  if (n < 0)
    throw Error(Status::invalid_argument, "series order n must be nonnegative");
  if (!(s.real() >= min_re) || !std::isfinite(s.real()) || !std::isfinite(s.imag()))
    throw Error(Status::invalid_argument,
                "series argument outside the region of absolute convergence");
  if (!std::isfinite(epsilon))
    throw Error(Status::invalid_argument, "epsilon must be finite");
  if (!(ball.covolume > 0.0))
    throw Error(Status::invalid_argument, "ball carries no covolume");
}

double int_pow(double v, int n) {
  double p = 1.0;
  for (int k = 0; k < n; ++k) p *= v;
  return p;
}

// (-i)^n as an exact component shuffle
std::complex<double> quarter_turn(int n, double re, double im) {
  switch (n & 3) {
    case 1: return {im, -re};
    case 2: return {-re, -im};
    case 3: return {-im, re};
    default: return {re, im};
  }
}

// cosh^{-s} and the epsilon twist share one angle so the conjugate-s
// symmetry is exact at the bit level when epsilon = 0
void add_term(CompensatedSum& re, CompensatedSum& im, double mag, double angle) {
  if (angle == 0.0) {
    re.add(mag);
  } else {
    re.add(mag * std::cos(angle));
    im.add(mag * std::sin(angle));
  }
}

double model_tail_bound(const OrbitBall& ball, const PeriodForm& f, int n,
                        double sigma) {
  // counting density (pi/vol) e^t, envelope |<gamma,alpha>| <= K (1 + t)
  // with K read off the enumerated ball, and cosh(t)^{-sigma} <= 2^sigma
  // e^{-sigma t}; the remaining integral is tail_integral_power
  const double beta = sigma - 1.0;
  const double k_env = n > 0 ? eichler_ratio(ball, f) : 1.0;
  if (k_env == 0.0) return 0.0;
  const double x = ball.radius;
  return std::numbers::pi / ball.covolume * std::pow(2.0, sigma) *
         int_pow(k_env, n) * std::exp(beta) *
         tail_integral_power(beta, n, 1.0 + x);
}

SeriesValue make_series_value(const OrbitBall& ball, const PeriodForm& f,
                              int n, std::complex<double> s, double epsilon,
                              double re, double im) {
  SeriesValue out;
  out.n = n;
  out.s = s;
  out.epsilon = epsilon;
  out.truncation_radius = ball.radius;
  out.value = quarter_turn(n, re, im);
  out.tail_bound = model_tail_bound(ball, f, n, s.real());
  return out;
}

}  // namespace

double tail_integral_power(double beta, int k, double a) {
  if (!(beta > 0.0) || k < 0 || !(a >= 0.0))
    throw Error(Status::invalid_argument,
                "tail integral needs beta > 0, k >= 0, a >= 0");
  // int_a^inf e^{-beta t} t^k dt = e^{-beta a} sum_j k!/(k-j)! a^{k-j} / beta^{j+1}
  double sum = 0.0;
  double falling = 1.0;
  double beta_pow = beta;
  for (int j = 0; j <= k; ++j) {
    sum += falling * int_pow(a, k - j) / beta_pow;
    falling *= static_cast<double>(k - j);
    beta_pow *= beta;
  }
  return std::exp(-beta * a) * sum;
}

SeriesValue evaluate(const OrbitBall& ball, const PeriodForm& f, int n,
                     std::complex<double> s, double epsilon) {
  check_series_args(ball, n, s, epsilon, 1.05);
  CompensatedSum re, im;
  for (const OrbitRecord& rec : ball.records) {
    const double sym = symbol(rec.element, f);
    const double lc = std::log(rec.cosh_distance);
    const double mag = int_pow(sym, n) * std::exp(-s.real() * lc);
    add_term(re, im, mag, -s.imag() * lc - epsilon * sym);
  }
  return make_series_value(ball, f, n, s, epsilon, re.value(), im.value());
}

SeriesValue evaluate_stieltjes(const OrbitBall& ball, const PeriodForm& f,
                               int n, std::complex<double> s, double epsilon) {
  check_series_args(ball, n, s, epsilon, 1.05);
  const size_t cnt = ball.records.size();
  // phi_j = cosh(r_j)^{-s} over the distance-sorted records
  std::vector<std::complex<double>> phi(cnt);
  std::vector<std::complex<double>> coeff(cnt);
  for (size_t j = 0; j < cnt; ++j) {
    const OrbitRecord& rec = ball.records[j];
    const double sym = symbol(rec.element, f);
    const double lc = std::log(rec.cosh_distance);
    const double mag = std::exp(-s.real() * lc);
    const double angle = -s.imag() * lc;
    phi[j] = angle == 0.0
                 ? std::complex<double>(mag, 0.0)
                 : std::complex<double>(mag * std::cos(angle), mag * std::sin(angle));
    const double c = int_pow(sym, n);
    const double twist = -epsilon * sym;
    coeff[j] = twist == 0.0
                   ? std::complex<double>(c, 0.0)
                   : std::complex<double>(c * std::cos(twist), c * std::sin(twist));
  }
  // sum c_j phi_j = sum_{j<N-1} W_j (phi_j - phi_{j+1}) + W_{N-1} phi_{N-1}
  // with W_j the running coefficient sums
  CompensatedSum wr, wi, outr, outi;
  for (size_t j = 0; j < cnt; ++j) {
    wr.add(coeff[j].real());
    wi.add(coeff[j].imag());
    const std::complex<double> w(wr.value(), wi.value());
    const std::complex<double> dphi = j + 1 < cnt ? phi[j] - phi[j + 1] : phi[j];
    const std::complex<double> term = w * dphi;
    outr.add(term.real());
    outi.add(term.imag());
  }
  return make_series_value(ball, f, n, s, epsilon, outr.value(), outi.value());
}

double richardson3(double f0, double f1, double f2) {
  const double r1 = 2.0 * f1 - f0;
  const double r2 = 2.0 * f2 - f1;
  return (4.0 * r2 - r1) / 3.0;
}

namespace {

void check_probe_args(const std::vector<OrbitBall>& balls, double vol,
                      const ProbeOptions& opt) {
  if (balls.size() < 3)
    throw Error(Status::invalid_argument, "pole probes need at least three radii");
  for (size_t i = 1; i < balls.size(); ++i)
    if (!(balls[i].radius > balls[i - 1].radius))
      throw Error(Status::invalid_argument, "probe radii must be strictly increasing");
  if (!(vol > 0.0))
    throw Error(Status::invalid_argument, "volume must be positive");
  if (!(opt.delta0 > 0.0) || !(opt.delta0 <= 0.5))
    throw Error(Status::invalid_argument,
                "delta0 must lie in (0, 0.5] to keep nodes on (1, 1.5]");
}

// Richardson estimates per ball; the largest radius is the headline. The
// last two estimates must agree to half the headline's size, otherwise
// the extrapolation has not settled and the probe refuses to report.
void finish_probe(ResidueProbe& p) {
  for (double v : p.per_radius_estimates)
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "pole probe extrapolation produced a non-finite estimate;"
          << " per-radius estimates:";
      for (double u : p.per_radius_estimates) msg << ' ' << u;
      throw Error(Status::extrapolation_failed, msg.str());
    }
  const size_t m = p.per_radius_estimates.size();
  const double last = p.per_radius_estimates[m - 1];
  const double prev = p.per_radius_estimates[m - 2];
  if (std::fabs(last - prev) > 0.5 * std::max(std::fabs(last), 1e-12)) {
    std::ostringstream msg;
    msg << "pole probe did not converge across radii: last two estimates "
        << prev << " and " << last;
    throw Error(Status::extrapolation_failed, msg.str());
  }
  p.leading_coefficient_estimate = last;
  p.relative_error = std::fabs(last - p.target) / std::fabs(p.target);
}

}  // namespace

ResidueProbe huber_residue_probe(const std::vector<OrbitBall>& balls,
                                 double vol, const ProbeOptions& opt) {
  check_probe_args(balls, vol, opt);
  ResidueProbe p;
  p.n = 0;
  p.pole_order_tested = 1;
  p.target = 2.0 * std::numbers::pi / vol;
  for (const OrbitBall& ball : balls) {
    const double x = ball.radius;
    double node[3];
    for (int k = 0; k < 3; ++k) {
      const double s = 1.0 + std::ldexp(opt.delta0, -k);
      CompensatedSum g;
      for (const OrbitRecord& rec : ball.records)
        g.add(std::pow(rec.cosh_distance, -s));
      node[k] = (s - 1.0) * g.value() +
                std::numbers::pi / vol * std::pow(2.0, s) * std::exp(x * (1.0 - s));
    }
    p.per_radius_estimates.push_back(richardson3(node[0], node[1], node[2]));
  }
  finish_probe(p);
  return p;
}

ResidueProbe even_leading_coefficient_probe(const std::vector<OrbitBall>& balls,
                                            const PeriodForm& f, double vol,
                                            int m, const ProbeOptions& opt) {
  check_probe_args(balls, vol, opt);
  if (m != 1 && m != 2)
    throw Error(Status::invalid_argument, "even probe supports m = 1 and m = 2");
  if (!f.norm_sq)
    throw Error(Status::invalid_argument,
                "even probe needs the form's norm_sq, supplied or estimated");
  const double nsq = *f.norm_sq;
  double fact2m = 1.0, dfac = 1.0;
  for (int k = 2; k <= 2 * m; ++k) fact2m *= k;
  for (int k = 1; k < 2 * m; k += 2) dfac *= k;

  ResidueProbe p;
  p.n = 2 * m;
  p.pole_order_tested = m + 1;
  p.target = 2.0 * std::numbers::pi * fact2m * int_pow(nsq, m) / int_pow(vol, m + 1);

  double max_abs_sym = 0.0;
  for (const OrbitRecord& rec : balls.back().records)
    max_abs_sym = std::max(max_abs_sym, std::fabs(symbol(rec.element, f)));
  if (max_abs_sym == 0.0)
    throw Error(Status::stats_precondition,
                "even probe input is degenerate: the form pairs to zero on the ball");

  for (const OrbitBall& ball : balls) {
    const double x = ball.radius;
    double node[3];
    for (int k = 0; k < 3; ++k) {
      const double s = 1.0 + std::ldexp(opt.delta0, -k);
      const double u = s - 1.0;
      CompensatedSum sum;
      for (const OrbitRecord& rec : ball.records)
        sum.add(int_pow(symbol(rec.element, f), 2 * m) *
                std::pow(rec.cosh_distance, -s));
      const double tail = std::numbers::pi / vol * std::pow(2.0, s) * dfac *
                          int_pow(2.0 * nsq / vol, m) *
                          tail_integral_power(u, m, x);
      node[k] = int_pow(u, m + 1) * (sum.value() + tail);
    }
    p.per_radius_estimates.push_back(richardson3(node[0], node[1], node[2]));
  }
  finish_probe(p);
  return p;
}

double stencil_laplacian(const std::function<double(const Point&)>& fn,
                         const Point& z, double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(Status::invalid_argument, "stencil mesh must be positive");
  if (!(z.im - h > 0.0))
    throw Error(Status::invalid_argument, "stencil leaves the upper half-plane");
  const double cross = fn(Point(z.re + h, z.im)) + fn(Point(z.re - h, z.im)) +
                       fn(Point(z.re, z.im + h)) + fn(Point(z.re, z.im - h)) -
                       4.0 * fn(z);
  return z.im * z.im * cross / (h * h);
}

namespace {

// shared by both entry points; the group-based one must reject bad
// arguments before it pays for an enumeration
void validate_shifted_args(Point z, std::complex<double> s, double h,
                           double epsilon) {
  if (!(s.real() >= 2.0))
    throw Error(Status::invalid_argument,
                "shifted equation check needs Re(s) >= 2 for both sides");
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(Status::invalid_argument, "stencil mesh must be positive");
  if (!(z.im - h > 0.0))
    throw Error(Status::invalid_argument, "stencil leaves the upper half-plane");
  if (!std::isfinite(epsilon))
    throw Error(Status::invalid_argument, "epsilon must be finite");
}

}  // namespace

double shifted_equation_check(const SurfaceGroup& g, Point z, Point w,
                              const PeriodForm& f, std::complex<double> s,
                              double x, double h, double epsilon) {
  validate_shifted_args(z, s, h, epsilon);
  return shifted_equation_check(enumerate_ball(g, z, w, x), f, s, h, epsilon);
}

double shifted_equation_check(const OrbitBall& ball, const PeriodForm& f,
                              std::complex<double> s, double h,
                              double epsilon) {
  const Point z = ball.base_z;
  const Point w = ball.base_w;
  validate_shifted_args(z, s, h, epsilon);
  for (const OrbitRecord& rec : ball.records) {
    if (rec.element.word.empty()) continue;
    const double ch = cosh_dist(apply(rec.element.matrix, z), w);
    if (!(std::abs(ch - rec.cosh_distance) <= 1e-9 * rec.cosh_distance))
      throw Error(Status::invalid_argument,
                  "ball records carry no matrices; enumerate it fresh");
    break;
  }

  std::vector<double> twist;
  if (epsilon != 0.0) {
    twist.reserve(ball.records.size());
    for (const OrbitRecord& rec : ball.records)
      twist.push_back(-epsilon * symbol(rec.element, f));
  }
  const auto sum_at = [&](const Point& p, std::complex<double> sv) {
    CompensatedSum re, im;
    for (size_t j = 0; j < ball.records.size(); ++j) {
      const OrbitRecord& rec = ball.records[j];
      const double lc =
          std::log(cosh_dist(apply(rec.element.matrix, p), w));
      const double mag = std::exp(-sv.real() * lc);
      const double angle =
          -sv.imag() * lc + (twist.empty() ? 0.0 : twist[j]);
      add_term(re, im, mag, angle);
    }
    return std::complex<double>(re.value(), im.value());
  };

  const std::complex<double> center = sum_at(z, s);
  const std::complex<double> cross =
      sum_at(Point(z.re + h, z.im), s) + sum_at(Point(z.re - h, z.im), s) +
      sum_at(Point(z.re, z.im + h), s) + sum_at(Point(z.re, z.im - h), s) -
      4.0 * center;
  const std::complex<double> lap = z.im * z.im * cross / (h * h);
  const std::complex<double> mass = s * (1.0 - s) * center;
  const std::complex<double> shifted = s * (s + 1.0) * sum_at(z, s + 2.0);
  const double scale =
      std::max({std::abs(lap), std::abs(mass), std::abs(shifted)});
  return std::abs(lap + mass + shifted) / scale;
}

OrbitBall model_counting_ball(double x, double vol, int genus) {
  if (!(x >= 0.0) || !std::isfinite(x))
    throw Error(Status::invalid_argument, "radius must be finite and nonnegative");
  if (!(vol > 0.0) || genus < 2)
    throw Error(Status::invalid_argument, "need vol > 0 and genus >= 2");
  OrbitBall ball;
  ball.radius = x;
  ball.covolume = vol;
  OrbitRecord rec;
  rec.element.abelianization.assign(2 * genus, 0);
  ball.records.push_back(rec);  // the identity at distance 0
  const double density = std::numbers::pi / vol;
  for (long j = 1;; ++j) {
    const double t = std::log(static_cast<double>(j) / density);
    if (t > x) break;
    rec.distance = t;
    rec.cosh_distance = std::cosh(t);
    ball.records.push_back(rec);
  }
  return ball;
}

}  // namespace hyporb
