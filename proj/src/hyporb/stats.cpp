#include "hyporb/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hyporb/accum.hpp"

namespace hyporb {

namespace {

constexpr long kMinSample = 100;

// Y values over positive-distance records; the identity (and any exact
// r=0 record) is excluded because the 1/sqrt(r) normalization is singular
std::vector<double> y_sample(const OrbitBall& ball, const PeriodForm& f) {
  std::vector<double> y;
  y.reserve(ball.records.size());
  for (const OrbitRecord& rec : ball.records) {
    if (!(rec.distance > 0.0)) continue;
    y.push_back(symbol(rec.element, f) / std::sqrt(rec.distance));
  }
  return y;
}

double mean_power(const std::vector<double>& y, int n) {
  CompensatedSum acc;
  for (double v : y) {
    double term = 1.0;
    for (int k = 0; k < n; ++k) term *= v;
    acc.add(term);
  }
  return acc.value() / static_cast<double>(y.size());
}

}  // namespace

double huber_ratio(const OrbitBall& ball, double vol) {
  return static_cast<double>(count(ball)) * vol /
         (std::numbers::pi * std::exp(ball.radius));
}

std::vector<double> raw_moment_sums(const OrbitBall& ball, const PeriodForm& f,
                                    int n_max) {
  if (n_max < 2)
    throw Error(Status::invalid_argument, "raw moment sums need n_max >= 2");
  std::vector<CompensatedSum> acc(n_max + 1);
  for (const OrbitRecord& rec : ball.records) {
    const double s = symbol(rec.element, f);
    double term = 1.0;
    for (int n = 1; n <= n_max; ++n) {
      term *= s;
      acc[n].add(term);
    }
  }
  std::vector<double> out(n_max + 1);
  out[0] = static_cast<double>(count(ball));
  for (int n = 1; n <= n_max; ++n) out[n] = acc[n].value();
  return out;
}

std::vector<double> studentized_moments(const OrbitBall& ball,
                                        const PeriodForm& f, int n_max) {
  if (n_max < 2)
    throw Error(Status::invalid_argument, "studentized moments need n_max >= 2");
  const std::vector<double> y = y_sample(ball, f);
  if (static_cast<long>(y.size()) < kMinSample)
    throw Error(Status::stats_precondition,
                "too few positive-distance records for moment statistics");
  const double mu2 = mean_power(y, 2);
  if (!(mu2 > 0.0))
    throw Error(Status::stats_precondition,
                "symbol distribution is degenerate for this form");
  std::vector<double> out(n_max + 1);
  out[0] = 1.0;
  for (int n = 1; n <= n_max; ++n)
    out[n] = mean_power(y, n) / std::pow(mu2, 0.5 * n);
  return out;
}

double standard_normal_cdf(double t) {
  return 0.5 * std::erfc(-t / std::numbers::sqrt2);
}

double ks_statistic(std::vector<double> normalized) {
  if (normalized.empty())
    throw Error(Status::invalid_argument, "KS statistic of an empty sample");
  std::sort(normalized.begin(), normalized.end());
  const double n = static_cast<double>(normalized.size());
  double ks = 0.0;
  for (size_t i = 0; i < normalized.size(); ++i) {
    const double cdf = standard_normal_cdf(normalized[i]);
    ks = std::max(ks, cdf - static_cast<double>(i) / n);
    ks = std::max(ks, static_cast<double>(i + 1) / n - cdf);
  }
  return ks;
}

double ks_against_gaussian(const OrbitBall& ball, const PeriodForm& f) {
  std::vector<double> y = y_sample(ball, f);
  if (static_cast<long>(y.size()) < kMinSample)
    throw Error(Status::stats_precondition,
                "too few positive-distance records for a KS test");
  const double mu2 = mean_power(y, 2);
  if (!(mu2 > 0.0))
    throw Error(Status::stats_precondition,
                "symbol distribution is degenerate for this form");
  const double std_dev = std::sqrt(mu2);
  for (double& v : y) v /= std_dev;
  return ks_statistic(std::move(y));
}

double estimate_norm_sq(const std::vector<MomentReport>& reports, double vol) {
  if (reports.size() < 2)
    throw Error(Status::invalid_argument,
                "norm estimation needs at least two radii");
  for (size_t i = 1; i < reports.size(); ++i)
    if (!(reports[i].x > reports[i - 1].x))
      throw Error(Status::invalid_argument,
                  "norm estimation needs strictly increasing radii");
  CompensatedSum num, den;
  for (const MomentReport& r : reports) {
    if (r.raw_sums.size() < 3)
      throw Error(Status::invalid_argument, "report lacks the second moment");
    const double psi =
        2.0 * std::numbers::pi * std::exp(r.x) * r.x / (vol * vol);
    num.add(psi * r.raw_sums[2]);
    den.add(psi * psi);
  }
  const double fit = num.value() / den.value();
  if (!(fit > 0.0) || !std::isfinite(fit))
    throw Error(Status::stats_precondition,
                "norm fit is not positive; radii too small");
  return fit;
}

std::vector<double> first_moment_decay(const std::vector<MomentReport>& reports) {
  std::vector<double> out;
  out.reserve(reports.size());
  for (const MomentReport& r : reports) {
    if (!r.z_equals_w)
      throw Error(Status::invalid_argument,
                  "first-moment decay is defined for z = w runs only");
    if (r.raw_sums.size() < 2 || r.count <= 0)
      throw Error(Status::invalid_argument, "report lacks the first moment");
    out.push_back(std::fabs(r.raw_sums[1]) / static_cast<double>(r.count));
  }
  return out;
}

MomentReport make_moment_report(const OrbitBall& ball, const PeriodForm& f,
                                int n_max, double vol) {
  MomentReport rep;
  rep.x = ball.radius;
  rep.count = count(ball);
  rep.raw_sums = raw_moment_sums(ball, f, n_max);
  rep.studentized = studentized_moments(ball, f, n_max);
  rep.huber_ratio = huber_ratio(ball, vol);
  rep.norm_sq_estimate = std::numeric_limits<double>::quiet_NaN();
  rep.ks_distance = ks_against_gaussian(ball, f);
  rep.z_equals_w = ball.base_z.re == ball.base_w.re &&
                   ball.base_z.im == ball.base_w.im;
  if (f.norm_sq) {
    std::vector<double> y;
    for (const OrbitRecord& rec : ball.records) {
      if (!(rec.distance > 0.0)) continue;
      y.push_back(normalized_symbol(rec.element, f, rec.distance, vol));
    }
    rep.paper_moments.resize(n_max + 1);
    rep.paper_moments[0] = 1.0;
    for (int n = 1; n <= n_max; ++n) rep.paper_moments[n] = mean_power(y, n);
  }
  return rep;
}

}  // namespace hyporb
