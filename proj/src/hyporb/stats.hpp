#pragma once

#include <vector>

#include "hyporb/modsym.hpp"
#include "hyporb/orbit.hpp"

namespace hyporb {

// moment and distribution statistics of one orbit ball; norm_sq_estimate
// stays NaN until a cross-radius fit fills it in
struct MomentReport {
  double x = 0.0;
  long count = 0;
  std::vector<double> raw_sums;     // S_n = sum of symbol^n, n = 0..n_max
  std::vector<double> studentized;  // E[Y^n]/E[Y^2]^(n/2), Y = symbol/sqrt(r)
  double huber_ratio = 0.0;
  double norm_sq_estimate = 0.0;
  double ks_distance = 0.0;
  bool z_equals_w = false;
  // mean normalized_symbol^n, present only when the form carries norm_sq
  std::vector<double> paper_moments;
};

// count * vol / (pi e^x); tends to 1 from Huber's counting law
double huber_ratio(const OrbitBall& ball, double vol);

// compensated sums S_n over all records, S_0 = count; n_max >= 2
std::vector<double> raw_moment_sums(const OrbitBall& ball, const PeriodForm& f,
                                    int n_max);

// scale-free moments of Y = symbol/sqrt(distance) over positive-distance
// records; entry n is E[Y^n]/E[Y^2]^(n/2), so entry 2 is exactly 1 and the
// Gaussian limit predicts 0 for odd n and (2m)!/(m! 2^m) for n = 2m
std::vector<double> studentized_moments(const OrbitBall& ball,
                                        const PeriodForm& f, int n_max);

// Kolmogorov-Smirnov distance of an already-normalized sample against the
// standard normal; no size precondition, used directly by tests
double ks_statistic(std::vector<double> normalized);

// KS distance of Y/sqrt(E[Y^2]) against the standard normal; needs at
// least 100 positive-distance records
double ks_against_gaussian(const OrbitBall& ball, const PeriodForm& f);

// least-squares fit of S_2(x) to norm_sq * (2 pi e^x x / vol^2) across
// reports at strictly increasing radii; rejects non-positive fits
double estimate_norm_sq(const std::vector<MomentReport>& reports, double vol);

// |S_1|/N per report; defined only for z = w runs, where exact inversion
// antisymmetry forces the limit 0
std::vector<double> first_moment_decay(const std::vector<MomentReport>& reports);

// standard normal CDF via erfc, absolute error well under 1e-7
double standard_normal_cdf(double t);

MomentReport make_moment_report(const OrbitBall& ball, const PeriodForm& f,
                                int n_max, double vol);

}  // namespace hyporb
