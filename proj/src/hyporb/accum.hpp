#pragma once

#include <cmath>

namespace hyporb {

// Neumaier's variant of compensated summation: the error stays bounded
// independently of the summand count, which raw_moment_sums relies on when
// mixing magnitudes across ~1e5 terms
struct CompensatedSum {
  double s = 0.0;
  double c = 0.0;

  void add(double x) {
    const double t = s + x;
    if (std::fabs(s) >= std::fabs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }

  // fold in a partial sum produced by the same scheme
  void combine(const CompensatedSum& o) {
    add(o.s);
    add(o.c);
  }

  double value() const { return s + c; }
};

}  // namespace hyporb
