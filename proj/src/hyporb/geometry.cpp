#include "hyporb/geometry.hpp"

#include <cmath>
#include <limits>

namespace hyporb {

Point::Point(double re_, double im_) : re(re_), im(im_) {
  if (!std::isfinite(re) || !std::isfinite(im) || !(im > 0.0))
    throw Error(Status::invalid_argument, "point must lie in the open upper half-plane");
}

Point apply(const MoebiusMap& m, const Point& z) {
  // (az+b)/(cz+d) expanded over re/im. The imaginary part equals
  // det(m) * Im z / |cz+d|^2, so it stays positive for admitted maps.
  const double px = m.c * z.re + m.d;
  const double py = m.c * z.im;
  const double den = px * px + py * py;
  const double qx = m.a * z.re + m.b;
  const double qy = m.a * z.im;
  const double det = m.a * m.d - m.b * m.c;
  return Point((qx * px + qy * py) / den, det * z.im / den);
}

double cosh_dist(const Point& z, const Point& w) {
  const double dx = z.re - w.re;
  const double dy = z.im - w.im;
  return 1.0 + (dx * dx + dy * dy) / (2.0 * z.im * w.im);
}

double dist(const Point& z, const Point& w) {
  const double c = cosh_dist(z, w);
  return std::acosh(c < 1.0 ? 1.0 : c);
}

namespace {

// Determinant with the b*c rounding compensated (Kahan's trick), i.e. the
// true determinant of the stored doubles up to a couple of ulps.
double det_accurate(const MoebiusMap& m) {
  const double w = m.b * m.c;
  const double e = std::fma(m.b, m.c, -w);
  return std::fma(m.a, m.d, -w) - e;
}

}  // namespace

MoebiusMap canonicalize(const MoebiusMap& m) {
  const double det = det_accurate(m);
  // The achievable residual after renormalization scales with the product
  // magnitudes (catastrophic cancellation in ad - bc), not with the
  // determinant itself, so far-from-identity maps get a proportionally
  // wider budget. For unit-scale entries this is Tol::det_reject exactly.
  const double eps = std::numeric_limits<double>::epsilon();
  const double budget =
      Tol::det_reject + 100.0 * eps * (std::fabs(m.a * m.d) + std::fabs(m.b * m.c));
  if (!(det > 0.0) || !(std::fabs(det - 1.0) <= budget))
    throw Error(Status::numeric_decay,
                "matrix determinant drifted beyond the decay budget");
  MoebiusMap r = m;
  if (std::fabs(det - 1.0) > Tol::det_renorm) {
    // skipping the rescale below this residual makes canonicalize exactly
    // idempotent at the bit level
    const double s = 1.0 / std::sqrt(det);
    r = MoebiusMap{m.a * s, m.b * s, m.c * s, m.d * s};
  }
  const double entries[4] = {r.a, r.b, r.c, r.d};
  for (double v : entries) {
    if (std::fabs(v) > Tol::sign_floor) {
      if (v < 0.0) {
        r.a = -r.a;
        r.b = -r.b;
        r.c = -r.c;
        r.d = -r.d;
      }
      break;
    }
  }
  return r;
}

MoebiusMap compose(const MoebiusMap& m, const MoebiusMap& n) {
  return canonicalize(MoebiusMap{m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                                 m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d});
}

MoebiusMap inverse(const MoebiusMap& m) {
  return canonicalize(MoebiusMap{m.d, -m.b, -m.c, m.a});
}

}  // namespace hyporb
