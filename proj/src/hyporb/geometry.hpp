#pragma once

#include <stdexcept>
#include <string>

namespace hyporb {

// Failure vocabulary shared across the library. The C boundary and the
// CLI map these onto status / exit codes, so the numbering is stable.
enum class Status : int {
  ok = 0,
  invalid_argument = 1,
  numeric_decay = 2,
  cap_exceeded = 3,
  audit_failed = 4,
  stats_precondition = 5,
  extrapolation_failed = 6,
  io_error = 7,
};

class Error : public std::runtime_error {
 public:
  Error(Status s, const std::string& what) : std::runtime_error(what), status_(s) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

// Tolerance knobs shared by tests, dedup and the decay guard, kept in one
// place so nothing drifts apart.
struct Tol {
  static constexpr double geom = 1e-9;        // geometric equality
  static constexpr double det_reject = 1e-6;  // determinant decay guard (unit-scale maps)
  static constexpr double det_renorm = 1e-12; // residual after renormalization, unit scale
  static constexpr double sign_floor = 1e-9;  // entry magnitude that decides the PSL2 sign
};

struct Point {
  double re = 0.0;
  double im = 1.0;
  Point() = default;
  Point(double re_, double im_);
};

// Real 2x2 matrix of determinant 1 acting on the upper half-plane by
// fractional-linear maps, identified up to sign. Build new ones through
// canonicalize() / compose() so the PSL2 invariants hold.
struct MoebiusMap {
  double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
};

Point apply(const MoebiusMap& m, const Point& z);

// cosh of the hyperbolic distance, 1 + |z-w|^2 / (2 Im z Im w). Cheaper and
// better conditioned than the distance itself; the hot paths compare these.
double cosh_dist(const Point& z, const Point& w);
double dist(const Point& z, const Point& w);

// Renormalizes the determinant to 1 and fixes the sign so that the first
// entry of (a, b, c, d) larger than Tol::sign_floor in magnitude is
// positive. Rejects maps whose determinant has drifted beyond the decay
// budget (see the .cpp for how the budget scales with entry size).
MoebiusMap canonicalize(const MoebiusMap& m);

// Matrix product followed by canonicalize(); renormalizing after every
// multiplication keeps the determinant error linear in the word length.
MoebiusMap compose(const MoebiusMap& m, const MoebiusMap& n);

MoebiusMap inverse(const MoebiusMap& m);

}  // namespace hyporb
