#pragma once

#include <cstdint>
#include <vector>

#include "hyporb/geometry.hpp"
#include "hyporb/group.hpp"

namespace hyporb {

// one lattice point gamma with r(gamma z, w) <= radius
struct OrbitRecord {
  GroupElement element;
  double distance = 0.0;
  double cosh_distance = 1.0;
  Point orbit_point{0.0, 1.0};
};

// per-word-length audit row; min_distance runs over every canonical child
// examined at that length, including the ones pruning then discarded
struct ShellStat {
  int length = 0;
  long generated = 0;  // canonical words of this length examined
  long admitted = 0;   // kept for expansion (distance <= x + margin)
  long recorded = 0;   // inside the requested radius
  double min_distance = 0.0;
};

struct OrbitBall {
  Point base_z{0.0, 1.0};
  Point base_w{0.0, 1.0};
  double radius = 0.0;
  double stopping_margin = 0.0;
  double covolume = 0.0;  // of the generating group, for counting laws
  std::vector<OrbitRecord> records;     // sorted by (distance, shortlex word)
  std::vector<ShellStat> shell_stats;
};

struct EnumerateOptions {
  double margin = -1.0;  // negative: use default_margin(g, z)
  long element_cap = 50'000'000;
  int workers = 1;
  bool paranoid = false;  // re-run with doubled margin, require equal records
};

// twice the largest generator displacement at z; the default pruning slack
double default_margin(const SurfaceGroup& g, Point z);

// The ball {gamma : r(gamma z, w) <= x}, enumerated breadth-first over
// canonical words (one word per element, so no dedup structure is needed).
// Children beyond x + margin are pruned; the walk stops at the first shell
// none of whose members comes within x + margin, and the audit asserts that
// shell's minimum really exceeds the bound. Pruning is a heuristic
// (distance is not monotone in word length); paranoid mode doubles the
// margin and requires an identical record set. Deterministic for any
// worker count.
OrbitBall enumerate_ball(const SurfaceGroup& g, Point z, Point w, double x,
                         const EnumerateOptions& opt = {});

inline long count(const OrbitBall& ball) {
  return static_cast<long>(ball.records.size());
}

// Distance-filtered view of an enumerated ball: same base points, margin
// and covolume, radius x, and exactly the record prefix inside x. Views
// are bit-identical to a direct enumeration at x; shell stats stay with
// the generating run. x must not exceed the source radius.
OrbitBall restrict_ball(const OrbitBall& ball, double x);

}  // namespace hyporb
