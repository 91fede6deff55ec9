#include "hyporb/group.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

namespace hyporb {

Word word_inverse(const Word& w) {
  Word r(w.rbegin(), w.rend());
  for (Letter& l : r) l = letter_inverse(l);
  return r;
}

Word free_reduce(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (Letter c : w) {
    if (!out.empty() && out.back() == letter_inverse(c))
      out.pop_back();
    else
      out.push_back(c);
  }
  return out;
}

bool shortlex_less(const Word& u, const Word& v) {
  if (u.size() != v.size()) return u.size() < v.size();
  return u < v;
}

WindowMap::WindowMap(int window_len, int bits_per_letter)
    : len_(window_len), bits_(bits_per_letter) {
  if (bits_ > 0 && len_ * bits_ > 64) bits_ = 0;  // window too wide to pack
}

std::uint64_t WindowMap::pack(const Letter* w) const {
  std::uint64_t key = 1;  // leading 1 so length is part of the key
  for (int i = 0; i < len_; ++i) key = (key << bits_) | w[i];
  return key;
}

void WindowMap::insert(const Letter* w, Word replacement) {
  if (bits_ > 0)
    packed_.emplace(pack(w), std::move(replacement));
  else
    general_.emplace(Word(w, w + len_), std::move(replacement));
}

const Word* WindowMap::find(const Letter* w) const {
  if (bits_ > 0) {
    auto it = packed_.find(pack(w));
    return it == packed_.end() ? nullptr : &it->second;
  }
  auto it = general_.find(Word(w, w + len_));
  return it == general_.end() ? nullptr : &it->second;
}

namespace {

constexpr double kPi = std::numbers::pi;

MoebiusMap raw_mul(const MoebiusMap& m, const MoebiusMap& n) {
  return MoebiusMap{m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
                    m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

std::complex<double> apply_c(const MoebiusMap& m, std::complex<double> z) {
  return (m.a * z + m.b) / (m.c * z + m.d);
}

// z -> (z - Re p)/Im p as a unit-determinant matrix; sends p to i
MoebiusMap trans_to_i(std::complex<double> p) {
  const double s = std::sqrt(p.imag());
  return MoebiusMap{1.0 / s, -p.real() / s, 0.0, s};
}

// rotation of tangent directions at i by +phi (disk angle 0 = straight up)
MoebiusMap rot_about_i(double phi) {
  const double c = std::cos(phi / 2.0);
  const double s = std::sin(phi / 2.0);
  return MoebiusMap{c, s, -s, c};
}

// isometry sending p to i and the direction from p toward q to straight up
MoebiusMap frame(std::complex<double> p, std::complex<double> q) {
  const MoebiusMap t = trans_to_i(p);
  const std::complex<double> w = apply_c(t, q);
  const std::complex<double> iu(0.0, 1.0);
  const double delta = std::arg((w - iu) / (w + iu));
  return raw_mul(rot_about_i(-delta), t);
}

// the orientation-preserving isometry with a -> a2, b -> b2 (the two
// segments must have equal length, which side pairings guarantee)
MoebiusMap pair_isometry(std::complex<double> a, std::complex<double> b,
                         std::complex<double> a2, std::complex<double> b2) {
  const MoebiusMap f2 = frame(a2, b2);
  const MoebiusMap f2_inv{f2.d, -f2.b, -f2.c, f2.a};
  return canonicalize(raw_mul(f2_inv, frame(a, b)));
}

void build_tables(SurfaceGroup& g) {
  const int relator_len = g.letter_count();
  const int half = g.half_len();
  const int bits = std::bit_width(static_cast<unsigned>(relator_len - 1));

  std::vector<Word> rotations;
  for (const Word& base : {g.relator, word_inverse(g.relator)}) {
    for (int r = 0; r < relator_len; ++r) {
      Word rot(base.begin() + r, base.end());
      rot.insert(rot.end(), base.begin(), base.begin() + r);
      if (std::find(rotations.begin(), rotations.end(), rot) == rotations.end())
        rotations.push_back(std::move(rot));
    }
  }

  g.segments.assign(relator_len + 1, WindowMap());
  for (int k = half + 1; k <= relator_len; ++k)
    g.segments[k] = WindowMap(k, bits);
  g.halves = WindowMap(half, bits);

  for (const Word& rot : rotations) {
    for (int k = half; k <= relator_len; ++k) {
      // a window equal to the first k letters of a relator rotation can be
      // rewritten as the inverse of the remaining letters
      const Word seg(rot.begin(), rot.begin() + k);
      Word repl = word_inverse(Word(rot.begin() + k, rot.end()));
      WindowMap& table = (k == half) ? g.halves : g.segments[k];
      if (const Word* existing = table.find(seg.data())) {
        if (*existing != repl)
          throw Error(Status::invalid_argument,
                      "conflicting relator window replacements");
        continue;
      }
      table.insert(seg.data(), std::move(repl));
    }
  }
}

}  // namespace

SurfaceGroup build_octagon_group(int genus) {
  if (genus < 2)
    throw Error(Status::invalid_argument,
                "genus must be >= 2: genus 1 admits no hyperbolic structure");

  SurfaceGroup g;
  g.genus = genus;
  g.volume = 4.0 * kPi * (genus - 1);

  const int n = 4 * genus;
  // regular 4g-gon centered at i with vertex angles pi/(2g): the angle sum
  // is 2pi, so the quotient is a smooth genus-g surface. Circumradius from
  // cosh Rv = cot^2(pi/(4g)).
  const double beta = kPi / n;
  const double cot_beta = 1.0 / std::tan(beta);
  const double rv = std::acosh(cot_beta * cot_beta);
  const double rho = std::tanh(rv / 2.0);

  std::vector<std::complex<double>> verts(n);
  const std::complex<double> iu(0.0, 1.0);
  for (int k = 0; k < n; ++k) {
    const std::complex<double> zeta = std::polar(rho, 2.0 * kPi * k / n);
    verts[k] = iu * (1.0 + zeta) / (1.0 - zeta);  // disk model back to the half-plane
  }

  // sides labeled a_t b_t a_t^-1 b_t^-1 around the polygon
  std::vector<Letter> side(n);
  for (int t = 0; t < genus; ++t) {
    const Letter a = static_cast<Letter>(4 * t);
    const Letter b = static_cast<Letter>(4 * t + 2);
    side[4 * t + 0] = a;
    side[4 * t + 1] = b;
    side[4 * t + 2] = letter_inverse(a);
    side[4 * t + 3] = letter_inverse(b);
  }

  g.letters.assign(n, MoebiusMap{});
  for (int gi = 0; gi < 2 * genus; ++gi) {
    const Letter pos = static_cast<Letter>(2 * gi);
    int p = -1, q = -1;
    for (int s = 0; s < n; ++s) {
      if (side[s] == pos) p = s;
      if (side[s] == letter_inverse(pos)) q = s;
    }
    // carry side q onto side p with reversed orientation, the convention
    // under which the pairing is fixed-point free
    const MoebiusMap m = pair_isometry(verts[q], verts[(q + 1) % n],
                                       verts[(p + 1) % n], verts[p]);
    g.letters[pos] = m;
    g.letters[letter_inverse(pos)] = inverse(m);
  }

  // The vertex cycle of this pairing reads prod_t (a_t b_t^-1 a_t^-1 b_t);
  // renaming each b_t to its inverse turns that into the standard
  // commutator relator without changing the group.
  for (int t = 0; t < genus; ++t)
    std::swap(g.letters[4 * t + 2], g.letters[4 * t + 3]);

  g.generators.resize(2 * genus);
  for (int k = 0; k < 2 * genus; ++k) g.generators[k] = g.letters[2 * k];

  g.relator.clear();
  for (int t = 0; t < genus; ++t) {
    const Letter a = static_cast<Letter>(4 * t);
    const Letter b = static_cast<Letter>(4 * t + 2);
    g.relator.push_back(a);
    g.relator.push_back(b);
    g.relator.push_back(letter_inverse(a));
    g.relator.push_back(letter_inverse(b));
  }

  // construction self-checks: commutator relator closes up and every
  // generator is hyperbolic (these are the invariants the builder owes)
  const MoebiusMap rel = matrix_of_word(g, g.relator);
  const double dev = std::max({std::fabs(rel.a - 1.0), std::fabs(rel.b),
                               std::fabs(rel.c), std::fabs(rel.d - 1.0)});
  if (dev > 1e-8)
    throw Error(Status::numeric_decay, "relator product failed to close up");
  for (const MoebiusMap& m : g.generators) {
    if (!(std::fabs(m.a + m.d) > 2.0 + 1e-6))
      throw Error(Status::numeric_decay, "generator is not hyperbolic");
  }

  build_tables(g);
  return g;
}

MoebiusMap matrix_of_word(const SurfaceGroup& g, const Word& w) {
  MoebiusMap m;
  for (Letter c : w) m = compose(m, g.letter(c));
  return m;
}

Word dehn_shorten(const SurfaceGroup& g, Word w) {
  const int relator_len = g.letter_count();
  const int half = g.half_len();
  w = free_reduce(w);
  for (;;) {
    const int n = static_cast<int>(w.size());
    int best_p = -1, best_k = 0;
    // longest window first, leftmost position among those
    for (int k = std::min(relator_len, n); k > half && best_p < 0; --k) {
      for (int p = 0; p + k <= n; ++p) {
        if (g.segments[k].find(w.data() + p) != nullptr) {
          best_p = p;
          best_k = k;
          break;
        }
      }
    }
    if (best_p < 0) return w;
    const Word* repl = g.segments[best_k].find(w.data() + best_p);
    Word next(w.begin(), w.begin() + best_p);
    next.insert(next.end(), repl->begin(), repl->end());
    next.insert(next.end(), w.begin() + best_p + best_k, w.end());
    w = free_reduce(next);
  }
}

namespace {

constexpr size_t kSwapClassCap = 1024;

// After replacing w[p, p+half) the damage is local: a new cancellation can
// only sit at a seam of the replaced strip (replacements are internally
// reduced) and a new oversized window must overlap it. The walk keeps every
// enqueued member fully clean, so checking the strip is exhaustive.
bool swap_made_word_dirty(const SurfaceGroup& g, const Word& w, int p) {
  const int n = static_cast<int>(w.size());
  const int half = g.half_len();
  if (p > 0 && w[p] == letter_inverse(w[p - 1])) return true;
  if (p + half < n && w[p + half] == letter_inverse(w[p + half - 1])) return true;
  const int kmax = std::min(g.letter_count(), n);
  for (int k = half + 1; k <= kmax; ++k) {
    const int lo = std::max(0, p - k + 1);
    const int hi = std::min(n - k, p + half - 1);
    for (int s = lo; s <= hi; ++s)
      if (g.segments[k].find(w.data() + s) != nullptr) return true;
  }
  return false;
}

// BFS over half-window swaps, expanding clean members only. A dirty swap
// result ends the walk: it certifies the start word is not geodesic.
// on_member(word, dirty) returns false to stop early.
template <class OnMember>
void walk_swap_class(const SurfaceGroup& g, const Word& start, OnMember&& on_member) {
  const int half = g.half_len();
  const int n = static_cast<int>(start.size());
  std::vector<Word> seen{start};
  std::vector<size_t> stack{0};
  Word scratch;
  while (!stack.empty()) {
    const Word u = seen[stack.back()];  // copy: seen may grow below
    stack.pop_back();
    for (int p = 0; p + half <= n; ++p) {
      const Word* repl = g.halves.find(u.data() + p);
      if (repl == nullptr) continue;
      scratch = u;
      std::copy(repl->begin(), repl->end(), scratch.begin() + p);
      if (swap_made_word_dirty(g, scratch, p)) {
        if (!on_member(scratch, true)) return;
        continue;  // dirty members are reported but never expanded
      }
      bool known = false;
      for (const Word& s : seen)
        if (s == scratch) {
          known = true;
          break;
        }
      if (known) continue;
      if (!on_member(scratch, false)) return;
      if (seen.size() >= kSwapClassCap)
        throw Error(Status::invalid_argument, "half-swap class exceeded its size cap");
      seen.push_back(scratch);
      stack.push_back(seen.size() - 1);
    }
  }
}

}  // namespace

ClassScan scan_swap_class(const SurfaceGroup& g, const Word& start,
                          bool stop_at_smaller) {
  ClassScan out;
  out.min_word = start;
  if (static_cast<int>(start.size()) < g.half_len()) return out;
  walk_swap_class(g, start, [&](const Word& member, bool dirty) {
    if (dirty) {
      out.shortenable = true;
      out.witness = member;
      return false;
    }
    if (member < start) {  // equal lengths, so lexicographic is shortlex
      out.smaller = true;
      if (member < out.min_word) out.min_word = member;
      return !stop_at_smaller;
    }
    return true;
  });
  return out;
}

std::vector<Word> swap_class(const SurfaceGroup& g, const Word& w) {
  std::vector<Word> members{w};
  walk_swap_class(g, w, [&](const Word& member, bool dirty) {
    if (!dirty) members.push_back(member);
    return true;
  });
  return members;
}

Word reduce(const SurfaceGroup& g, const Word& w) {
  for (Letter c : w) {
    if (c >= g.letter_count())
      throw Error(Status::invalid_argument, "letter code out of range for this group");
  }
  Word d = dehn_shorten(g, w);
  while (static_cast<int>(d.size()) >= g.half_len()) {
    const ClassScan scan = scan_swap_class(g, d, false);
    if (!scan.shortenable) return scan.min_word;
    // the witness rewrites strictly shorter, so this loop terminates
    d = dehn_shorten(g, scan.witness);
  }
  return d;
}

std::vector<int> abelianize(int genus, const Word& w) {
  std::vector<int> v(2 * genus, 0);
  for (Letter c : w) {
    if ((c >> 1) >= 2 * genus)
      throw Error(Status::invalid_argument, "letter code out of range for this genus");
    v[c >> 1] += (c & 1u) ? -1 : 1;
  }
  return v;
}

GroupElement element_from_word(const SurfaceGroup& g, const Word& w) {
  GroupElement e;
  e.word = reduce(g, w);
  e.matrix = matrix_of_word(g, e.word);
  e.abelianization = abelianize(g.genus, e.word);
  return e;
}

AcceptResult accept_child(const SurfaceGroup& g, const Letter* t, int tlen,
                          bool prefix_has_half) {
  // free reduction: the new letter may not cancel its neighbor
  if (tlen >= 2 && t[tlen - 2] == letter_inverse(t[tlen - 1])) return {false, false};
  const int relator_len = g.letter_count();
  const int half = g.half_len();
  // an oversized relator window in t must end at the new letter (the
  // prefix is canonical), so suffix checks are exhaustive
  const int kmax = std::min(relator_len, tlen);
  for (int k = half + 1; k <= kmax; ++k) {
    if (g.segments[k].find(t + (tlen - k)) != nullptr) return {false, false};
  }
  bool has_half = prefix_has_half;
  if (!has_half && tlen >= half && g.halves.find(t + (tlen - half)) != nullptr)
    has_half = true;
  // with a half window present the word may hide a shortening behind a
  // swap, or a smaller equal-length spelling; the class scan rules on both
  if (has_half) {
    const ClassScan scan = scan_swap_class(g, Word(t, t + tlen), true);
    if (scan.shortenable || scan.smaller) return {false, has_half};
  }
  return {true, has_half};
}

}  // namespace hyporb
