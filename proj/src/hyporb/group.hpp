#pragma once

#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "hyporb/geometry.hpp"

namespace hyporb {

// Letters are coded 2*gen + (1 for the inverse), generators ordered
// a1, b1, a2, b2, ... With that coding the natural integer order on codes
// IS the documented shortlex alphabet order a1 < a1^-1 < b1 < b1^-1 < a2 ...
using Letter = std::uint8_t;
using Word = std::vector<Letter>;

inline Letter letter_inverse(Letter l) { return static_cast<Letter>(l ^ 1u); }

Word word_inverse(const Word& w);
Word free_reduce(const Word& w);

// shortlex: shorter first, then lexicographic on letter codes
bool shortlex_less(const Word& u, const Word& v);

// Fixed-length window -> replacement lookup backing the Dehn rewriting
// tables. Windows short enough to pack into 64 bits use a hash map; longer
// ones (large genus) fall back to an ordered map, so no genus cap arises.
class WindowMap {
 public:
  WindowMap() = default;
  WindowMap(int window_len, int bits_per_letter);

  void insert(const Letter* w, Word replacement);
  const Word* find(const Letter* w) const;

  int window_len() const { return len_; }
  bool empty() const { return packed_.empty() && general_.empty(); }

 private:
  std::uint64_t pack(const Letter* w) const;

  int len_ = 0;
  int bits_ = 0;  // 0 selects the ordered-map fallback
  std::unordered_map<std::uint64_t, Word> packed_;
  std::map<Word, Word> general_;
};

// Genus-g surface group realized by the side pairings of the regular
// 4g-gon centered at i with vertex angles pi/(2g).
struct SurfaceGroup {
  int genus = 0;
  double volume = 0.0;                 // 4*pi*(genus - 1)
  std::vector<MoebiusMap> generators;  // 2g entries: a1, b1, ..., a_g, b_g
  Word relator;                        // a1 b1 a1^-1 b1^-1 ..., length 4g
  std::vector<MoebiusMap> letters;     // all 4g letter matrices in code order

  // Dehn rewriting tables derived from the relator: any window longer than
  // half the relator rewrites to a shorter word; exact-half windows rewrite
  // to equal-length alternatives and drive the canonical tie-breaking.
  std::vector<WindowMap> segments;  // indexed by window length, 2g+1 .. 4g
  WindowMap halves;                 // window length exactly 2g

  int letter_count() const { return 4 * genus; }
  int half_len() const { return 2 * genus; }
  const MoebiusMap& letter(Letter l) const { return letters[l]; }
};

SurfaceGroup build_octagon_group(int genus);

// Canonicalized product of the letter matrices along w, folded left to
// right. This fixed evaluation order is the library-wide definition of
// "the matrix of a word": every module recomputes matrices through it so
// equal words give bit-identical floats.
MoebiusMap matrix_of_word(const SurfaceGroup& g, const Word& w);

// Free reduction plus leftmost-longest replacement of relator windows
// longer than half the relator. Solves the word problem, but the output
// need not be geodesic: a further shortening can hide behind half-window
// swaps, which reduce chases down.
Word dehn_shorten(const SurfaceGroup& g, Word w);

// Full canonical form: shorten until no swap-class member shortens any
// further, then take the shortlex minimum of the class. reduce is
// idempotent and the canonical form of the identity class is the empty
// word.
Word reduce(const SurfaceGroup& g, const Word& w);

// Signed letter counts per generator: the projection to H1 of the surface.
std::vector<int> abelianize(int genus, const Word& w);

struct GroupElement {
  Word word;  // canonical form
  MoebiusMap matrix;
  std::vector<int> abelianization;
};

GroupElement element_from_word(const SurfaceGroup& g, const Word& w);

// Exact acceptor for growing canonical words letter by letter. t is a
// canonical word with one letter appended (length tlen); prefix_has_half
// says whether the parent already contained a half-relator window. Returns
// whether t is canonical, and t's own half-window flag for the caller to
// carry. The three rejection stages: free reduction, oversized relator
// window ending at the new letter, and (only when a half window exists
// anywhere) a swap-class scan that must find neither a shortenable member
// nor a smaller one.
struct AcceptResult {
  bool ok;
  bool has_half;
};
AcceptResult accept_child(const SurfaceGroup& g, const Letter* t, int tlen,
                          bool prefix_has_half);

// Walk of every word reachable from start by half-window swaps. A swapped
// word can expose a cancellation or an oversized relator window even when
// start shows neither; that proves start is not geodesic. The shortest
// genus-2 example is 8 letters long and equal to a 6-letter element, so
// suffix checks alone stop being exact there. The walk returns at the
// first shortenable member; with stop_at_smaller it also returns at the
// first member below start. start must be freely reduced with no
// oversized windows. Closure sizes observed are single-digit; the cap
// guards against pathological blowup rather than expected behavior.
struct ClassScan {
  bool shortenable = false;  // some member rewrites to a shorter word
  bool smaller = false;      // some clean member precedes start
  Word witness;              // the offending member when shortenable
  Word min_word;             // smallest clean member seen, start included
};
ClassScan scan_swap_class(const SurfaceGroup& g, const Word& start,
                          bool stop_at_smaller);

// Every clean word reachable from w (inclusive) by half-window swaps; on
// geodesic input this is the whole class.
std::vector<Word> swap_class(const SurfaceGroup& g, const Word& w);

// Depth-first pre-order walk of all canonical words of length <= max_len,
// children in letter-code order, starting with the empty word. Visitor
// gets (letters, length). Used by brute-force oracles and the
// faithfulness scan.
template <class F>
void for_each_canonical_word(const SurfaceGroup& g, int max_len, F&& visit) {
  std::vector<Letter> buf(static_cast<size_t>(max_len) + 1);
  std::vector<bool> half_flags(static_cast<size_t>(max_len) + 1, false);
  visit(buf.data(), 0);
  if (max_len <= 0) return;
  const int nletters = g.letter_count();
  // iterative DFS: next[d] is the next letter code to try at depth d
  std::vector<int> next(static_cast<size_t>(max_len) + 1, 0);
  int depth = 0;
  while (true) {
    if (next[depth] >= nletters || depth == max_len) {
      if (depth == 0) break;
      --depth;
      continue;
    }
    const Letter c = static_cast<Letter>(next[depth]++);
    buf[depth] = c;
    const AcceptResult r = accept_child(g, buf.data(), depth + 1, half_flags[depth]);
    if (!r.ok) continue;
    visit(buf.data(), depth + 1);
    ++depth;
    half_flags[depth] = r.has_half;
    next[depth] = 0;
  }
}

}  // namespace hyporb
