#include "hyporb/orbit.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <thread>

namespace hyporb {

namespace {

constexpr size_t kParentsPerChunk = 16384;
constexpr double kInf = std::numeric_limits<double>::infinity();

// canonical word packed at letter_bits per letter into 128 bits, little
// end first, plus the carried half-window flag for the acceptor
struct PackedWord {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  std::uint32_t len = 0;
  std::uint32_t has_half = 0;
};

int letter_bits(const SurfaceGroup& g) {
  return std::bit_width(static_cast<unsigned>(g.letter_count() - 1));
}

PackedWord pack_word(const Letter* w, int len, bool has_half, int bits) {
  unsigned __int128 v = 0;
  for (int i = 0; i < len; ++i)
    v |= static_cast<unsigned __int128>(w[i]) << (i * bits);
  PackedWord p;
  p.lo = static_cast<std::uint64_t>(v);
  p.hi = static_cast<std::uint64_t>(v >> 64);
  p.len = static_cast<std::uint32_t>(len);
  p.has_half = has_half ? 1 : 0;
  return p;
}

void unpack_word(const PackedWord& p, int bits, Letter* out) {
  const unsigned __int128 v =
      static_cast<unsigned __int128>(p.hi) << 64 | p.lo;
  const unsigned mask = (1u << bits) - 1;
  for (std::uint32_t i = 0; i < p.len; ++i)
    out[i] = static_cast<Letter>((v >> (i * bits)) & mask);
}

struct ChunkOut {
  std::vector<PackedWord> next;
  std::vector<OrbitRecord> records;
  long generated = 0;
  double min_dist = kInf;
  std::exception_ptr error;
};

struct ShellPass {
  const SurfaceGroup* g = nullptr;
  Point z{0.0, 1.0};
  Point w{0.0, 1.0};
  double x = 0.0;
  double bound = 0.0;  // x + margin
  int bits = 0;
  int capacity = 0;  // letters that fit in a PackedWord
  const std::vector<PackedWord>* frontier = nullptr;
};

OrbitRecord make_record(const SurfaceGroup& g, const Letter* w, int len,
                        const MoebiusMap& m, double d, double ch, Point pt) {
  OrbitRecord r;
  r.element.word.assign(w, w + len);
  r.element.matrix = m;
  r.element.abelianization = abelianize(g.genus, r.element.word);
  r.distance = d;
  r.cosh_distance = ch;
  r.orbit_point = pt;
  return r;
}

void process_chunk(const ShellPass& pass, size_t chunk, ChunkOut& out) {
  const SurfaceGroup& g = *pass.g;
  const std::vector<PackedWord>& frontier = *pass.frontier;
  const size_t from = chunk * kParentsPerChunk;
  const size_t to = std::min(frontier.size(), from + kParentsPerChunk);
  const int nletters = g.letter_count();
  Letter buf[64];
  for (size_t pi = from; pi < to; ++pi) {
    const PackedWord& parent = frontier[pi];
    if (static_cast<int>(parent.len) + 1 > pass.capacity)
      throw Error(Status::invalid_argument,
                  "word length exceeds the packed frontier capacity");
    unpack_word(parent, pass.bits, buf);
    // rebuilding the matrix from the identity repeats the exact float
    // operation order of matrix_of_word, so every worker layout produces
    // bit-identical records
    MoebiusMap m;
    for (std::uint32_t i = 0; i < parent.len; ++i)
      m = compose(m, g.letter(buf[i]));
    const int clen = static_cast<int>(parent.len) + 1;
    for (int c = 0; c < nletters; ++c) {
      buf[parent.len] = static_cast<Letter>(c);
      const AcceptResult a =
          accept_child(g, buf, clen, parent.has_half != 0);
      if (!a.ok) continue;
      const MoebiusMap cm = compose(m, g.letter(static_cast<Letter>(c)));
      const Point pt = apply(cm, pass.z);
      const double ch = cosh_dist(pt, pass.w);
      const double d = std::acosh(std::max(1.0, ch));
      out.generated += 1;
      out.min_dist = std::min(out.min_dist, d);
      if (d > pass.bound) continue;
      out.next.push_back(pack_word(buf, clen, a.has_half, pass.bits));
      if (d <= pass.x)
        out.records.push_back(make_record(g, buf, clen, cm, d, ch, pt));
    }
  }
}

void run_chunks(const ShellPass& pass, size_t nchunks, int workers,
                std::vector<ChunkOut>& outs) {
  if (workers <= 1 || nchunks <= 1) {
    for (size_t c = 0; c < nchunks; ++c) process_chunk(pass, c, outs[c]);
    return;
  }
  std::atomic<size_t> cursor{0};
  auto run = [&] {
    for (;;) {
      const size_t c = cursor.fetch_add(1);
      if (c >= nchunks) return;
      try {
        process_chunk(pass, c, outs[c]);
      } catch (...) {
        outs[c].error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int extra = static_cast<int>(
      std::min<size_t>(static_cast<size_t>(workers), nchunks)) - 1;
  pool.reserve(extra);
  for (int i = 0; i < extra; ++i) pool.emplace_back(run);
  run();
  for (std::thread& t : pool) t.join();
  // the lowest chunk index speaks first, so failures are deterministic too
  for (size_t c = 0; c < nchunks; ++c)
    if (outs[c].error) std::rethrow_exception(outs[c].error);
}

OrbitBall enumerate_plain(const SurfaceGroup& g, Point z, Point w, double x,
                          double margin, long cap, int workers) {
  OrbitBall ball;
  ball.base_z = z;
  ball.base_w = w;
  ball.radius = x;
  ball.stopping_margin = margin;
  ball.covolume = g.volume;

  const double projected = std::numbers::pi / g.volume * std::exp(x);
  if (projected > static_cast<double>(cap))
    throw Error(Status::cap_exceeded,
                "projected ball size exceeds the element cap");

  ShellPass pass;
  pass.g = &g;
  pass.z = z;
  pass.w = w;
  pass.x = x;
  pass.bound = x + margin;
  pass.bits = letter_bits(g);
  pass.capacity = 128 / pass.bits;

  // shell 0 is the identity
  const double ch0 = cosh_dist(z, w);
  const double d0 = std::acosh(std::max(1.0, ch0));
  ShellStat s0{0, 1, d0 <= pass.bound ? 1L : 0L, 0, d0};
  if (d0 <= x) {
    s0.recorded = 1;
    ball.records.push_back(
        make_record(g, nullptr, 0, MoebiusMap{}, d0, ch0, apply(MoebiusMap{}, z)));
  }
  ball.shell_stats.push_back(s0);

  std::vector<PackedWord> frontier;
  if (s0.admitted > 0) frontier.push_back(PackedWord{});

  long explored = 1;
  int length = 0;
  while (!frontier.empty()) {
    length += 1;
    pass.frontier = &frontier;
    const size_t nchunks =
        (frontier.size() + kParentsPerChunk - 1) / kParentsPerChunk;
    std::vector<ChunkOut> outs(nchunks);
    run_chunks(pass, nchunks, workers, outs);

    ShellStat stat{length, 0, 0, 0, kInf};
    std::vector<PackedWord> next;
    size_t next_size = 0, rec_size = 0;
    for (const ChunkOut& o : outs) {
      next_size += o.next.size();
      rec_size += o.records.size();
    }
    next.reserve(next_size);
    ball.records.reserve(ball.records.size() + rec_size);
    for (ChunkOut& o : outs) {
      stat.generated += o.generated;
      stat.min_distance = std::min(stat.min_distance, o.min_dist);
      next.insert(next.end(), o.next.begin(), o.next.end());
      for (OrbitRecord& r : o.records) ball.records.push_back(std::move(r));
      stat.recorded += static_cast<long>(o.records.size());
    }
    stat.admitted = static_cast<long>(next.size());
    ball.shell_stats.push_back(stat);

    explored += stat.admitted;
    if (explored > 2 * cap)
      throw Error(Status::cap_exceeded,
                  "explored words exceeded twice the element cap");
    if (static_cast<long>(ball.records.size()) > cap)
      throw Error(Status::cap_exceeded, "ball exceeded the element cap");

    if (stat.admitted == 0) {
      // the stopping rule owes this bound; failing it means the pruning
      // logic is broken, not that the ball is merely incomplete
      if (!(stat.min_distance > pass.bound))
        throw Error(Status::audit_failed,
                    "final shell reached back inside the stopping bound");
      break;
    }
    frontier.swap(next);
  }

  std::sort(ball.records.begin(), ball.records.end(),
            [](const OrbitRecord& a, const OrbitRecord& b) {
              if (a.distance != b.distance) return a.distance < b.distance;
              return shortlex_less(a.element.word, b.element.word);
            });
  return ball;
}

}  // namespace

double default_margin(const SurfaceGroup& g, Point z) {
  double best = 0.0;
  for (const MoebiusMap& m : g.generators)
    best = std::max(best, dist(z, apply(m, z)));
  return 2.0 * best;
}

OrbitBall enumerate_ball(const SurfaceGroup& g, Point z, Point w, double x,
                         const EnumerateOptions& opt) {
  if (!(x >= 0.0) || !std::isfinite(x))
    throw Error(Status::invalid_argument, "radius must be finite and >= 0");
  const double dflt = default_margin(g, z);
  double margin = opt.margin;
  if (margin < 0.0) {
    margin = dflt;
  } else if (!(margin >= dflt)) {
    throw Error(Status::invalid_argument,
                "margin below the default stopping slack");
  }
  if (opt.element_cap <= 0)
    throw Error(Status::invalid_argument, "element cap must be positive");

  const int workers = std::max(1, opt.workers);
  OrbitBall ball = enumerate_plain(g, z, w, x, margin, opt.element_cap, workers);
  if (opt.paranoid) {
    const OrbitBall wide =
        enumerate_plain(g, z, w, x, 2.0 * margin, opt.element_cap, workers);
    bool same = wide.records.size() == ball.records.size();
    for (size_t i = 0; same && i < ball.records.size(); ++i)
      same = ball.records[i].element.word == wide.records[i].element.word;
    if (!same)
      throw Error(Status::audit_failed,
                  "paranoid margin doubling changed the record set");
  }
  return ball;
}

OrbitBall restrict_ball(const OrbitBall& ball, double x) {
  if (!(x >= 0.0) || !std::isfinite(x))
    throw Error(Status::invalid_argument, "radius must be finite and >= 0");
  if (x > ball.radius)
    throw Error(Status::invalid_argument,
                "view radius exceeds the enumerated ball");
  OrbitBall view;
  view.base_z = ball.base_z;
  view.base_w = ball.base_w;
  view.radius = x;
  view.stopping_margin = ball.stopping_margin;
  view.covolume = ball.covolume;
  const auto past = std::upper_bound(
      ball.records.begin(), ball.records.end(), x,
      [](double v, const OrbitRecord& r) { return v < r.distance; });
  view.records.assign(ball.records.begin(), past);
  return view;
}

}  // namespace hyporb
