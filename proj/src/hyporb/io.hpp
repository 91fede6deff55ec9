#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hyporb/dirichlet.hpp"
#include "hyporb/group.hpp"
#include "hyporb/orbit.hpp"
#include "hyporb/stats.hpp"

namespace hyporb {

inline constexpr std::string_view library_version = "0.1.0";

// One run, fully specified. The same config must reproduce the same output
// files byte for byte, so everything that influences the numbers lives
// here and is covered by config_hash; workers and output plumbing are
// excluded from the hash because results do not depend on them.
struct RunConfig {
  int genus = 2;
  Point z{0.0, 1.0};
  Point w{0.0, 1.0};
  std::vector<double> periods;  // empty selects e_1 for the configured genus
  std::optional<double> norm_sq;
  std::optional<double> sup_norm;
  std::vector<double> radii;
  int n_max = 6;
  double margin_factor = 1.0;
  long element_cap = 50'000'000;
  int workers = 1;
  std::string output_dir = ".";
  bool csv = true;
  bool json = true;
};

void validate_config(const RunConfig& config);

// Strict JSON reader: unknown keys are errors, absent keys keep defaults,
// the result is validated. The writer emits the canonical form that
// round-trips through the reader.
RunConfig parse_config_json(const std::string& text);
std::string config_json(const RunConfig& config);

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t config_hash(const RunConfig& config);

// %.17g, enough digits that reading the text back recovers the double
std::string format_double(double v);
std::string hash_hex(std::uint64_t h);

// "a2", "B1": letter a/b, handle number, capital for the inverse; words
// join letters with dots and the empty word prints as "e"
std::string letter_text(Letter l);
std::string word_text(const Word& w);
Word parse_word_text(const std::string& text);

// Structured text record of the group (genus, all 4g letter matrices in
// code order, relator) pinning a run's geometry byte for byte. Import
// rebuilds the group from its genus and refuses records that do not match
// this library's construction exactly.
std::string serialize_group(const SurfaceGroup& g);
SurfaceGroup import_group(const std::string& text);
std::uint64_t group_hash(const SurfaceGroup& g);

// Header block stamped on every output file, comment lines in CSV and a
// "meta" object in JSON, so any row is traceable to an exact run.
struct FileMeta {
  std::uint64_t config_hash = 0;
  std::uint64_t group_hash = 0;
  // extra header lines, in order; orbit dumps use them for the stopping
  // margin and friends
  std::vector<std::pair<std::string, std::string>> extra;
};

// Orbit dump, the interchange format consumed by stats and dirichlet.
// Columns: word, word_length, distance, cosh_distance, abelianization
// (semicolon-joined), rows in the ball's (distance, shortlex) order.
std::string orbit_csv(const OrbitBall& ball, int genus, const FileMeta& meta);

// Restores the statistical view of a dump: words, homology classes,
// distances, and the ball-level header fields. Matrices and orbit points
// are not stored in the format and come back as defaults.
OrbitBall parse_orbit_csv(const std::string& text);

std::string moment_reports_json(const std::vector<MomentReport>& reports,
                                const FileMeta& meta);
std::string moment_reports_csv(const std::vector<MomentReport>& reports,
                               const FileMeta& meta);

// agreement carries the per-row two-algorithm check when non-empty; its
// length must then match values
std::string series_csv(const std::vector<SeriesValue>& values,
                       const std::vector<bool>& agreement,
                       const FileMeta& meta);

// tolerances, when non-empty, adds tolerance and passed fields per probe
std::string probes_json(const std::vector<ResidueProbe>& probes,
                        const std::vector<double>& tolerances,
                        const FileMeta& meta);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace hyporb
