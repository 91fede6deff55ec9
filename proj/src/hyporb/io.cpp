#include "hyporb/io.hpp"

#include <cctype>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace hyporb {

namespace {

[[noreturn]] void bad_file(const std::string& what) {
  throw Error(Status::io_error, what);
}

double parse_double(std::string_view text, const char* where) {
  std::string buf(text);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || buf.empty())
    bad_file(std::string("malformed number in ") + where + ": '" + buf + "'");
  return v;
}

long parse_long(std::string_view text, const char* where) {
  std::string buf(text);
  char* end = nullptr;
  const long v = std::strtol(buf.c_str(), &end, 10);
  if (end != buf.c_str() + buf.size() || buf.empty())
    bad_file(std::string("malformed integer in ") + where + ": '" + buf + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join_doubles(const std::vector<double>& v, char sep) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

// JSON emission is assembled by hand so every number goes through
// format_double and reruns stay byte-stable
std::string json_escape(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

std::string json_number(double v) {
  if (!std::isfinite(v)) return "null";
  return format_double(v);
}

std::string json_array(const std::vector<double>& v) {
  std::string out = "[";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += json_number(v[i]);
  }
  return out + "]";
}

std::string meta_json(const FileMeta& meta, const char* indent) {
  std::string out = "{\n";
  const std::string pad = std::string(indent) + "  ";
  out += pad + "\"version\": " + json_escape(library_version) + ",\n";
  out += pad + "\"config_hash\": " + json_escape(hash_hex(meta.config_hash)) + ",\n";
  out += pad + "\"group_hash\": " + json_escape(hash_hex(meta.group_hash));
  for (const auto& [key, value] : meta.extra)
    out += ",\n" + pad + json_escape(key) + ": " + json_escape(value);
  out += "\n" + std::string(indent) + "}";
  return out;
}

std::string meta_comments(const FileMeta& meta) {
  std::string out;
  out += "# version: " + std::string(library_version) + "\n";
  out += "# config_hash: " + hash_hex(meta.config_hash) + "\n";
  out += "# group_hash: " + hash_hex(meta.group_hash) + "\n";
  for (const auto& [key, value] : meta.extra)
    out += "# " + key + ": " + value + "\n";
  return out;
}

// comment headers of a CSV dump as key -> value, in "# key: value" form
std::map<std::string, std::string> comment_headers(
    const std::vector<std::string_view>& lines) {
  std::map<std::string, std::string> out;
  for (const auto& line : lines) {
    if (line.empty() || line[0] != '#') continue;
    const size_t colon = line.find(": ");
    if (colon == std::string_view::npos || colon < 2) continue;
    out.emplace(std::string(line.substr(2, colon - 2)),
                std::string(line.substr(colon + 2)));
  }
  return out;
}

const std::string& require_header(
    const std::map<std::string, std::string>& headers, const char* key) {
  const auto it = headers.find(key);
  if (it == headers.end())
    bad_file(std::string("missing header line '# ") + key + ": ...'");
  return it->second;
}

Point parse_point(std::string_view text, const char* where) {
  const auto parts = split(text, ' ');
  if (parts.size() != 2)
    bad_file(std::string(where) + " must be two numbers");
  return Point(parse_double(parts[0], where), parse_double(parts[1], where));
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hash_hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

void validate_config(const RunConfig& config) {
  auto fail = [](const std::string& what) {
    throw Error(Status::invalid_argument, "config: " + what);
  };
  if (config.genus < 2) fail("genus must be at least 2");
  for (const Point* p : {&config.z, &config.w})
    if (!std::isfinite(p->re) || !std::isfinite(p->im) || !(p->im > 0.0))
      fail("base points must lie in the upper half-plane");
  if (!config.periods.empty()) {
    if (config.periods.size() != 2 * static_cast<size_t>(config.genus))
      fail("periods must have exactly 2*genus entries");
    for (double p : config.periods)
      if (!std::isfinite(p)) fail("periods must be finite");
  }
  if (config.norm_sq && !(*config.norm_sq > 0.0))
    fail("norm_sq must be positive");
  if (config.sup_norm && !(*config.sup_norm > 0.0))
    fail("sup_norm must be positive");
  if (config.radii.empty()) fail("radii must be nonempty");
  for (double x : config.radii)
    if (!std::isfinite(x) || x < 0.0) fail("radii must be finite and nonnegative");
  for (size_t i = 1; i < config.radii.size(); ++i)
    if (!(config.radii[i] > config.radii[i - 1]))
      fail("radii must be strictly increasing");
  if (config.n_max < 2) fail("n_max must be at least 2");
  if (!(config.margin_factor >= 1.0) || !std::isfinite(config.margin_factor))
    fail("margin_factor must be at least 1");
  if (config.element_cap < 1) fail("element_cap must be positive");
  if (config.workers < 1) fail("workers must be at least 1");
  if (config.output_dir.empty()) fail("output_dir must be nonempty");
  if (!config.csv && !config.json) fail("formats must include csv or json");
}

RunConfig parse_config_json(const std::string& text) {
  static const std::set<std::string> known = {
      "genus",      "z",           "w",       "periods",
      "norm_sq",    "sup_norm",    "radii",   "n_max",
      "margin_factor", "element_cap", "workers", "output_dir",
      "formats"};
  RunConfig config;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.is_object()) bad_file("config must be a JSON object");
    for (const auto& item : j.items())
      if (!known.count(item.key()))
        bad_file("unknown config key '" + item.key() + "'");

    if (j.contains("genus")) config.genus = j.at("genus").get<int>();
    auto read_point = [&](const char* key, Point& into) {
      if (!j.contains(key)) return;
      const auto& a = j.at(key);
      if (!a.is_array() || a.size() != 2)
        bad_file(std::string(key) + " must be [re, im]");
      into = Point(a[0].get<double>(), a[1].get<double>());
    };
    read_point("z", config.z);
    read_point("w", config.w);
    if (j.contains("periods"))
      config.periods = j.at("periods").get<std::vector<double>>();
    if (j.contains("norm_sq") && !j.at("norm_sq").is_null())
      config.norm_sq = j.at("norm_sq").get<double>();
    if (j.contains("sup_norm") && !j.at("sup_norm").is_null())
      config.sup_norm = j.at("sup_norm").get<double>();
    if (j.contains("radii"))
      config.radii = j.at("radii").get<std::vector<double>>();
    if (j.contains("n_max")) config.n_max = j.at("n_max").get<int>();
    if (j.contains("margin_factor"))
      config.margin_factor = j.at("margin_factor").get<double>();
    if (j.contains("element_cap"))
      config.element_cap = j.at("element_cap").get<long>();
    if (j.contains("workers")) config.workers = j.at("workers").get<int>();
    if (j.contains("output_dir"))
      config.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("formats")) {
      config.csv = config.json = false;
      for (const auto& f : j.at("formats")) {
        const std::string name = f.get<std::string>();
        if (name == "csv")
          config.csv = true;
        else if (name == "json")
          config.json = true;
        else
          bad_file("unknown format '" + name + "'");
      }
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    bad_file(std::string("config parse: ") + e.what());
  }
  validate_config(config);
  return config;
}

std::string config_json(const RunConfig& config) {
  std::string out = "{\n";
  out += "  \"genus\": " + std::to_string(config.genus) + ",\n";
  out += "  \"z\": [" + format_double(config.z.re) + ", " +
         format_double(config.z.im) + "],\n";
  out += "  \"w\": [" + format_double(config.w.re) + ", " +
         format_double(config.w.im) + "],\n";
  out += "  \"periods\": " + json_array(config.periods) + ",\n";
  out += "  \"norm_sq\": " +
         (config.norm_sq ? json_number(*config.norm_sq) : "null") + ",\n";
  out += "  \"sup_norm\": " +
         (config.sup_norm ? json_number(*config.sup_norm) : "null") + ",\n";
  out += "  \"radii\": " + json_array(config.radii) + ",\n";
  out += "  \"n_max\": " + std::to_string(config.n_max) + ",\n";
  out += "  \"margin_factor\": " + format_double(config.margin_factor) + ",\n";
  out += "  \"element_cap\": " + std::to_string(config.element_cap) + ",\n";
  out += "  \"workers\": " + std::to_string(config.workers) + ",\n";
  out += "  \"output_dir\": " + json_escape(config.output_dir) + ",\n";
  out += "  \"formats\": [";
  if (config.csv) out += "\"csv\"";
  if (config.csv && config.json) out += ", ";
  if (config.json) out += "\"json\"";
  out += "]\n}\n";
  return out;
}

std::uint64_t config_hash(const RunConfig& config) {
  // semantic fields only: workers, output_dir and formats do not change
  // any computed number, and the determinism contract makes that testable
  std::string bytes;
  bytes += "genus=" + std::to_string(config.genus) + "\n";
  bytes += "z=" + format_double(config.z.re) + " " + format_double(config.z.im) + "\n";
  bytes += "w=" + format_double(config.w.re) + " " + format_double(config.w.im) + "\n";
  bytes += "periods=" + join_doubles(config.periods, ' ') + "\n";
  bytes += "norm_sq=" + (config.norm_sq ? format_double(*config.norm_sq) : "-") + "\n";
  bytes += "sup_norm=" + (config.sup_norm ? format_double(*config.sup_norm) : "-") + "\n";
  bytes += "radii=" + join_doubles(config.radii, ' ') + "\n";
  bytes += "n_max=" + std::to_string(config.n_max) + "\n";
  bytes += "margin_factor=" + format_double(config.margin_factor) + "\n";
  bytes += "element_cap=" + std::to_string(config.element_cap) + "\n";
  return fnv1a64(bytes);
}

std::string letter_text(Letter l) {
  const int q = l >> 1;
  const char base = q % 2 ? 'b' : 'a';
  const char name = (l & 1) ? static_cast<char>(base - 'a' + 'A') : base;
  return name + std::to_string(q / 2 + 1);
}

std::string word_text(const Word& w) {
  if (w.empty()) return "e";
  std::string out;
  for (size_t i = 0; i < w.size(); ++i) {
    if (i) out += '.';
    out += letter_text(w[i]);
  }
  return out;
}

Word parse_word_text(const std::string& text) {
  if (text == "e") return {};
  Word out;
  for (const auto tok : split(text, '.')) {
    if (tok.size() < 2) bad_file("malformed letter '" + std::string(tok) + "'");
    const char c = tok[0];
    const bool inverse = c == 'A' || c == 'B';
    if (c != 'a' && c != 'b' && !inverse)
      bad_file("malformed letter '" + std::string(tok) + "'");
    if (tok[1] == '0') bad_file("malformed letter '" + std::string(tok) + "'");
    long handle = 0;
    for (size_t i = 1; i < tok.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(tok[i])))
        bad_file("malformed letter '" + std::string(tok) + "'");
      handle = handle * 10 + (tok[i] - '0');
      if (handle > 64) bad_file("letter index out of range in '" + std::string(tok) + "'");
    }
    const int q = 2 * static_cast<int>(handle - 1) + (c == 'b' || c == 'B' ? 1 : 0);
    out.push_back(static_cast<Letter>(2 * q + (inverse ? 1 : 0)));
  }
  return out;
}

std::string serialize_group(const SurfaceGroup& g) {
  std::string out = "hyporb-group v1\n";
  out += "genus " + std::to_string(g.genus) + "\n";
  out += "volume " + format_double(g.volume) + "\n";
  for (int l = 0; l < g.letter_count(); ++l) {
    const MoebiusMap& m = g.letter(static_cast<Letter>(l));
    out += "letter " + std::to_string(l) + " " + format_double(m.a) + " " +
           format_double(m.b) + " " + format_double(m.c) + " " +
           format_double(m.d) + "\n";
  }
  out += "relator " + word_text(g.relator) + "\n";
  return out;
}

SurfaceGroup import_group(const std::string& text) {
  int genus = 0;
  for (const auto line : split(text, '\n')) {
    if (line.rfind("genus ", 0) == 0) {
      genus = static_cast<int>(parse_long(line.substr(6), "genus"));
      break;
    }
  }
  if (genus == 0) bad_file("group record has no genus line");
  SurfaceGroup g;
  try {
    g = build_octagon_group(genus);
  } catch (const Error& e) {
    bad_file(std::string("group record rejected: ") + e.what());
  }
  if (serialize_group(g) != text)
    bad_file(
        "group record does not match this library's construction at genus " +
        std::to_string(genus) + "; refusing a geometry this build cannot reproduce");
  return g;
}

std::uint64_t group_hash(const SurfaceGroup& g) {
  return fnv1a64(serialize_group(g));
}

std::string orbit_csv(const OrbitBall& ball, int genus, const FileMeta& meta) {
  std::string out = "# hyporb orbit dump\n";
  out += meta_comments(meta);
  out += "# genus: " + std::to_string(genus) + "\n";
  out += "# base_z: " + format_double(ball.base_z.re) + " " +
         format_double(ball.base_z.im) + "\n";
  out += "# base_w: " + format_double(ball.base_w.re) + " " +
         format_double(ball.base_w.im) + "\n";
  out += "# radius: " + format_double(ball.radius) + "\n";
  out += "# margin: " + format_double(ball.stopping_margin) + "\n";
  out += "# covolume: " + format_double(ball.covolume) + "\n";
  out += "word,word_length,distance,cosh_distance,abelianization\n";
  for (const OrbitRecord& rec : ball.records) {
    out += word_text(rec.element.word);
    out += ',' + std::to_string(rec.element.word.size());
    out += ',' + format_double(rec.distance);
    out += ',' + format_double(rec.cosh_distance);
    out += ',';
    const auto& ab = rec.element.abelianization;
    for (size_t i = 0; i < ab.size(); ++i) {
      if (i) out += ';';
      out += std::to_string(ab[i]);
    }
    out += '\n';
  }
  return out;
}

OrbitBall parse_orbit_csv(const std::string& text) {
  auto lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  const auto headers = comment_headers(lines);

  const int genus =
      static_cast<int>(parse_long(require_header(headers, "genus"), "genus"));
  if (genus < 2) bad_file("genus header must be at least 2");
  OrbitBall ball;
  ball.base_z = parse_point(require_header(headers, "base_z"), "base_z");
  ball.base_w = parse_point(require_header(headers, "base_w"), "base_w");
  ball.radius = parse_double(require_header(headers, "radius"), "radius");
  ball.stopping_margin = parse_double(require_header(headers, "margin"), "margin");
  ball.covolume = parse_double(require_header(headers, "covolume"), "covolume");

  static constexpr std::string_view columns =
      "word,word_length,distance,cosh_distance,abelianization";
  size_t row = 0;
  bool saw_columns = false;
  for (const auto line : lines) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    if (!saw_columns) {
      if (line != columns)
        bad_file("unexpected column header '" + std::string(line) + "'");
      saw_columns = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 5)
      bad_file("row " + std::to_string(row) + " must have 5 fields");
    OrbitRecord rec;
    rec.element.word = parse_word_text(std::string(fields[0]));
    if (parse_long(fields[1], "word_length") !=
        static_cast<long>(rec.element.word.size()))
      bad_file("row " + std::to_string(row) + ": word_length disagrees with word");
    rec.distance = parse_double(fields[2], "distance");
    rec.cosh_distance = parse_double(fields[3], "cosh_distance");
    for (const auto part : fields[4].empty()
                               ? std::vector<std::string_view>{}
                               : split(fields[4], ';'))
      rec.element.abelianization.push_back(
          static_cast<int>(parse_long(part, "abelianization")));
    if (rec.element.abelianization.size() != 2 * static_cast<size_t>(genus))
      bad_file("row " + std::to_string(row) + ": abelianization length is not 2*genus");
    if (rec.element.abelianization != abelianize(genus, rec.element.word))
      bad_file("row " + std::to_string(row) + ": abelianization disagrees with word");
    ball.records.push_back(std::move(rec));
  }
  if (!saw_columns) bad_file("orbit dump has no column header");

  for (size_t i = 1; i < ball.records.size(); ++i) {
    const OrbitRecord& prev = ball.records[i - 1];
    const OrbitRecord& cur = ball.records[i];
    const bool ordered =
        prev.distance < cur.distance ||
        (prev.distance == cur.distance &&
         shortlex_less(prev.element.word, cur.element.word));
    if (!ordered)
      bad_file("rows are not sorted by (distance, word) near row " +
               std::to_string(i + 1));
  }
  return ball;
}

std::string moment_reports_json(const std::vector<MomentReport>& reports,
                                const FileMeta& meta) {
  std::string out = "{\n  \"meta\": " + meta_json(meta, "  ") + ",\n";
  out += "  \"reports\": [";
  for (size_t i = 0; i < reports.size(); ++i) {
    const MomentReport& r = reports[i];
    out += i ? ",\n    {" : "\n    {";
    out += "\n      \"x\": " + json_number(r.x) + ",";
    out += "\n      \"count\": " + std::to_string(r.count) + ",";
    out += std::string("\n      \"z_equals_w\": ") +
           (r.z_equals_w ? "true" : "false") + ",";
    out += "\n      \"huber_ratio\": " + json_number(r.huber_ratio) + ",";
    out += "\n      \"raw_sums\": " + json_array(r.raw_sums) + ",";
    out += "\n      \"studentized\": " + json_array(r.studentized) + ",";
    out += "\n      \"ks\": " + json_number(r.ks_distance) + ",";
    out += "\n      \"norm_sq_estimate\": " + json_number(r.norm_sq_estimate) + ",";
    out += "\n      \"paper_moments\": " + json_array(r.paper_moments);
    out += "\n    }";
  }
  out += "\n  ]\n}\n";
  return out;
}

std::string moment_reports_csv(const std::vector<MomentReport>& reports,
                               const FileMeta& meta) {
  size_t sums = 0;
  size_t papers = 0;
  for (size_t i = 0; i < reports.size(); ++i) {
    if (i == 0) {
      sums = reports[i].raw_sums.size();
      papers = reports[i].paper_moments.size();
    } else if (reports[i].raw_sums.size() != sums ||
               reports[i].studentized.size() != sums ||
               reports[i].paper_moments.size() != papers) {
      bad_file("moment reports disagree on moment orders; one file needs one schema");
    }
  }
  std::string out = "# hyporb moment reports\n";
  out += meta_comments(meta);
  out += "x,count,z_equals_w,huber_ratio,ks,norm_sq_estimate";
  for (size_t n = 0; n < sums; ++n) out += ",raw_sums_" + std::to_string(n);
  for (size_t n = 0; n < sums; ++n) out += ",studentized_" + std::to_string(n);
  for (size_t n = 0; n < papers; ++n) out += ",paper_moments_" + std::to_string(n);
  out += '\n';
  for (const MomentReport& r : reports) {
    out += format_double(r.x);
    out += ',' + std::to_string(r.count);
    out += r.z_equals_w ? ",1" : ",0";
    out += ',' + format_double(r.huber_ratio);
    out += ',' + format_double(r.ks_distance);
    out += ',' + format_double(r.norm_sq_estimate);
    for (double v : r.raw_sums) out += ',' + format_double(v);
    for (double v : r.studentized) out += ',' + format_double(v);
    for (double v : r.paper_moments) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

std::string series_csv(const std::vector<SeriesValue>& values,
                       const std::vector<bool>& agreement,
                       const FileMeta& meta) {
  if (!agreement.empty() && agreement.size() != values.size())
    throw Error(Status::invalid_argument,
                "series_csv: agreement flags must match values one to one");
  std::string out = "# hyporb series scan\n";
  out += meta_comments(meta);
  out += "n,re_s,im_s,epsilon,truncation_radius,re_value,im_value,tail_bound";
  if (!agreement.empty()) out += ",agreement";
  out += '\n';
  for (size_t i = 0; i < values.size(); ++i) {
    const SeriesValue& v = values[i];
    out += std::to_string(v.n);
    out += ',' + format_double(v.s.real());
    out += ',' + format_double(v.s.imag());
    out += ',' + format_double(v.epsilon);
    out += ',' + format_double(v.truncation_radius);
    out += ',' + format_double(v.value.real());
    out += ',' + format_double(v.value.imag());
    out += ',' + format_double(v.tail_bound);
    if (!agreement.empty()) out += agreement[i] ? ",1" : ",0";
    out += '\n';
  }
  return out;
}

std::string probes_json(const std::vector<ResidueProbe>& probes,
                        const std::vector<double>& tolerances,
                        const FileMeta& meta) {
  if (!tolerances.empty() && tolerances.size() != probes.size())
    throw Error(Status::invalid_argument,
                "probes_json: tolerances must match probes one to one");
  std::string out = "{\n  \"meta\": " + meta_json(meta, "  ") + ",\n";
  out += "  \"probes\": [";
  for (size_t i = 0; i < probes.size(); ++i) {
    const ResidueProbe& p = probes[i];
    out += i ? ",\n    {" : "\n    {";
    out += "\n      \"n\": " + std::to_string(p.n) + ",";
    out += "\n      \"pole_order_tested\": " + std::to_string(p.pole_order_tested) + ",";
    out += "\n      \"leading_coefficient_estimate\": " +
           json_number(p.leading_coefficient_estimate) + ",";
    out += "\n      \"target\": " + json_number(p.target) + ",";
    out += "\n      \"relative_error\": " + json_number(p.relative_error) + ",";
    out += "\n      \"per_radius_estimates\": " + json_array(p.per_radius_estimates);
    if (!tolerances.empty()) {
      out += ",\n      \"tolerance\": " + json_number(tolerances[i]);
      out += std::string(",\n      \"passed\": ") +
             (p.relative_error <= tolerances[i] ? "true" : "false");
    }
    out += "\n    }";
  }
  out += "\n  ]\n}\n";
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_file("cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) bad_file("read failed on '" + path + "'");
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) bad_file("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out.good()) bad_file("write failed on '" + path + "'");
}

}  // namespace hyporb
