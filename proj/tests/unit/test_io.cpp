#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "hyporb/io.hpp"

using namespace hyporb;

namespace {

const SurfaceGroup& genus2() {
  static const SurfaceGroup g = build_octagon_group(2);
  return g;
}

const OrbitBall& ball6() {
  static const OrbitBall b =
      enumerate_ball(genus2(), Point(0.0, 1.0), Point(0.0, 1.0), 6.0);
  return b;
}

const OrbitBall& ball8() {
  static const OrbitBall b =
      enumerate_ball(genus2(), Point(0.0, 1.0), Point(0.0, 1.0), 8.0);
  return b;
}

RunConfig small_config() {
  RunConfig c;
  c.periods = {1.0, 0.0, 0.0, 0.0};
  c.radii = {5.0, 6.0};
  return c;
}

FileMeta some_meta() {
  return FileMeta{fnv1a64("config"), fnv1a64("group"), {}};
}

double reparse(const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  REQUIRE(end == text.c_str() + text.size());
  return v;
}

}  // namespace

TEST_CASE("format_double: text round-trips every bit") {
  for (double v : {std::numbers::pi, 1.0 / 3.0, 1e-300, 6.0, -0.0,
                   12345678901234567.0, 5.9604644775390625e-08}) {
    const double back = reparse(format_double(v));
    CHECK(back == v);
    CHECK(std::signbit(back) == std::signbit(v));
  }
}

TEST_CASE("fnv1a64: reference values and hex form") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(hash_hex(0xcbf29ce484222325ULL) == "cbf29ce484222325");
  CHECK(hash_hex(0x1ULL) == "0000000000000001");
}

TEST_CASE("word text: names, round trip, and rejections") {
  CHECK(word_text({}) == "e");
  const char* names[] = {"a1", "A1", "b1", "B1", "a2", "A2", "b2", "B2"};
  for (Letter l = 0; l < 8; ++l) {
    CHECK(letter_text(l) == names[l]);
    CHECK(parse_word_text(names[l]) == Word{l});
  }
  const Word w = {0, 3, 4, 7, 2};
  CHECK(word_text(w) == "a1.B1.a2.B2.b1");
  CHECK(parse_word_text(word_text(w)) == w);
  CHECK(parse_word_text("e").empty());

  for (const char* bad : {"", "a", "a0", "c1", "a1..b1", "a1.", "x3", "a01",
                          "a1,b1", "E", "a65"}) {
    CHECK_THROWS_AS(parse_word_text(bad), Error);
  }
}

TEST_CASE("config: validation catches each broken invariant") {
  CHECK_NOTHROW(validate_config(small_config()));
  auto broken = [](auto&& tweak) {
    RunConfig c;
    c.periods = {1.0, 0.0, 0.0, 0.0};
    c.radii = {5.0, 6.0};
    tweak(c);
    CHECK_THROWS_AS(validate_config(c), Error);
  };
  broken([](RunConfig& c) { c.genus = 1; });
  broken([](RunConfig& c) { c.z.im = 0.0; });
  broken([](RunConfig& c) { c.w.re = std::nan(""); });
  broken([](RunConfig& c) { c.periods = {1.0, 0.0}; });
  broken([](RunConfig& c) { c.periods[2] = std::nan(""); });
  broken([](RunConfig& c) { c.norm_sq = 0.0; });
  broken([](RunConfig& c) { c.sup_norm = -2.0; });
  broken([](RunConfig& c) { c.radii = {}; });
  broken([](RunConfig& c) { c.radii = {6.0, 6.0}; });
  broken([](RunConfig& c) { c.radii = {6.0, 5.0}; });
  broken([](RunConfig& c) { c.radii = {-1.0, 5.0}; });
  broken([](RunConfig& c) { c.n_max = 1; });
  broken([](RunConfig& c) { c.margin_factor = 0.5; });
  broken([](RunConfig& c) { c.element_cap = 0; });
  broken([](RunConfig& c) { c.workers = 0; });
  broken([](RunConfig& c) { c.output_dir = ""; });
  broken([](RunConfig& c) { c.csv = c.json = false; });
}

TEST_CASE("config: canonical JSON round trip preserves every field") {
  RunConfig c = small_config();
  c.norm_sq = 0.8;
  c.z = Point(0.25, 2.0);
  c.n_max = 4;
  c.margin_factor = 1.5;
  c.element_cap = 1000;
  c.workers = 8;
  c.output_dir = "out/run1";
  c.json = false;

  const RunConfig back = parse_config_json(config_json(c));
  CHECK(back.genus == c.genus);
  CHECK(back.z.re == c.z.re);
  CHECK(back.z.im == c.z.im);
  CHECK(back.w.re == c.w.re);
  CHECK(back.periods == c.periods);
  REQUIRE(back.norm_sq.has_value());
  CHECK(*back.norm_sq == 0.8);
  CHECK_FALSE(back.sup_norm.has_value());
  CHECK(back.radii == c.radii);
  CHECK(back.n_max == 4);
  CHECK(back.margin_factor == 1.5);
  CHECK(back.element_cap == 1000);
  CHECK(back.workers == 8);
  CHECK(back.output_dir == "out/run1");
  CHECK(back.csv);
  CHECK_FALSE(back.json);
  CHECK(config_hash(back) == config_hash(c));
}

TEST_CASE("config: partial file keeps defaults, junk is refused") {
  const RunConfig c = parse_config_json(R"({"radii": [6], "periods": [1,0,0,0]})");
  CHECK(c.genus == 2);
  CHECK(c.workers == 1);
  CHECK(c.csv);
  CHECK(c.json);
  CHECK(c.radii == std::vector<double>{6.0});

  CHECK_THROWS_AS(parse_config_json("not json"), Error);
  CHECK_THROWS_AS(parse_config_json("[1,2]"), Error);
  CHECK_THROWS_AS(parse_config_json(R"({"radius": [6]})"), Error);
  CHECK_THROWS_AS(parse_config_json(R"({"radii": [6], "z": [0]})"), Error);
  CHECK_THROWS_AS(parse_config_json(R"({"radii": [6], "z": [0, -1]})"), Error);
  CHECK_THROWS_AS(parse_config_json(R"({"radii": [6], "formats": ["yaml"]})"),
                  Error);
  CHECK_THROWS_AS(parse_config_json(R"({"radii": []})"), Error);
}

TEST_CASE("config hash: semantic fields only") {
  const RunConfig base = small_config();
  const std::uint64_t h = config_hash(base);

  RunConfig c = base;
  c.workers = 8;
  c.output_dir = "elsewhere";
  c.json = false;
  CHECK(config_hash(c) == h);

  c = base;
  c.radii.push_back(7.0);
  CHECK(config_hash(c) != h);
  c = base;
  c.genus = 3;
  c.periods = {1, 0, 0, 0, 0, 0};
  CHECK(config_hash(c) != h);
  c = base;
  c.norm_sq = 0.8;
  CHECK(config_hash(c) != h);
  c = base;
  c.z = Point(0.0, 2.0);
  CHECK(config_hash(c) != h);
  c = base;
  c.element_cap = 999;
  CHECK(config_hash(c) != h);
}

TEST_CASE("group record: round trip, tamper rejection, hash separation") {
  const std::string rec2 = serialize_group(genus2());
  CHECK(rec2.rfind("hyporb-group v1\ngenus 2\n", 0) == 0);
  const SurfaceGroup back = import_group(rec2);
  CHECK(serialize_group(back) == rec2);
  CHECK(back.genus == 2);
  CHECK(group_hash(back) == group_hash(genus2()));

  const SurfaceGroup g3 = build_octagon_group(3);
  CHECK(group_hash(g3) != group_hash(genus2()));
  CHECK(serialize_group(import_group(serialize_group(g3))) == serialize_group(g3));

  std::string tampered = rec2;
  const size_t digit = tampered.find("letter 0");
  REQUIRE(digit != std::string::npos);
  tampered[tampered.find('.', digit) + 1] ^= 1;  // nudge one matrix digit
  CHECK_THROWS_AS(import_group(tampered), Error);
  CHECK_THROWS_AS(import_group("hyporb-group v1\nvolume 3\n"), Error);
}

TEST_CASE("orbit dump: write, parse, and byte-stable rewrite") {
  const std::string text = orbit_csv(ball6(), 2, some_meta());
  CHECK(text.rfind("# hyporb orbit dump\n", 0) == 0);
  CHECK(text.find("# config_hash: " + hash_hex(fnv1a64("config"))) !=
        std::string::npos);
  CHECK(text.find("\nword,word_length,distance,cosh_distance,abelianization\n") !=
        std::string::npos);
  CHECK(text.find("\ne,0,0,1,0;0;0;0\n") != std::string::npos);

  const OrbitBall back = parse_orbit_csv(text);
  REQUIRE(count(back) == count(ball6()));
  CHECK(back.radius == ball6().radius);
  CHECK(back.stopping_margin == ball6().stopping_margin);
  CHECK(back.covolume == ball6().covolume);
  CHECK(back.base_z.re == ball6().base_z.re);
  CHECK(back.base_w.im == ball6().base_w.im);
  for (size_t i = 0; i < back.records.size(); ++i) {
    CHECK(back.records[i].element.word == ball6().records[i].element.word);
    CHECK(back.records[i].element.abelianization ==
          ball6().records[i].element.abelianization);
    CHECK(back.records[i].distance == ball6().records[i].distance);
    CHECK(back.records[i].cosh_distance == ball6().records[i].cosh_distance);
  }
  CHECK(orbit_csv(back, 2, some_meta()) == text);
}

TEST_CASE("orbit dump: parsed ball feeds stats and series identically") {
  const OrbitBall back = parse_orbit_csv(orbit_csv(ball8(), 2, some_meta()));
  PeriodForm f{{1.0, 0.0, 0.0, 0.0}, 0.8, {}};

  const MomentReport a = make_moment_report(ball8(), f, 4, genus2().volume);
  const MomentReport b = make_moment_report(back, f, 4, genus2().volume);
  CHECK(a.raw_sums == b.raw_sums);
  CHECK(a.studentized == b.studentized);
  CHECK(a.huber_ratio == b.huber_ratio);
  CHECK(a.ks_distance == b.ks_distance);
  CHECK(a.paper_moments == b.paper_moments);
  CHECK(a.z_equals_w == b.z_equals_w);

  const SeriesValue sa = evaluate(ball8(), f, 2, {1.5, 0.0}, 0.0);
  const SeriesValue sb = evaluate(back, f, 2, {1.5, 0.0}, 0.0);
  CHECK(sa.value.real() == sb.value.real());
  CHECK(sa.tail_bound == sb.tail_bound);
}

TEST_CASE("orbit dump: corruption is refused") {
  const std::string text = orbit_csv(ball6(), 2, some_meta());

  std::string wrong_len = text;
  wrong_len.replace(wrong_len.find("\ne,0,"), 5, "\ne,1,");
  CHECK_THROWS_AS(parse_orbit_csv(wrong_len), Error);

  std::string wrong_ab = text;
  wrong_ab.replace(wrong_ab.find("0;0;0;0"), 7, "1;0;0;0");
  CHECK_THROWS_AS(parse_orbit_csv(wrong_ab), Error);

  std::string no_margin = text;
  const size_t m = no_margin.find("# margin:");
  no_margin.erase(m, no_margin.find('\n', m) - m + 1);
  CHECK_THROWS_AS(parse_orbit_csv(no_margin), Error);

  std::string no_columns = text;
  const size_t c = no_columns.find("word,word_length");
  no_columns.erase(c, no_columns.find('\n', c) - c + 1);
  CHECK_THROWS_AS(parse_orbit_csv(no_columns), Error);

  // swap the identity row past its successor: breaks the distance order
  const size_t pe = text.find("\ne,0,");
  REQUIRE(pe != std::string::npos);
  const size_t nl1 = text.find('\n', pe + 1);
  const size_t nl2 = text.find('\n', nl1 + 1);
  const std::string row1 = text.substr(pe + 1, nl1 - (pe + 1));
  const std::string row2 = text.substr(nl1 + 1, nl2 - (nl1 + 1));
  const std::string swapped =
      text.substr(0, pe + 1) + row2 + "\n" + row1 + "\n" + text.substr(nl2 + 1);
  CHECK_THROWS_AS(parse_orbit_csv(swapped), Error);
}

TEST_CASE("moment reports: JSON is well formed, CSV is rectangular") {
  PeriodForm f{{1.0, 0.0, 0.0, 0.0}, 0.8, {}};
  const OrbitBall b7 =
      enumerate_ball(genus2(), Point(0.0, 1.0), Point(0.0, 1.0), 7.0);
  std::vector<MomentReport> reports = {
      make_moment_report(b7, f, 4, genus2().volume),
      make_moment_report(ball8(), f, 4, genus2().volume)};

  const std::string text = moment_reports_json(reports, some_meta());
  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j.at("meta").at("version") == std::string(library_version));
  CHECK(j.at("meta").at("group_hash") == hash_hex(fnv1a64("group")));
  REQUIRE(j.at("reports").size() == 2);
  CHECK(j.at("reports")[1].at("x") == 8.0);
  CHECK(j.at("reports")[1].at("count") == count(ball8()));
  CHECK(j.at("reports")[0].at("norm_sq_estimate").is_null());
  CHECK(j.at("reports")[0].at("studentized")[2] == 1.0);
  CHECK(j.at("reports")[0].at("z_equals_w") == true);
  CHECK(j.at("reports")[0].at("raw_sums").size() == 5);
  CHECK(j.at("reports")[0].at("paper_moments").size() == 5);

  const std::string csv = moment_reports_csv(reports, some_meta());
  CHECK(csv.find("x,count,z_equals_w,huber_ratio,ks,norm_sq_estimate,"
                 "raw_sums_0") != std::string::npos);
  CHECK(csv.find(",studentized_4") != std::string::npos);
  CHECK(csv.find(",paper_moments_4") != std::string::npos);

  std::vector<MomentReport> mixed = reports;
  mixed[1].paper_moments.clear();
  CHECK_THROWS_AS(moment_reports_csv(mixed, some_meta()), Error);
}

TEST_CASE("series rows: schema, agreement column, bit round trip") {
  PeriodForm f{{1.0, 0.0, 0.0, 0.0}, {}, {}};
  std::vector<SeriesValue> values = {
      evaluate(ball6(), f, 0, {1.5, 0.0}, 0.0),
      evaluate(ball6(), f, 2, {1.3, 0.7}, 0.25)};

  const std::string bare = series_csv(values, {}, some_meta());
  CHECK(bare.find("\nn,re_s,im_s,epsilon,truncation_radius,re_value,im_value,"
                  "tail_bound\n") != std::string::npos);

  const std::string flagged = series_csv(values, {true, false}, some_meta());
  CHECK(flagged.find(",tail_bound,agreement\n") != std::string::npos);

  // last row, re_value column, back to the exact double
  const size_t tail = flagged.rfind("\n2,");
  const auto fields = [&] {
    std::vector<std::string> out;
    std::string row = flagged.substr(tail + 1);
    row.pop_back();
    size_t start = 0;
    for (size_t pos; (pos = row.find(',', start)) != std::string::npos;
         start = pos + 1)
      out.push_back(row.substr(start, pos - start));
    out.push_back(row.substr(start));
    return out;
  }();
  REQUIRE(fields.size() == 9);
  CHECK(reparse(fields[5]) == values[1].value.real());
  CHECK(reparse(fields[6]) == values[1].value.imag());
  CHECK(fields[8] == "0");

  CHECK_THROWS_AS(series_csv(values, {true}, some_meta()), Error);
}

TEST_CASE("probe report: JSON carries pass flags when tolerances given") {
  const double vol = 4.0 * std::numbers::pi;
  std::vector<OrbitBall> balls;
  for (double x : {11.0, 12.0, 13.0}) balls.push_back(model_counting_ball(x, vol));
  const std::vector<ResidueProbe> probes = {huber_residue_probe(balls, vol)};

  const std::string bare = probes_json(probes, {}, some_meta());
  const nlohmann::json jb = nlohmann::json::parse(bare);
  CHECK(jb.at("probes")[0].at("n") == 0);
  CHECK_FALSE(jb.at("probes")[0].contains("passed"));

  const std::string judged = probes_json(probes, {0.05}, some_meta());
  const nlohmann::json jj = nlohmann::json::parse(judged);
  CHECK(jj.at("probes")[0].at("passed") == true);
  CHECK(jj.at("probes")[0].at("tolerance") == 0.05);
  CHECK(jj.at("probes")[0].at("per_radius_estimates").size() == 3);

  CHECK_THROWS_AS(probes_json(probes, {0.05, 0.1}, some_meta()), Error);
}

TEST_CASE("file io: byte round trip and loud failures") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "hyporb_io_test";
  fs::create_directories(dir);
  const std::string path = (dir / "blob.txt").string();
  const std::string content = "line one\nline two\n\x01 binary-ish \xff\n";
  write_file(path, content);
  CHECK(read_file(path) == content);
  fs::remove_all(dir);

  CHECK_THROWS_AS(read_file((dir / "missing.txt").string()), Error);
  CHECK_THROWS_AS(write_file((dir / "missing" / "f.txt").string(), "x"), Error);
}

TEST_CASE("meta extras surface in both header styles") {
  FileMeta meta = some_meta();
  meta.extra = {{"note", "hello"}, {"seed", "42"}};
  const std::string csv = orbit_csv(ball6(), 2, meta);
  CHECK(csv.find("# note: hello\n") != std::string::npos);
  CHECK(csv.find("# seed: 42\n") != std::string::npos);
  const std::string json = moment_reports_json({}, meta);
  const nlohmann::json j = nlohmann::json::parse(json);
  CHECK(j.at("meta").at("note") == "hello");
}
