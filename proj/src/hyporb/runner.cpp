#include "hyporb/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hyporb/rng.hpp"
#include "hyporb/stats.hpp"

namespace hyporb {

namespace {

void say(const LogFn& log, const std::string& line) {
  if (log) log(line);
}

std::string num(double v, int prec = 6) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

PeriodForm form_from_config(const RunConfig& config) {
  PeriodForm f;
  if (config.periods.empty()) {
    f.periods.assign(static_cast<size_t>(2 * config.genus), 0.0);
    f.periods[0] = 1.0;
  } else {
    f.periods = config.periods;
  }
  f.norm_sq = config.norm_sq;
  f.sup_norm = config.sup_norm;
  return f;
}

EnumerateOptions options_from_config(const RunConfig& config,
                                     const SurfaceGroup& g) {
  EnumerateOptions opt;
  opt.element_cap = config.element_cap;
  opt.workers = config.workers;
  if (config.margin_factor != 1.0)
    opt.margin = config.margin_factor * default_margin(g, config.z);
  return opt;
}

std::string out_path(const RunConfig& config, const std::string& name) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(config.output_dir, ec);
  if (ec)
    throw Error(Status::io_error,
                "cannot create output directory " + config.output_dir);
  return (fs::path(config.output_dir) / name).string();
}

void emit(RunOutput& out, const std::string& path, const LogFn& log) {
  out.files.push_back(path);
  say(log, "wrote " + path);
}

FileMeta meta_for(const RunConfig& config, const SurfaceGroup& g) {
  FileMeta meta;
  meta.config_hash = config_hash(config);
  meta.group_hash = group_hash(g);
  return meta;
}

OrbitBall enumerate_max(const RunConfig& config, const SurfaceGroup& g,
                        const LogFn& log) {
  const double x = config.radii.back();
  say(log, "enumerating the orbit ball at x = " + num(x) + " (workers " +
               std::to_string(std::max(1, config.workers)) + ")");
  const OrbitBall ball =
      enumerate_ball(g, config.z, config.w, x, options_from_config(config, g));
  long generated = 0;
  for (const ShellStat& st : ball.shell_stats) generated += st.generated;
  say(log, "examined " + std::to_string(generated) + " canonical words over " +
               std::to_string(ball.shell_stats.size()) +
               " shells; the stopping shell clears the bound at distance " +
               num(ball.shell_stats.back().min_distance));
  return ball;
}

}  // namespace

RunOutput run_enumerate(const RunConfig& config, const LogFn& log) {
  validate_config(config);
  const SurfaceGroup g = build_octagon_group(config.genus);
  const FileMeta meta = meta_for(config, g);
  const OrbitBall ball = enumerate_max(config, g, log);

  RunOutput out;
  for (double x : config.radii) {
    const OrbitBall view = restrict_ball(ball, x);
    say(log, "x = " + num(x) + ": " + std::to_string(count(view)) +
                 " orbit points");
    if (!config.csv) continue;
    const std::string path =
        out_path(config, "orbit_x" + format_double(x) + ".csv");
    write_file(path, orbit_csv(view, config.genus, meta));
    emit(out, path, log);
  }
  if (!config.csv) say(log, "csv disabled, no dumps written");
  return out;
}

RunOutput run_report(const RunConfig& config, const LogFn& log) {
  validate_config(config);
  const SurfaceGroup g = build_octagon_group(config.genus);
  const PeriodForm f = form_from_config(config);
  validate_form(f, config.genus);  // fail before the enumeration, not after
  const FileMeta meta = meta_for(config, g);
  const OrbitBall ball = enumerate_max(config, g, log);

  std::vector<MomentReport> reports;
  for (double x : config.radii)
    reports.push_back(
        make_moment_report(restrict_ball(ball, x), f, config.n_max, g.volume));
  if (reports.size() >= 2) {
    try {
      const double fit = estimate_norm_sq(reports, g.volume);
      for (MomentReport& r : reports) r.norm_sq_estimate = fit;
      say(log, "cross-radius norm_sq fit: " + num(fit));
    } catch (const Error& e) {
      say(log, std::string("norm_sq fit unavailable: ") + e.what());
    }
  }
  for (const MomentReport& r : reports)
    say(log, "x = " + num(r.x) + ": N = " + std::to_string(r.count) +
                 ", huber " + num(r.huber_ratio) + ", ks " +
                 num(r.ks_distance) +
                 (r.studentized.size() > 4
                      ? ", stud4 " + num(r.studentized[4])
                      : std::string()));

  RunOutput out;
  if (config.json) {
    const std::string path = out_path(config, "moments.json");
    write_file(path, moment_reports_json(reports, meta));
    emit(out, path, log);
  }
  if (config.csv) {
    const std::string path = out_path(config, "moments.csv");
    write_file(path, moment_reports_csv(reports, meta));
    emit(out, path, log);
  }
  return out;
}

RunOutput run_dirichlet(const RunConfig& config,
                        const std::vector<std::complex<double>>& s_grid,
                        const std::vector<int>& n_list, const LogFn& log) {
  validate_config(config);
  if (config.radii.size() < 3)
    throw Error(Status::invalid_argument,
                "residue probes need at least three radii");
  const std::vector<std::complex<double>> ss =
      s_grid.empty() ? std::vector<std::complex<double>>{1.2, 1.5, 2.0}
                     : s_grid;
  const std::vector<int> ns = n_list.empty() ? std::vector<int>{0, 2, 4}
                                             : n_list;
  const SurfaceGroup g = build_octagon_group(config.genus);
  const PeriodForm f = form_from_config(config);
  validate_form(f, config.genus);
  const FileMeta meta = meta_for(config, g);
  const OrbitBall ball = enumerate_max(config, g, log);
  std::vector<OrbitBall> views;
  for (double x : config.radii) views.push_back(restrict_ball(ball, x));

  std::vector<SeriesValue> rows;
  std::vector<bool> agree;
  bool all_agree = true;
  for (const OrbitBall& view : views)
    for (int n : ns)
      for (std::complex<double> s : ss) {
        const SeriesValue a = evaluate(view, f, n, s, 0.0);
        const SeriesValue b = evaluate_stieltjes(view, f, n, s, 0.0);
        const bool ok = std::abs(a.value - b.value) <=
                        1e-9 * std::max(std::abs(a.value), std::abs(b.value));
        rows.push_back(a);
        agree.push_back(ok);
        all_agree = all_agree && ok;
      }
  say(log, "series scan: " + std::to_string(rows.size()) +
               " rows, two-algorithm agreement " +
               (all_agree ? "clean" : "BROKEN"));

  std::vector<ResidueProbe> probes;
  std::vector<double> tolerances;
  probes.push_back(huber_residue_probe(views, g.volume));
  tolerances.push_back(huber_probe_tolerance);

  PeriodForm fe = f;
  std::string skip_reason;
  if (!fe.norm_sq) {
    try {
      std::vector<MomentReport> reports;
      for (const OrbitBall& view : views)
        reports.push_back(
            make_moment_report(view, f, config.n_max, g.volume));
      fe.norm_sq = estimate_norm_sq(reports, g.volume);
      say(log, "norm_sq estimated from the radius scan: " + num(*fe.norm_sq));
    } catch (const Error& e) {
      skip_reason = e.what();
    }
  }
  if (fe.norm_sq) {
    probes.push_back(even_leading_coefficient_probe(views, fe, g.volume, 1));
    tolerances.push_back(even_probe_tolerance);
  } else {
    say(log, "even-moment probe skipped: " + skip_reason);
  }
  for (size_t i = 0; i < probes.size(); ++i)
    say(log, "probe n = " + std::to_string(probes[i].n) + ": estimate " +
                 num(probes[i].leading_coefficient_estimate) + ", target " +
                 num(probes[i].target) + ", relative error " +
                 num(probes[i].relative_error) +
                 (probes[i].relative_error <= tolerances[i] ? " (within "
                                                            : " (OUTSIDE ") +
                 num(tolerances[i]) + ")");

  RunOutput out;
  out.probes_passed = all_agree;
  for (size_t i = 0; i < probes.size(); ++i)
    out.probes_passed =
        out.probes_passed && probes[i].relative_error <= tolerances[i];
  if (config.csv) {
    const std::string path = out_path(config, "series.csv");
    write_file(path, series_csv(rows, agree, meta));
    emit(out, path, log);
  }
  if (config.json) {
    const std::string path = out_path(config, "probes.json");
    write_file(path, probes_json(probes, tolerances, meta));
    emit(out, path, log);
  }
  return out;
}

RunOutput run_export_group(const RunConfig& config, const LogFn& log) {
  if (config.genus < 2)
    throw Error(Status::invalid_argument, "genus must be at least 2");
  const SurfaceGroup g = build_octagon_group(config.genus);
  const std::string path = out_path(config, "group.txt");
  write_file(path, serialize_group(g));
  say(log, "genus " + std::to_string(config.genus) + " group, hash " +
               hash_hex(group_hash(g)));
  RunOutput out;
  emit(out, path, log);
  return out;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// distance of a canonicalized map to +-identity in the max norm
double identity_defect(const MoebiusMap& m) {
  const auto dev = [&](double sign) {
    return std::max({std::abs(m.a - sign), std::abs(m.b), std::abs(m.c),
                     std::abs(m.d - sign)});
  };
  return std::min(dev(1.0), dev(-1.0));
}

}  // namespace

std::vector<CheckResult> run_acceptance(int workers, const LogFn& log) {
  std::vector<CheckResult> results;
  const auto add = [&](const std::string& name, bool passed,
                       const std::string& detail) {
    say(log, std::string(passed ? "PASS " : "FAIL ") + name + ": " + detail);
    results.push_back({name, passed, detail});
  };
  const Point base(0.0, 1.0);
  EnumerateOptions serial;
  serial.workers = 1;

  // group construction: relator closes up, generators hyperbolic, fast
  const auto t_group = std::chrono::steady_clock::now();
  const SurfaceGroup g = build_octagon_group(2);
  const double group_secs = seconds_since(t_group);
  const double relator_defect = identity_defect(matrix_of_word(g, g.relator));
  double min_trace = std::abs(g.generators[0].a + g.generators[0].d);
  for (const MoebiusMap& m : g.generators)
    min_trace = std::min(min_trace, std::abs(m.a + m.d));
  add("group validity",
      relator_defect <= 1e-8 && min_trace > 2.0 && group_secs < 1.0,
      "relator defect " + num(relator_defect, 3) + ", min |trace| " +
          num(min_trace) + ", built in " + num(group_secs, 3) + " s");

  // enumeration against an exhaustive scan of canonical words
  {
    const auto t0 = std::chrono::steady_clock::now();
    const OrbitBall b6 = enumerate_ball(g, base, base, 6.0, serial);
    int maxlen = 0;
    std::set<Word> expect;
    for (const OrbitRecord& rec : b6.records) {
      maxlen = std::max(maxlen, static_cast<int>(rec.element.word.size()));
      expect.insert(rec.element.word);
    }
    const int depth = maxlen + 4;
    std::set<Word> got;
    long visited = 0;
    // path[len] caches the same left fold matrix_of_word performs, so the
    // distances below are bit for bit the enumerator's
    std::vector<MoebiusMap> path(static_cast<size_t>(depth) + 1);
    for_each_canonical_word(g, depth, [&](const Letter* buf, int len) {
      ++visited;
      if (len > 0)
        path[len] = compose(path[len - 1], g.letter(buf[len - 1]));
      const double ch = cosh_dist(apply(path[len], base), base);
      if (std::acosh(std::max(1.0, ch)) <= 6.0)
        got.insert(Word(buf, buf + len));
    });
    const double secs = seconds_since(t0);
    add("exhaustive cross-check",
        got == expect && secs < 60.0,
        std::to_string(expect.size()) + " words at x = 6, scan of " +
            std::to_string(visited) + " candidates to length " +
            std::to_string(depth) + " agrees, " + num(secs, 3) + " s");
  }

  // worker count must not leak into the output bytes
  {
    EnumerateOptions eight;
    eight.workers = 8;
    const OrbitBall one = enumerate_ball(g, base, base, 10.0, serial);
    const OrbitBall many = enumerate_ball(g, base, base, 10.0, eight);
    const FileMeta meta;
    add("worker determinism",
        orbit_csv(one, 2, meta) == orbit_csv(many, 2, meta),
        "x = 10 dumps for workers 1 and 8 are byte-identical");
  }

  say(log, "enumerating the x = 13 ball, the long step; expect minutes");
  EnumerateOptions heavy;
  heavy.workers = std::max(1, workers);
  const auto t_big = std::chrono::steady_clock::now();
  const OrbitBall ball13 = enumerate_ball(g, base, base, 13.0, heavy);
  say(log, "x = 13 ball holds " + std::to_string(count(ball13)) +
               " orbit points (" + num(seconds_since(t_big), 3) + " s)");
  const OrbitBall v8 = restrict_ball(ball13, 8.0);
  const OrbitBall v10 = restrict_ball(ball13, 10.0);
  const OrbitBall v11 = restrict_ball(ball13, 11.0);
  const OrbitBall v12 = restrict_ball(ball13, 12.0);
  const double vol = g.volume;

  // counting law: the Huber ratio near 1 and closer at the larger radius
  {
    const double r8 = huber_ratio(v8, vol);
    const double r12 = huber_ratio(v12, vol);
    add("counting law",
        r12 >= 0.7 && r12 <= 1.3 &&
            std::abs(r12 - 1.0) <= std::abs(r8 - 1.0),
        "N vol / (pi e^x) is " + num(r8) + " at x = 8 and " + num(r12) +
            " at x = 12");
  }

  // exact base point symmetry on random pairs near the ball center
  {
    SplitMix64 rng(20260815);
    bool ok = true;
    std::string detail;
    for (int k = 0; k < 3; ++k) {
      const Point z(rng.uniform(-0.12, 0.12), rng.uniform(0.88, 1.12));
      const Point w(rng.uniform(-0.12, 0.12), rng.uniform(0.88, 1.12));
      const long nzw = count(enumerate_ball(g, z, w, 8.0, serial));
      const long nwz = count(enumerate_ball(g, w, z, 8.0, serial));
      ok = ok && nzw == nwz;
      if (!detail.empty()) detail += ", ";
      detail += std::to_string(nzw) +
                (nzw == nwz ? " = " : " != ") + std::to_string(nwz);
    }
    add("base point symmetry", ok, "N(z,w,8) vs N(w,z,8): " + detail);
  }

  PeriodForm e1;
  e1.periods = {1.0, 0.0, 0.0, 0.0};

  // linear growth bound for the symbols, e_1 and a dense random form
  {
    SplitMix64 rng(7);
    PeriodForm dense;
    for (int k = 0; k < 4; ++k)
      dense.periods.push_back((k % 2 ? -1.0 : 1.0) * rng.uniform(0.3, 1.7));
    bool ok = true;
    std::string detail;
    for (const PeriodForm* f : {&e1, &dense}) {
      const double early = eichler_ratio(v8, *f);
      const double late = eichler_ratio(v12, *f);
      ok = ok && late <= 1.5 * early;
      if (!detail.empty()) detail += "; ";
      detail += num(early) + " -> " + num(late);
    }
    add("symbol growth bound", ok,
        "max |symbol|/(1+r) from x = 8 to x = 12: " + detail);
  }

  // first moment cancels to rounding against the absolute symbol mass
  {
    bool ok = true;
    double worst = 0.0;
    for (const OrbitBall* v : {&v8, &v10, &v11, &v12, &ball13}) {
      const std::vector<double> sums = raw_moment_sums(*v, e1, 2);
      double mass = 0.0;
      for (const OrbitRecord& rec : v->records)
        mass += std::abs(symbol(rec.element, e1));
      worst = std::max(worst, std::abs(sums[1]) / mass);
      ok = ok && std::abs(sums[1]) <= 1e-9 * mass;
    }
    add("first moment cancellation", ok,
        "|S_1| / sum |symbol| at most " + num(worst, 3) +
            " across x = 8..13");
  }

  const MomentReport rep10 = make_moment_report(v10, e1, 6, vol);
  const MomentReport rep11 = make_moment_report(v11, e1, 6, vol);
  const MomentReport rep12 = make_moment_report(v12, e1, 6, vol);
  const MomentReport rep13 = make_moment_report(ball13, e1, 6, vol);
  double fit_late = 0.0;

  // second moment grows like N x, stable norm_sq fit across radius triples
  {
    std::vector<double> vals;
    for (const MomentReport* r : {&rep10, &rep11, &rep12})
      vals.push_back(r->raw_sums[2] /
                     (static_cast<double>(r->count) * r->x));
    const double lo = *std::min_element(vals.begin(), vals.end());
    const double hi = *std::max_element(vals.begin(), vals.end());
    const double spread = (hi - lo) / ((lo + hi) / 2.0);
    const double fit_early = estimate_norm_sq({rep10, rep11, rep12}, vol);
    fit_late = estimate_norm_sq({rep11, rep12, rep13}, vol);
    const double drift = std::abs(fit_early - fit_late) /
                         ((fit_early + fit_late) / 2.0);
    add("second moment growth",
        spread <= 0.20 && drift <= 0.25,
        "S_2/(N x) spread " + num(spread, 3) + " over x = 10..12, norm_sq " +
            num(fit_early) + " vs " + num(fit_late) + " (drift " +
            num(drift, 3) + ")");
  }

  // studentized moments near Gaussian values, KS small and not degrading
  {
    const std::vector<double>& st = rep13.studentized;
    const bool moments_ok = st[4] >= 2.2 && st[4] <= 3.8 &&
                            std::abs(st[3]) <= 0.5 && std::abs(st[5]) <= 2.5;
    const bool ks_ok = rep11.ks_distance <= 0.08 &&
                       rep12.ks_distance <= rep11.ks_distance + 0.01 &&
                       rep13.ks_distance <= rep12.ks_distance + 0.01 &&
                       rep13.ks_distance <= 0.08;
    add("gaussian limit", moments_ok && ks_ok,
        "stud 3/4/5 = " + num(st[3], 3) + "/" + num(st[4]) + "/" +
            num(st[5], 3) + ", ks 11/12/13 = " + num(rep11.ks_distance, 3) +
            "/" + num(rep12.ks_distance, 3) + "/" +
            num(rep13.ks_distance, 3));
  }

  // pole of the counting series: planted truth, then the real orbit
  {
    const ResidueProbe planted = huber_residue_probe(
        {model_counting_ball(11.0, vol), model_counting_ball(12.0, vol),
         model_counting_ball(13.0, vol)},
        vol);
    const ResidueProbe real = huber_residue_probe({v11, v12, ball13}, vol);
    add("residue probe",
        planted.relative_error <= 0.05 && real.relative_error <= 0.15,
        "planted " + num(planted.leading_coefficient_estimate) +
            " (target " + num(planted.target) + "), orbit " +
            num(real.leading_coefficient_estimate) + ", relative errors " +
            num(planted.relative_error, 3) + " / " +
            num(real.relative_error, 3));
  }

  // double pole of the squared-symbol series against the fitted norm_sq
  {
    PeriodForm fe = e1;
    fe.norm_sq = fit_late;
    const ResidueProbe even =
        even_leading_coefficient_probe({v11, v12, ball13}, fe, vol, 1);
    add("even moment residue", even.relative_error <= 0.35,
        "estimate " + num(even.leading_coefficient_estimate) + ", target " +
            num(even.target) + " from norm_sq " + num(fit_late) +
            ", relative error " + num(even.relative_error, 3));
  }

  // shifted eigenvalue equation at s = 2.5 plus the stencil calibration
  {
    const double defect =
        shifted_equation_check(v12, e1, std::complex<double>(2.5, 0.0));
    const Point z0(0.3, 0.7);
    const double lap = stencil_laplacian(
        [](const Point& p) { return p.im * p.im; }, z0, 1e-3);
    const double calib = std::abs(lap - 2.0 * z0.im * z0.im);
    add("shifted equation", defect <= 1e-2 && calib <= 1e-8,
        "relative defect " + num(defect, 3) + " at s = 2.5, x = 12; y^2 " +
            "stencil error " + num(calib, 3));
  }

  // the two series algorithms agree to rounding on the oracle grid
  {
    bool ok = true;
    double worst = 0.0;
    for (int n : {0, 2, 4})
      for (double sr : {1.2, 1.5, 2.0}) {
        const SeriesValue a = evaluate(v10, e1, n, sr, 0.0);
        const SeriesValue b = evaluate_stieltjes(v10, e1, n, sr, 0.0);
        const double rel = std::abs(a.value - b.value) /
                           std::max(std::abs(a.value), std::abs(b.value));
        worst = std::max(worst, rel);
        ok = ok && rel <= 1e-9;
      }
    add("series cross-check", ok,
        "direct vs summation by parts at x = 10, worst relative gap " +
            num(worst, 3));
  }

  return results;
}

}  // namespace hyporb
