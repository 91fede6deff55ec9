#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <hyporb.h>

namespace {

void print_line(const char* line, void*) {
  std::puts(line);
  std::fflush(stdout);
}

void complain(const char* what) {
  std::fprintf(stderr, "hyporb: %s\n", what ? what : "failed");
}

// spec'd exit codes: 0 clean, 2 element cap, 3 stopping audit, 4 stats
// precondition, 5 extrapolation failure, 1 anything else (including
// probes that ran but missed their tolerances)
int to_exit(int status, bool probes_passed) {
  switch (status) {
    case HYPORB_OK:
      return probes_passed ? 0 : 1;
    case HYPORB_CAP_EXCEEDED:
      return 2;
    case HYPORB_AUDIT_FAILED:
      return 3;
    case HYPORB_STATS_PRECONDITION:
      return 4;
    case HYPORB_EXTRAPOLATION_FAILED:
      return 5;
    default:
      return 1;
  }
}

// Flag storage shared by the subcommands. Only the parsed subcommand
// writes values here; presence is answered by that subcommand's count(),
// so file-supplied values survive unless a flag overrides them.
struct CommonFlags {
  std::string config_file;
  int genus = 2;
  std::vector<double> z, w;
  std::vector<double> periods;
  double norm_sq = 0.0, sup_norm = 0.0;
  std::vector<double> radii;
  int n_max = 6;
  double margin_factor = 1.0;
  long long element_cap = 0;
  int workers = 1;
  std::string out;
  std::vector<std::string> formats;
};

void add_common(CLI::App* sub, CommonFlags& f) {
  sub->add_option("--config", f.config_file,
                  "JSON run config; explicit flags override its fields");
  sub->add_option("--genus", f.genus, "surface genus, at least 2");
  sub->add_option("--z", f.z, "base point z as: re im")->expected(2);
  sub->add_option("--w", f.w, "base point w as: re im")->expected(2);
  sub->add_option("--periods", f.periods,
                  "form periods, 2*genus reals (default e_1)");
  sub->add_option("--norm-sq", f.norm_sq, "L2 norm squared of the form");
  sub->add_option("--sup-norm", f.sup_norm, "sup norm of the form");
  sub->add_option("--x", f.radii,
                  "radii, strictly increasing (one dump per radius)");
  sub->add_option("--n-max", f.n_max, "highest moment order, at least 2");
  sub->add_option("--margin-factor", f.margin_factor,
                  "stopping margin multiplier, at least 1");
  sub->add_option("--element-cap", f.element_cap,
                  "abort when the enumeration exceeds this size");
  sub->add_option("--workers", f.workers, "enumeration worker threads");
  sub->add_option("--out,-o", f.out, "output directory");
  sub->add_option("--formats", f.formats, "csv and/or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

int env_worker_cap() {
  const char* env = std::getenv("HYPORB_MAX_WORKERS");
  if (!env || !*env) return 0;
  char* end = nullptr;
  const long cap = std::strtol(env, &end, 10);
  if (*end != '\0' || cap < 1) return 0;
  return static_cast<int>(cap);
}

// file config first, then flag overrides, then the CI worker cap
hyporb_config* make_config(const CommonFlags& f, const CLI::App* sub) {
  hyporb_config* config = nullptr;
  if (sub->count("--config") > 0) {
    std::ifstream in(f.config_file, std::ios::binary);
    if (!in) {
      complain(("cannot read " + f.config_file).c_str());
      return nullptr;
    }
    const std::string text((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    char* error = nullptr;
    config = hyporb_config_parse(text.c_str(), &error);
    if (!config) {
      complain(error);
      hyporb_string_free(error);
      return nullptr;
    }
  } else {
    config = hyporb_config_new();
    if (!config) {
      complain("out of memory");
      return nullptr;
    }
  }
  if (sub->count("--genus")) hyporb_config_set_genus(config, f.genus);
  if (sub->count("--z")) hyporb_config_set_z(config, f.z[0], f.z[1]);
  if (sub->count("--w")) hyporb_config_set_w(config, f.w[0], f.w[1]);
  if (sub->count("--periods"))
    hyporb_config_set_periods(config, f.periods.data(),
                              static_cast<int>(f.periods.size()));
  if (sub->count("--norm-sq")) hyporb_config_set_norm_sq(config, f.norm_sq);
  if (sub->count("--sup-norm")) hyporb_config_set_sup_norm(config, f.sup_norm);
  if (sub->count("--x"))
    hyporb_config_set_radii(config, f.radii.data(),
                            static_cast<int>(f.radii.size()));
  if (sub->count("--n-max")) hyporb_config_set_n_max(config, f.n_max);
  if (sub->count("--margin-factor"))
    hyporb_config_set_margin_factor(config, f.margin_factor);
  if (sub->count("--element-cap"))
    hyporb_config_set_element_cap(config, f.element_cap);
  if (sub->count("--workers")) hyporb_config_set_workers(config, f.workers);
  if (sub->count("--out")) hyporb_config_set_output_dir(config, f.out.c_str());
  if (sub->count("--formats")) {
    int csv = 0, json = 0;
    for (const std::string& fmt : f.formats) {
      if (fmt == "csv") csv = 1;
      if (fmt == "json") json = 1;
    }
    hyporb_config_set_formats(config, csv, json);
  }
  const int cap = env_worker_cap();
  if (cap > 0 && hyporb_config_workers(config) > cap)
    hyporb_config_set_workers(config, cap);
  return config;
}

// "1.5" or "1.5,0.25" into a complex pair
bool parse_complex(const std::string& token, double& re, double& im) {
  const char* text = token.c_str();
  char* end = nullptr;
  re = std::strtod(text, &end);
  im = 0.0;
  if (end == text) return false;
  if (*end == ',') {
    const char* rest = end + 1;
    im = std::strtod(rest, &end);
    if (end == rest) return false;
  }
  return *end == '\0';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "orbit enumeration, modular symbol statistics, and Dirichlet series "
      "probes for cocompact surface groups (library " +
      std::string(hyporb_version()) + ")"};
  app.require_subcommand(1);

  CommonFlags f;
  CLI::App* cmd_enumerate = app.add_subcommand(
      "enumerate", "write orbit dumps, one CSV per configured radius");
  add_common(cmd_enumerate, f);
  CLI::App* cmd_report = app.add_subcommand(
      "report", "moment and distribution reports per radius");
  add_common(cmd_report, f);
  CLI::App* cmd_dirichlet = app.add_subcommand(
      "dirichlet", "series scan plus residue probes (needs three radii)");
  add_common(cmd_dirichlet, f);
  std::vector<std::string> s_tokens;
  std::vector<int> n_values;
  cmd_dirichlet->add_option("--s", s_tokens,
                            "evaluation points, each re or re,im");
  cmd_dirichlet->add_option("--n", n_values, "symbol powers to scan");
  CLI::App* cmd_export = app.add_subcommand(
      "export-group", "write the group record as group.txt");
  add_common(cmd_export, f);
  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "run the full self-check battery (minutes)");
  int verify_workers = 1;
  cmd_verify->add_option("--workers", verify_workers,
                         "enumeration worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (cmd_verify->parsed()) {
    const int cap = env_worker_cap();
    const int workers =
        cap > 0 && verify_workers > cap ? cap : verify_workers;
    int passed = 0, total = 0;
    char* error = nullptr;
    const int rc =
        hyporb_verify(workers, &passed, &total, print_line, nullptr, &error);
    if (rc != HYPORB_OK) {
      complain(error);
      hyporb_string_free(error);
      return 1;
    }
    std::printf("%d/%d checks passed\n", passed, total);
    return passed == total ? 0 : 1;
  }

  const CLI::App* active = app.get_subcommands().front();
  hyporb_config* config = make_config(f, active);
  if (!config) return 1;

  int rc = HYPORB_OK;
  int probes_passed = 1;
  char* error = nullptr;
  if (cmd_enumerate->parsed()) {
    rc = hyporb_enumerate(config, print_line, nullptr, &error);
  } else if (cmd_report->parsed()) {
    rc = hyporb_report(config, print_line, nullptr, &error);
  } else if (cmd_dirichlet->parsed()) {
    std::vector<double> s_re, s_im;
    for (const std::string& token : s_tokens) {
      double re = 0.0, im = 0.0;
      if (!parse_complex(token, re, im)) {
        complain(("bad --s value: " + token).c_str());
        hyporb_config_free(config);
        return 1;
      }
      s_re.push_back(re);
      s_im.push_back(im);
    }
    rc = hyporb_dirichlet(config, s_re.data(), s_im.data(),
                          static_cast<int>(s_re.size()), n_values.data(),
                          static_cast<int>(n_values.size()), &probes_passed,
                          print_line, nullptr, &error);
  } else if (cmd_export->parsed()) {
    rc = hyporb_export_group(config, print_line, nullptr, &error);
  }
  hyporb_config_free(config);

  if (rc != HYPORB_OK) {
    complain(error);
    hyporb_string_free(error);
  } else if (!probes_passed) {
    complain("probes missed their tolerances");
  }
  return to_exit(rc, probes_passed != 0);
}
