#include "hyporb.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include "hyporb/runner.hpp"

// the opaque handle is the C++ config itself
struct hyporb_config : hyporb::RunConfig {};

namespace {

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_error(char** error, const std::string& what) {
  if (error) *error = copy_string(what);
}

hyporb::LogFn wrap_log(hyporb_log_fn log, void* user) {
  if (!log) return {};
  return [log, user](const std::string& line) { log(line.c_str(), user); };
}

// runs fn, translating the library's failure taxonomy to status codes;
// nothing may throw across the C boundary
template <typename Fn>
int guarded(char** error, Fn&& fn) {
  try {
    fn();
    return HYPORB_OK;
  } catch (const hyporb::Error& e) {
    set_error(error, e.what());
    return static_cast<int>(e.status());
  } catch (const std::exception& e) {
    set_error(error, e.what());
    return HYPORB_INTERNAL_ERROR;
  } catch (...) {
    set_error(error, "unknown failure");
    return HYPORB_INTERNAL_ERROR;
  }
}

}  // namespace

extern "C" {

const char* hyporb_version(void) {
  static const std::string v(hyporb::library_version);
  return v.c_str();
}

void hyporb_string_free(char* s) { std::free(s); }

hyporb_config* hyporb_config_new(void) {
  return new (std::nothrow) hyporb_config;
}

hyporb_config* hyporb_config_parse(const char* json, char** error) {
  if (!json) {
    set_error(error, "null config text");
    return nullptr;
  }
  hyporb_config* config = nullptr;
  const int rc = guarded(error, [&] {
    const hyporb::RunConfig parsed = hyporb::parse_config_json(json);
    config = new hyporb_config;
    static_cast<hyporb::RunConfig&>(*config) = parsed;
  });
  if (rc != HYPORB_OK) {
    delete config;
    return nullptr;
  }
  return config;
}

char* hyporb_config_json(const hyporb_config* config) {
  if (!config) return nullptr;
  char* out = nullptr;
  guarded(nullptr, [&] { out = copy_string(hyporb::config_json(*config)); });
  return out;
}

void hyporb_config_free(hyporb_config* config) { delete config; }

void hyporb_config_set_genus(hyporb_config* config, int genus) {
  if (config) config->genus = genus;
}

void hyporb_config_set_z(hyporb_config* config, double re, double im) {
  if (!config) return;
  config->z.re = re;
  config->z.im = im;
}

void hyporb_config_set_w(hyporb_config* config, double re, double im) {
  if (!config) return;
  config->w.re = re;
  config->w.im = im;
}

void hyporb_config_set_periods(hyporb_config* config, const double* periods,
                               int count) {
  if (!config || count < 0 || (count > 0 && !periods)) return;
  config->periods.assign(periods, periods + count);
}

void hyporb_config_set_norm_sq(hyporb_config* config, double norm_sq) {
  if (!config) return;
  if (std::isfinite(norm_sq) && norm_sq > 0.0)
    config->norm_sq = norm_sq;
  else
    config->norm_sq.reset();
}

void hyporb_config_set_sup_norm(hyporb_config* config, double sup_norm) {
  if (!config) return;
  if (std::isfinite(sup_norm) && sup_norm > 0.0)
    config->sup_norm = sup_norm;
  else
    config->sup_norm.reset();
}

void hyporb_config_set_radii(hyporb_config* config, const double* radii,
                             int count) {
  if (!config || count < 0 || (count > 0 && !radii)) return;
  config->radii.assign(radii, radii + count);
}

void hyporb_config_set_n_max(hyporb_config* config, int n_max) {
  if (config) config->n_max = n_max;
}

void hyporb_config_set_margin_factor(hyporb_config* config, double factor) {
  if (config) config->margin_factor = factor;
}

void hyporb_config_set_element_cap(hyporb_config* config, long long cap) {
  if (config) config->element_cap = static_cast<long>(cap);
}

void hyporb_config_set_workers(hyporb_config* config, int workers) {
  if (config) config->workers = workers;
}

void hyporb_config_set_output_dir(hyporb_config* config, const char* dir) {
  if (config && dir) config->output_dir = dir;
}

void hyporb_config_set_formats(hyporb_config* config, int csv, int json) {
  if (!config) return;
  config->csv = csv != 0;
  config->json = json != 0;
}

int hyporb_config_workers(const hyporb_config* config) {
  return config ? config->workers : 0;
}

int hyporb_enumerate(const hyporb_config* config, hyporb_log_fn log,
                     void* user, char** error) {
  if (!config) {
    set_error(error, "null config");
    return HYPORB_INVALID_ARGUMENT;
  }
  return guarded(error,
                 [&] { hyporb::run_enumerate(*config, wrap_log(log, user)); });
}

int hyporb_report(const hyporb_config* config, hyporb_log_fn log, void* user,
                  char** error) {
  if (!config) {
    set_error(error, "null config");
    return HYPORB_INVALID_ARGUMENT;
  }
  return guarded(error,
                 [&] { hyporb::run_report(*config, wrap_log(log, user)); });
}

int hyporb_dirichlet(const hyporb_config* config, const double* s_re,
                     const double* s_im, int s_count, const int* n_values,
                     int n_count, int* probes_passed, hyporb_log_fn log,
                     void* user, char** error) {
  if (!config || s_count < 0 || n_count < 0 || (s_count > 0 && !s_re)) {
    set_error(error, "null config or malformed grid");
    return HYPORB_INVALID_ARGUMENT;
  }
  return guarded(error, [&] {
    std::vector<std::complex<double>> s_grid;
    for (int i = 0; i < s_count; ++i)
      s_grid.emplace_back(s_re[i], s_im ? s_im[i] : 0.0);
    std::vector<int> n_list;
    if (n_count > 0 && n_values) n_list.assign(n_values, n_values + n_count);
    const hyporb::RunOutput out =
        hyporb::run_dirichlet(*config, s_grid, n_list, wrap_log(log, user));
    if (probes_passed) *probes_passed = out.probes_passed ? 1 : 0;
  });
}

int hyporb_export_group(const hyporb_config* config, hyporb_log_fn log,
                        void* user, char** error) {
  if (!config) {
    set_error(error, "null config");
    return HYPORB_INVALID_ARGUMENT;
  }
  return guarded(
      error, [&] { hyporb::run_export_group(*config, wrap_log(log, user)); });
}

int hyporb_verify(int workers, int* checks_passed, int* checks_total,
                  hyporb_log_fn log, void* user, char** error) {
  return guarded(error, [&] {
    const std::vector<hyporb::CheckResult> results =
        hyporb::run_acceptance(workers, wrap_log(log, user));
    if (checks_total) *checks_total = static_cast<int>(results.size());
    if (checks_passed) {
      int passed = 0;
      for (const hyporb::CheckResult& r : results)
        if (r.passed) ++passed;
      *checks_passed = passed;
    }
  });
}

}  // extern "C"
