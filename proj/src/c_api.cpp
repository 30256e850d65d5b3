#include "leakmap/leakmap.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <new>
#include <stdexcept>
#include <string>

#include "leakmap/config.hpp"
#include "leakmap/error.hpp"
#include "leakmap/experiment.hpp"
#include "leakmap/quantum.hpp"
#include "leakmap/standard_map.hpp"
#include "leakmap/tomography.hpp"

struct lkm_config {
  leakmap::ExperimentConfig value;
};

struct lkm_resonances {
  leakmap::ResonanceSet value;
};

namespace {

thread_local std::string g_last_error;

lkm_status fail(lkm_status status, const char* what) {
  g_last_error = what;
  return status;
}

template <typename F>
lkm_status guarded(F&& body) noexcept {
  try {
    g_last_error.clear();
    body();
    return LKM_OK;
  } catch (const leakmap::ConfigError& e) {
    return fail(LKM_ERR_CONFIG, e.what());
  } catch (const leakmap::NumericalError& e) {
    return fail(LKM_ERR_NUMERICAL, e.what());
  } catch (const leakmap::IoError& e) {
    return fail(LKM_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(LKM_ERR_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(LKM_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(LKM_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(LKM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(LKM_ERR_INTERNAL, "unknown error");
  }
}

void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

void copy_out(const std::string& s, char* buf, size_t buflen, size_t* needed) {
  if (needed) *needed = s.size() + 1;
  if (!buf || buflen == 0) return;
  const size_t n = std::min(buflen - 1, s.size());
  std::memcpy(buf, s.data(), n);
  buf[n] = '\0';
  if (buflen < s.size() + 1) throw std::invalid_argument("output buffer too small");
}

}  // namespace

extern "C" {

const char* lkm_version(void) { return LEAKMAP_VERSION; }

const char* lkm_last_error(void) { return g_last_error.c_str(); }

lkm_status lkm_config_create(lkm_config** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = new lkm_config{};
  });
}

void lkm_config_destroy(lkm_config* config) { delete config; }

lkm_status lkm_config_load(lkm_config* config, const char* path) {
  return guarded([&] {
    require(config && path, "null argument");
    config->value = leakmap::load_config(path);
  });
}

lkm_status lkm_config_set(lkm_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config && key && value, "null argument");
    leakmap::set_config_value(config->value, key, value);
  });
}

lkm_status lkm_config_get(const lkm_config* config, const char* key, char* buf, size_t buflen,
                          size_t* needed) {
  return guarded([&] {
    require(config && key, "null argument");
    copy_out(leakmap::get_config_value(config->value, key), buf, buflen, needed);
  });
}

lkm_status lkm_config_serialize(const lkm_config* config, char* buf, size_t buflen,
                                size_t* needed) {
  return guarded([&] {
    require(config != nullptr, "null config");
    copy_out(leakmap::serialize_config(config->value), buf, buflen, needed);
  });
}

lkm_status lkm_config_validate(const lkm_config* config) {
  return guarded([&] {
    require(config != nullptr, "null config");
    leakmap::validate(config->value);
  });
}

lkm_status lkm_run(const lkm_config* config, const char* command) {
  return guarded([&] {
    require(config && command, "null argument");
    leakmap::run_command(command, config->value);
  });
}

lkm_status lkm_step(double K, double q, double p, double* q_out, double* p_out) {
  return guarded([&] {
    require(q_out && p_out, "null output pointer");
    const auto x = leakmap::step({leakmap::wrap_unit(q), leakmap::wrap_unit(p)}, {K});
    *q_out = x.q;
    *p_out = x.p;
  });
}

lkm_status lkm_ftle(double K, double q, double p, uint64_t n, double* out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = leakmap::ftle({leakmap::wrap_unit(q), leakmap::wrap_unit(p)}, n, {K});
  });
}

lkm_status lkm_evolve_open(double K, double q, double p, double leak_center, double leak_width,
                           uint64_t t_max, uint64_t* tau, double* lambda, int* escaped) {
  return guarded([&] {
    require(tau && lambda && escaped, "null output pointer");
    const leakmap::Leak leak{leak_center, leak_width};
    leakmap::validate(leak);
    const auto r = leakmap::evolve_open({leakmap::wrap_unit(q), leakmap::wrap_unit(p)}, leak,
                                        t_max, {K});
    *tau = r.tau;
    *lambda = r.lambda;
    *escaped = r.escaped ? 1 : 0;
  });
}

lkm_status lkm_resonances_compute(int N, double K, double leak_center, double leak_width,
                                  lkm_resonances** out) {
  return guarded([&] {
    require(out != nullptr, "null output pointer");
    *out = nullptr;
    auto set = leakmap::resonances_for_leak({N, K}, {leak_center, leak_width});
    *out = new lkm_resonances{std::move(set)};
  });
}

void lkm_resonances_destroy(lkm_resonances* set) { delete set; }

size_t lkm_resonances_size(const lkm_resonances* set) { return set ? set->value.size() : 0; }

lkm_status lkm_resonances_eigenvalue(const lkm_resonances* set, size_t k, double* re,
                                     double* im) {
  return guarded([&] {
    require(set && re && im, "null argument");
    if (k >= set->value.size()) throw std::out_of_range("resonance index out of range");
    const auto z = set->value.eigenvalues(static_cast<Eigen::Index>(k));
    *re = z.real();
    *im = z.imag();
  });
}

lkm_status lkm_resonances_dwell_time(const lkm_resonances* set, size_t k, double* out) {
  return guarded([&] {
    require(set && out, "null argument");
    if (k >= set->value.size()) throw std::out_of_range("resonance index out of range");
    *out = set->value.dwell_time[k];
  });
}

lkm_status lkm_resonances_schur_vector(const lkm_resonances* set, size_t k, double* interleaved,
                                       size_t len) {
  return guarded([&] {
    require(set && interleaved, "null argument");
    const size_t n = set->value.size();
    if (k >= n) throw std::out_of_range("resonance index out of range");
    require(len >= 2 * n, "buffer shorter than 2N");
    const auto col = set->value.schur_vectors.col(static_cast<Eigen::Index>(k));
    for (size_t i = 0; i < n; ++i) {
      interleaved[2 * i] = col(static_cast<Eigen::Index>(i)).real();
      interleaved[2 * i + 1] = col(static_cast<Eigen::Index>(i)).imag();
    }
  });
}

lkm_status lkm_wehrl_entropy(const double* interleaved, int N, size_t n_q, size_t n_p,
                             double* s_w) {
  return guarded([&] {
    require(interleaved && s_w, "null argument");
    require(N >= 2, "N must be >= 2");
    Eigen::VectorXcd state(N);
    for (int i = 0; i < N; ++i) state(i) = {interleaved[2 * i], interleaved[2 * i + 1]};
    const leakmap::HusimiEvaluator evaluator(N, {n_q, n_p});
    const leakmap::WehrlScale scale(evaluator);
    *s_w = leakmap::wehrl_entropy(evaluator(state), scale).s_w;
  });
}

}  // extern "C"
