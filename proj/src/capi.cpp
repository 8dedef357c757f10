#include "hlv/hlv.h"

#include "commands.hpp"
#include "hlv/canonical.hpp"

#include <cstdlib>
#include <cstring>
#include <new>

struct hlv_system {
  hlv::InteractionSystem sys;
};

struct hlv_star {
  hlv::StarSystem star;
};

namespace {

thread_local std::string g_last_error;

hlv_status map_code(hlv::ErrorCode c) {
  switch (c) {
    case hlv::ErrorCode::InvalidArgument: return HLV_ERR_INVALID_ARGUMENT;
    case hlv::ErrorCode::Parse: return HLV_ERR_PARSE;
    case hlv::ErrorCode::Numeric:
    case hlv::ErrorCode::Overflow: return HLV_ERR_NUMERIC;
    case hlv::ErrorCode::NotApplicable:
    case hlv::ErrorCode::Degenerate: return HLV_ERR_NOT_APPLICABLE;
  }
  return HLV_ERR_INTERNAL;
}

template <class F>
hlv_status guarded(F&& f) {
  try {
    const hlv_status s = f();
    if (s == HLV_OK || s == HLV_NEGATIVE) g_last_error.clear();
    return s;
  } catch (const hlv::Error& e) {
    g_last_error = e.what();
    return map_code(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return HLV_ERR_PARSE;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HLV_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HLV_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return HLV_ERR_INTERNAL;
  }
}

hlv_status null_arg(const char* name) {
  g_last_error = std::string(name) + ": null pointer";
  return HLV_ERR_INVALID_ARGUMENT;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* hlv_version(void) { return "1.0.0"; }

const char* hlv_last_error(void) { return g_last_error.c_str(); }

void hlv_string_free(char* s) { std::free(s); }

hlv_status hlv_system_from_json(const char* json, hlv_system** out) {
  if (!json) return null_arg("json");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    const auto j = nlohmann::json::parse(json);
    auto h = std::make_unique<hlv_system>();
    h->sys = hlv::cmd::parse_system(j);
    *out = h.release();
    return HLV_OK;
  });
}

void hlv_system_free(hlv_system* sys) { delete sys; }

hlv_status hlv_system_dims(const hlv_system* sys, size_t* n, size_t* m) {
  if (!sys) return null_arg("sys");
  if (n) *n = static_cast<size_t>(sys->sys.n());
  if (m) *m = static_cast<size_t>(sys->sys.m());
  return HLV_OK;
}

hlv_status hlv_system_sign_pattern(const hlv_system* sys, char** out) {
  if (!sys) return null_arg("sys");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    *out = dup(std::string(hlv::to_string(hlv::classify_signs(sys->sys))));
    return HLV_OK;
  });
}

hlv_status hlv_system_factors(const hlv_system* sys, double* rho, double* sigma, int* positive) {
  if (!sys) return null_arg("sys");
  if (!rho) return null_arg("rho");
  if (!sigma) return null_arg("sigma");
  return guarded([&] {
    const auto f = hlv::find_factors(sys->sys.A, sys->sys.B);
    if (!f) {
      g_last_error = "no factorization A = -diag(rho)^-1 B^T diag(sigma) exists";
      return HLV_NEGATIVE;
    }
    std::memcpy(rho, f->rho.data(), sizeof(double) * static_cast<size_t>(f->rho.size()));
    std::memcpy(sigma, f->sigma.data(), sizeof(double) * static_cast<size_t>(f->sigma.size()));
    if (positive) *positive = f->positive ? 1 : 0;
    return HLV_OK;
  });
}

hlv_status hlv_system_rhs(const hlv_system* sys, const double* x, const double* v, double* dx, double* dv) {
  if (!sys) return null_arg("sys");
  if (!x || !v || !dx || !dv) return null_arg("x, v, dx, dv");
  return guarded([&] {
    const hlv::Index N = sys->sys.n(), M = sys->sys.m();
    const hlv::Vec xv = Eigen::Map<const hlv::Vec>(x, N), vv = Eigen::Map<const hlv::Vec>(v, M);
    hlv::Vec ox, ov;
    hlv::lv_rhs(sys->sys, xv, vv, ox, ov);
    Eigen::Map<hlv::Vec>(dx, N) = ox;
    Eigen::Map<hlv::Vec>(dv, M) = ov;
    return HLV_OK;
  });
}

hlv_status hlv_star_create(size_t n, const double* a, const double* b, const double* C, double rbar, double mu,
                           hlv_star** out) {
  if (!out) return null_arg("out");
  *out = nullptr;
  if (n == 0) {
    g_last_error = "n: must be >= 1";
    return HLV_ERR_INVALID_ARGUMENT;
  }
  if (!a) return null_arg("a");
  if (!b) return null_arg("b");
  return guarded([&] {
    const auto N = static_cast<hlv::Index>(n);
    const hlv::Vec Cv = C ? hlv::Vec(Eigen::Map<const hlv::Vec>(C, N)) : hlv::Vec(hlv::Vec::Ones(N));
    auto h = std::make_unique<hlv_star>(hlv_star{hlv::StarSystem::hamiltonian(
        Eigen::Map<const hlv::Vec>(a, N), Eigen::Map<const hlv::Vec>(b, N), rbar, mu, Cv)});
    h->star.validate();
    *out = h.release();
    return HLV_OK;
  });
}

void hlv_star_free(hlv_star* star) { delete star; }

hlv_status hlv_star_potential(const hlv_star* star, double q, double* out) {
  if (!star) return null_arg("star");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = star->star.potential(q);
    return HLV_OK;
  });
}

hlv_status hlv_star_energy(const hlv_star* star, double q, double p, double* out) {
  if (!star) return null_arg("star");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = star->star.energy(q, p);
    return HLV_OK;
  });
}

hlv_status hlv_star_classify(const hlv_star* star, double E, char** json_out) {
  if (!star) return null_arg("star");
  if (!json_out) return null_arg("json_out");
  *json_out = nullptr;
  return guarded([&] {
    *json_out = dup(hlv::cmd::orbit_json(hlv::classify_orbit(star->star, E)).dump());
    return HLV_OK;
  });
}

hlv_status hlv_star_period(const hlv_star* star, double E, double* period, double* error) {
  if (!star) return null_arg("star");
  if (!period) return null_arg("period");
  return guarded([&] {
    const hlv::PeriodEstimate pe = hlv::period(star->star, E);
    *period = pe.value;
    if (error) *error = pe.error;
    return HLV_OK;
  });
}

hlv_status hlv_run(const char* command, const char* config_json, char** result_json) {
  if (!command) return null_arg("command");
  if (!result_json) return null_arg("result_json");
  *result_json = nullptr;
  return guarded([&] {
    const auto cfg = config_json && *config_json ? nlohmann::json::parse(config_json) : nlohmann::json::object();
    hlv::cmd::Result r = hlv::cmd::run(command, cfg);
    nlohmann::json out = {{"report", std::move(r.report)}, {"tables", std::move(r.tables)}, {"files", std::move(r.files)}};
    *result_json = dup(out.dump());
    return r.negative ? HLV_NEGATIVE : HLV_OK;
  });
}

}  // extern "C"
