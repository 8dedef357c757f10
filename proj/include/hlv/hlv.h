#ifndef HLV_H
#define HLV_H

#include <stddef.h>

#if defined(_WIN32)
#  if defined(HLV_BUILDING)
#    define HLV_API __declspec(dllexport)
#  else
#    define HLV_API __declspec(dllimport)
#  endif
#else
#  define HLV_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hlv_status {
  HLV_OK = 0,
  HLV_NEGATIVE = 1, /* ran fine; a certificate or test came out negative */
  HLV_ERR_INVALID_ARGUMENT = 2,
  HLV_ERR_PARSE = 3,
  HLV_ERR_NUMERIC = 4,
  HLV_ERR_NOT_APPLICABLE = 5,
  HLV_ERR_INTERNAL = 6
} hlv_status;

HLV_API const char* hlv_version(void);

/* Message of the last failed call on this thread; never NULL. */
HLV_API const char* hlv_last_error(void);

/* Releases strings returned through char** out-parameters. */
HLV_API void hlv_string_free(char* s);

/* ---- Interaction systems ------------------------------------------------ */

typedef struct hlv_system hlv_system;

/* JSON {"N","M","r","rbar","A","B","Gamma","D"}; Gamma and D default to zero. */
HLV_API hlv_status hlv_system_from_json(const char* json, hlv_system** out);
HLV_API void hlv_system_free(hlv_system* sys);
HLV_API hlv_status hlv_system_dims(const hlv_system* sys, size_t* n, size_t* m);
/* Writes "PP", "MF", "MO", "C" or "Mixed". */
HLV_API hlv_status hlv_system_sign_pattern(const hlv_system* sys, char** out);
/* rho (length N) and sigma (length M); HLV_NEGATIVE when no factorization exists. */
HLV_API hlv_status hlv_system_factors(const hlv_system* sys, double* rho, double* sigma, int* positive);
/* Right-hand side of the abundance equations. */
HLV_API hlv_status hlv_system_rhs(const hlv_system* sys, const double* x, const double* v, double* dx, double* dv);

/* ---- Star systems -------------------------------------------------------- */

typedef struct hlv_star hlv_star;

/* Hamiltonian star with r_i = a_i mu. */
HLV_API hlv_status hlv_star_create(size_t n, const double* a, const double* b, const double* C, double rbar,
                                   double mu, hlv_star** out);
HLV_API void hlv_star_free(hlv_star* star);
HLV_API hlv_status hlv_star_potential(const hlv_star* star, double q, double* out);
HLV_API hlv_status hlv_star_energy(const hlv_star* star, double q, double p, double* out);
/* Orbit report JSON {"class","q_minus","q_plus",...}. */
HLV_API hlv_status hlv_star_classify(const hlv_star* star, double E, char** json_out);
/* HLV_ERR_NOT_APPLICABLE when the orbit at E is not periodic. */
HLV_API hlv_status hlv_star_period(const hlv_star* star, double E, double* period, double* error);

/* ---- Commands ------------------------------------------------------------ */

/* Runs a command on a JSON configuration and writes a JSON result
 *   {"report": {...}, "tables": [{"name","columns","rows"}], "files": [{"name","content"}]}.
 * Commands: check, simulate, canonical, star.classify, star.period, star.profile,
 * star.persistence, average, resonance, ensemble.census, ensemble.curves,
 * ensemble.cone, ensemble.positive, netgen.
 * On failure *result_json is NULL and hlv_last_error() describes the problem. */
HLV_API hlv_status hlv_run(const char* command, const char* config_json, char** result_json);

#ifdef __cplusplus
}
#endif

#endif
