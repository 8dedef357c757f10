#pragma once

#include "hlv/common.hpp"
#include "hlv/integrate.hpp"
#include "hlv/star.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hlv {

using VecFn = std::function<Vec(double)>;
using ScalarFn = std::function<double(double)>;

// Piecewise-linear interpolation of a sampled table; constant beyond the ends.
VecFn linear_table(std::vector<double> tau, std::vector<Vec> values);
ScalarFn linear_table(std::vector<double> tau, std::vector<double> values);

// Star with slowly varying coefficients a(tau), b(tau), rbar(tau) and small
// self-limitation. Specialists obey
//   dC_i/dt = eps C_i (beta gamma_hat_i - beta gamma_i x_i - a_i'(tau) q),
// the generalist carries -eps dbar v^2.
struct SlowEnvironment {
  VecFn a;
  VecFn b;
  ScalarFn rbar;
  // Optional analytic derivatives; central differences are used when absent.
  VecFn da;
  VecFn db;
  ScalarFn drbar;
  double mu = 1.0;
  double epsilon = 0.01;
  double beta = 0.0;
  double dbar = 0.0;
  Vec gamma_hat;
  Vec gamma;
  double fd_step = 1e-4;

  Index size() const;
  void validate() const;
  bool analytic_derivatives() const { return da && db && drbar; }
  StarSystem star_at(double tau, const Vec& Cbar) const;
  Vec a_rate(double tau) const;
  Vec b_rate(double tau) const;
  double rbar_rate(double tau) const;

  // Environment frozen at the coefficients of `star`.
  static SlowEnvironment frozen(const StarSystem& star, double epsilon, double beta, double dbar, Vec gamma_hat,
                                Vec gamma);
};

// Time average over the orbit of energy E; at the well bottom returns f(q*, ln mu).
double period_average(const StarSystem& star, double E, const std::function<double(double, double)>& f,
                      const OrbitOptions& opts = {});

struct AveragedState {
  double tau = 0.0;
  double E = 0.0;
  Vec Cbar;
};

struct AveragedRates {
  bool orbit_lost = false;
  double dE = 0.0;
  Vec dC;
  double S1 = 0.0;
  double S2 = 0.0;
  double S3 = 0.0;
  Vec W;
  Vec theta;        // <exp(a_i Q)>
  double Q_mean = 0.0;
  double period = 0.0;  // 0 at the well bottom
};

AveragedRates averaged_rhs(const SlowEnvironment& env, const AveragedState& state,
                           std::optional<double> q_ref = std::nullopt);

enum class RegimeEventKind { Burst, Stabilized, EnvironmentDestabilized };
std::string_view to_string(RegimeEventKind k);

struct RegimeEvent {
  double tau = 0.0;
  RegimeEventKind kind = RegimeEventKind::Stabilized;
  double S1 = 0.0;
  double S2 = 0.0;
};

struct EvolveOptions {
  double dtau = 1e-3;
  std::optional<double> q_ref;
  double crossing_tol = 1e-9;
};

struct AveragedRun {
  std::vector<AveragedState> states;
  std::vector<double> barrier;  // lowest adjacent barrier energy per state (inf when none)
  std::vector<std::vector<double>> all_barriers;  // every local-max energy per state
  std::vector<RegimeEvent> events;
  bool finished = true;         // false when the orbit escaped after a crossing
  bool finite_differences = false;
};

AveragedRun evolve_averaged(const SlowEnvironment& env, const AveragedState& init, double tau_end,
                            const EvolveOptions& opts = {});

// Root of sum_k b_k (r_k - a_k mu) / gamma_k = 0.
double mu_balance(const Vec& a, const Vec& b, const Vec& r, const Vec& gamma);

// Direct simulation of the full slow-environment system in fast time t = tau / eps.
// States are (q, p, C); energy holds H = Psi(p) + Phi(q; C, eps t).
Trajectory simulate_environment(const SlowEnvironment& env, double q0, double p0, const Vec& C0, double t_end,
                                std::size_t samples = 2001, double rtol = 1e-10, double atol = 1e-12);

struct BurstReport {
  std::vector<double> times;
  std::vector<double> heights;
  std::vector<double> intervals;
  double prominence = 0.0;
  bool rare_regime = false;
  bool sparse_sampling = false;
  std::string warning;
};

// Peaks of column `index` with prominence above the threshold (default 5 x MAD of the
// signal). `small_period` is the small-oscillation period used for the rare-burst flag
// and the sampling check.
BurstReport detect_bursts(const Trajectory& traj, std::size_t index, std::optional<double> prominence,
                          double small_period);
BurstReport detect_bursts(const std::vector<double>& times, const std::vector<double>& signal,
                          std::optional<double> prominence, double small_period);

}  // namespace hlv
