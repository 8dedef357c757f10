#pragma once

#include "hlv/common.hpp"
#include "hlv/integrate.hpp"
#include "hlv/star.hpp"

#include <array>
#include <complex>
#include <string_view>
#include <vector>

namespace hlv {

// Two star systems coupled with strength kappa. With C frozen,
//   x_i = C1_i exp(a1_i q1 + kappa at1_i q2),   y_j = C2_j exp(a2_j q2 + kappa at2_j q1),
//   dp1/dt = rbar1 - sum b1_i x_i - kappa sum bt1_j y_j - eps d1 exp(p1),
//   dp2/dt = rbar2 - sum b2_j y_j - kappa sum bt2_i x_i - eps d2 exp(p2),
//   dq_k/dt = exp(p_k) - mu_k.
struct TwoStarSystem {
  StarSystem star1;
  StarSystem star2;
  Vec at1;  // N1: shift of star-1 exponents by q2
  Vec bt1;  // N2: load of star-2 species on generalist 1
  Vec at2;  // N2
  Vec bt2;  // N1
  double kappa = 1e-2;
  double epsilon = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  Vec gamma1;  // recorded only; C is frozen here
  Vec gamma2;

  double ebar() const { return epsilon / kappa; }
  void validate() const;
  // Generalist growth rates (dp1/dt, dp2/dt) at positions q and momenta p.
  std::array<double, 2> forces(double q1, double q2, double p1, double p2) const;
};

struct ResonanceModel {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double g12 = 0.0;  // d(dp1/dt)/dq2 per unit kappa at equilibrium
  double g21 = 0.0;
  double b12 = 0.0;  // mu1 g12
  double b21 = 0.0;  // -mu2 g21
  double ebar = 0.0;
  double D1 = 0.0;   // mu1 d1
  double D2 = 0.0;
  Vec mu_tilde;      // ebar mu_k d_k
  double qbar1 = 0.0;
  double qbar2 = 0.0;
  double mu1 = 1.0;
  double mu2 = 1.0;
  double kappa = 0.0;

  double R() const { return g12 * g21; }
  double omega() const { return 0.5 * (omega1 + omega2); }
};

ResonanceModel linearize(const TwoStarSystem& sys);

enum class Regime { Resonant, Nonresonant };
std::string_view to_string(Regime r);
Regime detuning(const ResonanceModel& model, double kappa, double factor = 1.0);

struct LockedRates {
  std::complex<double> lambda_plus;
  std::complex<double> lambda_minus;
  double max_re = 0.0;
  bool growth = false;
};

// Eigenvalues of 2 omega Q' = [[-ebar D1 omega, s b12], [s b21, -ebar D2 omega]] Q, s = branch.
LockedRates phase_locked_rates(const ResonanceModel& model, int branch = +1);

enum class Verdict { Unstable, Stable, Damped };
std::string_view to_string(Verdict v);
Verdict instability_criterion(const ResonanceModel& model);

struct ResonanceEvent {
  double tau = 0.0;
  int index = 0;  // 1 or 2: the amplitude that fell below 1e-12
};

struct SlowTrajectory {
  Trajectory traj;  // columns Q1, Q2, phi1, phi2
  std::vector<ResonanceEvent> extinctions;
};

// Slow amplitude-phase system in tau = kappa t; detuning enters the phases as
// (omega_k - omega) / kappa.
SlowTrajectory integrate_resonance(const ResonanceModel& model, std::array<double, 2> Q0,
                                   std::array<double, 2> phi0, double tau_end, std::size_t samples = 1001,
                                   double rtol = 1e-10, double atol = 1e-14);

// Full coupled simulation; columns q1, p1, q2, p2.
Trajectory simulate_two_star(const TwoStarSystem& sys, std::array<double, 4> s0, double t_end,
                             std::size_t samples = 2001, double rtol = 1e-10, double atol = 1e-13);

// Amplitude envelopes sqrt((q - qbar)^2 + (dq/dt / omega)^2) of a full simulation.
std::array<std::vector<double>, 2> envelope(const ResonanceModel& model, const Trajectory& full);

// Least-squares slope of ln(Q1^2 + Q2^2) / 2 against time.
double envelope_growth_rate(const std::vector<double>& times, const std::vector<double>& Q1,
                            const std::vector<double>& Q2);

}  // namespace hlv
