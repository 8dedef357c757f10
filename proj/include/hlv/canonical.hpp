#pragma once

#include "hlv/common.hpp"
#include "hlv/model.hpp"
#include "hlv/star.hpp"

#include <optional>

namespace hlv {

// sigma_l B_lk = rho_k A_kl, normalized so that sigma_1 = 1.
struct HamiltonianFactors {
  Vec rho;
  Vec sigma;
  bool positive = false;
  double max_residual = 0.0;
};

// Throws Degenerate when both matrices vanish.
std::optional<HamiltonianFactors> find_factors(const Mat& A, const Mat& B, double tol = 1e-9);

struct CanonicalSystem {
  InteractionSystem base;
  HamiltonianFactors factors;
  Vec mu;
  Vec gamma_bar;  // -r + A mu

  // Throws NotApplicable when A and B admit no factorization.
  static CanonicalSystem make(const InteractionSystem& sys, const Vec& mu, double tol = 1e-9);
  // mu solving A mu = r in the least-squares sense.
  static Vec balancing_mu(const InteractionSystem& sys);

  bool reduction_valid(double tol = 1e-12) const;
};

// q holds the scaled positions sigma_j q_j.
struct CanonicalState {
  Vec q;
  Vec p;
  Vec C;
};

struct CanonicalRates {
  Vec dq;  // derivative of the scaled positions
  Vec dp;
  Vec dC;
};

CanonicalState to_canonical(const CanonicalSystem& sys, const Vec& x0, const Vec& v0);
void from_canonical(const CanonicalSystem& sys, const CanonicalState& s, Vec& x, Vec& v);
CanonicalRates transformed_rhs(const CanonicalSystem& sys, const CanonicalState& s);

double potential_energy(const CanonicalSystem& sys, const Vec& C, const Vec& q);
double kinetic_energy(const CanonicalSystem& sys, const Vec& p);
double hamiltonian(const CanonicalSystem& sys, const CanonicalState& s);
// Gradient of the potential part with respect to the scaled positions.
Vec potential_gradient(const CanonicalSystem& sys, const Vec& C, const Vec& q);
Vec kinetic_gradient(const CanonicalSystem& sys, const Vec& p);

// E = v - mu ln v + sum_i (rho_i x_i - rbar m_i / a_i ln x_i); requires m > 0, sum m = 1.
double motion_integral(const Vec& x, double v, const Vec& m, double mu, const StarSystem& star);

struct StarEquilibrium {
  Vec xbar;
  double vbar = 0.0;
};

// Positive equilibrium of the star with self-limitation gamma_i x_i^2 and d v^2.
std::optional<StarEquilibrium> star_equilibrium(const Vec& a, const Vec& b, const Vec& r,
                                                const Vec& gamma, double d, double rbar);

// V = (v - vbar ln v) + sum_i rho_i (x_i - xbar_i ln x_i); nonincreasing when rho > 0.
double lyapunov_function(const Vec& a, const Vec& b, const StarEquilibrium& eq, const Vec& x, double v);

}  // namespace hlv
