#pragma once

#include "hlv/common.hpp"

#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

namespace hlv {

// One generalist interacting with N specialists:
//   Phi(q) = sum_i rho_i C_i exp(a_i q) - rbar q,  rho_i = b_i / a_i
//   Psi(p) = exp(p) - mu p
struct StarSystem {
  Vec a;
  Vec b;
  Vec r;
  Vec C;
  double rbar = 0.0;
  double mu = 1.0;

  // Star with r_i = a_i mu, the condition for conserved C.
  static StarSystem hamiltonian(Vec a, Vec b, double rbar, double mu, Vec C);

  Index size() const { return a.size(); }
  Vec rho() const { return b.cwiseQuotient(a); }
  void validate() const;
  bool hamiltonian_valid(double tol = 1e-12) const;

  double potential(double q) const;
  double potential_d1(double q) const;
  double potential_d2(double q) const;
  double kinetic(double p) const;
  double kinetic_d1(double p) const { return std::exp(p) - mu; }
  double kinetic_min() const { return mu * (1.0 - std::log(mu)); }
  double energy(double q, double p) const { return potential(q) + kinetic(p); }
  // Potential level reached by an orbit of energy E.
  double level(double E) const { return E - kinetic_min(); }

  StarSystem without_species(Index j) const;
};

struct Extremum {
  enum class Kind { Min, Max };
  double q = 0.0;
  double value = 0.0;
  Kind kind = Kind::Min;
};

struct PotentialProfile {
  std::vector<Extremum> extrema;  // sorted by q, kinds alternate
  bool coercive_left = false;
  bool coercive_right = false;
  double window_lo = 0.0;
  double window_hi = 0.0;
  // Set when the slope at a window edge implies an extremum outside the window.
  bool window_clipped = false;

  std::size_t minima() const;
  std::size_t maxima() const;
};

std::pair<double, double> default_window(const StarSystem& star);
bool coercive_right(const StarSystem& star);
bool coercive_left(const StarSystem& star);
PotentialProfile analyze_potential(const StarSystem& star, std::pair<double, double> window,
                                   std::size_t grid_points = 4001);
PotentialProfile analyze_potential(const StarSystem& star);

enum class Direction { Left, Right, Both };

struct OrbitClass {
  enum class Kind { Equilibrium, Periodic, Soliton, Kink, Unbounded };
  Kind kind = Kind::Equilibrium;
  double q_minus = 0.0;
  double q_plus = 0.0;
  double period = 0.0;     // Periodic only
  double q_plateau = 0.0;  // Soliton: the degenerate endpoint
  Direction direction = Direction::Right;  // Unbounded only
  bool fragile = false;    // Kink: destroyed by small perturbations
};

std::string_view to_string(OrbitClass::Kind k);
std::string_view to_string(Direction d);

struct OrbitOptions {
  std::optional<double> q_ref;  // a point of the well; default: deepest minimum
  double tol_deg_rel = 1e-9;
  std::optional<std::pair<double, double>> window;
  bool compute_period = true;
};

OrbitClass classify_orbit(const StarSystem& star, double E, const OrbitOptions& opts = {});

struct PeriodEstimate {
  double value = 0.0;
  double error = 0.0;
  bool capped = false;
};

// Time integral of f over one closed orbit between turning points q_minus < q_plus;
// f receives (q, p). The level is taken from the turning points themselves, so
// `level` only documents the call. Returns {integral, error}.
std::pair<double, double> orbit_integral(const StarSystem& star, double level, double q_minus,
                                         double q_plus,
                                         const std::function<double(double, double)>& f,
                                         double tol = 1e-12);

PeriodEstimate period(const StarSystem& star, double E, const OrbitOptions& opts = {},
                      double cap = 1e6);

struct PersistenceVerdict {
  enum class Kind { PI, PII, PIII, Fails };
  Kind kind = Kind::Fails;
  std::optional<Index> i_plus;
  std::optional<Index> i_minus;
  bool tie_plus = false;
  bool tie_minus = false;
};

std::string_view to_string(PersistenceVerdict::Kind k);
PersistenceVerdict persistence_criteria(const StarSystem& star);
std::vector<Index> domino_check(const StarSystem& star);

// Roots of exp(s) - 1 - s = c for c >= 0: {s_up >= 0, s_dn <= 0}.
std::pair<double, double> kinetic_branches(double c);

}  // namespace hlv
