#pragma once

#include "hlv/common.hpp"
#include "hlv/montecarlo.hpp"
#include "hlv/persistence.hpp"
#include "hlv/star.hpp"

#include <cstdint>
#include <vector>

namespace hlv {

// Phi(q) = sum_k b_k exp(a_k q).
struct RandomPotential {
  Vec a;
  Vec b;
  bool degenerate = false;  // every a_k = 0: Phi is constant

  double value(double q) const;
  // Star with C = 1, mu = 1, rbar = 0 and specialist coefficients b_k a_k, so rho = b.
  StarSystem to_star() const;
};

RandomPotential random_potential(std::size_t N, double bbar, double sigma_b, double sigma_a, Rng& rng);
RandomPotential random_potential(std::size_t N, double bbar, double sigma_b, double sigma_a, std::uint64_t seed);

struct EnsembleParams {
  double bbar = 1.0;
  double sigma_b = 10.0;
  double sigma_a = 5.0;
  double sigma = 0.5;  // magnitude spread for orbit-probability curves
  double rbar = 5.0;
};

enum class CensusOutcome : std::uint8_t { Stable = 0, NotCoercive = 1, ExtremaMismatch = 2 };

// Stable iff coercive on both sides with exactly one extremum, a minimum.
CensusOutcome census_classify(const RandomPotential& pot);

struct CensusReport {
  Proportion unstable;
  std::vector<std::uint8_t> outcomes;  // CensusOutcome per trial
  std::vector<std::uint32_t> sizes;    // N per trial
};

CensusReport stability_census(std::size_t N_low, std::size_t N_high, std::size_t trials, const EnsembleParams& params,
                              std::uint64_t seed, unsigned workers = 0);

// a_i, b_i ~ |Normal(1, sigma^2)| and b_i negated with probability mix; C = 1, mu = 1.
StarSystem draw_mixed_star(std::size_t N, double mix, const EnsembleParams& params, Rng& rng);

struct OrbitTypes {
  bool periodic = false;  // some well exists
  bool soliton = false;   // some barrier level yields a soliton
};

OrbitTypes orbit_types(const StarSystem& star);

struct CurvePoint {
  double mix = 0.0;
  Proportion periodic;
  Proportion soliton;
  std::vector<std::uint8_t> outcomes;  // bit 0 periodic, bit 1 soliton
};

std::vector<CurvePoint> orbit_probability_curve(std::size_t N, const std::vector<double>& mix_grid, std::size_t trials,
                                                const EnsembleParams& params, std::uint64_t seed,
                                                unsigned workers = 0);

struct ConeFrequencyReport {
  Proportion feasible;
  std::vector<std::uint8_t> outcomes;
};

// rbar_j ~ Normal(r0, sigma^2), B_jk ~ Normal(0, 1); success = rank B = M and B z = rbar has z > 0.
ConeFrequencyReport cone_frequency(std::size_t M, std::size_t N, double r0, double sigma, std::size_t trials,
                                  std::uint64_t seed, unsigned workers = 0);

// Seed for sub-experiment k of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k);

// Spearman rank correlation with average ranks for ties; 0 when either side is constant.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hlv
