#include "hlv/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hlv {

double RandomPotential::value(double q) const {
  double s = 0.0;
  for (Index k = 0; k < a.size(); ++k) s += b(k) * guarded_exp(a(k) * q);
  return s;
}

StarSystem RandomPotential::to_star() const {
  if (degenerate) fail(ErrorCode::Degenerate, "random potential: all exponents vanish, Phi is constant");
  if ((a.array() == 0.0).any()) fail(ErrorCode::Degenerate, "random potential: zero exponent has no star form");
  return StarSystem::hamiltonian(a, b.cwiseProduct(a), 0.0, 1.0, Vec::Ones(a.size()));
}

RandomPotential random_potential(std::size_t N, double bbar, double sigma_b, double sigma_a, Rng& rng) {
  if (N < 1) fail(ErrorCode::InvalidArgument, "N: must be >= 1");
  if (!(sigma_b >= 0.0) || !(sigma_a >= 0.0)) fail(ErrorCode::InvalidArgument, "sigma_a, sigma_b: must be >= 0");
  const Index n = static_cast<Index>(N);
  RandomPotential pot;
  pot.a.resize(n);
  pot.b.resize(n);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (Index k = 0; k < n; ++k) {
    pot.b(k) = bbar + sigma_b * nd(rng);
    pot.a(k) = sigma_a * nd(rng);
  }
  pot.degenerate = (pot.a.array() == 0.0).all();
  return pot;
}

RandomPotential random_potential(std::size_t N, double bbar, double sigma_b, double sigma_a, std::uint64_t seed) {
  Rng rng(seed);
  return random_potential(N, bbar, sigma_b, sigma_a, rng);
}

CensusOutcome census_classify(const RandomPotential& pot) {
  const StarSystem star = pot.to_star();
  if (!coercive_left(star) || !coercive_right(star)) return CensusOutcome::NotCoercive;
  const PotentialProfile prof = analyze_potential(star);
  if (prof.extrema.size() == 1 && prof.extrema.front().kind == Extremum::Kind::Min) return CensusOutcome::Stable;
  return CensusOutcome::ExtremaMismatch;
}

CensusReport stability_census(std::size_t N_low, std::size_t N_high, std::size_t trials, const EnsembleParams& params,
                              std::uint64_t seed, unsigned workers) {
  if (N_low < 1 || N_high < N_low) fail(ErrorCode::InvalidArgument, "N range: need 1 <= N_low <= N_high");
  if (trials < 1) fail(ErrorCode::InvalidArgument, "trials: must be >= 1");
  CensusReport rep;
  rep.sizes.assign(trials, 0);
  rep.outcomes = run_trials(trials, seed, workers, [&](std::size_t i, Rng& rng) -> std::uint8_t {
    std::uniform_int_distribution<std::size_t> nd(N_low, N_high);
    const std::size_t N = nd(rng);
    rep.sizes[i] = static_cast<std::uint32_t>(N);
    const RandomPotential pot = random_potential(N, params.bbar, params.sigma_b, params.sigma_a, rng);
    return static_cast<std::uint8_t>(census_classify(pot));
  });
  const auto stable = static_cast<std::size_t>(std::count(rep.outcomes.begin(), rep.outcomes.end(), std::uint8_t{0}));
  rep.unstable = wilson(trials - stable, trials);
  return rep;
}

StarSystem draw_mixed_star(std::size_t N, double mix, const EnsembleParams& params, Rng& rng) {
  if (N < 1) fail(ErrorCode::InvalidArgument, "N: must be >= 1");
  if (!(mix >= 0.0 && mix <= 1.0)) fail(ErrorCode::InvalidArgument, "mix: must lie in [0, 1]");
  const Index n = static_cast<Index>(N);
  std::normal_distribution<double> nd(1.0, params.sigma);
  Vec a(n), b(n);
  for (Index i = 0; i < n; ++i) {
    a(i) = std::abs(nd(rng));
    b(i) = std::abs(nd(rng));
    if (rng.uniform() < mix) b(i) = -b(i);
  }
  return StarSystem::hamiltonian(a, b, params.rbar, 1.0, Vec::Ones(n));
}

OrbitTypes orbit_types(const StarSystem& star) {
  OrbitTypes t;
  const PotentialProfile prof = analyze_potential(star);
  const auto& ex = prof.extrema;
  t.periodic = prof.minima() > 0;
  for (std::size_t k = 0; k < ex.size() && !t.soliton; ++k) {
    if (ex[k].kind != Extremum::Kind::Max) continue;
    const double E = ex[k].value + star.kinetic_min();
    for (std::size_t j : {k - 1, k + 1}) {
      if (j >= ex.size() || ex[j].kind != Extremum::Kind::Min) continue;
      OrbitOptions o;
      o.q_ref = ex[j].q;
      o.compute_period = false;
      try {
        if (classify_orbit(star, E, o).kind == OrbitClass::Kind::Soliton) t.soliton = true;
      } catch (const Error&) {
      }
    }
  }
  return t;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (k + 1));
  return splitmix64(s);
}

std::vector<CurvePoint> orbit_probability_curve(std::size_t N, const std::vector<double>& mix_grid, std::size_t trials,
                                                const EnsembleParams& params, std::uint64_t seed, unsigned workers) {
  if (trials < 1) fail(ErrorCode::InvalidArgument, "trials: must be >= 1");
  if (mix_grid.empty()) fail(ErrorCode::InvalidArgument, "mix grid: empty");
  std::vector<CurvePoint> out;
  for (std::size_t k = 0; k < mix_grid.size(); ++k) {
    const double mix = mix_grid[k];
    if (!(mix >= 0.0 && mix <= 1.0)) fail(ErrorCode::InvalidArgument, "mix: values must lie in [0, 1]");
    CurvePoint pt;
    pt.mix = mix;
    pt.outcomes = run_trials(trials, derive_seed(seed, k), workers, [&](std::size_t, Rng& rng) -> std::uint8_t {
      const OrbitTypes t = orbit_types(draw_mixed_star(N, mix, params, rng));
      return static_cast<std::uint8_t>((t.periodic ? 1 : 0) | (t.soliton ? 2 : 0));
    });
    std::size_t per = 0, sol = 0;
    for (auto o : pt.outcomes) {
      per += o & 1u;
      sol += (o >> 1) & 1u;
    }
    pt.periodic = wilson(per, trials);
    pt.soliton = wilson(sol, trials);
    out.push_back(std::move(pt));
  }
  return out;
}

ConeFrequencyReport cone_frequency(std::size_t M, std::size_t N, double r0, double sigma, std::size_t trials,
                                  std::uint64_t seed, unsigned workers) {
  if (M < 1 || N < M) fail(ErrorCode::InvalidArgument, "M, N: need 1 <= M <= N");
  if (!(sigma >= 0.0)) fail(ErrorCode::InvalidArgument, "sigma: must be >= 0");
  if (trials < 1) fail(ErrorCode::InvalidArgument, "trials: must be >= 1");
  const Index m = static_cast<Index>(M), n = static_cast<Index>(N);
  ConeFrequencyReport rep;
  rep.outcomes = run_trials(trials, seed, workers, [&](std::size_t, Rng& rng) -> std::uint8_t {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vec rbar(m);
    for (Index j = 0; j < m; ++j) rbar(j) = r0 + sigma * nd(rng);
    Mat B(m, n);
    for (Index k = 0; k < n; ++k) {
      for (Index j = 0; j < m; ++j) B(j, k) = nd(rng);
    }
    return cone_condition(B, rbar).certified() ? 1 : 0;
  });
  const auto hits = static_cast<std::size_t>(std::count(rep.outcomes.begin(), rep.outcomes.end(), std::uint8_t{1}));
  rep.feasible = wilson(hits, trials);
  return rep;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::InvalidArgument, "spearman: need two equal series of length >= 2");
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace hlv
