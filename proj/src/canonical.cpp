#include "hlv/canonical.hpp"

#include <cmath>
#include <deque>

namespace hlv {

std::optional<HamiltonianFactors> find_factors(const Mat& A, const Mat& B, double tol) {
  const Index N = A.rows(), M = A.cols();
  if (B.rows() != M || B.cols() != N) fail(ErrorCode::InvalidArgument, "B: shape must be the transpose of A");
  if (A.isZero(0.0) && B.isZero(0.0)) fail(ErrorCode::Degenerate, "A, B: zero matrices leave the factors undetermined");

  // Nodes 0..N-1 carry rho, N..N+M-1 carry sigma.
  struct Edge {
    Index to;
    double ratio;  // value(to) = ratio * value(from)
  };
  std::vector<std::vector<Edge>> adj(static_cast<std::size_t>(N + M));
  for (Index k = 0; k < N; ++k) {
    for (Index l = 0; l < M; ++l) {
      const double a = A(k, l), b = B(l, k);
      if (a == 0.0 && b == 0.0) continue;
      if (a == 0.0 || b == 0.0) return std::nullopt;
      // sigma_l b = rho_k a
      adj[static_cast<std::size_t>(N + l)].push_back({k, b / a});
      adj[static_cast<std::size_t>(k)].push_back({N + l, a / b});
    }
  }

  Vec value = Vec::Zero(N + M);
  std::vector<int> comp(static_cast<std::size_t>(N + M), -1);
  std::vector<std::vector<Index>> members;
  auto flood = [&](Index root) {
    const int id = static_cast<int>(members.size());
    members.emplace_back();
    value(root) = 1.0;
    comp[static_cast<std::size_t>(root)] = id;
    std::deque<Index> queue{root};
    while (!queue.empty()) {
      const Index u = queue.front();
      queue.pop_front();
      members.back().push_back(u);
      for (const Edge& e : adj[static_cast<std::size_t>(u)]) {
        if (comp[static_cast<std::size_t>(e.to)] < 0) {
          comp[static_cast<std::size_t>(e.to)] = id;
          value(e.to) = e.ratio * value(u);
          queue.push_back(e.to);
        }
      }
    }
  };
  // Anchor at sigma nodes first so that sigma_1 = 1 and every sigma-bearing component has a unit sigma.
  for (Index l = 0; l < M; ++l) {
    if (comp[static_cast<std::size_t>(N + l)] < 0) flood(N + l);
  }
  for (Index k = 0; k < N; ++k) {
    if (comp[static_cast<std::size_t>(k)] < 0) flood(k);
  }

  HamiltonianFactors f;
  f.rho = value.head(N);
  f.sigma = value.tail(M);
  double worst = 0.0;
  for (Index k = 0; k < N; ++k) {
    for (Index l = 0; l < M; ++l) {
      const double lhs = f.sigma(l) * B(l, k), rhs = f.rho(k) * A(k, l);
      if (lhs == 0.0 && rhs == 0.0) continue;
      worst = std::max(worst, std::abs(lhs - rhs) / (std::abs(lhs) + std::abs(rhs) + 1e-300));
    }
  }
  f.max_residual = worst;
  if (worst > tol) return std::nullopt;

  // Each component can be flipped as a whole except the one holding sigma_1.
  bool positive = true;
  Vec flipped = value;
  for (std::size_t c = 0; c < members.size(); ++c) {
    bool any_pos = false, any_neg = false;
    for (Index u : members[c]) (value(u) > 0.0 ? any_pos : any_neg) = true;
    if (any_pos && any_neg) {
      positive = false;
    } else if (any_neg) {
      const bool holds_sigma1 = M > 0 && comp[static_cast<std::size_t>(N)] == static_cast<int>(c);
      if (holds_sigma1) positive = false;
      else for (Index u : members[c]) flipped(u) = -value(u);
    }
  }
  f.positive = positive;
  if (positive) {
    f.rho = flipped.head(N);
    f.sigma = flipped.tail(M);
  }
  return f;
}

CanonicalSystem CanonicalSystem::make(const InteractionSystem& sys, const Vec& mu, double tol) {
  sys.validate();
  if (mu.size() != sys.m()) fail(ErrorCode::InvalidArgument, "mu: length must equal M");
  for (Index j = 0; j < mu.size(); ++j) {
    if (!(mu(j) > 0.0) || !std::isfinite(mu(j))) fail(ErrorCode::InvalidArgument, "mu: entries must be positive");
  }
  auto f = find_factors(sys.A, sys.B, tol);
  if (!f) fail(ErrorCode::NotApplicable, "A, B: no factorization sigma_l b_lk = rho_k a_kl exists");
  CanonicalSystem cs;
  cs.base = sys;
  cs.factors = *f;
  cs.mu = mu;
  cs.gamma_bar = -sys.r + sys.A * mu;
  return cs;
}

Vec CanonicalSystem::balancing_mu(const InteractionSystem& sys) {
  return sys.A.completeOrthogonalDecomposition().solve(sys.r);
}

bool CanonicalSystem::reduction_valid(double tol) const {
  if (!base.limitation_free()) return false;
  for (Index i = 0; i < gamma_bar.size(); ++i) {
    if (std::abs(gamma_bar(i)) > tol * std::max(1.0, std::abs(base.r(i)))) return false;
  }
  return true;
}

namespace {

Vec exponents(const CanonicalSystem& sys, const Vec& q) {
  return sys.base.A * q.cwiseQuotient(sys.factors.sigma);
}

Vec guarded_exp(const Vec& z) {
  Vec out(z.size());
  for (Index i = 0; i < z.size(); ++i) out(i) = hlv::guarded_exp(z(i));
  return out;
}

void check_state(const CanonicalSystem& sys, const CanonicalState& s) {
  if (s.q.size() != sys.base.m()) fail(ErrorCode::InvalidArgument, "q: length must equal M");
  if (s.p.size() != sys.base.m()) fail(ErrorCode::InvalidArgument, "p: length must equal M");
  if (s.C.size() != sys.base.n()) fail(ErrorCode::InvalidArgument, "C: length must equal N");
  if (!s.q.allFinite() || !s.p.allFinite() || !s.C.allFinite()) fail(ErrorCode::InvalidArgument, "state: non-finite entry");
  if (!(s.C.array() > 0.0).all()) fail(ErrorCode::InvalidArgument, "C: entries must be positive");
}

}  // namespace

CanonicalState to_canonical(const CanonicalSystem& sys, const Vec& x0, const Vec& v0) {
  if (x0.size() != sys.base.n()) fail(ErrorCode::InvalidArgument, "x0: length must equal N");
  if (v0.size() != sys.base.m()) fail(ErrorCode::InvalidArgument, "v0: length must equal M");
  if (!(x0.array() > 0.0).all() || !x0.allFinite()) fail(ErrorCode::InvalidArgument, "x0: abundances must be positive");
  if (!(v0.array() > 0.0).all() || !v0.allFinite()) fail(ErrorCode::InvalidArgument, "v0: abundances must be positive");
  CanonicalState s;
  s.q = Vec::Zero(sys.base.m());
  s.p = v0.array().log().matrix();
  s.C = x0;
  return s;
}

void from_canonical(const CanonicalSystem& sys, const CanonicalState& s, Vec& x, Vec& v) {
  check_state(sys, s);
  x = s.C.cwiseProduct(guarded_exp(exponents(sys, s.q)));
  v = guarded_exp(s.p);
}

CanonicalRates transformed_rhs(const CanonicalSystem& sys, const CanonicalState& s) {
  check_state(sys, s);
  const Vec e = guarded_exp(exponents(sys, s.q));
  const Vec ep = guarded_exp(s.p);
  const Vec ce = s.C.cwiseProduct(e);
  CanonicalRates r;
  r.dq = sys.factors.sigma.cwiseProduct(ep - sys.mu);
  r.dp = sys.base.rbar - sys.base.B * ce - sys.base.D * ep;
  r.dC = s.C.cwiseProduct(sys.gamma_bar - sys.base.Gamma * ce);
  return r;
}

double potential_energy(const CanonicalSystem& sys, const Vec& C, const Vec& q) {
  const Vec e = guarded_exp(exponents(sys, q));
  return sys.factors.rho.cwiseProduct(C).dot(e) - sys.base.rbar.dot(q);
}

double kinetic_energy(const CanonicalSystem& sys, const Vec& p) {
  double s = 0.0;
  for (Index k = 0; k < p.size(); ++k) s += sys.factors.sigma(k) * (hlv::guarded_exp(p(k)) - sys.mu(k) * p(k));
  return s;
}

double hamiltonian(const CanonicalSystem& sys, const CanonicalState& s) {
  check_state(sys, s);
  return potential_energy(sys, s.C, s.q) + kinetic_energy(sys, s.p);
}

Vec potential_gradient(const CanonicalSystem& sys, const Vec& C, const Vec& q) {
  const Vec w = sys.factors.rho.cwiseProduct(C).cwiseProduct(guarded_exp(exponents(sys, q)));
  return (sys.base.A.transpose() * w).cwiseQuotient(sys.factors.sigma) - sys.base.rbar;
}

Vec kinetic_gradient(const CanonicalSystem& sys, const Vec& p) {
  return sys.factors.sigma.cwiseProduct(guarded_exp(p) - sys.mu);
}

double motion_integral(const Vec& x, double v, const Vec& m, double mu, const StarSystem& star) {
  const Index n = star.size();
  if (x.size() != n || m.size() != n) fail(ErrorCode::InvalidArgument, "x, m: length must equal the star size");
  if (!(v > 0.0) || !(x.array() > 0.0).all()) fail(ErrorCode::InvalidArgument, "x, v: abundances must be positive");
  if (!(m.array() > 0.0).all() || std::abs(m.sum() - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "m: weights must be positive and sum to 1");
  }
  double e = v - mu * std::log(v);
  for (Index i = 0; i < n; ++i) {
    if (star.a(i) == 0.0) fail(ErrorCode::InvalidArgument, "a: entry " + std::to_string(i) + " is zero");
    const double rho = star.b(i) / star.a(i);
    e += rho * x(i) - star.rbar * m(i) / star.a(i) * std::log(x(i));
  }
  return e;
}

std::optional<StarEquilibrium> star_equilibrium(const Vec& a, const Vec& b, const Vec& r,
                                                const Vec& gamma, double d, double rbar) {
  const Index n = a.size();
  if (b.size() != n || r.size() != n || gamma.size() != n) fail(ErrorCode::InvalidArgument, "star: vector lengths differ");
  if (!(d >= 0.0)) fail(ErrorCode::InvalidArgument, "d: must be nonnegative");
  double num = rbar, den = d;
  for (Index i = 0; i < n; ++i) {
    if (a(i) == 0.0) fail(ErrorCode::InvalidArgument, "a: entry " + std::to_string(i) + " is zero");
    if (gamma(i) == 0.0) fail(ErrorCode::InvalidArgument, "gamma: entry " + std::to_string(i) + " is zero");
    const double mu_i = r(i) / a(i);
    const double theta = b(i) * a(i) / gamma(i);
    num += mu_i * theta;
    den += theta;
  }
  if (den == 0.0) return std::nullopt;
  StarEquilibrium eq;
  eq.vbar = num / den;
  eq.xbar.resize(n);
  for (Index i = 0; i < n; ++i) eq.xbar(i) = a(i) * (eq.vbar - r(i) / a(i)) / gamma(i);
  if (!(eq.vbar > 0.0) || !(eq.xbar.array() > 0.0).all()) return std::nullopt;
  return eq;
}

double lyapunov_function(const Vec& a, const Vec& b, const StarEquilibrium& eq, const Vec& x, double v) {
  double V = v - eq.vbar * std::log(v);
  for (Index i = 0; i < x.size(); ++i) V += b(i) / a(i) * (x(i) - eq.xbar(i) * std::log(x(i)));
  return V;
}

}  // namespace hlv
