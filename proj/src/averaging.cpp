#include "hlv/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hlv {

namespace {

std::size_t bracket(const std::vector<double>& tau, double t) {
  const auto it = std::upper_bound(tau.begin(), tau.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - tau.begin());
  return std::clamp<std::size_t>(k, 1, tau.size() - 1) - 1;
}

void check_table(const std::vector<double>& tau, std::size_t n) {
  if (tau.size() < 2 || tau.size() != n) fail(ErrorCode::InvalidArgument, "table: need >= 2 rows of equal length");
  for (std::size_t i = 1; i < tau.size(); ++i) {
    if (!(tau[i] > tau[i - 1])) fail(ErrorCode::InvalidArgument, "table: tau must increase strictly");
  }
}

}  // namespace

VecFn linear_table(std::vector<double> tau, std::vector<Vec> values) {
  check_table(tau, values.size());
  return [tau = std::move(tau), values = std::move(values)](double t) -> Vec {
    if (t <= tau.front()) return values.front();
    if (t >= tau.back()) return values.back();
    const std::size_t k = bracket(tau, t);
    const double w = (t - tau[k]) / (tau[k + 1] - tau[k]);
    return (1.0 - w) * values[k] + w * values[k + 1];
  };
}

ScalarFn linear_table(std::vector<double> tau, std::vector<double> values) {
  check_table(tau, values.size());
  return [tau = std::move(tau), values = std::move(values)](double t) {
    if (t <= tau.front()) return values.front();
    if (t >= tau.back()) return values.back();
    const std::size_t k = bracket(tau, t);
    const double w = (t - tau[k]) / (tau[k + 1] - tau[k]);
    return (1.0 - w) * values[k] + w * values[k + 1];
  };
}

Index SlowEnvironment::size() const { return gamma.size(); }

void SlowEnvironment::validate() const {
  if (!a || !b || !rbar) fail(ErrorCode::InvalidArgument, "environment: a, b and rbar are required");
  if (!(epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "epsilon: must be positive");
  if (!(beta >= 0.0)) fail(ErrorCode::InvalidArgument, "beta: must be >= 0");
  if (!(mu > 0.0)) fail(ErrorCode::InvalidArgument, "mu: must be positive");
  if (gamma_hat.size() != gamma.size()) fail(ErrorCode::InvalidArgument, "gamma_hat: length must equal gamma");
  const Vec a0 = a(0.0), b0 = b(0.0);
  if (a0.size() != gamma.size() || b0.size() != gamma.size()) {
    fail(ErrorCode::InvalidArgument, "a, b: length must equal gamma");
  }
  if (!(fd_step > 0.0)) fail(ErrorCode::InvalidArgument, "fd_step: must be positive");
}

StarSystem SlowEnvironment::star_at(double tau, const Vec& Cbar) const {
  return StarSystem::hamiltonian(a(tau), b(tau), rbar(tau), mu, Cbar);
}

Vec SlowEnvironment::a_rate(double tau) const {
  if (da) return da(tau);
  return (a(tau + fd_step) - a(tau - fd_step)) / (2.0 * fd_step);
}

Vec SlowEnvironment::b_rate(double tau) const {
  if (db) return db(tau);
  return (b(tau + fd_step) - b(tau - fd_step)) / (2.0 * fd_step);
}

double SlowEnvironment::rbar_rate(double tau) const {
  if (drbar) return drbar(tau);
  return (rbar(tau + fd_step) - rbar(tau - fd_step)) / (2.0 * fd_step);
}

SlowEnvironment SlowEnvironment::frozen(const StarSystem& star, double epsilon, double beta, double dbar,
                                        Vec gamma_hat, Vec gamma) {
  SlowEnvironment env;
  const Vec a = star.a, b = star.b;
  const double rb = star.rbar;
  const Index n = star.size();
  env.a = [a](double) { return a; };
  env.b = [b](double) { return b; };
  env.rbar = [rb](double) { return rb; };
  env.da = [n](double) { return Vec(Vec::Zero(n)); };
  env.db = [n](double) { return Vec(Vec::Zero(n)); };
  env.drbar = [](double) { return 0.0; };
  env.mu = star.mu;
  env.epsilon = epsilon;
  env.beta = beta;
  env.dbar = dbar;
  env.gamma_hat = std::move(gamma_hat);
  env.gamma = std::move(gamma);
  return env;
}

double period_average(const StarSystem& star, double E, const std::function<double(double, double)>& f,
                      const OrbitOptions& opts) {
  OrbitOptions o = opts;
  o.compute_period = false;
  const OrbitClass oc = classify_orbit(star, E, o);
  if (oc.kind == OrbitClass::Kind::Equilibrium) return f(oc.q_minus, std::log(star.mu));
  if (oc.kind != OrbitClass::Kind::Periodic) {
    fail(ErrorCode::NotApplicable, "period_average: orbit is " + std::string(to_string(oc.kind)));
  }
  const double level = star.level(E);
  const double T = orbit_integral(star, level, oc.q_minus, oc.q_plus, [](double, double) { return 1.0; }).first;
  return orbit_integral(star, level, oc.q_minus, oc.q_plus, f).first / T;
}

namespace {

constexpr double kAvgTol = 1e-9;

struct Well {
  bool ok = false;
  OrbitClass orbit;
  double q_min = 0.0;     // deepest minimum inside the orbit
  double E_min = 0.0;     // energy of that minimum
  double barrier = std::numeric_limits<double>::infinity();
  std::vector<double> barriers;
};

// Orbit of energy E in the well holding q_ref, with E clamped up to the well bottom.
Well locate(const StarSystem& star, double& E, std::optional<double> q_ref) {
  Well w;
  const PotentialProfile prof = analyze_potential(star);
  const double psi_min = star.kinetic_min();
  for (const auto& e : prof.extrema) {
    if (e.kind == Extremum::Kind::Max) w.barriers.push_back(e.value + psi_min);
  }
  // Basin of q_ref, or the deepest minimum.
  std::optional<Extremum> bottom;
  if (q_ref) {
    const Extremum* lm = nullptr;
    const Extremum* rm = nullptr;
    for (const auto& e : prof.extrema) {
      if (e.kind != Extremum::Kind::Max) continue;
      if (e.q <= *q_ref) lm = &e;
      if (e.q > *q_ref && !rm) rm = &e;
    }
    for (const auto& e : prof.extrema) {
      if (e.kind == Extremum::Kind::Min && (!lm || e.q > lm->q) && (!rm || e.q < rm->q)) bottom = e;
    }
  } else {
    for (const auto& e : prof.extrema) {
      if (e.kind == Extremum::Kind::Min && (!bottom || e.value < bottom->value)) bottom = e;
    }
  }
  if (!bottom) return w;
  const double E_bottom = bottom->value + psi_min;
  if (E < E_bottom) E = E_bottom;
  OrbitOptions o;
  o.q_ref = bottom->q;
  o.compute_period = false;
  try {
    w.orbit = classify_orbit(star, E, o);
  } catch (const Error&) {
    return w;
  }
  if (w.orbit.kind != OrbitClass::Kind::Periodic && w.orbit.kind != OrbitClass::Kind::Equilibrium) return w;
  w.ok = true;
  w.q_min = bottom->q;
  w.E_min = E_bottom;
  for (const auto& e : prof.extrema) {
    const bool inside = e.q >= w.orbit.q_minus && e.q <= w.orbit.q_plus;
    if (e.kind == Extremum::Kind::Min && inside && e.value + psi_min < w.E_min) {
      w.E_min = e.value + psi_min;
      w.q_min = e.q;
    }
  }
  // Nearest maxima outside the orbit on each side.
  double left = std::numeric_limits<double>::infinity(), right = left;
  for (const auto& e : prof.extrema) {
    if (e.kind != Extremum::Kind::Max) continue;
    if (e.q < w.orbit.q_minus) left = e.value + psi_min;
    if (e.q > w.orbit.q_plus && !std::isfinite(right)) right = e.value + psi_min;
  }
  w.barrier = std::min(left, right);
  return w;
}

// Explicit tau-derivative of Phi at fixed q and C.
double phi_tau(const Vec& a, const Vec& b, const Vec& C, const Vec& da, const Vec& db, double drbar, double q) {
  double s = -drbar * q;
  for (Index i = 0; i < a.size(); ++i) {
    const double e = C(i) * guarded_exp(a(i) * q);
    s += e * (db(i) / a(i) - b(i) * da(i) / (a(i) * a(i)) + b(i) / a(i) * q * da(i));
  }
  return s;
}

AveragedRates rates_on(const SlowEnvironment& env, const StarSystem& star, double tau, double E, const Well& w) {
  const Index n = star.size();
  const Vec a = star.a, b = star.b, C = star.C;
  const Vec da = env.a_rate(tau), db = env.b_rate(tau);
  const double drbar = env.rbar_rate(tau);
  const double mu = star.mu;

  auto f_S1 = [&](double, double p) {
    const double v = std::exp(p);
    return -env.dbar * v * (v - mu);
  };
  auto f_S2 = [&](double q, double) { return phi_tau(a, b, C, da, db, drbar, q); };
  auto f_S3 = [&](double q, double) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double e = guarded_exp(a(i) * q);
      const double wt = C(i) * (env.beta * env.gamma_hat(i) - env.beta * env.gamma(i) * C(i) * e - da(i) * q);
      s += b(i) / a(i) * e * wt;
    }
    return s;
  };

  AveragedRates out;
  out.theta.resize(n);
  if (w.orbit.kind == OrbitClass::Kind::Equilibrium) {
    const double q = w.q_min, p = std::log(mu);
    out.S1 = f_S1(q, p);
    out.S2 = f_S2(q, p);
    out.S3 = f_S3(q, p);
    for (Index i = 0; i < n; ++i) out.theta(i) = guarded_exp(a(i) * q);
    out.Q_mean = q;
  } else {
    const double level = star.level(E);
    const double lo = w.orbit.q_minus, hi = w.orbit.q_plus;
    const double T = orbit_integral(star, level, lo, hi, [](double, double) { return 1.0; }, kAvgTol).first;
    auto avg = [&](const std::function<double(double, double)>& f) {
      return orbit_integral(star, level, lo, hi, f, kAvgTol).first / T;
    };
    out.period = T;
    out.S1 = avg(f_S1);
    out.S2 = avg(f_S2);
    out.S3 = avg(f_S3);
    for (Index i = 0; i < n; ++i) {
      const double ai = a(i);
      out.theta(i) = avg([ai](double q, double) { return guarded_exp(ai * q); });
    }
    out.Q_mean = avg([](double q, double) { return q; });
  }
  out.W.resize(n);
  for (Index i = 0; i < n; ++i) {
    out.W(i) = C(i) * (env.beta * env.gamma_hat(i) - env.beta * env.gamma(i) * C(i) * out.theta(i) -
                       da(i) * out.Q_mean);
  }
  out.dC = out.W;
  out.dE = out.S1 + out.S2 + out.S3;
  return out;
}

}  // namespace

AveragedRates averaged_rhs(const SlowEnvironment& env, const AveragedState& state, std::optional<double> q_ref) {
  env.validate();
  if (state.Cbar.size() != env.size()) fail(ErrorCode::InvalidArgument, "Cbar: length must equal N");
  if (!(state.Cbar.array() > 0.0).all()) fail(ErrorCode::InvalidArgument, "Cbar: entries must be positive");
  const StarSystem star = env.star_at(state.tau, state.Cbar);
  double E = state.E;
  const Well w = locate(star, E, q_ref);
  if (!w.ok || E >= w.barrier) {
    AveragedRates lost;
    lost.orbit_lost = true;
    return lost;
  }
  return rates_on(env, star, state.tau, E, w);
}

std::string_view to_string(RegimeEventKind k) {
  switch (k) {
    case RegimeEventKind::Burst: return "burst";
    case RegimeEventKind::Stabilized: return "stabilized";
    case RegimeEventKind::EnvironmentDestabilized: return "environment-destabilized";
  }
  return "stabilized";
}

namespace {

// y = (E, ln Cbar).
struct SlowStep {
  bool ok = false;
  Vec y;
  AveragedRates first;  // rates at the start of the step
};

struct Deriv {
  bool ok = false;
  Vec dy;
  AveragedRates rates;
  double q_min = 0.0;
};

Deriv slow_deriv(const SlowEnvironment& env, double tau, const Vec& y, double q_ref) {
  Deriv d;
  const Index n = env.size();
  const Vec C = y.tail(n).array().exp().matrix();
  if (!C.allFinite()) return d;
  const StarSystem star = env.star_at(tau, C);
  double E = y(0);
  Well w;
  try {
    w = locate(star, E, q_ref);
  } catch (const Error&) {
    return d;
  }
  if (!w.ok || E >= w.barrier) return d;
  try {
    d.rates = rates_on(env, star, tau, E, w);
  } catch (const Error&) {
    return d;
  }
  d.dy.resize(n + 1);
  d.dy(0) = d.rates.dE;
  d.dy.tail(n) = d.rates.W.cwiseQuotient(C);
  d.q_min = w.q_min;
  d.ok = d.dy.allFinite();
  return d;
}

SlowStep rk4(const SlowEnvironment& env, double tau, const Vec& y, double h, double q_ref) {
  SlowStep s;
  const Deriv k1 = slow_deriv(env, tau, y, q_ref);
  if (!k1.ok) return s;
  const Deriv k2 = slow_deriv(env, tau + 0.5 * h, y + 0.5 * h * k1.dy, q_ref);
  if (!k2.ok) return s;
  const Deriv k3 = slow_deriv(env, tau + 0.5 * h, y + 0.5 * h * k2.dy, q_ref);
  if (!k3.ok) return s;
  const Deriv k4 = slow_deriv(env, tau + h, y + h * k3.dy, q_ref);
  if (!k4.ok) return s;
  s.y = y + (h / 6.0) * (k1.dy + 2.0 * k2.dy + 2.0 * k3.dy + k4.dy);
  s.first = k1.rates;
  // The end state must still sit in a periodic orbit below the barrier.
  s.ok = slow_deriv(env, tau + h, s.y, q_ref).ok;
  return s;
}

}  // namespace

AveragedRun evolve_averaged(const SlowEnvironment& env, const AveragedState& init, double tau_end,
                            const EvolveOptions& opts) {
  env.validate();
  if (!(tau_end > init.tau)) fail(ErrorCode::InvalidArgument, "tau_end: must exceed the initial tau");
  if (!(opts.dtau > 0.0)) fail(ErrorCode::InvalidArgument, "dtau: must be positive");
  const Index n = env.size();
  if (init.Cbar.size() != n || !(init.Cbar.array() > 0.0).all()) {
    fail(ErrorCode::InvalidArgument, "Cbar: need N positive entries");
  }

  AveragedRun run;
  run.finite_differences = !env.analytic_derivatives();
  double tau = init.tau;
  Vec y(n + 1);
  y << init.E, init.Cbar.array().log().matrix();

  auto record = [&](double t, const Vec& yy, double q_ref) {
    const Vec C = yy.tail(n).array().exp().matrix();
    const StarSystem star = env.star_at(t, C);
    double E = yy(0);
    const Well w = locate(star, E, q_ref);
    run.states.push_back({t, E, C});
    run.barrier.push_back(w.barrier);
    run.all_barriers.push_back(w.barriers);
    return w;
  };

  double q_ref;
  {
    const StarSystem star = env.star_at(tau, init.Cbar);
    double E = init.E;
    const Well w = locate(star, E, opts.q_ref);
    if (!w.ok) fail(ErrorCode::NotApplicable, "evolve_averaged: initial state is not a periodic orbit");
    if (init.E < E - 1e-12 * std::max(1.0, std::abs(E))) {
      fail(ErrorCode::InvalidArgument, "E0: below the well minimum " + std::to_string(E));
    }
    if (E >= w.barrier) fail(ErrorCode::NotApplicable, "evolve_averaged: initial energy is above the barrier");
    q_ref = w.q_min;
    y(0) = E;
  }
  record(tau, y, q_ref);

  bool burst = false;
  while (tau < tau_end - 1e-14 * std::max(1.0, std::abs(tau_end))) {
    const double h = std::min(opts.dtau, tau_end - tau);
    SlowStep step = rk4(env, tau, y, h, q_ref);
    if (step.ok) {
      tau += h;
      y = step.y;
      const Well w = record(tau, y, q_ref);
      q_ref = w.q_min;
      continue;
    }
    // Bisect for the largest sub-step that keeps the orbit trapped.
    double lo = 0.0, hi = h;
    SlowStep good;
    while (hi - lo > opts.crossing_tol * std::max(1.0, std::abs(tau))) {
      const double mid = 0.5 * (lo + hi);
      SlowStep s = rk4(env, tau, y, mid, q_ref);
      if (s.ok) {
        lo = mid;
        good = std::move(s);
      } else {
        hi = mid;
      }
    }
    const Deriv at = slow_deriv(env, tau, y, q_ref);
    if (good.ok) {
      y = good.y;
    }
    const double tau_cross = tau + hi;
    tau += lo;
    if (lo > 0.0) record(tau, y, q_ref);
    const double S1 = at.ok ? at.rates.S1 : 0.0, S2 = at.ok ? at.rates.S2 : 0.0;
    run.events.push_back({tau_cross, RegimeEventKind::Burst, S1, S2});
    if (S2 > std::abs(S1)) run.events.push_back({tau_cross, RegimeEventKind::EnvironmentDestabilized, S1, S2});
    burst = true;

    // Continue only when the energy now spans a larger bounded well.
    const Vec C = y.tail(n).array().exp().matrix();
    const StarSystem star = env.star_at(tau_cross, C);
    double E = y(0) + 1e-9 * std::max(1.0, std::abs(y(0)));
    OrbitOptions o;
    o.q_ref = q_ref;
    o.compute_period = false;
    OrbitClass oc;
    try {
      oc = classify_orbit(star, E, o);
    } catch (const Error&) {
      oc.kind = OrbitClass::Kind::Unbounded;
    }
    if (oc.kind != OrbitClass::Kind::Periodic) {
      run.finished = false;
      break;
    }
    // Step over the separatrix and resume tracking in the merged well.
    const double h_rest = std::min(opts.dtau, tau_end - tau);
    SlowStep over = rk4(env, tau_cross, y, std::max(h_rest - hi, 0.1 * opts.dtau), q_ref);
    if (!over.ok) {
      run.finished = false;
      break;
    }
    tau = tau_cross + std::max(h_rest - hi, 0.1 * opts.dtau);
    y = over.y;
    const Well w = record(tau, y, q_ref);
    q_ref = w.q_min;
  }
  if (!burst) run.events.push_back({run.states.back().tau, RegimeEventKind::Stabilized, 0.0, 0.0});
  return run;
}

double mu_balance(const Vec& a, const Vec& b, const Vec& r, const Vec& gamma) {
  const Index n = a.size();
  if (b.size() != n || r.size() != n || gamma.size() != n) fail(ErrorCode::InvalidArgument, "a, b, r, gamma: lengths differ");
  if ((gamma.array() == 0.0).any()) fail(ErrorCode::InvalidArgument, "gamma: entries must be nonzero");
  const double num = (b.array() * r.array() / gamma.array()).sum();
  const double den = (b.array() * a.array() / gamma.array()).sum();
  if (den == 0.0) fail(ErrorCode::Degenerate, "mu_balance: sum b_k a_k / gamma_k vanishes");
  return num / den;
}

Trajectory simulate_environment(const SlowEnvironment& env, double q0, double p0, const Vec& C0, double t_end,
                                std::size_t samples, double rtol, double atol) {
  env.validate();
  const Index n = env.size();
  if (C0.size() != n || !(C0.array() > 0.0).all()) fail(ErrorCode::InvalidArgument, "C0: need N positive entries");
  const double eps = env.epsilon;
  OdeRhs rhs = [&](double t, const Vec& s, Vec& ds) {
    const double tau = eps * t;
    const Vec a = env.a(tau), b = env.b(tau), da = env.a_rate(tau);
    const double q = s(0), p = s(1);
    const double v = std::exp(p);
    ds.resize(n + 2);
    ds(0) = v - env.mu;
    double sum = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double x = std::exp(s(2 + i) + a(i) * q);
      sum += b(i) * x;
      ds(2 + i) = eps * (env.beta * env.gamma_hat(i) - env.beta * env.gamma(i) * x - da(i) * q);
    }
    ds(1) = env.rbar(tau) - sum - eps * env.dbar * v;
  };
  Vec y(n + 2);
  y << q0, p0, C0.array().log().matrix();

  Trajectory tr;
  tr.dim = static_cast<std::size_t>(n + 2);
  tr.meta.integrator = "dopri5-environment";
  tr.meta.rtol = rtol;
  tr.meta.atol = atol;
  tr.meta.columns = {"q", "p"};
  for (Index i = 0; i < n; ++i) tr.meta.columns.push_back("C" + std::to_string(i + 1));
  AdaptiveOptions opts;
  opts.rtol = rtol;
  opts.atol = atol;
  opts.stop = [&](double t, const Vec& s) {
    const Vec a = env.a(eps * t);
    for (Index i = 0; i < n; ++i) {
      if (std::abs(s(2 + i) + a(i) * s(0)) > kExpLimit) return true;
    }
    return std::abs(s(1)) > kExpLimit;
  };
  Vec out(n + 2);
  const AdaptiveOutcome res =
      integrate_adaptive(rhs, 0.0, y, uniform_samples(t_end, samples), opts, [&](double t, const Vec& s) {
        out << s(0), s(1), s.tail(n).array().exp().matrix();
        const StarSystem star = env.star_at(eps * t, out.tail(n));
        double H;
        try {
          H = star.energy(s(0), s(1));
        } catch (const Error&) {
          return;
        }
        tr.push(t, out);
        tr.energy.push_back(H);
      });
  tr.meta.stats = res.stats;
  if (res.stopped) {
    tr.meta.escaped = true;
    tr.meta.escape_time = res.t_end;
  }
  return tr;
}

BurstReport detect_bursts(const std::vector<double>& times, const std::vector<double>& x,
                          std::optional<double> prominence, double small_period) {
  if (times.size() != x.size()) fail(ErrorCode::InvalidArgument, "detect_bursts: times and signal differ in length");
  if (!(small_period > 0.0)) fail(ErrorCode::InvalidArgument, "small_period: must be positive");
  BurstReport rep;
  const std::size_t n = x.size();
  if (n < 3) return rep;

  std::vector<double> dts(n - 1);
  for (std::size_t i = 1; i < n; ++i) dts[i - 1] = times[i] - times[i - 1];
  std::nth_element(dts.begin(), dts.begin() + static_cast<std::ptrdiff_t>(dts.size() / 2), dts.end());
  const double dt = dts[dts.size() / 2];
  if (small_period / dt < 20.0) {
    rep.sparse_sampling = true;
    rep.warning = "fewer than 20 samples per small-oscillation period";
  }

  if (prominence) {
    rep.prominence = *prominence;
  } else {
    std::vector<double> tmp(x);
    const auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(tmp.begin(), mid, tmp.end());
    const double med = *mid;
    for (auto& v : tmp) v = std::abs(v - med);
    std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(n / 2), tmp.end());
    rep.prominence = 5.0 * tmp[n / 2];
  }

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(x[i] > x[i - 1] && x[i] >= x[i + 1])) continue;
    double left_min = x[i];
    for (std::size_t j = i; j-- > 0;) {
      if (x[j] > x[i]) break;
      left_min = std::min(left_min, x[j]);
    }
    double right_min = x[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (x[j] > x[i]) break;
      right_min = std::min(right_min, x[j]);
    }
    const double prom = x[i] - std::max(left_min, right_min);
    if (prom > rep.prominence) {
      rep.times.push_back(times[i]);
      rep.heights.push_back(x[i]);
    }
  }
  for (std::size_t k = 1; k < rep.times.size(); ++k) rep.intervals.push_back(rep.times[k] - rep.times[k - 1]);
  if (!rep.intervals.empty()) {
    double mean = 0.0;
    for (double v : rep.intervals) mean += v;
    mean /= static_cast<double>(rep.intervals.size());
    rep.rare_regime = mean > 10.0 * small_period;
  }
  return rep;
}

BurstReport detect_bursts(const Trajectory& traj, std::size_t index, std::optional<double> prominence,
                          double small_period) {
  if (index >= traj.dim) fail(ErrorCode::InvalidArgument, "detect_bursts: column index out of range");
  std::vector<double> x(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) x[i] = traj.at(i, index);
  return detect_bursts(traj.times, x, prominence, small_period);
}

}  // namespace hlv
