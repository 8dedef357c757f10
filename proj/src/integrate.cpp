#include "hlv/integrate.hpp"

#include <algorithm>
#include <cmath>

namespace hlv {

Vec Trajectory::row(std::size_t i) const {
  Vec v(static_cast<Index>(dim));
  for (std::size_t j = 0; j < dim; ++j) v(static_cast<Index>(j)) = at(i, j);
  return v;
}

Vec Trajectory::column(std::size_t j) const {
  Vec v(static_cast<Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) v(static_cast<Index>(i)) = at(i, j);
  return v;
}

void Trajectory::push(double t, std::span<const double> y) {
  if (y.size() != dim) fail(ErrorCode::InvalidArgument, "trajectory: state dimension mismatch");
  if (!times.empty() && !(t > times.back())) fail(ErrorCode::InvalidArgument, "trajectory: times must increase");
  times.push_back(t);
  data.insert(data.end(), y.begin(), y.end());
}

std::vector<double> uniform_samples(double t_end, std::size_t count) {
  if (!(t_end > 0.0)) fail(ErrorCode::InvalidArgument, "t_end: must be positive");
  if (count < 2) fail(ErrorCode::InvalidArgument, "samples: need at least 2");
  std::vector<double> ts(count);
  for (std::size_t i = 0; i < count; ++i) ts[i] = t_end * static_cast<double>(i) / static_cast<double>(count - 1);
  ts.back() = t_end;
  return ts;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

// Continuous extension of the Dormand-Prince pair (fourth order, C1 across steps).
constexpr double P[7][4] = {
    {1.0, -8048581381.0 / 2820520608, 8663915743.0 / 2820520608, -12715105075.0 / 11282082432},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799, -68118460800.0 / 10900136933, 87487479700.0 / 32700410799},
    {0.0, -1754552775.0 / 470086768, 14199869525.0 / 1410260304, -10690763975.0 / 1880347072},
    {0.0, 127303824393.0 / 49829197408, -318862633887.0 / 49829197408, 701980252875.0 / 199316789632},
    {0.0, -282668133.0 / 205662961, 2019193451.0 / 616988883, -1453857185.0 / 822651844},
    {0.0, 40617522.0 / 29380423, -110615467.0 / 29380423, 69997945.0 / 29380423}};

Vec dense(double theta, double h, const Vec& y0, const Vec* const k[7]) {
  Vec y = y0;
  for (int i = 0; i < 7; ++i) {
    const double w = theta * (P[i][0] + theta * (P[i][1] + theta * (P[i][2] + theta * P[i][3])));
    if (w != 0.0) y += (h * w) * *k[i];
  }
  return y;
}

}  // namespace

AdaptiveOutcome integrate_adaptive(const OdeRhs& f, double t0, const Vec& y0, const std::vector<double>& sample_times,
                                   const AdaptiveOptions& opts,
                                   const std::function<void(double t, const Vec& y)>& observer) {
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0)) fail(ErrorCode::InvalidArgument, "rtol, atol: must be positive");
  if (sample_times.empty()) fail(ErrorCode::InvalidArgument, "samples: none requested");
  for (std::size_t i = 1; i < sample_times.size(); ++i) {
    if (!(sample_times[i] > sample_times[i - 1])) fail(ErrorCode::InvalidArgument, "samples: times must increase");
  }
  if (sample_times.front() < t0) fail(ErrorCode::InvalidArgument, "samples: first time precedes t0");
  if (!y0.allFinite()) fail(ErrorCode::InvalidArgument, "y0: non-finite entry");

  const Index n = y0.size();
  AdaptiveOutcome out;
  double t = t0;
  Vec y = y0;
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  f(t, y, k1);
  ++out.stats.evaluations;

  std::size_t si = 0;
  while (si < sample_times.size() && sample_times[si] == t) observer(sample_times[si++], y);
  const double t_final = sample_times.back();

  auto scaled_norm = [&](const Vec& v, const Vec& a, const Vec& b) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double sc = opts.atol + opts.rtol * std::max(std::abs(a(i)), std::abs(b(i)));
      const double r = v(i) / sc;
      s += r * r;
    }
    return std::sqrt(s / static_cast<double>(std::max<Index>(n, 1)));
  };

  double h = opts.h0;
  if (!(h > 0.0)) {
    const double d0 = scaled_norm(y, y, y), d1 = scaled_norm(k1, y, y);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, (t_final - t) > 0 ? (t_final - t) : 1.0);
  }
  h = std::min(h, opts.h_max);

  std::size_t steps = 0;
  while (t < t_final) {
    if (++steps > opts.max_steps) fail(ErrorCode::Numeric, "integrator: step limit exceeded");
    bool last = false;
    if (t + h >= t_final) {
      h = t_final - t;
      last = true;
    }
    ytmp = y + h * (a21 * k1);
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    ynew = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    f(t + h, ynew, k7);
    out.stats.evaluations += 6;
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = scaled_norm(err, y, ynew);
    if (!std::isfinite(en) || !ynew.allFinite() || !k7.allFinite()) en = std::numeric_limits<double>::infinity();

    if (en > 1.0) {
      ++out.stats.rejected;
      const double factor = std::isfinite(en) ? std::max(0.2, 0.9 * std::pow(en, -0.2)) : 0.25;
      h *= factor;
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        out.stopped = true;
        break;
      }
      continue;
    }

    ++out.stats.accepted;
    const double t_new = last ? t_final : t + h;
    const Vec* const ks[7] = {&k1, &k2, &k3, &k4, &k5, &k6, &k7};
    while (si < sample_times.size() && sample_times[si] <= t_new) {
      const double ts = sample_times[si];
      if (ts == t_new) observer(ts, ynew);
      else observer(ts, dense((ts - t) / h, h, y, ks));
      ++si;
    }
    t = t_new;
    y = ynew;
    k1 = k7;
    if (opts.stop && opts.stop(t, y)) {
      out.stopped = true;
      break;
    }
    const double factor = en > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(en, -0.2))) : 5.0;
    h = std::min(h * factor, opts.h_max);
  }
  out.t_end = t;
  out.y_end = y;
  return out;
}

namespace {

std::vector<std::string> abundance_columns(Index N, Index M) {
  std::vector<std::string> cols;
  for (Index i = 0; i < N; ++i) cols.push_back("x" + std::to_string(i + 1));
  for (Index j = 0; j < M; ++j) cols.push_back("v" + std::to_string(j + 1));
  return cols;
}

}  // namespace

Trajectory integrate_lv(const InteractionSystem& sys, const Vec& x0, const Vec& v0,
                        const std::vector<double>& sample_times, double rtol, double atol) {
  sys.validate();
  const Index N = sys.n(), M = sys.m();
  if (x0.size() != N || v0.size() != M) fail(ErrorCode::InvalidArgument, "x0, v0: lengths must equal N and M");
  if (!(x0.array() > 0.0).all() || !(v0.array() > 0.0).all()) {
    fail(ErrorCode::InvalidArgument, "x0, v0: abundances must be positive");
  }
  Vec y(N + M);
  y << x0.array().log().matrix(), v0.array().log().matrix();

  Vec ex(N), ev(M);
  OdeRhs rhs = [&](double, const Vec& s, Vec& ds) {
    ex = s.head(N).array().exp().matrix();
    ev = s.tail(M).array().exp().matrix();
    ds.resize(N + M);
    ds.head(N) = -sys.r + sys.A * ev - sys.Gamma * ex;
    ds.tail(M) = sys.rbar - sys.B * ex - sys.D * ev;
  };

  Trajectory tr;
  tr.dim = static_cast<std::size_t>(N + M);
  tr.meta.integrator = "dopri5-log";
  tr.meta.rtol = rtol;
  tr.meta.atol = atol;
  tr.meta.columns = abundance_columns(N, M);

  AdaptiveOptions opts;
  opts.rtol = rtol;
  opts.atol = atol;
  opts.stop = [](double, const Vec& s) { return s.cwiseAbs().maxCoeff() > kExpLimit; };
  const AdaptiveOutcome res = integrate_adaptive(rhs, 0.0, y, sample_times, opts, [&](double t, const Vec& s) {
    if (s.cwiseAbs().maxCoeff() > kExpLimit) return;
    tr.push(t, Vec(s.array().exp().matrix()));
  });
  tr.meta.stats = res.stats;
  if (res.stopped) {
    tr.meta.escaped = true;
    tr.meta.escape_time = res.t_end;
  }
  return tr;
}

Trajectory integrate_lv(const InteractionSystem& sys, const Vec& x0, const Vec& v0, double t_end, double rtol,
                        double atol, std::size_t samples) {
  return integrate_lv(sys, x0, v0, uniform_samples(t_end, samples), rtol, atol);
}

namespace {

template <class GradPhi, class GradPsi, class Energy, class Observe>
void leapfrog(Vec& q, Vec& p, double h, std::size_t steps, std::size_t stride, GradPhi grad_phi, GradPsi grad_psi,
              Energy energy, Observe observe) {
  double H = energy(q, p);
  observe(0, q, p, H);
  Vec g = grad_phi(q);
  for (std::size_t k = 1; k <= steps; ++k) {
    p -= 0.5 * h * g;
    q += h * grad_psi(p);
    g = grad_phi(q);
    p -= 0.5 * h * g;
    const double Hn = energy(q, p);
    if (!std::isfinite(Hn) || std::abs(Hn - H) > 0.1 * std::max(std::abs(H), 1e-300)) {
      fail(ErrorCode::Numeric, "symplectic: energy jump " + std::to_string(Hn - H) + " at step " +
                                   std::to_string(k) + " exceeds 10% of |H|; reduce h");
    }
    H = Hn;
    if (k % stride == 0 || k == steps) observe(k, q, p, H);
  }
}

std::size_t step_count(double h, double t_end) {
  if (h == 0.0 || !std::isfinite(h)) fail(ErrorCode::InvalidArgument, "h: must be nonzero and finite");
  const double ratio = t_end / h;
  if (!(ratio > 0.0)) fail(ErrorCode::InvalidArgument, "t_end: must have the sign of h");
  return static_cast<std::size_t>(std::llround(std::ceil(ratio - 1e-9)));
}

}  // namespace

Trajectory integrate_symplectic(const StarSystem& star, double q0, double p0, double h, double t_end,
                                std::size_t stride) {
  star.validate();
  if (stride < 1) fail(ErrorCode::InvalidArgument, "stride: must be >= 1");
  const std::size_t steps = step_count(h, t_end);
  Trajectory tr;
  tr.dim = 2;
  tr.meta.integrator = "leapfrog-kdk";
  tr.meta.h = h;
  tr.meta.columns = {"q", "p"};
  tr.meta.stats.accepted = steps;
  Vec q(1), p(1);
  q << q0;
  p << p0;
  // Backward runs store times in increasing order of |t| with negative sign.
  std::vector<double> ts, ys, es;
  leapfrog(
      q, p, h, steps, stride, [&](const Vec& x) { return Vec::Constant(1, star.potential_d1(x(0))); },
      [&](const Vec& x) { return Vec::Constant(1, star.kinetic_d1(x(0))); },
      [&](const Vec& x, const Vec& y) { return star.energy(x(0), y(0)); },
      [&](std::size_t k, const Vec& x, const Vec& y, double H) {
        ts.push_back(h * static_cast<double>(k));
        ys.push_back(x(0));
        ys.push_back(y(0));
        es.push_back(H);
      });
  if (h < 0.0) {
    // Keep times strictly increasing.
    std::reverse(ts.begin(), ts.end());
    std::reverse(es.begin(), es.end());
    for (std::size_t i = 0; i < ys.size() / 2 / 2; ++i) {
      std::swap(ys[2 * i], ys[ys.size() - 2 - 2 * i]);
      std::swap(ys[2 * i + 1], ys[ys.size() - 1 - 2 * i]);
    }
  }
  tr.times = std::move(ts);
  tr.data = std::move(ys);
  tr.energy = std::move(es);
  return tr;
}

Trajectory integrate_symplectic(const CanonicalSystem& sys, const CanonicalState& s0, double h, double t_end,
                                std::size_t stride) {
  if (!sys.reduction_valid(1e-9)) {
    fail(ErrorCode::NotApplicable, "canonical: reduction needs gamma_bar = 0 and no self-limitation");
  }
  if (stride < 1) fail(ErrorCode::InvalidArgument, "stride: must be >= 1");
  if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "h: must be positive");
  const std::size_t steps = step_count(h, t_end);
  const Index M = sys.base.m();
  Trajectory tr;
  tr.dim = static_cast<std::size_t>(2 * M);
  tr.meta.integrator = "leapfrog-kdk";
  tr.meta.h = h;
  for (Index j = 0; j < M; ++j) tr.meta.columns.push_back("q" + std::to_string(j + 1));
  for (Index j = 0; j < M; ++j) tr.meta.columns.push_back("p" + std::to_string(j + 1));
  tr.meta.stats.accepted = steps;
  Vec q = s0.q, p = s0.p;
  const Vec C = s0.C;
  Vec row(2 * M);
  leapfrog(
      q, p, h, steps, stride, [&](const Vec& x) { return potential_gradient(sys, C, x); },
      [&](const Vec& y) { return kinetic_gradient(sys, y); },
      [&](const Vec& x, const Vec& y) { return potential_energy(sys, C, x) + kinetic_energy(sys, y); },
      [&](std::size_t k, const Vec& x, const Vec& y, double H) {
        row << x, y;
        tr.push(h * static_cast<double>(k), row);
        tr.energy.push_back(H);
      });
  return tr;
}

Trajectory integrate_transformed(const CanonicalSystem& sys, const CanonicalState& s0,
                                 const std::vector<double>& sample_times, double rtol, double atol) {
  const Index N = sys.base.n(), M = sys.base.m();
  if (s0.q.size() != M || s0.p.size() != M || s0.C.size() != N) fail(ErrorCode::InvalidArgument, "state: wrong lengths");
  if (!(s0.C.array() > 0.0).all()) fail(ErrorCode::InvalidArgument, "C: entries must be positive");
  Vec y(2 * M + N);
  y << s0.q, s0.p, s0.C.array().log().matrix();

  const Mat Aq = sys.base.A * sys.factors.sigma.cwiseInverse().asDiagonal();
  Vec ce(N), ep(M);
  OdeRhs rhs = [&](double, const Vec& s, Vec& ds) {
    ce = (s.tail(N) + Aq * s.head(M)).array().exp().matrix();
    ep = s.segment(M, M).array().exp().matrix();
    ds.resize(2 * M + N);
    ds.head(M) = sys.factors.sigma.cwiseProduct(ep - sys.mu);
    ds.segment(M, M) = sys.base.rbar - sys.base.B * ce - sys.base.D * ep;
    ds.tail(N) = sys.gamma_bar - sys.base.Gamma * ce;
  };

  Trajectory tr;
  tr.dim = static_cast<std::size_t>(2 * M + N);
  tr.meta.integrator = "dopri5-canonical";
  tr.meta.rtol = rtol;
  tr.meta.atol = atol;
  for (Index j = 0; j < M; ++j) tr.meta.columns.push_back("q" + std::to_string(j + 1));
  for (Index j = 0; j < M; ++j) tr.meta.columns.push_back("p" + std::to_string(j + 1));
  for (Index i = 0; i < N; ++i) tr.meta.columns.push_back("C" + std::to_string(i + 1));

  AdaptiveOptions opts;
  opts.rtol = rtol;
  opts.atol = atol;
  opts.stop = [&](double, const Vec& s) {
    return s.segment(M, M + N).cwiseAbs().maxCoeff() > kExpLimit ||
           (s.tail(N) + Aq * s.head(M)).cwiseAbs().maxCoeff() > kExpLimit;
  };
  Vec out(2 * M + N);
  const AdaptiveOutcome res = integrate_adaptive(rhs, 0.0, y, sample_times, opts, [&](double t, const Vec& s) {
    if (s.tail(N).cwiseAbs().maxCoeff() > kExpLimit) return;
    out << s.head(2 * M), s.tail(N).array().exp().matrix();
    tr.push(t, out);
  });
  tr.meta.stats = res.stats;
  if (res.stopped) {
    tr.meta.escaped = true;
    tr.meta.escape_time = res.t_end;
  }
  return tr;
}

Trajectory integrate_transformed(const CanonicalSystem& sys, const CanonicalState& s0, double t_end, double rtol,
                                 double atol, std::size_t samples) {
  return integrate_transformed(sys, s0, uniform_samples(t_end, samples), rtol, atol);
}

Trajectory to_abundances(const CanonicalSystem& sys, const Trajectory& transformed) {
  const Index N = sys.base.n(), M = sys.base.m();
  Trajectory tr;
  tr.dim = static_cast<std::size_t>(N + M);
  tr.meta = transformed.meta;
  tr.meta.columns = abundance_columns(N, M);
  CanonicalState s;
  Vec x, v, row(N + M);
  for (std::size_t i = 0; i < transformed.size(); ++i) {
    const Vec r = transformed.row(i);
    s.q = r.head(M);
    s.p = r.segment(M, M);
    s.C = r.tail(N);
    from_canonical(sys, s, x, v);
    row << x, v;
    tr.push(transformed.times[i], row);
  }
  return tr;
}

double max_relative_drift(const std::vector<double>& energy, std::size_t upto) {
  if (energy.empty()) return 0.0;
  const double H0 = energy.front();
  const double scale = std::max(std::abs(H0), 1e-300);
  double worst = 0.0;
  const std::size_t n = std::min(upto, energy.size());
  for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(energy[i] - H0) / scale);
  return worst;
}

double first_return_time(const StarSystem& star, double q_section, double p0, double h, double t_max) {
  if (!(star.kinetic_d1(p0) > 0.0)) fail(ErrorCode::InvalidArgument, "p0: section must be crossed upward");
  if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "h: must be positive");
  double q = q_section, p = p0, t = 0.0;
  double g = star.potential_d1(q);
  bool left = false;
  while (t < t_max) {
    const double q_old = q, p_old = p;
    p -= 0.5 * h * g;
    q += h * star.kinetic_d1(p);
    g = star.potential_d1(q);
    p -= 0.5 * h * g;
    if (q < q_section) left = true;
    if (left && q_old < q_section && q >= q_section) {
      // Cubic Hermite in time for q, using dq/dt at both ends.
      const double v0 = star.kinetic_d1(p_old), v1 = star.kinetic_d1(p);
      auto qh = [&](double th) {
        const double t2 = th * th, t3 = t2 * th;
        return (2 * t3 - 3 * t2 + 1) * q_old + (t3 - 2 * t2 + th) * h * v0 + (-2 * t3 + 3 * t2) * q +
               (t3 - t2) * h * v1 - q_section;
      };
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (qh(mid) < 0.0) lo = mid;
        else hi = mid;
      }
      return t + 0.5 * (lo + hi) * h;
    }
    t += h;
  }
  fail(ErrorCode::Numeric, "first_return_time: no return before t_max");
}

}  // namespace hlv
