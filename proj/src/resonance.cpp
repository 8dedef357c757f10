#include "hlv/resonance.hpp"

#include <algorithm>
#include <cmath>

namespace hlv {

void TwoStarSystem::validate() const {
  star1.validate();
  star2.validate();
  const Index n1 = star1.size(), n2 = star2.size();
  if (at1.size() != n1 || bt2.size() != n1) fail(ErrorCode::InvalidArgument, "at1, bt2: length must equal N1");
  if (at2.size() != n2 || bt1.size() != n2) fail(ErrorCode::InvalidArgument, "at2, bt1: length must equal N2");
  if (!(kappa > 0.0)) fail(ErrorCode::InvalidArgument, "kappa: must be positive");
  if (!(epsilon >= 0.0)) fail(ErrorCode::InvalidArgument, "epsilon: must be >= 0");
  if (!(d1 >= 0.0) || !(d2 >= 0.0)) fail(ErrorCode::InvalidArgument, "d1, d2: must be >= 0");
}

namespace {

struct Abundances {
  Vec x;
  Vec y;
};

Abundances abundances(const TwoStarSystem& s, double q1, double q2) {
  Abundances ab;
  ab.x.resize(s.star1.size());
  ab.y.resize(s.star2.size());
  for (Index i = 0; i < ab.x.size(); ++i) {
    ab.x(i) = s.star1.C(i) * guarded_exp(s.star1.a(i) * q1 + s.kappa * s.at1(i) * q2);
  }
  for (Index j = 0; j < ab.y.size(); ++j) {
    ab.y(j) = s.star2.C(j) * guarded_exp(s.star2.a(j) * q2 + s.kappa * s.at2(j) * q1);
  }
  return ab;
}

Eigen::Matrix2d force_jacobian(const TwoStarSystem& s, double q1, double q2) {
  const Abundances ab = abundances(s, q1, q2);
  const double k = s.kappa;
  const Vec& a1 = s.star1.a;
  const Vec& a2 = s.star2.a;
  const Vec& b1 = s.star1.b;
  const Vec& b2 = s.star2.b;
  Eigen::Matrix2d J;
  J(0, 0) = -(b1.array() * a1.array() * ab.x.array()).sum() - k * k * (s.bt1.array() * s.at2.array() * ab.y.array()).sum();
  J(0, 1) = -k * (b1.array() * s.at1.array() * ab.x.array()).sum() - k * (s.bt1.array() * a2.array() * ab.y.array()).sum();
  J(1, 0) = -k * (b2.array() * s.at2.array() * ab.y.array()).sum() - k * (s.bt2.array() * a1.array() * ab.x.array()).sum();
  J(1, 1) = -(b2.array() * a2.array() * ab.y.array()).sum() - k * k * (s.bt2.array() * s.at1.array() * ab.x.array()).sum();
  return J;
}

double deepest_minimum(const StarSystem& star, const char* name) {
  const PotentialProfile prof = analyze_potential(star);
  std::optional<Extremum> best;
  for (const auto& e : prof.extrema) {
    if (e.kind == Extremum::Kind::Min && (!best || e.value < best->value)) best = e;
  }
  if (!best) fail(ErrorCode::NotApplicable, std::string(name) + ": no interior potential minimum, not linearizable");
  return best->q;
}

}  // namespace

std::array<double, 2> TwoStarSystem::forces(double q1, double q2, double p1, double p2) const {
  const Abundances ab = abundances(*this, q1, q2);
  const double f1 = star1.rbar - star1.b.dot(ab.x) - kappa * bt1.dot(ab.y) - epsilon * d1 * std::exp(p1);
  const double f2 = star2.rbar - star2.b.dot(ab.y) - kappa * bt2.dot(ab.x) - epsilon * d2 * std::exp(p2);
  return {f1, f2};
}

ResonanceModel linearize(const TwoStarSystem& sys) {
  sys.validate();
  const double p1 = std::log(sys.star1.mu), p2 = std::log(sys.star2.mu);
  Eigen::Vector2d q(deepest_minimum(sys.star1, "star1"), deepest_minimum(sys.star2, "star2"));

  auto residual = [&](const Eigen::Vector2d& z) {
    const auto f = sys.forces(z(0), z(1), p1, p2);
    return Eigen::Vector2d(f[0], f[1]);
  };
  Eigen::Vector2d F = residual(q);
  const double scale = 1.0 + std::abs(sys.star1.rbar) + std::abs(sys.star2.rbar);
  bool converged = F.cwiseAbs().maxCoeff() <= 1e-13 * scale;
  for (int it = 0; it < 100 && !converged; ++it) {
    const Eigen::Matrix2d J = force_jacobian(sys, q(0), q(1));
    const Eigen::Vector2d step = J.fullPivLu().solve(-F);
    if (!step.allFinite()) break;
    double t = 1.0;
    Eigen::Vector2d trial;
    Eigen::Vector2d Ft;
    for (int ls = 0; ls < 40; ++ls) {
      trial = q + t * step;
      try {
        Ft = residual(trial);
        if (Ft.norm() < F.norm() || ls == 39) break;
      } catch (const Error&) {
      }
      t *= 0.5;
    }
    q = trial;
    F = Ft;
    converged = F.cwiseAbs().maxCoeff() <= 1e-13 * scale || (t * step).norm() <= 1e-15 * (1.0 + q.norm());
  }
  if (!converged && F.cwiseAbs().maxCoeff() > 1e-9 * scale) {
    fail(ErrorCode::Numeric, "linearize: coupled equilibrium did not converge");
  }

  const Eigen::Matrix2d J = force_jacobian(sys, q(0), q(1));
  ResonanceModel m;
  m.mu1 = sys.star1.mu;
  m.mu2 = sys.star2.mu;
  const double K11 = -m.mu1 * J(0, 0), K22 = -m.mu2 * J(1, 1);
  if (!(K11 > 0.0) || !(K22 > 0.0)) fail(ErrorCode::NotApplicable, "linearize: equilibrium is not a potential minimum");
  m.omega1 = std::sqrt(K11);
  m.omega2 = std::sqrt(K22);
  m.g12 = J(0, 1) / sys.kappa;
  m.g21 = J(1, 0) / sys.kappa;
  m.b12 = m.mu1 * m.g12;
  m.b21 = -m.mu2 * m.g21;
  m.ebar = sys.ebar();
  m.D1 = m.mu1 * sys.d1;
  m.D2 = m.mu2 * sys.d2;
  m.mu_tilde = Vec(2);
  m.mu_tilde << m.ebar * m.D1, m.ebar * m.D2;
  m.qbar1 = q(0);
  m.qbar2 = q(1);
  m.kappa = sys.kappa;
  return m;
}

std::string_view to_string(Regime r) { return r == Regime::Resonant ? "resonant" : "nonresonant"; }

Regime detuning(const ResonanceModel& model, double kappa, double factor) {
  if (!(kappa > 0.0)) fail(ErrorCode::InvalidArgument, "kappa: must be positive");
  return std::abs(model.omega1 - model.omega2) <= factor * kappa ? Regime::Resonant : Regime::Nonresonant;
}

LockedRates phase_locked_rates(const ResonanceModel& model, int branch) {
  const double s = branch >= 0 ? 1.0 : -1.0;
  const double w = model.omega();
  if (!(w > 0.0)) fail(ErrorCode::InvalidArgument, "omega: must be positive");
  const double e = model.ebar;
  const double prod = (s * model.b12) * (s * model.b21);
  const std::complex<double> disc = std::sqrt(std::complex<double>(
      e * e * w * w * (model.D1 - model.D2) * (model.D1 - model.D2) + 4.0 * prod, 0.0));
  const double base = -e * w * (model.D1 + model.D2);
  LockedRates lr;
  lr.lambda_plus = (base + disc) / (4.0 * w);
  lr.lambda_minus = (base - disc) / (4.0 * w);
  lr.max_re = std::max(lr.lambda_plus.real(), lr.lambda_minus.real());
  lr.growth = lr.max_re > 0.0;
  return lr;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Unstable: return "unstable";
    case Verdict::Stable: return "stable";
    case Verdict::Damped: return "damped";
  }
  return "damped";
}

Verdict instability_criterion(const ResonanceModel& model) {
  if (model.R() > 0.0) return Verdict::Stable;
  return phase_locked_rates(model).growth ? Verdict::Unstable : Verdict::Damped;
}

SlowTrajectory integrate_resonance(const ResonanceModel& model, std::array<double, 2> Q0,
                                   std::array<double, 2> phi0, double tau_end, std::size_t samples, double rtol,
                                   double atol) {
  if (!(Q0[0] > 0.0) || !(Q0[1] > 0.0)) fail(ErrorCode::InvalidArgument, "Q0: amplitudes must be positive");
  const double w = model.omega();
  if (!(w > 0.0)) fail(ErrorCode::InvalidArgument, "omega: must be positive");
  const double detune1 = model.kappa > 0.0 ? (model.omega1 - w) / model.kappa : 0.0;
  const double detune2 = model.kappa > 0.0 ? (model.omega2 - w) / model.kappa : 0.0;
  const double e = model.ebar;
  OdeRhs rhs = [&](double, const Vec& y, Vec& dy) {
    const double Q1 = y(0), Q2 = y(1);
    const double delta = y(3) - y(2);
    const double sn = std::sin(delta), cs = std::cos(delta);
    dy.resize(4);
    dy(0) = (-e * model.D1 * w * Q1 + model.b12 * Q2 * sn) / (2.0 * w);
    dy(1) = (-e * model.D2 * w * Q2 + model.b21 * Q1 * sn) / (2.0 * w);
    dy(2) = -model.b12 * Q2 * cs / (2.0 * w * Q1) + detune1;
    dy(3) = model.b21 * Q1 * cs / (2.0 * w * Q2) + detune2;
  };
  Vec y(4);
  y << Q0[0], Q0[1], phi0[0], phi0[1];

  SlowTrajectory st;
  st.traj.dim = 4;
  st.traj.meta.integrator = "dopri5-slow";
  st.traj.meta.rtol = rtol;
  st.traj.meta.atol = atol;
  st.traj.meta.columns = {"Q1", "Q2", "phi1", "phi2"};
  AdaptiveOptions opts;
  opts.rtol = rtol;
  opts.atol = atol;
  opts.stop = [](double, const Vec& s) { return s(0) < 1e-12 || s(1) < 1e-12; };
  const AdaptiveOutcome res = integrate_adaptive(rhs, 0.0, y, uniform_samples(tau_end, samples), opts,
                                                 [&](double t, const Vec& s) { st.traj.push(t, s); });
  st.traj.meta.stats = res.stats;
  if (res.stopped && res.y_end.size() == 4) {
    if (res.y_end(0) < 1e-12) st.extinctions.push_back({res.t_end, 1});
    if (res.y_end(1) < 1e-12) st.extinctions.push_back({res.t_end, 2});
  }
  return st;
}

Trajectory simulate_two_star(const TwoStarSystem& sys, std::array<double, 4> s0, double t_end, std::size_t samples,
                             double rtol, double atol) {
  sys.validate();
  OdeRhs rhs = [&](double, const Vec& y, Vec& dy) {
    const auto f = sys.forces(y(0), y(2), y(1), y(3));
    dy.resize(4);
    dy(0) = std::exp(y(1)) - sys.star1.mu;
    dy(1) = f[0];
    dy(2) = std::exp(y(3)) - sys.star2.mu;
    dy(3) = f[1];
  };
  Vec y(4);
  y << s0[0], s0[1], s0[2], s0[3];
  Trajectory tr;
  tr.dim = 4;
  tr.meta.integrator = "dopri5-two-star";
  tr.meta.rtol = rtol;
  tr.meta.atol = atol;
  tr.meta.columns = {"q1", "p1", "q2", "p2"};
  AdaptiveOptions opts;
  opts.rtol = rtol;
  opts.atol = atol;
  const AdaptiveOutcome res = integrate_adaptive(rhs, 0.0, y, uniform_samples(t_end, samples), opts,
                                                 [&](double t, const Vec& s) { tr.push(t, s); });
  tr.meta.stats = res.stats;
  return tr;
}

std::array<std::vector<double>, 2> envelope(const ResonanceModel& model, const Trajectory& full) {
  if (full.dim != 4) fail(ErrorCode::InvalidArgument, "envelope: expects a two-star trajectory");
  std::array<std::vector<double>, 2> env;
  for (std::size_t i = 0; i < full.size(); ++i) {
    const double dq1 = std::exp(full.at(i, 1)) - model.mu1;
    const double dq2 = std::exp(full.at(i, 3)) - model.mu2;
    env[0].push_back(std::hypot(full.at(i, 0) - model.qbar1, dq1 / model.omega1));
    env[1].push_back(std::hypot(full.at(i, 2) - model.qbar2, dq2 / model.omega2));
  }
  return env;
}

double envelope_growth_rate(const std::vector<double>& times, const std::vector<double>& Q1,
                            const std::vector<double>& Q2) {
  const std::size_t n = times.size();
  if (n < 2 || Q1.size() != n || Q2.size() != n) fail(ErrorCode::InvalidArgument, "envelope: need matching series");
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = 0.5 * std::log(Q1[i] * Q1[i] + Q2[i] * Q2[i]);
    st += times[i];
    sy += y;
    stt += times[i] * times[i];
    sty += times[i] * y;
  }
  const double dn = static_cast<double>(n);
  return (dn * sty - st * sy) / (dn * stt - st * st);
}

}  // namespace hlv
