#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hlv/integrate.hpp"
#include "hlv/resonance.hpp"
#include "hlv/rng.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>
#include <random>

using namespace hlv;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

StarSystem unit_star() { return StarSystem::hamiltonian(v1(1), v1(1), 1.0, 1.0, v1(1)); }

TwoStarSystem unit_pair(double at1, double bt1, double at2, double bt2, double kappa = 0.01) {
  TwoStarSystem s;
  s.star1 = unit_star();
  s.star2 = unit_star();
  s.at1 = v1(at1);
  s.bt1 = v1(bt1);
  s.at2 = v1(at2);
  s.bt2 = v1(bt2);
  s.kappa = kappa;
  return s;
}

ResonanceModel bare(double b12, double b21, double ebar = 0.0, double D1 = 1.0, double D2 = 1.0) {
  ResonanceModel m;
  m.omega1 = m.omega2 = 1.0;
  m.b12 = b12;
  m.b21 = b21;
  m.g12 = b12;
  m.g21 = -b21;
  m.ebar = ebar;
  m.D1 = D1;
  m.D2 = D2;
  m.kappa = 0.01;
  return m;
}

}  // namespace

TEST_CASE("unit stars linearize to unit frequency") {
  const auto m = linearize(unit_pair(0, 0, 0, 0));
  CHECK(m.omega1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.omega2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(m.qbar1) <= 1e-12);
  CHECK(m.R() == 0.0);
}

TEST_CASE("identical coupled stars have equal frequencies") {
  TwoStarSystem s;
  s.star1 = s.star2 = StarSystem::hamiltonian((Vec(2) << 1.0, 0.5).finished(), (Vec(2) << 1.0, 2.0).finished(), 1.3,
                                              0.8, Vec::Ones(2));
  s.at1 = s.at2 = (Vec(2) << 0.3, 0.7).finished();
  s.bt1 = s.bt2 = (Vec(2) << 0.2, 0.1).finished();
  s.kappa = 0.05;
  const auto m = linearize(s);
  CHECK(m.omega1 == m.omega2);
  CHECK(m.qbar1 == m.qbar2);
  // Positive couplings give a stable pair.
  CHECK(m.R() > 0.0);
  CHECK(instability_criterion(m) == Verdict::Stable);
}

TEST_CASE("linearized frequency matches the small-oscillation period") {
  const auto star = StarSystem::hamiltonian((Vec(2) << 1.0, 0.5).finished(), (Vec(2) << 1.0, 2.0).finished(), 1.3, 0.8,
                                            Vec::Ones(2));
  TwoStarSystem s;
  s.star1 = star;
  s.star2 = unit_star();
  s.at1 = s.bt2 = Vec::Zero(2);
  s.at2 = s.bt1 = Vec::Zero(1);
  const auto m = linearize(s);
  // Start 1e-3 right of the bottom, at rest in q, and time the first return.
  const double q0 = m.qbar1 - 1e-3;
  const double E = star.energy(q0, std::log(star.mu));
  const double c = (E - star.potential(m.qbar1) - star.kinetic_min()) / star.mu;
  const double p0 = std::log(star.mu) + kinetic_branches(c).first;
  const double T = first_return_time(star, m.qbar1, p0, 1e-4, 100.0);
  CHECK(2 * std::numbers::pi / T == doctest::Approx(m.omega1).epsilon(0.01));
}

TEST_CASE("a potential without a well cannot be linearized") {
  auto s = unit_pair(0, 0, 0, 0);
  s.star1 = StarSystem::hamiltonian(v1(1), v1(-1), 1.0, 1.0, v1(1));
  CHECK_THROWS_AS(linearize(s), Error);
}

TEST_CASE("detuning examples") {
  ResonanceModel m = bare(1, 1);
  CHECK(detuning(m, 1e-6) == Regime::Resonant);
  m.omega1 = 1.0;
  m.omega2 = 1.5;
  CHECK(detuning(m, 0.05) == Regime::Nonresonant);
  CHECK(detuning(m, 0.5) == Regime::Resonant);
  CHECK(detuning(m, 0.25, 2.0) == Regime::Resonant);
}

TEST_CASE("locked rates: closed-form examples") {
  auto r = phase_locked_rates(bare(0.5, 2.0));
  CHECK(r.lambda_plus.real() == doctest::Approx(0.5));
  CHECK(r.lambda_minus.real() == doctest::Approx(-0.5));
  CHECK(r.growth);
  r = phase_locked_rates(bare(0.5, -2.0));
  CHECK(r.lambda_plus.real() == doctest::Approx(0.0));
  CHECK(std::abs(r.lambda_plus.imag()) == doctest::Approx(0.5));
  CHECK_FALSE(r.growth);
}

TEST_CASE("locked rates agree with a numeric eigendecomposition") {
  Rng rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.1, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    ResonanceModel m = bare(u(rng), u(rng), std::abs(u(rng)), pos(rng), pos(rng));
    m.omega1 = pos(rng);
    m.omega2 = m.omega1 + 0.01 * u(rng);
    const double w = m.omega();
    for (int branch : {+1, -1}) {
      Eigen::Matrix2d A;
      A << -m.ebar * m.D1 * w, branch * m.b12, branch * m.b21, -m.ebar * m.D2 * w;
      A /= 2 * w;
      const Eigen::Vector2cd ev = A.eigenvalues();
      const auto lr = phase_locked_rates(m, branch);
      const double scale = 1.0 + A.norm();
      const bool direct = std::abs(ev(0) - lr.lambda_plus) + std::abs(ev(1) - lr.lambda_minus) <= 1e-12 * scale;
      const bool swapped = std::abs(ev(1) - lr.lambda_plus) + std::abs(ev(0) - lr.lambda_minus) <= 1e-12 * scale;
      CHECK((direct || swapped));
      CHECK(lr.max_re == doctest::Approx(std::max(ev(0).real(), ev(1).real())).epsilon(1e-12));
    }
  }
}

TEST_CASE("verdicts: stable, unstable and damped") {
  CHECK(instability_criterion(bare(1.0, -1.0)) == Verdict::Stable);
  CHECK(instability_criterion(bare(1.0, 1.0)) == Verdict::Unstable);
  // With D1 = D2 = D the threshold is ebar omega D = sqrt(b12 b21).
  CHECK(instability_criterion(bare(1.0, 1.0, 0.99)) == Verdict::Unstable);
  CHECK(instability_criterion(bare(1.0, 1.0, 1.01)) == Verdict::Damped);
  // Spread-out limitation: ebar omega sqrt(D1 D2) against sqrt(b12 b21).
  CHECK(instability_criterion(bare(1.0, 1.0, 0.99, 0.5, 2.0)) == Verdict::Unstable);
  CHECK(instability_criterion(bare(1.0, 1.0, 1.01, 0.5, 2.0)) == Verdict::Damped);
}

TEST_CASE("positive couplings always give a stable verdict") {
  Rng rng(19);
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n1 = 1 + trial % 3, n2 = 1 + (trial / 3) % 3;
    auto draw = [&](Index n) { return Vec(Vec::NullaryExpr(n, [&](Index) { return pos(rng); })); };
    TwoStarSystem s;
    s.star1 = StarSystem::hamiltonian(draw(n1), draw(n1), pos(rng), pos(rng), Vec::Ones(n1));
    s.star2 = StarSystem::hamiltonian(draw(n2), draw(n2), pos(rng), pos(rng), Vec::Ones(n2));
    s.at1 = draw(n1);
    s.bt2 = draw(n1);
    s.at2 = draw(n2);
    s.bt1 = draw(n2);
    s.kappa = 0.01;
    const auto m = linearize(s);
    CHECK(m.R() > 0.0);
    CHECK(m.b12 * m.b21 < 0.0);
    CHECK(instability_criterion(m) == Verdict::Stable);
  }
}

TEST_CASE("mixed coupling signs make the unit pair unstable") {
  const auto m = linearize(unit_pair(1, 0, -1, 0));
  CHECK(m.R() == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(m.b12 == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(m.b21 == doctest::Approx(-1.0).epsilon(1e-6));
  CHECK(instability_criterion(m) == Verdict::Unstable);
  CHECK(phase_locked_rates(m).max_re == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("slow system: locked phase difference is conserved") {
  for (double sgn : {1.0, -1.0}) {
    const auto m = bare(0.7, 1.3, 0.2);
    const auto st = integrate_resonance(m, {0.3, 0.1}, {0.2, 0.2 + sgn * std::numbers::pi / 2}, 5.0, 101);
    for (std::size_t i = 0; i < st.traj.size(); ++i) {
      CHECK(std::abs(st.traj.at(i, 3) - st.traj.at(i, 2) - sgn * std::numbers::pi / 2) <= 1e-9);
    }
  }
}

TEST_CASE("slow system: uncoupled amplitudes decay exponentially") {
  const auto m = bare(0.0, 0.0, 0.3, 1.0, 2.0);
  const auto st = integrate_resonance(m, {0.5, 0.2}, {0.0, 1.0}, 4.0, 41);
  for (std::size_t i = 0; i < st.traj.size(); ++i) {
    const double tau = st.traj.times[i];
    CHECK(st.traj.at(i, 0) == doctest::Approx(0.5 * std::exp(-0.3 * 1.0 * tau / 2)).epsilon(1e-9));
    CHECK(st.traj.at(i, 1) == doctest::Approx(0.2 * std::exp(-0.3 * 2.0 * tau / 2)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(integrate_resonance(m, {0.0, 0.2}, {0.0, 0.0}, 1.0), Error);
}

TEST_CASE("slow system: quadratic invariant on the locked branch") {
  const auto m = bare(0.8, 1.7);
  const auto st = integrate_resonance(m, {0.4, 0.9}, {0.0, std::numbers::pi / 2}, 3.0, 301);
  const double I0 = m.b21 * 0.4 * 0.4 - m.b12 * 0.9 * 0.9;
  for (std::size_t i = 0; i < st.traj.size(); ++i) {
    const double Q1 = st.traj.at(i, 0), Q2 = st.traj.at(i, 1);
    const double I = m.b21 * Q1 * Q1 - m.b12 * Q2 * Q2;
    CHECK(std::abs(I - I0) <= 1e-8 * (m.b21 * Q1 * Q1 + m.b12 * Q2 * Q2));
  }
}

TEST_CASE("slow system: measured growth matches the largest locked rate") {
  const auto m = bare(0.6, 1.5, 0.2, 1.0, 1.5);
  const auto lr = phase_locked_rates(m);
  REQUIRE(lr.growth);
  const auto st = integrate_resonance(m, {0.01, 0.01}, {0.0, std::numbers::pi / 2}, 40.0, 401);
  std::vector<double> t, Q1, Q2;
  for (std::size_t i = 200; i < st.traj.size(); ++i) {
    t.push_back(st.traj.times[i]);
    Q1.push_back(st.traj.at(i, 0));
    Q2.push_back(st.traj.at(i, 1));
  }
  CHECK(envelope_growth_rate(t, Q1, Q2) == doctest::Approx(lr.max_re).epsilon(0.01));
}

TEST_CASE("slow system: amplitudes that die out raise an event") {
  const auto m = bare(0.0, 0.0, 50.0);
  const auto st = integrate_resonance(m, {1e-6, 1.0}, {0.0, 0.0}, 10.0, 11);
  REQUIRE(st.extinctions.size() >= 1);
  CHECK(st.extinctions[0].index == 1);
  CHECK(st.extinctions[0].tau < 10.0);
  for (double x : st.traj.data) CHECK(std::isfinite(x));
}

TEST_CASE("slow envelope follows the full two-star simulation") {
  const auto sys = unit_pair(1, 0, -1, 0, 0.01);
  const auto m = linearize(sys);
  const double Q = 0.01;
  const std::array<double, 2> phi{0.0, -std::numbers::pi / 2};
  const auto slow = integrate_resonance(m, {Q, Q}, phi, 1.0, 11);
  // q_k = qbar_k + Q_k cos(omega t + phi_k); dq/dt = exp(p) - mu.
  std::array<double, 4> s0;
  const double w = m.omega();
  s0[0] = m.qbar1 + Q * std::cos(phi[0]);
  s0[1] = std::log(m.mu1 - w * Q * std::sin(phi[0]));
  s0[2] = m.qbar2 + Q * std::cos(phi[1]);
  s0[3] = std::log(m.mu2 - w * Q * std::sin(phi[1]));
  const double t_end = 1.0 / sys.kappa;
  const auto full = simulate_two_star(sys, s0, t_end, 1001);
  const auto env = envelope(m, full);
  for (std::size_t k = 0; k < slow.traj.size(); ++k) {
    const std::size_t i = k * 100;
    REQUIRE(std::abs(full.times[i] * sys.kappa - slow.traj.times[k]) <= 1e-12);
    CHECK(std::abs(env[0][i] - slow.traj.at(k, 0)) <= 0.1 * slow.traj.at(k, 0));
    CHECK(std::abs(env[1][i] - slow.traj.at(k, 1)) <= 0.1 * slow.traj.at(k, 1));
  }
  CHECK(slow.traj.at(10, 0) == doctest::Approx(Q * std::exp(0.5)).epsilon(1e-6));
}
