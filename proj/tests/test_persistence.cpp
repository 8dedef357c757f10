#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hlv/linprog.hpp"
#include "hlv/persistence.hpp"
#include "hlv/rng.hpp"
#include "hlv/star.hpp"

#include <cmath>
#include <random>

using namespace hlv;

namespace {

Mat row(std::initializer_list<double> xs) {
  Mat m(1, static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) m(0, i++) = x;
  return m;
}

Vec vec(std::initializer_list<double> xs) { return row(xs).transpose(); }

void check_certificate(const FeasibilityCertificate& c, const Mat& B, const Vec& rhs) {
  if (!c.feasible) return;
  REQUIRE(c.witness);
  CHECK(c.witness->minCoeff() > 0.0);
  CHECK(c.witness->minCoeff() >= c.slack * (1 - 1e-12));
  CHECK((rhs - B * *c.witness).norm() <= 1e-8 * std::max(1.0, rhs.norm()));
}

}  // namespace

TEST_CASE("linear program basics") {
  // maximize x + y subject to x + 2y <= 4, 3x + y <= 6
  LinearProgram lp;
  lp.add_variables(2);
  lp.add_constraint(vec({1, 2}), LinearProgram::Relation::Le, 4);
  lp.add_constraint(vec({3, 1}), LinearProgram::Relation::Le, 6);
  lp.set_objective(vec({1, 1}));
  const auto s = lp.maximize();
  REQUIRE(s.status == LpStatus::Optimal);
  CHECK(s.objective == doctest::Approx(2.8));
  CHECK(s.x(0) == doctest::Approx(1.6));

  LinearProgram inf;
  inf.add_variables(1);
  inf.add_constraint(vec({1}), LinearProgram::Relation::Ge, 2);
  inf.add_constraint(vec({1}), LinearProgram::Relation::Le, 1);
  inf.set_objective(vec({1}));
  CHECK(inf.maximize().status == LpStatus::Infeasible);

  LinearProgram unb;
  unb.add_variable(LinearProgram::Bound::Free);
  unb.set_objective(vec({1}));
  CHECK(unb.maximize().status == LpStatus::Unbounded);
}

TEST_CASE("cone examples") {
  auto c = cone_condition(row({1, 2}), vec({3}));
  CHECK(c.certified());
  REQUIRE(c.witness);
  CHECK((*c.witness)(0) == doctest::Approx(1.0));
  CHECK((*c.witness)(1) == doctest::Approx(1.0));
  CHECK(c.slack == doctest::Approx(1.0));
  c = cone_condition(row({1, 2}), vec({-1}));
  CHECK_FALSE(c.feasible);
  CHECK_THROWS_AS(cone_condition(row({1, 2}), vec({1, 2})), Error);
  // Rank deficiency is reported separately from feasibility.
  const Mat B = (Mat(2, 3) << 1, 1, 1, 2, 2, 2).finished();
  c = cone_condition(B, vec({1, 2}));
  CHECK(c.feasible);
  CHECK_FALSE(c.rank_ok);
  CHECK_FALSE(c.certified());
}

TEST_CASE("cone certificates: row rescaling and re-substitution") {
  Rng rng(31);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> sc(0.1, 10.0);
  int feasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Index M = 1 + trial % 3, N = M + trial % 6;
    const Mat B = Mat::NullaryExpr(M, N, [&](Index, Index) { return nd(rng); });
    const Vec rbar = Vec::NullaryExpr(M, [&](Index) { return 1.0 + 0.5 * nd(rng); });
    const Vec s = Vec::NullaryExpr(M, [&](Index) { return sc(rng); });
    const auto c1 = cone_condition(B, rbar);
    const auto c2 = cone_condition(s.asDiagonal() * B, s.cwiseProduct(rbar));
    CHECK(c1.feasible == c2.feasible);
    CHECK(c1.rank_ok == c2.rank_ok);
    check_certificate(c1, B, rbar);
    check_certificate(c2, s.asDiagonal() * B, s.cwiseProduct(rbar));
    feasible += c1.feasible;
  }
  CHECK(feasible > 50);
  CHECK(feasible < 300);
}

TEST_CASE("cone condition agrees with star coercivity on the right") {
  Rng rng(37);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> pos(0.1, 2.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Index N = 1 + trial % 5;
    const Vec a = Vec::NullaryExpr(N, [&](Index) { return pos(rng); });
    const bool all_positive = trial % 2 == 0;
    const Vec b = Vec::NullaryExpr(N, [&](Index) { return all_positive ? pos(rng) : nd(rng); });
    const double rbar = nd(rng);
    const auto star = StarSystem::hamiltonian(a, b, rbar, 1.0, Vec::Ones(N));
    const bool pi = persistence_criteria(star).kind == PersistenceVerdict::Kind::PI;
    const bool feasible = cone_condition(b.transpose(), Vec::Constant(1, rbar)).feasible;
    if (pi) CHECK(feasible);
    if (all_positive) CHECK(pi == feasible);
  }
}

TEST_CASE("strong persistence examples") {
  const auto pair = InteractionSystem::without_limitation(vec({1}), vec({1}), Mat::Ones(1, 1), Mat::Ones(1, 1));
  auto f = find_factors(pair.A, pair.B);
  auto rep = strong_persistence(pair, f);
  CHECK(rep.verdict == PersistenceReport::Verdict::Persistent);
  CHECK((*rep.prey.witness)(0) == doctest::Approx(1.0));
  CHECK((*rep.generalists.witness)(0) == doctest::Approx(1.0));

  // One generalist, two prey with different r_i / a_i.
  const auto star = InteractionSystem::without_limitation(vec({1, 2}), vec({1}), Mat::Ones(2, 1), Mat::Ones(1, 2));
  rep = strong_persistence(star, find_factors(star.A, star.B));
  CHECK(rep.verdict == PersistenceReport::Verdict::NotPersistent);
  CHECK_FALSE(rep.prey.feasible);

  // Identity minus eps times all-ones, eps = 1/N, is singular.
  const Index N = 4;
  const Mat W = Mat::Identity(N, N) - Mat::Constant(N, N, 1.0 / N);
  const auto ex = InteractionSystem::without_limitation(Vec::Ones(N), Vec::Ones(N), W, W.transpose());
  rep = strong_persistence(ex, find_factors(ex.A, ex.B));
  CHECK(rep.verdict == PersistenceReport::Verdict::NotPersistent);
  CHECK_FALSE(rep.rank_ok);
  CHECK(rep.reason.find("rank") != std::string::npos);

  // Missing or non-positive factors are not applicable.
  CHECK(strong_persistence(pair, std::nullopt).verdict == PersistenceReport::Verdict::NotApplicable);
  const auto mixed =
      InteractionSystem::without_limitation(vec({1, 1}), vec({1, 1}), Mat::Identity(2, 2), (Mat(2, 2) << 1, 0, 0, -1).finished());
  CHECK(strong_persistence(mixed, find_factors(mixed.A, mixed.B)).verdict ==
        PersistenceReport::Verdict::NotApplicable);
}

TEST_CASE("permanence examples") {
  InteractionSystem s = InteractionSystem::without_limitation(vec({1}), vec({2}), Mat::Ones(1, 1), Mat::Ones(1, 1));
  const auto f = *find_factors(s.A, s.B);
  auto rep = permanence(s, f, Mat::Zero(1, 1), Mat::Zero(1, 1));
  CHECK_FALSE(rep.pd);
  CHECK_FALSE(rep.permanent);

  s.Gamma = Mat::Identity(1, 1) * 0.1;
  s.D = Mat::Identity(1, 1) * 0.1;
  rep = permanence(s, f, Mat::Zero(1, 1), Mat::Zero(1, 1));
  CHECK(rep.pd);
  CHECK(rep.has_positive_equilibrium);
  CHECK(rep.permanent);
  REQUIRE(rep.equilibrium);
  // x' = x(-1 + v - 0.1 x), v' = v(2 - x - 0.1 v)
  const Vec e = *rep.equilibrium;
  CHECK(-1 + e(1) - 0.1 * e(0) == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(2 - e(0) - 0.1 * e(1) == doctest::Approx(0.0).epsilon(1e-10));

  HamiltonianFactors zero = f;
  zero.rho(0) = 0.0;
  CHECK_THROWS_AS(permanence(s, zero, Mat::Zero(1, 1), Mat::Zero(1, 1)), Error);
}

TEST_CASE("permanence survives small perturbations and factor rescaling") {
  Rng rng(41);
  std::uniform_real_distribution<double> u(0.5, 1.5), sym(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    const Index N = 1 + trial % 3, M = 1 + trial % 2;
    const Vec rho = Vec::NullaryExpr(N, [&](Index) { return u(rng); });
    const Vec sigma = Vec::NullaryExpr(M, [&](Index) { return u(rng); });
    const Mat A = Mat::NullaryExpr(N, M, [&](Index, Index) { return u(rng); });
    Mat B(M, N);
    for (Index l = 0; l < M; ++l)
      for (Index k = 0; k < N; ++k) B(l, k) = rho(k) * A(k, l) / sigma(l);
    const double eps = 0.2;
    const Vec xs = Vec::NullaryExpr(N, [&](Index) { return u(rng); });
    const Vec vs = Vec::NullaryExpr(M, [&](Index) { return u(rng); });
    InteractionSystem s = InteractionSystem::without_limitation(A * vs - eps * xs, B * xs + eps * vs, A, B);
    s.Gamma = eps * Mat::Identity(N, N);
    s.D = eps * Mat::Identity(M, M);
    HamiltonianFactors f{rho, sigma, true, 0.0};
    const double bound = eps * std::min(rho.minCoeff(), sigma.minCoeff()) / 2;
    Mat Ap = Mat::NullaryExpr(N, M, [&](Index, Index) { return sym(rng); });
    Mat Bp = Mat::NullaryExpr(M, N, [&](Index, Index) { return sym(rng); });
    const double scale = 0.99 * bound / std::sqrt(Ap.squaredNorm() + Bp.squaredNorm());
    Ap *= scale;
    Bp *= scale;
    const auto rep = permanence(s, f, Ap, Bp);
    CHECK(rep.pd);
    CHECK(rep.permanent);
    HamiltonianFactors g{rho * 3.7, sigma * 3.7, true, 0.0};
    const auto rep2 = permanence(s, g, Ap, Bp);
    CHECK(rep2.pd == rep.pd);
    CHECK(rep2.permanent == rep.permanent);
  }
}

TEST_CASE("adaptive examples") {
  auto r = adaptive_solve(row({1, 1}), vec({2, 3}), vec({1, 1}));
  REQUIRE(r.feasible);
  CHECK(r.rho(0) / r.rho(1) == doctest::Approx(1.5));
  r = adaptive_solve(row({1, -1}), vec({1, 1}), vec({1, 1}));
  CHECK_FALSE(r.feasible);
  REQUIRE(r.violated.size() == 1);
  CHECK(r.violated[0] == 1);
}

TEST_CASE("adaptive feasibility agrees with a simplex grid search") {
  Rng rng(43);
  std::normal_distribution<double> nd(0.0, 1.0);
  int feasible = 0, checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index N = 2 + trial % 4;
    const Mat B = Mat::NullaryExpr(2, N, [&](Index, Index) { return nd(rng); });
    const Vec r = Vec::NullaryExpr(N, [&](Index) { return nd(rng); });
    bool grid = false;
    double best = -1.0;
    for (int k = 1; k < 1000; ++k) {
      const double t = k * 1e-3;
      const Vec w = vec({t, 1 - t});
      const Vec s = B.transpose() * w;
      double margin = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < N; ++i) margin = std::min(margin, s(i) * (r(i) > 0 ? 1.0 : -1.0));
      best = std::max(best, margin);
      if (margin > 0) grid = true;
    }
    if (std::abs(best) < 1e-3) continue;  // too close to the boundary for the grid
    const auto res = adaptive_solve(B, r, Vec::Ones(N));
    CHECK(res.feasible == grid);
    if (res.feasible) {
      CHECK((res.rho.array() > 0).all());
      CHECK((res.weights.array() > 0).all());
    }
    feasible += grid;
    ++checked;
  }
  CHECK(feasible > 10);
  CHECK(feasible < checked);
}

TEST_CASE("single-entry matrices have a positive solution half the time") {
  const auto rep = positive_solution_frequency(1, 4000, {}, 99, 2);
  CHECK(rep.p.lo <= 0.5);
  CHECK(rep.p.hi >= 0.5);
  CHECK(rep.outcomes.size() == 4000);
}

TEST_CASE("positive-solution frequency falls with N") {
  RandomMatrixSpec spec;
  const auto f5 = positive_solution_frequency(5, 4000, spec, 1, 2);
  const auto f10 = positive_solution_frequency(10, 4000, spec, 2, 2);
  const auto f20 = positive_solution_frequency(20, 4000, spec, 3, 2);
  CHECK(f5.p.freq >= f10.p.freq);
  CHECK(f10.p.freq >= f20.p.freq);
  CHECK(f5.p.lo > f20.p.hi);
  RandomMatrixSpec dense;
  dense.model = RandomMatrixModel::DenseGaussian;
  CHECK(positive_solution_frequency(40, 200, dense, 4, 2).p.hi <= 0.1);
}

TEST_CASE("sparse draws respect the caps") {
  Rng rng(5);
  RandomMatrixSpec spec;
  for (int t = 0; t < 20; ++t) {
    const Mat A = draw_random_matrix(30, spec, rng);
    for (Index i = 0; i < 30; ++i) {
      CHECK((A.row(i).array() != 0).count() <= 3);
      CHECK((A.col(i).array() != 0).count() <= 3);
    }
    CHECK(A.cwiseAbs().maxCoeff() <= 1.0);
  }
  CHECK(has_positive_solution(Mat::Identity(3, 3)));
  CHECK_FALSE(has_positive_solution(-Mat::Identity(3, 3)));
}
