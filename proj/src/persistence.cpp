#include "hlv/persistence.hpp"

#include "hlv/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hlv {

FeasibilityCertificate positive_solution(const Mat& B, const Vec& rhs, double tol) {
  if (B.rows() != rhs.size()) fail(ErrorCode::InvalidArgument, "rbar: length must equal the row count of B");
  if (B.cols() < 1) fail(ErrorCode::InvalidArgument, "B: needs at least one column");
  if (!B.allFinite() || !rhs.allFinite()) fail(ErrorCode::InvalidArgument, "B, rbar: non-finite entry");

  FeasibilityCertificate cert;
  const Index rows = B.rows(), cols = B.cols();
  Eigen::JacobiSVD<Mat> svd(B);
  const Vec sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  cert.rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * smax && sv(i) > 0.0) ++cert.rank;
  }
  cert.rank_ok = cert.rank == rows;
  if (smax == 0.0) {
    cert.feasible = false;
    return cert;
  }

  // z = s + t 1 with s >= 0; maximize t subject to B z = rhs and t <= cap.
  const double rnorm = rhs.norm();
  const double cap = 10.0 * std::max(1.0, rhs.cwiseAbs().maxCoeff() / B.cwiseAbs().maxCoeff());
  LinearProgram lp;
  lp.add_variables(cols);
  const Index t = lp.add_variable(LinearProgram::Bound::Free);
  const Vec ones_sum = B.rowwise().sum();
  for (Index j = 0; j < rows; ++j) {
    Vec row(cols + 1);
    row.head(cols) = B.row(j).transpose();
    row(t) = ones_sum(j);
    lp.add_constraint(row, LinearProgram::Relation::Eq, rhs(j));
  }
  Vec caprow = Vec::Zero(cols + 1);
  caprow(t) = 1.0;
  lp.add_constraint(caprow, LinearProgram::Relation::Le, cap);
  Vec obj = Vec::Zero(cols + 1);
  obj(t) = 1.0;
  lp.set_objective(obj);
  const LpSolution sol = lp.maximize();
  if (sol.status != LpStatus::Optimal) {
    cert.feasible = false;
    return cert;
  }
  const Vec z = sol.x.head(cols).array() + sol.x(t);
  cert.slack = z.minCoeff();
  cert.residual = (rhs - B * z).norm() / std::max(1.0, rnorm);
  const double threshold = tol * rnorm / smax;
  cert.feasible = cert.slack > threshold && cert.slack > 0.0 && cert.residual <= std::max(tol, 1e-9);
  if (cert.feasible) cert.witness = z;
  return cert;
}

FeasibilityCertificate cone_condition(const Mat& B, const Vec& rbar, double tol) {
  if (B.rows() > B.cols()) fail(ErrorCode::InvalidArgument, "B: needs M <= N");
  return positive_solution(B, rbar, tol);
}

std::string_view to_string(PersistenceReport::Verdict v) {
  switch (v) {
    case PersistenceReport::Verdict::Persistent: return "persistent";
    case PersistenceReport::Verdict::NotPersistent: return "not-persistent";
    case PersistenceReport::Verdict::NotApplicable: return "not-applicable";
  }
  return "not-applicable";
}

PersistenceReport strong_persistence(const InteractionSystem& sys, const std::optional<HamiltonianFactors>& factors,
                                     double tol) {
  sys.validate();
  PersistenceReport rep;
  if (!sys.limitation_free()) {
    rep.reason = "system has self-limitation";
    return rep;
  }
  if (!factors) {
    rep.reason = "no Hamiltonian factorization";
    return rep;
  }
  if (!factors->positive) {
    rep.reason = "factors are not all positive";
    return rep;
  }
  Eigen::JacobiSVD<Mat> svd(sys.A);
  const Vec sv = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > tol * sv(0) && sv(i) > 0.0) ++rank;
  }
  rep.rank_ok = rank == sys.m();
  rep.prey = positive_solution(sys.A, sys.r, tol);
  rep.generalists = positive_solution(sys.B, sys.rbar, tol);
  const bool ok = rep.rank_ok && rep.prey.feasible && rep.generalists.feasible;
  rep.verdict = ok ? PersistenceReport::Verdict::Persistent : PersistenceReport::Verdict::NotPersistent;
  if (!rep.rank_ok) rep.reason = "rank of A is below M";
  else if (!rep.prey.feasible) rep.reason = "A v = r has no positive solution";
  else if (!rep.generalists.feasible) rep.reason = "B x = rbar has no positive solution";
  return rep;
}

PermanenceReport permanence(const InteractionSystem& sys, const HamiltonianFactors& factors, const Mat& A_pert,
                            const Mat& B_pert, double tol) {
  sys.validate();
  const Index N = sys.n(), M = sys.m();
  if (A_pert.rows() != N || A_pert.cols() != M) fail(ErrorCode::InvalidArgument, "A_pert: expected N x M");
  if (B_pert.rows() != M || B_pert.cols() != N) fail(ErrorCode::InvalidArgument, "B_pert: expected M x N");
  if (factors.rho.size() != N || factors.sigma.size() != M) fail(ErrorCode::InvalidArgument, "factors: wrong lengths");
  if ((factors.rho.array() == 0.0).any() || (factors.sigma.array() == 0.0).any()) {
    fail(ErrorCode::Degenerate, "factors: zero rho or sigma makes the diagonal scaling singular");
  }
  if (!factors.positive) fail(ErrorCode::NotApplicable, "factors: permanence criterion needs positive rho, sigma");

  PermanenceReport rep;
  Mat blocks(N + M, N + M);
  blocks << sys.Gamma, -A_pert, B_pert, sys.D;
  Vec scale(N + M);
  scale << factors.rho.cwiseInverse(), factors.sigma.cwiseInverse();
  rep.matrix_M = blocks * scale.asDiagonal();
  const Mat sym = 0.5 * (rep.matrix_M + rep.matrix_M.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  rep.min_eig_sym = es.eigenvalues().minCoeff();
  rep.pd = rep.min_eig_sym > tol;

  Mat W(N + M, N + M);
  W << -sys.Gamma, sys.A + A_pert, -(sys.B + B_pert), -sys.D;
  Vec rhs(N + M);
  rhs << sys.r, -sys.rbar;
  const FeasibilityCertificate eq = positive_solution(W, rhs, tol);
  rep.has_positive_equilibrium = eq.feasible;
  rep.equilibrium = eq.witness;
  rep.permanent = rep.pd && rep.has_positive_equilibrium;
  return rep;
}

AdaptiveResult adaptive_solve(const Mat& B, const Vec& r, const Vec& rho_signs) {
  const Index M = B.rows(), N = B.cols();
  if (r.size() != N) fail(ErrorCode::InvalidArgument, "r: length must equal the column count of B");
  if (rho_signs.size() != N) fail(ErrorCode::InvalidArgument, "rho_signs: length must equal N");
  Vec s(N);
  for (Index i = 0; i < N; ++i) {
    if (r(i) == 0.0) fail(ErrorCode::InvalidArgument, "r: entry " + std::to_string(i) + " is zero");
    if (rho_signs(i) == 0.0) fail(ErrorCode::InvalidArgument, "rho_signs: entry " + std::to_string(i) + " is zero");
    s(i) = (rho_signs(i) > 0.0 ? 1.0 : -1.0) * (r(i) > 0.0 ? 1.0 : -1.0);
  }

  // Maximize t: s_i (B^T w)_i >= t, w_k >= t, sum w = 1.
  LinearProgram lp;
  lp.add_variables(M);
  const Index t = lp.add_variable(LinearProgram::Bound::Free);
  for (Index i = 0; i < N; ++i) {
    Vec row(M + 1);
    row.head(M) = s(i) * B.col(i);
    row(t) = -1.0;
    lp.add_constraint(row, LinearProgram::Relation::Ge, 0.0);
  }
  for (Index k = 0; k < M; ++k) {
    Vec row = Vec::Zero(M + 1);
    row(k) = 1.0;
    row(t) = -1.0;
    lp.add_constraint(row, LinearProgram::Relation::Ge, 0.0);
  }
  Vec sum = Vec::Zero(M + 1);
  sum.head(M).setOnes();
  lp.add_constraint(sum, LinearProgram::Relation::Eq, 1.0);
  Vec obj = Vec::Zero(M + 1);
  obj(t) = 1.0;
  lp.set_objective(obj);
  const LpSolution sol = lp.maximize();

  AdaptiveResult res;
  if (sol.status != LpStatus::Optimal) fail(ErrorCode::Numeric, "adaptive_solve: LP did not reach an optimum");
  res.weights = sol.x.head(M);
  const Vec bw = B.transpose() * res.weights;
  const Vec margins = s.cwiseProduct(bw);
  res.margin = std::min(margins.minCoeff(), res.weights.minCoeff());
  const double scale = B.cwiseAbs().maxCoeff();
  res.feasible = res.margin > 1e-12 * std::max(1.0, scale);
  for (Index i = 0; i < N; ++i) {
    if (!(margins(i) > 1e-12 * std::max(1.0, scale))) res.violated.push_back(i);
  }
  res.sigma = res.weights;
  res.rho = bw.cwiseQuotient(r);
  return res;
}

Mat draw_random_matrix(std::size_t N, const RandomMatrixSpec& spec, Rng& rng) {
  const Index n = static_cast<Index>(N);
  Mat A = Mat::Zero(n, n);
  if (spec.model == RandomMatrixModel::DenseGaussian) {
    std::normal_distribution<double> nd(0.0, 1.0);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < n; ++i) A(i, j) = nd(rng);
    }
    return A;
  }
  if (!(spec.K > 0.0)) fail(ErrorCode::InvalidArgument, "K: must be positive");
  const std::size_t k = std::max<std::size_t>(1, std::min(spec.row_cap, spec.col_cap));
  std::uniform_real_distribution<double> ud(-spec.K, spec.K);
  std::vector<Index> perm(N);
  for (std::size_t layer = 0; layer < k; ++layer) {
    std::iota(perm.begin(), perm.end(), Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    for (Index i = 0; i < n; ++i) A(i, perm[static_cast<std::size_t>(i)]) = ud(rng);
  }
  return A;
}

bool has_positive_solution(const Mat& A) {
  const Vec ones = Vec::Ones(A.rows());
  Eigen::PartialPivLU<Mat> lu(A);
  if (lu.rcond() > 1e-12) {
    const Vec y = lu.solve(ones);
    return y.allFinite() && (y.array() > 0.0).all();
  }
  return positive_solution(A, ones).feasible;
}

FrequencyReport positive_solution_frequency(std::size_t N, std::size_t trials, const RandomMatrixSpec& spec,
                                            std::uint64_t seed, unsigned workers) {
  if (N < 1) fail(ErrorCode::InvalidArgument, "N: must be >= 1");
  if (trials < 1) fail(ErrorCode::InvalidArgument, "trials: must be >= 1");
  FrequencyReport rep;
  rep.outcomes = run_trials(trials, seed, workers, [&](std::size_t, Rng& rng) -> std::uint8_t {
    return has_positive_solution(draw_random_matrix(N, spec, rng)) ? 1 : 0;
  });
  const auto hits = static_cast<std::size_t>(std::count(rep.outcomes.begin(), rep.outcomes.end(), std::uint8_t{1}));
  rep.p = wilson(hits, trials);
  return rep;
}

}  // namespace hlv
