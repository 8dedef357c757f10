#include "hlv/linprog.hpp"

#include <cmath>
#include <limits>

namespace hlv {

namespace {

constexpr double kPivotEps = 1e-9;
constexpr double kCostEps = 1e-10;
constexpr std::size_t kMaxPivots = 200000;

// Tableau with the objective kept in the last row: T(m, j) holds the reduced
// cost c_j - c_B^T B^-1 a_j, T(m, last) holds -objective.
struct Tableau {
  Mat T;
  std::vector<Index> basis;
  std::size_t pivots = 0;

  Index rows() const { return T.rows() - 1; }
  Index rhs_col() const { return T.cols() - 1; }

  void pivot(Index r, Index c) {
    T.row(r) /= T(r, c);
    for (Index i = 0; i < T.rows(); ++i) {
      if (i != r && T(i, c) != 0.0) T.row(i) -= T(i, c) * T.row(r);
    }
    basis[static_cast<std::size_t>(r)] = c;
    ++pivots;
  }

  void set_costs(const Vec& cost) {
    const Index m = rows();
    T.row(m).setZero();
    T.row(m).head(cost.size()) = cost.transpose();
    for (Index r = 0; r < m; ++r) {
      const double cb = cost(basis[static_cast<std::size_t>(r)]);
      if (cb != 0.0) T.row(m) -= cb * T.row(r);
    }
  }

  // Returns false when the problem is unbounded over the allowed columns.
  bool optimize(Index allowed_cols) {
    const Index m = rows();
    for (;;) {
      Index enter = -1;
      for (Index j = 0; j < allowed_cols; ++j) {
        if (T(m, j) > kCostEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Index r = 0; r < m; ++r) {
        const double a = T(r, enter);
        if (a <= kPivotEps) continue;
        const double ratio = T(r, rhs_col()) / a;
        const bool tie = leave >= 0 && std::abs(ratio - best) <= 1e-12 * std::max(1.0, std::abs(best));
        if (ratio < best && !tie) {
          best = ratio;
          leave = r;
        } else if (tie && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)]) {
          leave = r;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
      if (pivots > kMaxPivots) fail(ErrorCode::Numeric, "simplex: pivot limit exceeded");
    }
  }
};

}  // namespace

Index LinearProgram::add_variable(Bound bound) {
  bounds_.push_back(bound);
  return static_cast<Index>(bounds_.size()) - 1;
}

Index LinearProgram::add_variables(Index count, Bound bound) {
  const Index first = variable_count();
  for (Index i = 0; i < count; ++i) bounds_.push_back(bound);
  return first;
}

void LinearProgram::add_constraint(const Vec& coeffs, Relation rel, double rhs) {
  if (coeffs.size() > variable_count()) fail(ErrorCode::InvalidArgument, "constraint: more coefficients than variables");
  if (!coeffs.allFinite() || !std::isfinite(rhs)) fail(ErrorCode::InvalidArgument, "constraint: non-finite data");
  rows_.push_back({coeffs, rel, rhs});
}

void LinearProgram::set_objective(const Vec& c) {
  if (c.size() > variable_count()) fail(ErrorCode::InvalidArgument, "objective: more coefficients than variables");
  objective_ = c;
}

LpSolution LinearProgram::maximize() const {
  const Index nv = variable_count();
  const Index m = static_cast<Index>(rows_.size());

  // Column layout: x+ for every variable, x- for free ones, then slacks.
  std::vector<Index> neg_col(static_cast<std::size_t>(nv), -1);
  Index ns = nv;
  for (Index i = 0; i < nv; ++i) {
    if (bounds_[static_cast<std::size_t>(i)] == Bound::Free) neg_col[static_cast<std::size_t>(i)] = ns++;
  }
  std::vector<Index> slack_col(static_cast<std::size_t>(m), -1);
  for (Index r = 0; r < m; ++r) {
    if (rows_[static_cast<std::size_t>(r)].rel != Relation::Eq) slack_col[static_cast<std::size_t>(r)] = ns++;
  }

  Mat As = Mat::Zero(m, ns);
  Vec bs(m);
  for (Index r = 0; r < m; ++r) {
    const Row& row = rows_[static_cast<std::size_t>(r)];
    for (Index i = 0; i < row.coeffs.size(); ++i) {
      As(r, i) = row.coeffs(i);
      if (neg_col[static_cast<std::size_t>(i)] >= 0) As(r, neg_col[static_cast<std::size_t>(i)]) = -row.coeffs(i);
    }
    if (row.rel == Relation::Le) As(r, slack_col[static_cast<std::size_t>(r)]) = 1.0;
    if (row.rel == Relation::Ge) As(r, slack_col[static_cast<std::size_t>(r)]) = -1.0;
    bs(r) = row.rhs;
    double scale = As.row(r).cwiseAbs().maxCoeff();
    if (scale > 0.0) {
      As.row(r) /= scale;
      bs(r) /= scale;
    }
    if (bs(r) < 0.0) {
      As.row(r) *= -1.0;
      bs(r) *= -1.0;
    }
  }

  Vec cs = Vec::Zero(ns);
  for (Index i = 0; i < objective_.size(); ++i) {
    cs(i) = objective_(i);
    if (neg_col[static_cast<std::size_t>(i)] >= 0) cs(neg_col[static_cast<std::size_t>(i)]) = -objective_(i);
  }

  Tableau tab;
  tab.T = Mat::Zero(m + 1, ns + m + 1);
  tab.T.topLeftCorner(m, ns) = As;
  tab.T.block(0, ns, m, m).setIdentity();
  tab.T.col(ns + m).head(m) = bs;
  tab.basis.resize(static_cast<std::size_t>(m));
  for (Index r = 0; r < m; ++r) tab.basis[static_cast<std::size_t>(r)] = ns + r;

  Vec phase1 = Vec::Zero(ns + m);
  phase1.tail(m).setConstant(-1.0);
  tab.set_costs(phase1);
  tab.optimize(ns + m);

  LpSolution sol;
  const double infeas = tab.T(m, ns + m);  // sum of artificials at the phase-1 optimum
  const double bscale = 1.0 + (m > 0 ? bs.cwiseAbs().maxCoeff() : 0.0);
  if (infeas > 1e-9 * bscale) {
    sol.status = LpStatus::Infeasible;
    sol.pivots = tab.pivots;
    return sol;
  }

  // Drive remaining artificials out of the basis; rows that cannot pivot are redundant.
  std::vector<char> redundant(static_cast<std::size_t>(m), 0);
  for (Index r = 0; r < m; ++r) {
    if (tab.basis[static_cast<std::size_t>(r)] < ns) continue;
    Index col = -1;
    double best = kPivotEps;
    for (Index j = 0; j < ns; ++j) {
      if (std::abs(tab.T(r, j)) > best) {
        best = std::abs(tab.T(r, j));
        col = j;
      }
    }
    if (col >= 0) {
      tab.pivot(r, col);
    } else {
      redundant[static_cast<std::size_t>(r)] = 1;
    }
  }
  // Artificial columns are excluded from entering in phase 2 by the column limit.
  Vec phase2 = Vec::Zero(ns + m);
  phase2.head(ns) = cs;
  tab.set_costs(phase2);
  if (!tab.optimize(ns)) {
    sol.status = LpStatus::Unbounded;
    sol.pivots = tab.pivots;
    return sol;
  }

  Vec xs = Vec::Zero(ns);
  std::vector<Index> rows_kept, cols_kept;
  for (Index r = 0; r < m; ++r) {
    if (redundant[static_cast<std::size_t>(r)]) continue;
    const Index c = tab.basis[static_cast<std::size_t>(r)];
    xs(c) = tab.T(r, ns + m);
    rows_kept.push_back(r);
    cols_kept.push_back(c);
  }
  if (!rows_kept.empty()) {
    const Index k = static_cast<Index>(rows_kept.size());
    Mat Bm(k, k);
    Vec bk(k);
    for (Index i = 0; i < k; ++i) {
      bk(i) = bs(rows_kept[static_cast<std::size_t>(i)]);
      for (Index j = 0; j < k; ++j) Bm(i, j) = As(rows_kept[static_cast<std::size_t>(i)], cols_kept[static_cast<std::size_t>(j)]);
    }
    Eigen::FullPivLU<Mat> lu(Bm);
    if (lu.isInvertible()) {
      Vec xb = lu.solve(bk);
      if (xb.allFinite() && xb.minCoeff() > -1e-9 * bscale) {
        for (Index j = 0; j < k; ++j) xs(cols_kept[static_cast<std::size_t>(j)]) = std::max(0.0, xb(j));
      }
    }
  }

  sol.status = LpStatus::Optimal;
  sol.x = Vec::Zero(nv);
  for (Index i = 0; i < nv; ++i) {
    sol.x(i) = xs(i);
    if (neg_col[static_cast<std::size_t>(i)] >= 0) sol.x(i) -= xs(neg_col[static_cast<std::size_t>(i)]);
  }
  sol.objective = objective_.size() ? objective_.dot(sol.x.head(objective_.size())) : 0.0;
  sol.pivots = tab.pivots;
  return sol;
}

}  // namespace hlv
