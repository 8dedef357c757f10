#pragma once

#include "hlv/common.hpp"

#include <vector>

namespace hlv {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Vec x;
  double objective = 0.0;
  std::size_t pivots = 0;
};

// Small dense linear program, maximize c^T x. Solved with a two-phase tableau
// simplex using Bland's rule; the final basic solution is recomputed by LU.
class LinearProgram {
 public:
  enum class Bound { NonNegative, Free };
  enum class Relation { Le, Ge, Eq };

  Index add_variable(Bound bound = Bound::NonNegative);
  Index add_variables(Index count, Bound bound = Bound::NonNegative);
  Index variable_count() const { return static_cast<Index>(bounds_.size()); }

  // `coeffs` may be shorter than the variable count; missing entries are zero.
  void add_constraint(const Vec& coeffs, Relation rel, double rhs);
  void set_objective(const Vec& c);

  LpSolution maximize() const;

 private:
  struct Row {
    Vec coeffs;
    Relation rel;
    double rhs;
  };
  std::vector<Bound> bounds_;
  std::vector<Row> rows_;
  Vec objective_;
};

}  // namespace hlv
