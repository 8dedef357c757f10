#pragma once

#include "hlv/canonical.hpp"
#include "hlv/common.hpp"
#include "hlv/model.hpp"
#include "hlv/montecarlo.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace hlv {

struct FeasibilityCertificate {
  bool feasible = false;      // {z > 0 : B z = rbar} nonempty
  std::optional<Vec> witness;
  double slack = 0.0;         // min entry of the max-min witness
  bool rank_ok = false;       // B has full row rank
  Index rank = 0;
  double residual = 0.0;      // |rbar - B z| / max(1, |rbar|)

  bool certified() const { return feasible && rank_ok; }
};

// Max-min-entry solution of B z = rhs; `tol` sets both the rank threshold
// (tol * sigma_max) and the strict-positivity threshold tol * |rhs| / |B|.
FeasibilityCertificate positive_solution(const Mat& B, const Vec& rhs, double tol = 1e-9);
FeasibilityCertificate cone_condition(const Mat& B, const Vec& rbar, double tol = 1e-9);

struct PersistenceReport {
  enum class Verdict { Persistent, NotPersistent, NotApplicable };
  Verdict verdict = Verdict::NotApplicable;
  bool rank_ok = false;                 // rank A = M
  FeasibilityCertificate prey;          // A v = r
  FeasibilityCertificate generalists;   // B x = rbar
  std::string reason;
};

std::string_view to_string(PersistenceReport::Verdict v);
PersistenceReport strong_persistence(const InteractionSystem& sys, const std::optional<HamiltonianFactors>& factors,
                                     double tol = 1e-9);

struct PermanenceReport {
  Mat matrix_M;
  bool pd = false;
  double min_eig_sym = 0.0;
  bool has_positive_equilibrium = false;
  std::optional<Vec> equilibrium;  // (x, v)
  bool permanent = false;
};

PermanenceReport permanence(const InteractionSystem& sys, const HamiltonianFactors& factors, const Mat& A_pert,
                            const Mat& B_pert, double tol = 1e-9);

struct AdaptiveResult {
  bool feasible = false;
  Vec weights;  // w_k = sigma_k v_k, normalized to sum 1
  Vec sigma;    // with v_k = 1
  Vec rho;      // (B^T w)_i / r_i
  double margin = 0.0;
  std::vector<Index> violated;
};

AdaptiveResult adaptive_solve(const Mat& B, const Vec& r, const Vec& rho_signs);

enum class RandomMatrixModel { SparseUniform, DenseGaussian };

struct RandomMatrixSpec {
  RandomMatrixModel model = RandomMatrixModel::SparseUniform;
  double K = 1.0;           // entries uniform on [-K, K]
  std::size_t row_cap = 3;  // nonzeros per row
  std::size_t col_cap = 3;  // nonzeros per column
};

// Draws A for one trial; the sparse pattern is a union of min(row_cap, col_cap)
// random permutation matrices.
Mat draw_random_matrix(std::size_t N, const RandomMatrixSpec& spec, Rng& rng);
// Whether A Y = 1 has a solution with Y > 0.
bool has_positive_solution(const Mat& A);

struct FrequencyReport {
  Proportion p;
  std::vector<std::uint8_t> outcomes;
};

FrequencyReport positive_solution_frequency(std::size_t N, std::size_t trials, const RandomMatrixSpec& spec,
                                            std::uint64_t seed, unsigned workers = 0);

}  // namespace hlv
