#pragma once

#include "hlv/common.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace hlv {

// Two-group Lotka-Volterra system
//   dx_i/dt = x_i (-r_i + sum_k A_ik v_k - sum_j Gamma_ij x_j)
//   dv_j/dt = v_j (rbar_j - sum_l B_jl x_l - sum_k D_jk v_k)
struct InteractionSystem {
  Vec r;
  Vec rbar;
  Mat A;
  Mat B;
  Mat Gamma;
  Mat D;

  Index n() const { return r.size(); }
  Index m() const { return rbar.size(); }

  // Throws InvalidArgument naming the offending field.
  void validate() const;
  bool limitation_free() const;

  static InteractionSystem without_limitation(Vec r, Vec rbar, Mat A, Mat B);
};

// Right-hand side of the abundance equations; dx and dv are resized.
void lv_rhs(const InteractionSystem& sys, const Vec& x, const Vec& v, Vec& dx, Vec& dv);

enum class SignPattern { PP, MF, MO, C, Mixed };

std::string_view to_string(SignPattern p);
SignPattern classify_signs(const InteractionSystem& sys);

struct NetworkTopology {
  std::size_t n_nodes = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // u < v, sorted
  std::optional<std::vector<int>> bipartition;

  // Normalizes orientation and order; rejects self-loops, duplicates and bad node ids.
  static NetworkTopology from_edges(std::size_t n_nodes,
                                    std::vector<std::pair<std::size_t, std::size_t>> edges);
  std::vector<std::size_t> degrees() const;
};

double connectance(const NetworkTopology& topo);
NetworkTopology generate_scale_free(std::size_t n_nodes, std::size_t m_attach, std::uint64_t seed);
std::size_t overlap_count(const NetworkTopology& topo, std::span<const std::size_t> hubs);

// Discrete power-law exponent by the approximate maximum-likelihood estimator
// s = 1 + n / sum ln(k / (x_min - 1/2)) over degrees k >= x_min.
double fit_power_law_exponent(std::span<const std::size_t> degrees, std::size_t x_min = 5);

}  // namespace hlv
