#include "hlv/model.hpp"

#include "hlv/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hlv {

namespace {

void check_shape(const Mat& m, Index rows, Index cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    fail(ErrorCode::InvalidArgument, std::string(name) + ": expected " + std::to_string(rows) + "x" +
                                         std::to_string(cols) + ", got " + std::to_string(m.rows()) +
                                         "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) fail(ErrorCode::InvalidArgument, std::string(name) + ": non-finite entry");
}

}  // namespace

void InteractionSystem::validate() const {
  const Index N = n(), M = m();
  if (N < 1) fail(ErrorCode::InvalidArgument, "r: need at least one species (N >= 1)");
  if (M < 1) fail(ErrorCode::InvalidArgument, "rbar: need at least one species (M >= 1)");
  if (!r.allFinite()) fail(ErrorCode::InvalidArgument, "r: non-finite entry");
  if (!rbar.allFinite()) fail(ErrorCode::InvalidArgument, "rbar: non-finite entry");
  check_shape(A, N, M, "A");
  check_shape(B, M, N, "B");
  check_shape(Gamma, N, N, "Gamma");
  check_shape(D, M, M, "D");
}

bool InteractionSystem::limitation_free() const {
  return (Gamma.size() == 0 || Gamma.isZero(0.0)) && (D.size() == 0 || D.isZero(0.0));
}

InteractionSystem InteractionSystem::without_limitation(Vec r, Vec rbar, Mat A, Mat B) {
  InteractionSystem s;
  const Index N = r.size(), M = rbar.size();
  s.r = std::move(r);
  s.rbar = std::move(rbar);
  s.A = std::move(A);
  s.B = std::move(B);
  s.Gamma = Mat::Zero(N, N);
  s.D = Mat::Zero(M, M);
  s.validate();
  return s;
}

void lv_rhs(const InteractionSystem& sys, const Vec& x, const Vec& v, Vec& dx, Vec& dv) {
  dx = x.cwiseProduct(-sys.r + sys.A * v - sys.Gamma * x);
  dv = v.cwiseProduct(sys.rbar - sys.B * x - sys.D * v);
}

std::string_view to_string(SignPattern p) {
  switch (p) {
    case SignPattern::PP: return "PP";
    case SignPattern::MF: return "MF";
    case SignPattern::MO: return "MO";
    case SignPattern::C: return "C";
    case SignPattern::Mixed: return "Mixed";
  }
  return "Mixed";
}

SignPattern classify_signs(const InteractionSystem& sys) {
  const bool a_nonneg = (sys.A.array() >= 0).all();
  const bool a_nonpos = (sys.A.array() <= 0).all();
  const bool b_nonneg = (sys.B.array() >= 0).all();
  const bool b_nonpos = (sys.B.array() <= 0).all();
  const bool r_pos = (sys.r.array() > 0).all();
  const bool r_neg = (sys.r.array() < 0).all();
  const bool rb_pos = (sys.rbar.array() > 0).all();
  const bool rb_neg = (sys.rbar.array() < 0).all();

  if (a_nonneg && b_nonneg && r_pos && rb_pos) return SignPattern::PP;
  if (a_nonneg && b_nonpos && r_neg && rb_pos) return SignPattern::MF;
  if (a_nonneg && b_nonpos && r_pos && rb_neg) return SignPattern::MO;
  if (a_nonpos && b_nonneg && r_pos && rb_pos) return SignPattern::C;
  return SignPattern::Mixed;
}

NetworkTopology NetworkTopology::from_edges(std::size_t n_nodes,
                                            std::vector<std::pair<std::size_t, std::size_t>> edges) {
  for (auto& e : edges) {
    if (e.first >= n_nodes || e.second >= n_nodes) {
      fail(ErrorCode::InvalidArgument, "edges: node id out of range in (" + std::to_string(e.first) +
                                           ", " + std::to_string(e.second) + ")");
    }
    if (e.first == e.second) {
      fail(ErrorCode::InvalidArgument, "edges: self-loop at node " + std::to_string(e.first));
    }
    if (e.first > e.second) std::swap(e.first, e.second);
  }
  std::sort(edges.begin(), edges.end());
  auto dup = std::adjacent_find(edges.begin(), edges.end());
  if (dup != edges.end()) {
    fail(ErrorCode::InvalidArgument, "edges: duplicate edge (" + std::to_string(dup->first) + ", " +
                                         std::to_string(dup->second) + ")");
  }
  NetworkTopology t;
  t.n_nodes = n_nodes;
  t.edges = std::move(edges);
  return t;
}

std::vector<std::size_t> NetworkTopology::degrees() const {
  std::vector<std::size_t> deg(n_nodes, 0);
  for (const auto& [u, v] : edges) {
    ++deg[u];
    ++deg[v];
  }
  return deg;
}

double connectance(const NetworkTopology& topo) {
  if (topo.n_nodes < 2) fail(ErrorCode::InvalidArgument, "n_nodes: connectance needs at least 2 nodes");
  const double n = static_cast<double>(topo.n_nodes);
  return 2.0 * static_cast<double>(topo.edges.size()) / (n * (n - 1.0));
}

NetworkTopology generate_scale_free(std::size_t n_nodes, std::size_t m_attach, std::uint64_t seed) {
  if (m_attach < 1) fail(ErrorCode::InvalidArgument, "m_attach: must be >= 1");
  if (n_nodes <= m_attach) fail(ErrorCode::InvalidArgument, "n_nodes: must exceed m_attach");

  Rng rng(seed);
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  // Every edge endpoint is listed once, so a uniform pick is degree-proportional.
  std::vector<std::size_t> endpoints;
  const std::size_t core = m_attach + 1;
  for (std::size_t u = 0; u < core; ++u) {
    for (std::size_t v = u + 1; v < core; ++v) {
      edges.emplace_back(u, v);
      endpoints.push_back(u);
      endpoints.push_back(v);
    }
  }
  std::vector<std::size_t> targets;
  for (std::size_t node = core; node < n_nodes; ++node) {
    targets.clear();
    while (targets.size() < m_attach) {
      const std::size_t pick = endpoints[static_cast<std::size_t>(rng() % endpoints.size())];
      if (std::find(targets.begin(), targets.end(), pick) == targets.end()) targets.push_back(pick);
    }
    for (std::size_t t : targets) {
      edges.emplace_back(t, node);
      endpoints.push_back(t);
      endpoints.push_back(node);
    }
  }
  return NetworkTopology::from_edges(n_nodes, std::move(edges));
}

std::size_t overlap_count(const NetworkTopology& topo, std::span<const std::size_t> hubs) {
  std::vector<char> is_hub(topo.n_nodes, 0);
  for (std::size_t h : hubs) {
    if (h >= topo.n_nodes) fail(ErrorCode::InvalidArgument, "hubs: node id out of range");
    is_hub[h] = 1;
  }
  std::vector<std::size_t> hub_links(topo.n_nodes, 0);
  for (const auto& [u, v] : topo.edges) {
    if (is_hub[u] && !is_hub[v]) ++hub_links[v];
    if (is_hub[v] && !is_hub[u]) ++hub_links[u];
  }
  return static_cast<std::size_t>(
      std::count_if(hub_links.begin(), hub_links.end(), [](std::size_t c) { return c >= 2; }));
}

double fit_power_law_exponent(std::span<const std::size_t> degrees, std::size_t x_min) {
  if (x_min < 1) fail(ErrorCode::InvalidArgument, "x_min: must be >= 1");
  const double shift = static_cast<double>(x_min) - 0.5;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t k : degrees) {
    if (k >= x_min) {
      sum += std::log(static_cast<double>(k) / shift);
      ++n;
    }
  }
  if (n < 2 || sum <= 0.0) fail(ErrorCode::Degenerate, "degrees: too few values above x_min for a fit");
  return 1.0 + static_cast<double>(n) / sum;
}

}  // namespace hlv
