#pragma once

#include "hlv/canonical.hpp"
#include "hlv/common.hpp"
#include "hlv/model.hpp"
#include "hlv/star.hpp"

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hlv {

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

struct TrajectoryMeta {
  std::string integrator;
  double rtol = 0.0;
  double atol = 0.0;
  double h = 0.0;
  StepStats stats;
  bool escaped = false;
  double escape_time = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> columns;
};

struct Trajectory {
  std::size_t dim = 0;
  std::vector<double> times;
  std::vector<double> data;    // row-major, size() x dim
  std::vector<double> energy;  // empty when not recorded
  TrajectoryMeta meta;

  std::size_t size() const { return times.size(); }
  std::span<const double> state(std::size_t i) const { return {data.data() + i * dim, dim}; }
  double at(std::size_t i, std::size_t j) const { return data[i * dim + j]; }
  Vec row(std::size_t i) const;
  Vec column(std::size_t j) const;
  void push(double t, std::span<const double> y);
  void push(double t, const Vec& y) { push(t, std::span<const double>(y.data(), static_cast<std::size_t>(y.size()))); }
};

using OdeRhs = std::function<void(double t, const Vec& y, Vec& dy)>;

struct AdaptiveOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h0 = 0.0;  // 0 selects an initial step automatically
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 50'000'000;
  // Checked after every accepted step; returning true ends the run early.
  std::function<bool(double t, const Vec& y)> stop;
};

struct AdaptiveOutcome {
  StepStats stats;
  bool stopped = false;
  double t_end = 0.0;
  Vec y_end;
};

// Dormand-Prince 5(4) with error control; `observer` receives the state at every
// requested sample time (the pair's fourth-order continuous extension between steps).
AdaptiveOutcome integrate_adaptive(const OdeRhs& f, double t0, const Vec& y0, const std::vector<double>& sample_times,
                                   const AdaptiveOptions& opts,
                                   const std::function<void(double t, const Vec& y)>& observer);

std::vector<double> uniform_samples(double t_end, std::size_t count);

// Direct integration in log-abundance coordinates; states are (x, v).
Trajectory integrate_lv(const InteractionSystem& sys, const Vec& x0, const Vec& v0,
                        const std::vector<double>& sample_times, double rtol, double atol);
Trajectory integrate_lv(const InteractionSystem& sys, const Vec& x0, const Vec& v0, double t_end, double rtol,
                        double atol, std::size_t samples = 1001);

// Kick-drift-kick splitting for H = Phi(q) + Psi(p); states are (q, p) and H is
// recorded at every stored sample (every `stride` steps).
Trajectory integrate_symplectic(const StarSystem& star, double q0, double p0, double h, double t_end,
                                std::size_t stride = 1);
Trajectory integrate_symplectic(const CanonicalSystem& sys, const CanonicalState& s0, double h, double t_end,
                                std::size_t stride = 1);

// Adaptive integration of (q, p, C) including C dynamics; C is integrated in log form.
Trajectory integrate_transformed(const CanonicalSystem& sys, const CanonicalState& s0,
                                 const std::vector<double>& sample_times, double rtol, double atol);
Trajectory integrate_transformed(const CanonicalSystem& sys, const CanonicalState& s0, double t_end, double rtol,
                                 double atol = 1e-12, std::size_t samples = 1001);

// Maps a transformed trajectory (q, p, C) to abundances (x, v).
Trajectory to_abundances(const CanonicalSystem& sys, const Trajectory& transformed);

double max_relative_drift(const std::vector<double>& energy, std::size_t upto = static_cast<std::size_t>(-1));

// Time between the first two upward crossings of q = q_section (q increasing).
double first_return_time(const StarSystem& star, double q_section, double p0, double h, double t_max);

}  // namespace hlv
