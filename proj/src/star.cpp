#include "hlv/star.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace hlv {

namespace {

// Largest |exponent| the orbit search is allowed to probe.
constexpr double kSearchExpLimit = 650.0;

// exp(s) - 1 - s without cancellation for small |s|.
double expm1_minus_id(double s) {
  if (std::abs(s) < 0.1) {
    double term = s * s / 2.0;
    double sum = term;
    for (int k = 3; k <= 12; ++k) {
      term *= s / k;
      sum += term;
    }
    return sum;
  }
  return std::expm1(s) - s;
}

// +1 when Phi -> +inf, -1 when Phi -> -inf, 0 for a finite limit; side > 0 is q -> +inf.
int asymptote(const StarSystem& star, int side) {
  const Vec c = star.rho().cwiseProduct(star.C);
  std::vector<std::pair<double, double>> terms;
  for (Index i = 0; i < star.size(); ++i) terms.emplace_back(star.a(i) * side, c(i));
  std::sort(terms.begin(), terms.end(), [](auto& x, auto& y) { return x.first > y.first; });
  std::size_t i = 0;
  while (i < terms.size() && terms[i].first > 0.0) {
    double sum = 0.0;
    const double expo = terms[i].first;
    while (i < terms.size() && terms[i].first == expo) sum += terms[i++].second;
    if (sum > 0.0) return 1;
    if (sum < 0.0) return -1;
  }
  // Only decaying exponentials left; the linear term -rbar q decides.
  const double slope = -star.rbar * side;
  if (slope > 0.0) return 1;
  if (slope < 0.0) return -1;
  return 0;
}

double max_abs_a(const StarSystem& star) { return star.a.cwiseAbs().maxCoeff(); }

bool q_in_search_range(const StarSystem& star, double q) {
  return max_abs_a(star) * std::abs(q) <= kSearchExpLimit;
}

struct Terms {
  Eigen::ArrayXd a;
  Eigen::ArrayXd c;   // rho_i C_i
  Eigen::ArrayXd ca;  // rho_i C_i a_i = b_i C_i
  double rbar;

  explicit Terms(const StarSystem& s)
      : a(s.a.array()), c((s.rho().cwiseProduct(s.C)).array()), ca(c * a), rbar(s.rbar) {}

  double d1(double q) const { return (ca * (a * q).exp()).sum() - rbar; }
  double d1_scale(double q) const { return (ca.abs() * (a * q).exp()).sum() + std::abs(rbar); }
};

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double abs_tol_f) {
  double flo = f(lo);
  for (int it = 0; it < 300; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (std::abs(fm) <= abs_tol_f) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Bisection to an adjacent interval followed by one Newton step.
double level_root(const StarSystem& star, double level, double lo, double hi) {
  auto g = [&](double q) { return star.potential(q) - level; };
  double glo = g(lo);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  double q = 0.5 * (lo + hi);
  const double d = star.potential_d1(q);
  if (d != 0.0) {
    const double qn = q - g(q) / d;
    if (qn >= lo && qn <= hi && std::abs(g(qn)) <= std::abs(g(q))) q = qn;
  }
  return q;
}

struct Endpoint {
  enum class Kind { Simple, Degenerate, Unbounded } kind;
  double q;
};

Endpoint walk(const StarSystem& star, const PotentialProfile& prof, double start, double level,
              double tol, int dir) {
  std::vector<Extremum> ahead;
  for (const auto& e : prof.extrema) {
    if ((dir > 0 && e.q > start) || (dir < 0 && e.q < start)) ahead.push_back(e);
  }
  if (dir < 0) std::reverse(ahead.begin(), ahead.end());

  double prev = start;
  for (const auto& e : ahead) {
    if (e.kind == Extremum::Kind::Max) {
      if (std::abs(e.value - level) <= tol) return {Endpoint::Kind::Degenerate, e.q};
      if (e.value > level) {
        const double lo = std::min(prev, e.q), hi = std::max(prev, e.q);
        return {Endpoint::Kind::Simple, level_root(star, level, lo, hi)};
      }
    }
    prev = e.q;
  }

  // Past the last extremum: expand until the level is exceeded.
  const double width = std::max(prof.window_hi - prof.window_lo, 1e-6);
  double x = prev;
  double step = width / 8.0;
  for (int it = 0; it < 200; ++it) {
    const double next = x + dir * step;
    if (!q_in_search_range(star, next)) break;
    if (star.potential(next) > level) {
      const double lo = std::min(x, next), hi = std::max(x, next);
      return {Endpoint::Kind::Simple, level_root(star, level, lo, hi)};
    }
    x = next;
    step *= 2.0;
  }
  return {Endpoint::Kind::Unbounded, x};
}

}  // namespace

StarSystem StarSystem::hamiltonian(Vec a, Vec b, double rbar, double mu, Vec C) {
  StarSystem s;
  s.r = a * mu;
  s.a = std::move(a);
  s.b = std::move(b);
  s.C = std::move(C);
  s.rbar = rbar;
  s.mu = mu;
  s.validate();
  return s;
}

void StarSystem::validate() const {
  const Index n = a.size();
  if (n < 1) fail(ErrorCode::InvalidArgument, "a: star needs at least one specialist");
  if (b.size() != n) fail(ErrorCode::InvalidArgument, "b: length differs from a");
  if (r.size() != n) fail(ErrorCode::InvalidArgument, "r: length differs from a");
  if (C.size() != n) fail(ErrorCode::InvalidArgument, "C: length differs from a");
  if (!a.allFinite() || !b.allFinite() || !r.allFinite() || !C.allFinite() || !std::isfinite(rbar)) {
    fail(ErrorCode::InvalidArgument, "star: non-finite coefficient");
  }
  for (Index i = 0; i < n; ++i) {
    if (a(i) == 0.0) fail(ErrorCode::InvalidArgument, "a: entry " + std::to_string(i) + " is zero");
    if (!(C(i) > 0.0)) fail(ErrorCode::InvalidArgument, "C: entry " + std::to_string(i) + " not positive");
  }
  if (!(mu > 0.0) || !std::isfinite(mu)) fail(ErrorCode::InvalidArgument, "mu: must be positive");
}

bool StarSystem::hamiltonian_valid(double tol) const {
  for (Index i = 0; i < size(); ++i) {
    if (std::abs(r(i) - a(i) * mu) > tol * std::max(1.0, std::abs(r(i)))) return false;
  }
  return true;
}

double StarSystem::potential(double q) const {
  double s = 0.0;
  for (Index i = 0; i < size(); ++i) s += b(i) / a(i) * C(i) * guarded_exp(a(i) * q);
  return s - rbar * q;
}

double StarSystem::potential_d1(double q) const {
  double s = 0.0;
  for (Index i = 0; i < size(); ++i) s += b(i) * C(i) * guarded_exp(a(i) * q);
  return s - rbar;
}

double StarSystem::potential_d2(double q) const {
  double s = 0.0;
  for (Index i = 0; i < size(); ++i) s += b(i) * a(i) * C(i) * guarded_exp(a(i) * q);
  return s;
}

double StarSystem::kinetic(double p) const { return guarded_exp(p) - mu * p; }

StarSystem StarSystem::without_species(Index j) const {
  if (j < 0 || j >= size()) fail(ErrorCode::InvalidArgument, "species index out of range");
  StarSystem s;
  const Index n = size() - 1;
  auto drop = [&](const Vec& v) {
    Vec out(n);
    for (Index i = 0, k = 0; i < size(); ++i) {
      if (i != j) out(k++) = v(i);
    }
    return out;
  };
  s.a = drop(a);
  s.b = drop(b);
  s.r = drop(r);
  s.C = drop(C);
  s.rbar = rbar;
  s.mu = mu;
  return s;
}

std::size_t PotentialProfile::minima() const {
  return static_cast<std::size_t>(std::count_if(extrema.begin(), extrema.end(),
                                                [](const Extremum& e) { return e.kind == Extremum::Kind::Min; }));
}

std::size_t PotentialProfile::maxima() const { return extrema.size() - minima(); }

std::pair<double, double> default_window(const StarSystem& star) {
  const double m = max_abs_a(star);
  return {-50.0 / m, 50.0 / m};
}

bool coercive_right(const StarSystem& star) { return asymptote(star, +1) > 0; }
bool coercive_left(const StarSystem& star) { return asymptote(star, -1) > 0; }

PotentialProfile analyze_potential(const StarSystem& star, std::pair<double, double> window,
                                   std::size_t grid_points) {
  star.validate();
  const auto [lo, hi] = window;
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
    fail(ErrorCode::InvalidArgument, "q_window: need finite lo < hi");
  }
  if (grid_points < 3) fail(ErrorCode::InvalidArgument, "grid_points: need at least 3");
  if (max_abs_a(star) * std::max(std::abs(lo), std::abs(hi)) > kExpLimit) {
    fail(ErrorCode::Overflow, "q_window: exponents exceed the overflow guard");
  }

  const Terms t(star);
  PotentialProfile prof;
  prof.window_lo = lo;
  prof.window_hi = hi;
  const int trend_right = asymptote(star, +1);
  const int trend_left = asymptote(star, -1);
  prof.coercive_right = trend_right > 0;
  prof.coercive_left = trend_left > 0;

  const double h = (hi - lo) / static_cast<double>(grid_points - 1);
  double last_q = lo;
  double last_d = t.d1(lo);
  auto f = [&](double q) { return t.d1(q); };
  for (std::size_t k = 1; k < grid_points; ++k) {
    const double q = (k + 1 == grid_points) ? hi : lo + h * static_cast<double>(k);
    const double d = t.d1(q);
    if (d == 0.0) continue;
    if (last_d != 0.0 && (d > 0.0) != (last_d > 0.0)) {
      const double tol = 1e-12 * t.d1_scale(0.5 * (last_q + q));
      const double qs = bisect_root(f, last_q, q, tol);
      Extremum e;
      e.q = qs;
      e.value = star.potential(qs);
      e.kind = last_d < 0.0 ? Extremum::Kind::Min : Extremum::Kind::Max;
      prof.extrema.push_back(e);
    }
    last_q = q;
    last_d = d;
  }

  const double d_hi = t.d1(hi), d_lo = t.d1(lo);
  if ((trend_right > 0 && d_hi < 0.0) || (trend_right < 0 && d_hi > 0.0)) prof.window_clipped = true;
  if ((trend_left > 0 && d_lo > 0.0) || (trend_left < 0 && d_lo < 0.0)) prof.window_clipped = true;
  return prof;
}

PotentialProfile analyze_potential(const StarSystem& star) {
  return analyze_potential(star, default_window(star));
}

std::string_view to_string(OrbitClass::Kind k) {
  switch (k) {
    case OrbitClass::Kind::Equilibrium: return "equilibrium";
    case OrbitClass::Kind::Periodic: return "periodic";
    case OrbitClass::Kind::Soliton: return "soliton";
    case OrbitClass::Kind::Kink: return "kink";
    case OrbitClass::Kind::Unbounded: return "unbounded";
  }
  return "unbounded";
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Left: return "left";
    case Direction::Right: return "right";
    case Direction::Both: return "both";
  }
  return "both";
}

OrbitClass classify_orbit(const StarSystem& star, double E, const OrbitOptions& opts) {
  star.validate();
  if (!std::isfinite(E)) fail(ErrorCode::InvalidArgument, "E: not finite");
  const PotentialProfile prof = analyze_potential(star, opts.window.value_or(default_window(star)));
  const double level = star.level(E);
  const double tol = opts.tol_deg_rel * std::max(1.0, std::abs(E));

  // Locate the well: the minimum whose basin contains q_ref, or the deepest minimum.
  std::optional<Extremum> well;
  double start = 0.0;
  if (opts.q_ref) {
    const double q = *opts.q_ref;
    const Extremum* left_max = nullptr;
    const Extremum* right_max = nullptr;
    for (const auto& e : prof.extrema) {
      if (e.kind != Extremum::Kind::Max) continue;
      if (e.q <= q) left_max = &e;
      if (e.q > q && !right_max) right_max = &e;
    }
    for (const auto& e : prof.extrema) {
      if (e.kind != Extremum::Kind::Min) continue;
      if ((!left_max || e.q > left_max->q) && (!right_max || e.q < right_max->q)) well = e;
    }
    start = well ? well->q : q;
    if (!well && star.potential(q) > level + tol) {
      fail(ErrorCode::InvalidArgument, "E: q_ref lies outside the admissible set of this energy");
    }
  } else {
    for (const auto& e : prof.extrema) {
      if (e.kind == Extremum::Kind::Min && (!well || e.value < well->value)) well = e;
    }
    if (well) {
      start = well->q;
    } else {
      // No well: start on a side where the admissible set is unbounded.
      const int tr = asymptote(star, +1), tl = asymptote(star, -1);
      const double far = kSearchExpLimit / max_abs_a(star);
      if (tr < 0 || (tr == 0 && star.potential(far) <= level)) {
        start = far;
      } else if (tl < 0 || (tl == 0 && star.potential(-far) <= level)) {
        start = -far;
      } else {
        fail(ErrorCode::InvalidArgument, "E: below the infimum of the potential, admissible set is empty");
      }
    }
  }

  OrbitClass oc;
  if (well) {
    if (level < well->value - tol) {
      fail(ErrorCode::InvalidArgument, "E: below the well minimum, admissible set is empty");
    }
    if (std::abs(level - well->value) <= tol) {
      oc.kind = OrbitClass::Kind::Equilibrium;
      oc.q_minus = oc.q_plus = well->q;
      return oc;
    }
  }

  const Endpoint right = walk(star, prof, start, level, tol, +1);
  const Endpoint left = walk(star, prof, start, level, tol, -1);
  oc.q_minus = left.q;
  oc.q_plus = right.q;
  const bool lu = left.kind == Endpoint::Kind::Unbounded;
  const bool ru = right.kind == Endpoint::Kind::Unbounded;
  if (lu || ru) {
    oc.kind = OrbitClass::Kind::Unbounded;
    oc.direction = (lu && ru) ? Direction::Both : (lu ? Direction::Left : Direction::Right);
    return oc;
  }
  const bool ld = left.kind == Endpoint::Kind::Degenerate;
  const bool rd = right.kind == Endpoint::Kind::Degenerate;
  if (ld && rd) {
    oc.kind = OrbitClass::Kind::Kink;
    oc.fragile = true;
  } else if (ld || rd) {
    oc.kind = OrbitClass::Kind::Soliton;
    oc.q_plateau = ld ? left.q : right.q;
  } else {
    oc.kind = OrbitClass::Kind::Periodic;
    if (opts.compute_period) {
      oc.period = orbit_integral(star, level, oc.q_minus, oc.q_plus, [](double, double) { return 1.0; }).first;
    }
  }
  return oc;
}

std::pair<double, double> kinetic_branches(double c) {
  if (!(c > 0.0)) return {0.0, 0.0};

  // Upper root: Newton from the right of the root converges monotonically.
  double su = std::sqrt(2.0 * c);
  const double alt = std::log1p(c) + std::log1p(std::log1p(c));
  if (alt < su && expm1_minus_id(alt) >= c) su = alt;
  for (int it = 0; it < 200; ++it) {
    const double step = (expm1_minus_id(su) - c) / std::expm1(su);
    su -= step;
    if (std::abs(step) <= 1e-16 * std::abs(su)) break;
  }

  // Lower root in (-c-1, 0): safeguarded Newton.
  double lo = -c - 1.0, hi = 0.0;
  double sd = c < 0.5 ? -std::sqrt(2.0 * c) : -c - 1.0 + std::exp(-c - 1.0);
  for (int it = 0; it < 200; ++it) {
    const double g = expm1_minus_id(sd) - c;
    if (g > 0.0) lo = sd;
    else hi = sd;
    const double dg = std::expm1(sd);
    double next = dg != 0.0 ? sd - g / dg : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const bool done = std::abs(next - sd) <= 1e-16 * std::abs(sd);
    sd = next;
    if (done || hi - lo <= 4e-16 * std::abs(sd)) break;
  }
  return {su, sd};
}

std::pair<double, double> orbit_integral(const StarSystem& star, [[maybe_unused]] double level, double q_minus,
                                         double q_plus,
                                         const std::function<double(double, double)>& f,
                                         double tol) {
  if (!(q_plus > q_minus)) fail(ErrorCode::InvalidArgument, "orbit: need q_minus < q_plus");
  const double half = 0.5 * (q_plus - q_minus);
  const double lnmu = std::log(star.mu);
  // The gap level - Phi(q) is measured from the nearer turning point, where it
  // vanishes exactly; this keeps it accurate where it is small.
  const Index n = star.size();
  Vec coef_lo(n), coef_hi(n);
  for (Index i = 0; i < n; ++i) {
    const double rc = star.b(i) / star.a(i) * star.C(i);
    coef_lo(i) = rc * guarded_exp(star.a(i) * q_minus);
    coef_hi(i) = rc * guarded_exp(star.a(i) * q_plus);
  }
  auto g = [&](double theta) {
    const bool left = theta <= 0.5 * std::numbers::pi;
    const double s = left ? std::sin(0.5 * theta) : std::cos(0.5 * theta);
    const double off = (left ? 2.0 : -2.0) * half * s * s;  // q minus the nearer turning point
    const double q = left ? q_minus + off : q_plus + off;
    const Vec& coef = left ? coef_lo : coef_hi;
    double rise = -star.rbar * off;
    for (Index i = 0; i < n; ++i) rise += coef(i) * std::expm1(star.a(i) * off);
    const double delta = -rise;
    if (!(delta > 0.0)) return 0.0;
    const auto [su, sd] = kinetic_branches(delta / star.mu);
    const double vu = star.mu * std::expm1(su);
    const double vd = -star.mu * std::expm1(sd);
    if (!(vu > 0.0) || !(vd > 0.0)) return 0.0;
    const double w = half * std::sin(theta);
    return w * (f(q, lnmu + su) / vu + f(q, lnmu + sd) / vd);
  };
  double err = 0.0;
  const double val =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, std::numbers::pi, 15, tol, &err);
  return {val, err};
}

PeriodEstimate period(const StarSystem& star, double E, const OrbitOptions& opts, double cap) {
  OrbitOptions o = opts;
  o.compute_period = false;
  const OrbitClass oc = classify_orbit(star, E, o);
  if (oc.kind != OrbitClass::Kind::Periodic) {
    fail(ErrorCode::NotApplicable, std::string("period: orbit is ") + std::string(to_string(oc.kind)) + ", not periodic");
  }
  const auto [T, err] =
      orbit_integral(star, star.level(E), oc.q_minus, oc.q_plus, [](double, double) { return 1.0; });
  PeriodEstimate pe;
  pe.value = T;
  pe.error = err;
  if (!(T <= cap)) {
    pe.capped = true;
    pe.value = cap;
  }
  return pe;
}

std::string_view to_string(PersistenceVerdict::Kind k) {
  switch (k) {
    case PersistenceVerdict::Kind::PI: return "PI";
    case PersistenceVerdict::Kind::PII: return "PII";
    case PersistenceVerdict::Kind::PIII: return "PIII";
    case PersistenceVerdict::Kind::Fails: return "fails";
  }
  return "fails";
}

PersistenceVerdict persistence_criteria(const StarSystem& star) {
  PersistenceVerdict v;
  const Index n = star.size();
  if (n == 0) return v;
  Index ip = 0, im = 0;
  for (Index i = 1; i < n; ++i) {
    if (star.a(i) > star.a(ip)) ip = i;
    if (star.a(i) < star.a(im)) im = i;
  }
  for (Index i = 0; i < n; ++i) {
    if (i != ip && star.a(i) == star.a(ip)) v.tie_plus = true;
    if (i != im && star.a(i) == star.a(im)) v.tie_minus = true;
  }
  const bool all_pos = (star.a.array() > 0.0).all();
  const bool all_neg = (star.a.array() < 0.0).all();
  if (all_pos) {
    v.i_plus = ip;
    if (star.b(ip) > 0.0 && star.rbar > 0.0) v.kind = PersistenceVerdict::Kind::PI;
  } else if (all_neg) {
    v.i_minus = im;
    // Phi -> -rbar q as q -> +inf, so the right side is confined only for rbar < 0.
    if (star.b(im) < 0.0 && star.rbar < 0.0) v.kind = PersistenceVerdict::Kind::PII;
  } else {
    v.i_plus = ip;
    v.i_minus = im;
    if (star.b(ip) > 0.0 && star.b(im) < 0.0) v.kind = PersistenceVerdict::Kind::PIII;
  }
  return v;
}

std::vector<Index> domino_check(const StarSystem& star) {
  std::vector<Index> keystones;
  if (persistence_criteria(star).kind == PersistenceVerdict::Kind::Fails) return keystones;
  if (star.size() == 1) return {0};
  for (Index j = 0; j < star.size(); ++j) {
    if (persistence_criteria(star.without_species(j)).kind == PersistenceVerdict::Kind::Fails) {
      keystones.push_back(j);
    }
  }
  return keystones;
}

}  // namespace hlv
