#include "commands.hpp"

#include "hlv/canonical.hpp"
#include "hlv/ensemble.hpp"
#include "hlv/integrate.hpp"
#include "hlv/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <set>
#include <sstream>

namespace hlv::cmd {

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  fail(ErrorCode::Parse, "field '" + field + "': " + what);
}

void check_keys(const json& j, std::initializer_list<std::initializer_list<const char*>> groups) {
  if (!j.is_object()) fail(ErrorCode::Parse, "configuration: expected a JSON object");
  std::set<std::string> allowed;
  for (const auto& g : groups) {
    for (const char* k : g) allowed.insert(k);
  }
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) bad(key, "unknown field");
  }
}

const std::initializer_list<const char*> kSystemKeys = {"N", "M", "r", "rbar", "A", "B", "Gamma", "D"};
const std::initializer_list<const char*> kStarKeys = {"a", "b", "C", "rbar", "mu"};
const std::initializer_list<const char*> kRunKeys = {"seed", "workers"};

double num(const json& j, const std::string& key, std::optional<double> def = std::nullopt) {
  if (!j.contains(key)) {
    if (def) return *def;
    bad(key, "missing");
  }
  const json& v = j.at(key);
  if (!v.is_number()) bad(key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) bad(key, "not finite");
  return x;
}

std::size_t count(const json& j, const std::string& key, std::optional<std::size_t> def = std::nullopt) {
  if (!j.contains(key)) {
    if (def) return *def;
    bad(key, "missing");
  }
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) bad(key, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

bool flag(const json& j, const std::string& key, bool def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_boolean()) bad(key, "expected true or false");
  return j.at(key).get<bool>();
}

std::string text(const json& j, const std::string& key, const std::string& def) {
  if (!j.contains(key)) return def;
  if (!j.at(key).is_string()) bad(key, "expected a string");
  return j.at(key).get<std::string>();
}

Vec to_vec(const json& v, const std::string& key) {
  if (!v.is_array()) bad(key, "expected an array of numbers");
  Vec out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) bad(key, "entry " + std::to_string(i) + " is not a number");
    out(static_cast<Index>(i)) = v[i].get<double>();
    if (!std::isfinite(out(static_cast<Index>(i)))) bad(key, "entry " + std::to_string(i) + " is not finite");
  }
  return out;
}

Vec vec(const json& j, const std::string& key) {
  if (!j.contains(key)) bad(key, "missing");
  return to_vec(j.at(key), key);
}

std::optional<Vec> opt_vec(const json& j, const std::string& key) {
  if (!j.contains(key)) return std::nullopt;
  return to_vec(j.at(key), key);
}

Mat mat(const json& j, const std::string& key, Index rows, Index cols, bool required) {
  if (!j.contains(key)) {
    if (required) bad(key, "missing");
    return Mat::Zero(rows, cols);
  }
  const json& v = j.at(key);
  const std::string shape = std::to_string(rows) + " x " + std::to_string(cols);
  if (!v.is_array() || static_cast<Index>(v.size()) != rows) bad(key, "expected a " + shape + " matrix");
  Mat out(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = v[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) bad(key, "expected a " + shape + " matrix");
    for (Index c = 0; c < cols; ++c) {
      const json& x = row[static_cast<std::size_t>(c)];
      if (!x.is_number()) bad(key, "entry (" + std::to_string(r) + ", " + std::to_string(c) + ") is not a number");
      out(r, c) = x.get<double>();
    }
  }
  return out;
}

std::uint64_t seed_of(const json& cfg) {
  if (!cfg.contains("seed")) return 1;
  const json& v = cfg.at("seed");
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    bad("seed", "expected a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

unsigned workers_of(const json& cfg) { return static_cast<unsigned>(count(cfg, "workers", 0)); }

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Mat& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vec_json(m.row(r).transpose()));
  return out;
}

json prop_json(const Proportion& p) {
  return {{"successes", p.successes}, {"trials", p.trials}, {"freq", p.freq}, {"lo", p.lo}, {"hi", p.hi}};
}

json cert_json(const FeasibilityCertificate& c) {
  json j = {{"feasible", c.feasible}, {"rank_ok", c.rank_ok}, {"rank", c.rank},
            {"slack", c.slack},       {"residual", c.residual}};
  j["witness"] = c.witness ? vec_json(*c.witness) : json(nullptr);
  return j;
}

json config_echo(const json& cfg) {
  json echo = cfg;
  echo.erase("workers");
  return echo;
}

json table(const std::string& name, std::vector<std::string> columns, json rows) {
  return {{"name", name}, {"columns", std::move(columns)}, {"rows", std::move(rows)}};
}

const json& system_part(const json& cfg) { return cfg.contains("system") ? cfg.at("system") : cfg; }

std::vector<double> double_list(const json& cfg, const std::string& key, std::vector<double> def) {
  if (!cfg.contains(key)) return def;
  const json& v = cfg.at(key);
  if (v.is_number()) return {v.get<double>()};
  const Vec x = to_vec(v, key);
  return std::vector<double>(x.data(), x.data() + x.size());
}

std::vector<std::size_t> count_list(const json& cfg, const std::string& key, std::vector<std::size_t> def) {
  if (!cfg.contains(key)) return def;
  const json& v = cfg.at(key);
  std::vector<std::size_t> out;
  auto one = [&](const json& x) {
    if (!x.is_number_integer() || x.get<long long>() < 0) bad(key, "expected nonnegative integers");
    out.push_back(x.get<std::size_t>());
  };
  if (v.is_array()) {
    for (const auto& x : v) one(x);
  } else {
    one(v);
  }
  if (out.empty()) bad(key, "empty list");
  return out;
}

}  // namespace

InteractionSystem parse_system(const json& j) {
  if (!j.is_object()) fail(ErrorCode::Parse, "system: expected a JSON object");
  InteractionSystem sys;
  sys.r = vec(j, "r");
  sys.rbar = vec(j, "rbar");
  const Index N = sys.r.size(), M = sys.rbar.size();
  if (j.contains("N") && static_cast<Index>(count(j, "N")) != N) bad("N", "does not match the length of r");
  if (j.contains("M") && static_cast<Index>(count(j, "M")) != M) bad("M", "does not match the length of rbar");
  sys.A = mat(j, "A", N, M, true);
  sys.B = mat(j, "B", M, N, true);
  sys.Gamma = mat(j, "Gamma", N, N, false);
  sys.D = mat(j, "D", M, M, false);
  sys.validate();
  return sys;
}

StarSystem parse_star(const json& j) {
  if (!j.is_object()) fail(ErrorCode::Parse, "star: expected a JSON object");
  const Vec a = vec(j, "a");
  const Vec b = vec(j, "b");
  if (b.size() != a.size()) bad("b", "length must equal the length of a");
  Vec C = opt_vec(j, "C").value_or(Vec::Ones(a.size()));
  if (C.size() != a.size()) bad("C", "length must equal the length of a");
  StarSystem star = StarSystem::hamiltonian(a, b, num(j, "rbar"), num(j, "mu", 1.0), C);
  star.validate();
  return star;
}

json orbit_json(const OrbitClass& oc) {
  json j = {{"class", to_string(oc.kind)}, {"q_minus", oc.q_minus}, {"q_plus", oc.q_plus}};
  switch (oc.kind) {
    case OrbitClass::Kind::Periodic: j["period"] = oc.period; break;
    case OrbitClass::Kind::Soliton: j["q_plateau"] = oc.q_plateau; break;
    case OrbitClass::Kind::Kink: j["fragile"] = oc.fragile; break;
    case OrbitClass::Kind::Unbounded: j["direction"] = to_string(oc.direction); break;
    case OrbitClass::Kind::Equilibrium: break;
  }
  return j;
}

namespace {

json factors_json(const HamiltonianFactors& f) {
  return {{"rho", vec_json(f.rho)}, {"sigma", vec_json(f.sigma)}, {"positive", f.positive},
          {"max_residual", f.max_residual}};
}

Result run_check(const json& cfg) {
  const bool nested = cfg.contains("system");
  if (nested) check_keys(cfg, {{"system", "mu", "A_pert", "B_pert", "tol"}, kRunKeys});
  else check_keys(cfg, {kSystemKeys, {"mu", "A_pert", "B_pert", "tol"}, kRunKeys});
  const InteractionSystem sys = parse_system(system_part(cfg));
  const double tol = num(cfg, "tol", 1e-9);
  Result res;
  json& rep = res.report;
  rep["config"] = config_echo(cfg);
  rep["N"] = sys.n();
  rep["M"] = sys.m();
  rep["sign_pattern"] = to_string(classify_signs(sys));
  rep["limitation_free"] = sys.limitation_free();

  std::optional<HamiltonianFactors> factors;
  try {
    factors = find_factors(sys.A, sys.B);
    rep["factors"] = factors ? factors_json(*factors) : json(nullptr);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Degenerate) throw;
    rep["factors"] = nullptr;
    rep["factors_note"] = e.what();
  }
  if (factors) {
    const Vec mu = opt_vec(cfg, "mu").value_or(CanonicalSystem::balancing_mu(sys));
    if (mu.size() != sys.m()) bad("mu", "length must equal M");
    const CanonicalSystem cs = CanonicalSystem::make(sys, mu);
    rep["mu"] = vec_json(mu);
    rep["gamma_bar"] = vec_json(cs.gamma_bar);
    rep["reduction_valid"] = cs.reduction_valid(1e-9);
  }

  if (sys.m() <= sys.n()) {
    const FeasibilityCertificate cone = cone_condition(sys.B, sys.rbar, tol);
    rep["cone_condition"] = cert_json(cone);
    if (!cone.certified()) res.negative = true;
  }
  const PersistenceReport pr = strong_persistence(sys, factors, tol);
  rep["strong_persistence"] = {{"verdict", to_string(pr.verdict)},
                               {"rank_ok", pr.rank_ok},
                               {"prey", cert_json(pr.prey)},
                               {"generalists", cert_json(pr.generalists)},
                               {"reason", pr.reason}};
  if (pr.verdict == PersistenceReport::Verdict::NotPersistent) res.negative = true;

  if (factors && factors->positive && !sys.limitation_free()) {
    const Mat Ap = mat(cfg, "A_pert", sys.n(), sys.m(), false);
    const Mat Bp = mat(cfg, "B_pert", sys.m(), sys.n(), false);
    const PermanenceReport perm = permanence(sys, *factors, Ap, Bp, tol);
    rep["permanence"] = {{"matrix_M", mat_json(perm.matrix_M)},
                         {"positive_definite", perm.pd},
                         {"min_eig_sym", perm.min_eig_sym},
                         {"has_positive_equilibrium", perm.has_positive_equilibrium},
                         {"equilibrium", perm.equilibrium ? vec_json(*perm.equilibrium) : json(nullptr)},
                         {"permanent", perm.permanent}};
    if (!perm.permanent) res.negative = true;
  } else {
    rep["permanence"] = nullptr;
  }
  rep["negative"] = res.negative;
  return res;
}

std::vector<std::string> abundance_columns(Index N, Index M) {
  std::vector<std::string> c{"t"};
  for (Index i = 0; i < N; ++i) c.push_back("x" + std::to_string(i + 1));
  for (Index j = 0; j < M; ++j) c.push_back("v" + std::to_string(j + 1));
  return c;
}

json meta_json(const TrajectoryMeta& m) {
  json j = {{"integrator", m.integrator},
            {"rtol", m.rtol},
            {"atol", m.atol},
            {"h", m.h},
            {"accepted", m.stats.accepted},
            {"rejected", m.stats.rejected},
            {"evaluations", m.stats.evaluations},
            {"escaped", m.escaped}};
  j["escape_time"] = m.escaped ? json(m.escape_time) : json(nullptr);
  return j;
}

Result run_simulate(const json& cfg) {
  const bool nested = cfg.contains("system");
  const std::initializer_list<const char*> own = {"x0", "v0", "t_end", "samples", "rtol", "atol", "mu"};
  if (nested) check_keys(cfg, {{"system"}, own, kRunKeys});
  else check_keys(cfg, {kSystemKeys, own, kRunKeys});
  const InteractionSystem sys = parse_system(system_part(cfg));
  const Vec x0 = vec(cfg, "x0"), v0 = vec(cfg, "v0");
  if (x0.size() != sys.n()) bad("x0", "length must equal N");
  if (v0.size() != sys.m()) bad("v0", "length must equal M");
  const double t_end = num(cfg, "t_end");
  const double rtol = num(cfg, "rtol", 1e-10), atol = num(cfg, "atol", 1e-12);
  const Trajectory tr = integrate_lv(sys, x0, v0, t_end, rtol, atol, count(cfg, "samples", 1001));

  // Energy column when the system reduces to a conserved Hamiltonian.
  std::optional<CanonicalSystem> cs;
  if (sys.limitation_free()) {
    try {
      auto f = find_factors(sys.A, sys.B);
      if (f) {
        const Vec mu = opt_vec(cfg, "mu").value_or(CanonicalSystem::balancing_mu(sys));
        CanonicalSystem c = CanonicalSystem::make(sys, mu);
        if (c.reduction_valid(1e-9)) cs = c;
      }
    } catch (const Error&) {
    }
  }
  Result res;
  std::vector<std::string> cols = abundance_columns(sys.n(), sys.m());
  if (cs) cols.push_back("H");
  // Positions are recovered from ln(x / x0) = A diag(1/sigma) q, which needs A of full column rank.
  Eigen::ColPivHouseholderQR<Mat> qr;
  if (cs) {
    qr.compute(sys.A);
    if (qr.rank() < sys.m()) cs.reset();
  }
  json rows = json::array();
  double H0 = 0.0, drift = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    json row = json::array({tr.times[i]});
    for (std::size_t k = 0; k < tr.dim; ++k) row.push_back(tr.at(i, k));
    if (cs) {
      const Vec s = tr.row(i);
      CanonicalState st = to_canonical(*cs, x0, s.tail(sys.m()));
      st.q = cs->factors.sigma.cwiseProduct(qr.solve(Vec((s.head(sys.n()).array() / x0.array()).log().matrix())));
      const double H = hamiltonian(*cs, st);
      if (i == 0) H0 = H;
      drift = std::max(drift, std::abs(H - H0) / std::max(std::abs(H0), 1e-300));
      row.push_back(H);
    }
    rows.push_back(std::move(row));
  }
  res.report["config"] = config_echo(cfg);
  res.report["meta"] = meta_json(tr.meta);
  res.report["samples"] = tr.size();
  res.report["H_relative_drift"] = cs ? json(drift) : json(nullptr);
  res.tables.push_back(table("trajectory", cols, std::move(rows)));
  return res;
}

Result run_canonical(const json& cfg) {
  const bool nested = cfg.contains("system");
  const std::initializer_list<const char*> own = {"x0",   "v0",   "mu",      "mode", "h",   "t_end",
                                                  "stride", "rtol", "atol", "samples"};
  if (nested) check_keys(cfg, {{"system"}, own, kRunKeys});
  else check_keys(cfg, {kSystemKeys, own, kRunKeys});
  const InteractionSystem sys = parse_system(system_part(cfg));
  const Index N = sys.n(), M = sys.m();
  const Vec mu = opt_vec(cfg, "mu").value_or(CanonicalSystem::balancing_mu(sys));
  if (mu.size() != M) bad("mu", "length must equal M");
  const CanonicalSystem cs = CanonicalSystem::make(sys, mu);
  const Vec x0 = vec(cfg, "x0"), v0 = vec(cfg, "v0");
  if (x0.size() != N) bad("x0", "length must equal N");
  if (v0.size() != M) bad("v0", "length must equal M");
  const CanonicalState s0 = to_canonical(cs, x0, v0);
  const bool valid = cs.reduction_valid(1e-9);
  const std::string mode = text(cfg, "mode", valid ? "symplectic" : "transformed");
  if (mode != "symplectic" && mode != "transformed") bad("mode", "expected 'symplectic' or 'transformed'");
  const double t_end = num(cfg, "t_end");

  Result res;
  json& rep = res.report;
  rep["config"] = config_echo(cfg);
  rep["factors"] = factors_json(cs.factors);
  rep["mu"] = vec_json(cs.mu);
  rep["gamma_bar"] = vec_json(cs.gamma_bar);
  rep["reduction_valid"] = valid;
  rep["state0"] = {{"q", vec_json(s0.q)}, {"p", vec_json(s0.p)}, {"C", vec_json(s0.C)}};
  rep["mode"] = mode;

  std::vector<std::string> ccols{"t"};
  for (Index j = 0; j < M; ++j) ccols.push_back("q" + std::to_string(j + 1));
  for (Index j = 0; j < M; ++j) ccols.push_back("p" + std::to_string(j + 1));
  json crow = json::array(), arows = json::array();
  Vec x, v;
  if (mode == "symplectic") {
    const double h = num(cfg, "h", 1e-3);
    const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
    const std::size_t stride = count(cfg, "stride", std::max<std::size_t>(1, steps / 1000));
    const Trajectory tr = integrate_symplectic(cs, s0, h, t_end, stride);
    ccols.push_back("H");
    CanonicalState s = s0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
      json row = json::array({tr.times[i]});
      for (std::size_t k = 0; k < tr.dim; ++k) row.push_back(tr.at(i, k));
      row.push_back(tr.energy[i]);
      crow.push_back(std::move(row));
      const Vec r = tr.row(i);
      s.q = r.head(M);
      s.p = r.tail(M);
      from_canonical(cs, s, x, v);
      json arow = json::array({tr.times[i]});
      for (Index k = 0; k < N; ++k) arow.push_back(x(k));
      for (Index k = 0; k < M; ++k) arow.push_back(v(k));
      arows.push_back(std::move(arow));
    }
    rep["meta"] = meta_json(tr.meta);
    rep["H_relative_drift"] = max_relative_drift(tr.energy);
  } else {
    const Trajectory tr = integrate_transformed(cs, s0, t_end, num(cfg, "rtol", 1e-10), num(cfg, "atol", 1e-12),
                                                count(cfg, "samples", 1001));
    for (Index i = 0; i < N; ++i) ccols.push_back("C" + std::to_string(i + 1));
    for (std::size_t i = 0; i < tr.size(); ++i) {
      json row = json::array({tr.times[i]});
      for (std::size_t k = 0; k < tr.dim; ++k) row.push_back(tr.at(i, k));
      crow.push_back(std::move(row));
    }
    const Trajectory ab = to_abundances(cs, tr);
    for (std::size_t i = 0; i < ab.size(); ++i) {
      json row = json::array({ab.times[i]});
      for (std::size_t k = 0; k < ab.dim; ++k) row.push_back(ab.at(i, k));
      arows.push_back(std::move(row));
    }
    rep["meta"] = meta_json(tr.meta);
  }
  res.tables.push_back(table("canonical", ccols, std::move(crow)));
  res.tables.push_back(table("abundances", abundance_columns(N, M), std::move(arows)));
  return res;
}

const json& star_part(const json& cfg) { return cfg.contains("star") ? cfg.at("star") : cfg; }

void check_star_keys(const json& cfg, std::initializer_list<const char*> own) {
  if (cfg.contains("star")) check_keys(cfg, {{"star"}, own, kRunKeys});
  else check_keys(cfg, {kStarKeys, own, kRunKeys});
}

OrbitOptions orbit_options(const json& cfg) {
  OrbitOptions o;
  if (cfg.contains("q_ref")) o.q_ref = num(cfg, "q_ref");
  o.tol_deg_rel = num(cfg, "tol_deg", 1e-9);
  if (cfg.contains("window")) {
    const Vec w = vec(cfg, "window");
    if (w.size() != 2 || !(w(1) > w(0))) bad("window", "expected [lo, hi] with lo < hi");
    o.window = std::make_pair(w(0), w(1));
  }
  return o;
}

Result run_star(const std::string& sub, const json& cfg) {
  Result res;
  json& rep = res.report;
  if (sub == "classify" || sub == "period") {
    check_star_keys(cfg, {"E", "q_ref", "tol_deg", "window", "cap"});
    const StarSystem star = parse_star(star_part(cfg));
    const double E = num(cfg, "E");
    const OrbitOptions o = orbit_options(cfg);
    rep["config"] = config_echo(cfg);
    if (sub == "classify") {
      const OrbitClass oc = classify_orbit(star, E, o);
      rep["orbit"] = orbit_json(oc);
      rep["E"] = E;
      rep["level"] = star.level(E);
    } else {
      const PeriodEstimate pe = period(star, E, o, num(cfg, "cap", 1e6));
      rep["period"] = pe.value;
      rep["error"] = pe.error;
      rep["capped"] = pe.capped;
    }
    return res;
  }
  if (sub == "profile") {
    check_star_keys(cfg, {"window", "points", "grid_points"});
    const StarSystem star = parse_star(star_part(cfg));
    const OrbitOptions o = orbit_options(cfg);
    const auto window = o.window.value_or(default_window(star));
    const PotentialProfile prof = analyze_potential(star, window, count(cfg, "grid_points", 4001));
    json ex = json::array();
    for (const auto& e : prof.extrema) {
      ex.push_back({{"q", e.q}, {"value", e.value}, {"kind", e.kind == Extremum::Kind::Min ? "min" : "max"}});
    }
    rep["config"] = config_echo(cfg);
    rep["extrema"] = std::move(ex);
    rep["coercive_left"] = prof.coercive_left;
    rep["coercive_right"] = prof.coercive_right;
    rep["window"] = {prof.window_lo, prof.window_hi};
    rep["window_clipped"] = prof.window_clipped;
    const std::size_t pts = count(cfg, "points", 1001);
    if (pts < 2) bad("points", "need at least 2");
    json rows = json::array();
    for (std::size_t i = 0; i < pts; ++i) {
      const double q = window.first + (window.second - window.first) * static_cast<double>(i) /
                                          static_cast<double>(pts - 1);
      try {
        rows.push_back({q, star.potential(q)});
      } catch (const Error&) {
      }
    }
    res.tables.push_back(table("profile", {"q", "Phi"}, std::move(rows)));
    return res;
  }
  if (sub == "persistence") {
    check_star_keys(cfg, {});
    const StarSystem star = parse_star(star_part(cfg));
    const PersistenceVerdict v = persistence_criteria(star);
    rep["config"] = config_echo(cfg);
    rep["verdict"] = to_string(v.kind);
    rep["i_plus"] = v.i_plus ? json(*v.i_plus) : json(nullptr);
    rep["i_minus"] = v.i_minus ? json(*v.i_minus) : json(nullptr);
    rep["tie_plus"] = v.tie_plus;
    rep["tie_minus"] = v.tie_minus;
    rep["keystones"] = domino_check(star);
    res.negative = v.kind == PersistenceVerdict::Kind::Fails;
    return res;
  }
  fail(ErrorCode::InvalidArgument, "star: unknown subcommand '" + sub + "'");
}

// Coefficient forms: number/array (constant), {"tau":[...],"values":[...]} (table), or
// {"value","slope","amplitude","omega","phase"} for value + slope tau + amplitude sin(omega tau + phase).
struct Coef {
  VecFn f;
  VecFn df;  // empty for tables
};

Coef parse_coef(const json& cfg, const std::string& key, Index n) {
  if (!cfg.contains(key)) bad(key, "missing");
  const json& v = cfg.at(key);
  auto sized = [&](const Vec& x, const std::string& what) {
    if (n >= 0 && x.size() != n) bad(key, what + " length must equal N");
    return x;
  };
  Coef c;
  if (v.is_number() || v.is_array()) {
    const Vec x = sized(v.is_number() ? Vec::Constant(1, v.get<double>()) : to_vec(v, key), "value");
    c.f = [x](double) { return x; };
    c.df = [x](double) { return Vec(Vec::Zero(x.size())); };
    return c;
  }
  if (!v.is_object()) bad(key, "expected a number, array or object");
  if (v.contains("tau")) {
    for (const auto& [k, _] : v.items()) {
      if (k != "tau" && k != "values") bad(key + "." + k, "unknown field");
    }
    const Vec tau = vec(v, "tau");
    if (!v.contains("values") || !v.at("values").is_array()) bad(key + ".values", "missing");
    std::vector<Vec> vals;
    for (const auto& row : v.at("values")) {
      vals.push_back(sized(row.is_number() ? Vec::Constant(1, row.get<double>()) : to_vec(row, key + ".values"),
                           "row"));
    }
    c.f = linear_table(std::vector<double>(tau.data(), tau.data() + tau.size()), std::move(vals));
    return c;
  }
  for (const auto& [k, _] : v.items()) {
    if (k != "value" && k != "slope" && k != "amplitude" && k != "omega" && k != "phase") {
      bad(key + "." + k, "unknown field");
    }
  }
  auto field = [&](const char* f, double def) -> Vec {
    if (!v.contains(f)) return Vec::Constant(std::max<Index>(n, 1), def);
    const json& x = v.at(f);
    return sized(x.is_number() ? Vec::Constant(std::max<Index>(n, 1), x.get<double>()) : to_vec(x, key + "." + f),
                 f);
  };
  if (!v.contains("value")) bad(key + ".value", "missing");
  const Vec val = field("value", 0.0), slope = field("slope", 0.0), amp = field("amplitude", 0.0),
            om = field("omega", 0.0), ph = field("phase", 0.0);
  c.f = [=](double t) {
    return Vec(val + slope * t + (amp.array() * (om.array() * t + ph.array()).sin()).matrix());
  };
  c.df = [=](double t) { return Vec(slope + (amp.array() * om.array() * (om.array() * t + ph.array()).cos()).matrix()); };
  return c;
}

Result run_average(const json& cfg) {
  check_keys(cfg, {{"a", "b", "rbar", "mu", "r", "epsilon", "beta", "dbar", "gamma_hat", "gamma", "E0", "q0", "p0",
                    "C0", "E0_above_min", "tau_end", "dtau", "q_ref", "crossing_tol", "direct", "t_samples"},
                   kRunKeys});
  const Vec gamma = vec(cfg, "gamma");
  const Index n = gamma.size();
  SlowEnvironment env;
  const Coef a = parse_coef(cfg, "a", n), b = parse_coef(cfg, "b", n), rb = parse_coef(cfg, "rbar", 1);
  env.a = a.f;
  env.b = b.f;
  env.rbar = [f = rb.f](double t) { return f(t)(0); };
  if (a.df && b.df && rb.df) {
    env.da = a.df;
    env.db = b.df;
    env.drbar = [f = rb.df](double t) { return f(t)(0); };
  }
  env.gamma = gamma;
  env.epsilon = num(cfg, "epsilon");
  env.beta = num(cfg, "beta", 0.0);
  env.dbar = num(cfg, "dbar", 0.0);
  json mu_note;
  if (cfg.contains("mu")) {
    env.mu = num(cfg, "mu");
    env.gamma_hat = opt_vec(cfg, "gamma_hat").value_or(Vec::Zero(n));
    mu_note = "given";
  } else if (cfg.contains("r")) {
    const Vec r = vec(cfg, "r");
    if (r.size() != n) bad("r", "length must equal N");
    const Vec a0 = env.a(0.0);
    env.mu = mu_balance(a0, env.b(0.0), r, gamma);
    const double kappa = env.beta * env.epsilon;
    env.gamma_hat = kappa > 0.0 ? Vec((a0 * env.mu - r) / kappa) : Vec(Vec::Zero(n));
    if (cfg.contains("gamma_hat")) bad("gamma_hat", "give either r or gamma_hat, not both");
    mu_note = "mu_balance";
  } else {
    env.mu = 1.0;
    env.gamma_hat = opt_vec(cfg, "gamma_hat").value_or(Vec::Zero(n));
    mu_note = "default";
  }
  if (env.gamma_hat.size() != n) bad("gamma_hat", "length must equal N");
  env.validate();

  const Vec C0 = opt_vec(cfg, "C0").value_or(Vec::Ones(n));
  if (C0.size() != n) bad("C0", "length must equal N");
  const StarSystem star0 = env.star_at(0.0, C0);
  double E0;
  if (cfg.contains("E0")) {
    E0 = num(cfg, "E0");
  } else if (cfg.contains("E0_above_min")) {
    const PotentialProfile prof0 = analyze_potential(star0);
    std::optional<double> low;
    for (const auto& e : prof0.extrema) {
      if (e.kind == Extremum::Kind::Min && (!low || e.value < *low)) low = e.value;
    }
    if (!low) bad("E0_above_min", "the initial potential has no well");
    E0 = *low + star0.kinetic_min() + num(cfg, "E0_above_min");
  } else {
    E0 = star0.energy(num(cfg, "q0"), num(cfg, "p0"));
  }
  EvolveOptions opts;
  opts.dtau = num(cfg, "dtau", 1e-3);
  if (cfg.contains("q_ref")) opts.q_ref = num(cfg, "q_ref");
  opts.crossing_tol = num(cfg, "crossing_tol", opts.crossing_tol);
  const double tau_end = num(cfg, "tau_end");
  const AveragedRun run = evolve_averaged(env, {0.0, E0, C0}, tau_end, opts);

  Result res;
  json& rep = res.report;
  rep["config"] = config_echo(cfg);
  rep["mu"] = env.mu;
  rep["mu_source"] = mu_note;
  rep["gamma_hat"] = vec_json(env.gamma_hat);
  rep["derivatives"] = run.finite_differences ? "central-differences" : "analytic";
  rep["finished"] = run.finished;
  json events = json::array();
  for (const auto& e : run.events) {
    events.push_back({{"tau", e.tau}, {"kind", to_string(e.kind)}, {"S1", e.S1}, {"S2", e.S2}});
  }
  rep["events"] = std::move(events);
  std::vector<std::string> cols{"tau", "E"};
  for (Index i = 0; i < n; ++i) cols.push_back("C" + std::to_string(i + 1));
  json rows = json::array();
  for (const auto& s : run.states) {
    json row = json::array({s.tau, s.E});
    for (Index i = 0; i < n; ++i) row.push_back(s.Cbar(i));
    rows.push_back(std::move(row));
  }
  res.tables.push_back(table("averaged", cols, std::move(rows)));

  if (flag(cfg, "direct", false)) {
    // Start on the orbit of energy E0 at the well bottom, moving right.
    const PotentialProfile prof = analyze_potential(star0);
    std::optional<Extremum> bottom;
    for (const auto& e : prof.extrema) {
      if (e.kind == Extremum::Kind::Min && (!bottom || e.value < bottom->value)) bottom = e;
    }
    if (!bottom) fail(ErrorCode::NotApplicable, "direct: the initial potential has no well");
    const double q0 = opts.q_ref.value_or(bottom->q);
    const double c = std::max(0.0, (E0 - star0.potential(q0) - star0.kinetic_min()) / env.mu);
    const double p0 = std::log(env.mu) + kinetic_branches(c).first;
    const Trajectory tr = simulate_environment(env, q0, p0, C0, tau_end / env.epsilon, count(cfg, "t_samples", 2001));
    std::vector<std::string> dcols{"t", "q", "p"};
    for (Index i = 0; i < n; ++i) dcols.push_back("C" + std::to_string(i + 1));
    dcols.push_back("H");
    json drows = json::array();
    for (std::size_t i = 0; i < tr.size(); ++i) {
      json row = json::array({tr.times[i]});
      for (std::size_t k = 0; k < tr.dim; ++k) row.push_back(tr.at(i, k));
      row.push_back(tr.energy[i]);
      drows.push_back(std::move(row));
    }
    rep["direct_meta"] = meta_json(tr.meta);
    res.tables.push_back(table("direct", dcols, std::move(drows)));
  }
  return res;
}

Result run_resonance(const json& cfg) {
  check_keys(cfg, {{"star1", "star2", "at1", "bt1", "at2", "bt2", "kappa", "epsilon", "d1", "d2", "threshold", "Q0",
                    "phi0", "tau_end", "samples"},
                   kRunKeys});
  if (!cfg.contains("star1")) bad("star1", "missing");
  if (!cfg.contains("star2")) bad("star2", "missing");
  TwoStarSystem sys;
  sys.star1 = parse_star(cfg.at("star1"));
  sys.star2 = parse_star(cfg.at("star2"));
  sys.at1 = vec(cfg, "at1");
  sys.bt1 = vec(cfg, "bt1");
  sys.at2 = vec(cfg, "at2");
  sys.bt2 = vec(cfg, "bt2");
  sys.kappa = num(cfg, "kappa");
  sys.epsilon = num(cfg, "epsilon", 0.0);
  sys.d1 = num(cfg, "d1", 0.0);
  sys.d2 = num(cfg, "d2", 0.0);
  const ResonanceModel m = linearize(sys);
  const Regime regime = detuning(m, sys.kappa, num(cfg, "threshold", 1.0));
  const LockedRates lr = phase_locked_rates(m);

  Result res;
  json& rep = res.report;
  rep["config"] = config_echo(cfg);
  rep["R"] = m.R();
  rep["b12"] = m.b12;
  rep["b21"] = m.b21;
  rep["ebar"] = m.ebar;
  rep["lambda_max"] = lr.max_re;
  rep["verdict"] = regime == Regime::Resonant ? json(to_string(instability_criterion(m))) : json(nullptr);
  rep["regime"] = to_string(regime);
  rep["omega1"] = m.omega1;
  rep["omega2"] = m.omega2;
  rep["g12"] = m.g12;
  rep["g21"] = m.g21;
  rep["qbar"] = {m.qbar1, m.qbar2};
  rep["mu_tilde"] = vec_json(m.mu_tilde);

  if (cfg.contains("Q0")) {
    const Vec Q0 = vec(cfg, "Q0");
    if (Q0.size() != 2) bad("Q0", "expected two amplitudes");
    const Vec phi0 = opt_vec(cfg, "phi0").value_or(Vec::Zero(2));
    if (phi0.size() != 2) bad("phi0", "expected two phases");
    const SlowTrajectory st =
        integrate_resonance(m, {Q0(0), Q0(1)}, {phi0(0), phi0(1)}, num(cfg, "tau_end"), count(cfg, "samples", 1001));
    json rows = json::array();
    for (std::size_t i = 0; i < st.traj.size(); ++i) {
      rows.push_back({st.traj.times[i], st.traj.at(i, 0), st.traj.at(i, 1), st.traj.at(i, 2), st.traj.at(i, 3)});
    }
    res.tables.push_back(table("slow", {"tau", "Q1", "Q2", "phi1", "phi2"}, std::move(rows)));
    json ext = json::array();
    for (const auto& e : st.extinctions) ext.push_back({{"tau", e.tau}, {"index", e.index}});
    rep["extinctions"] = std::move(ext);
  }
  return res;
}

EnsembleParams ensemble_params(const json& cfg) {
  EnsembleParams p;
  p.bbar = num(cfg, "bbar", p.bbar);
  p.sigma_b = num(cfg, "sigma_b", p.sigma_b);
  p.sigma_a = num(cfg, "sigma_a", p.sigma_a);
  p.sigma = num(cfg, "sigma", p.sigma);
  p.rbar = num(cfg, "rbar", p.rbar);
  if (!(p.sigma_b >= 0.0)) bad("sigma_b", "must be >= 0");
  if (!(p.sigma_a >= 0.0)) bad("sigma_a", "must be >= 0");
  if (!(p.sigma >= 0.0)) bad("sigma", "must be >= 0");
  return p;
}

Result run_ensemble(const std::string& sub, const json& cfg) {
  const std::uint64_t seed = seed_of(cfg);
  const unsigned workers = workers_of(cfg);
  Result res;
  json& rep = res.report;
  if (sub == "census") {
    check_keys(cfg, {{"N_low", "N_high", "trials", "bbar", "sigma_b", "sigma_a"}, kRunKeys});
    const EnsembleParams p = ensemble_params(cfg);
    const CensusReport c =
        stability_census(count(cfg, "N_low", 1), count(cfg, "N_high", 100), count(cfg, "trials", 1000), p, seed, workers);
    rep["config"] = config_echo(cfg);
    rep["seed"] = seed;
    rep["unstable"] = prop_json(c.unstable);
    rep["outcome_codes"] = {{"0", "stable"}, {"1", "not-coercive"}, {"2", "extrema-mismatch"}};
    rep["outcomes"] = c.outcomes;
    rep["sizes"] = c.sizes;
    return res;
  }
  if (sub == "curves") {
    check_keys(cfg, {{"N", "mix_grid", "trials", "sigma", "rbar"}, kRunKeys});
    const EnsembleParams p = ensemble_params(cfg);
    std::vector<double> grid_def;
    for (int k = 0; k <= 10; ++k) grid_def.push_back(0.1 * k);
    const std::vector<double> grid = double_list(cfg, "mix_grid", grid_def);
    const auto pts = orbit_probability_curve(count(cfg, "N", 10), grid, count(cfg, "trials", 150), p, seed, workers);
    json points = json::array(), rows = json::array();
    std::vector<double> ps;
    for (const auto& pt : pts) {
      points.push_back({{"mix", pt.mix},
                        {"periodic", prop_json(pt.periodic)},
                        {"soliton", prop_json(pt.soliton)},
                        {"outcomes", pt.outcomes}});
      rows.push_back({pt.mix, pt.periodic.freq, pt.periodic.lo, pt.periodic.hi, pt.soliton.freq, pt.soliton.lo,
                      pt.soliton.hi});
      ps.push_back(pt.soliton.freq);
    }
    rep["config"] = config_echo(cfg);
    rep["seed"] = seed;
    rep["points"] = std::move(points);
    rep["soliton_spearman"] = grid.size() >= 2 ? json(spearman(grid, ps)) : json(nullptr);
    res.tables.push_back(table("curve",
                               {"mix", "P_periodic", "P_periodic_lo", "P_periodic_hi", "P_soliton", "P_soliton_lo",
                                "P_soliton_hi"},
                               std::move(rows)));
    return res;
  }
  if (sub == "cone") {
    check_keys(cfg, {{"M", "N", "r0", "sigma", "trials"}, kRunKeys});
    const std::size_t M = count(cfg, "M", 3);
    const auto Ns = count_list(cfg, "N", {10, 50, 300});
    const std::size_t trials = count(cfg, "trials", 200);
    json cells = json::array(), rows = json::array();
    for (std::size_t k = 0; k < Ns.size(); ++k) {
      const ConeFrequencyReport r = cone_frequency(M, Ns[k], num(cfg, "r0", 1.0), num(cfg, "sigma", 0.3), trials,
                                                  derive_seed(seed, k), workers);
      cells.push_back({{"N", Ns[k]}, {"feasible", prop_json(r.feasible)}, {"outcomes", r.outcomes}});
      rows.push_back({Ns[k], r.feasible.freq, r.feasible.lo, r.feasible.hi});
    }
    rep["config"] = config_echo(cfg);
    rep["seed"] = seed;
    rep["cells"] = std::move(cells);
    res.tables.push_back(table("cone", {"N", "freq", "lo", "hi"}, std::move(rows)));
    return res;
  }
  if (sub == "positive") {
    check_keys(cfg, {{"N", "trials", "model", "K", "row_cap", "col_cap"}, kRunKeys});
    const auto Ns = count_list(cfg, "N", {5, 10, 20, 40});
    auto trials = count_list(cfg, "trials", {20000});
    if (trials.size() == 1) trials.assign(Ns.size(), trials.front());
    if (trials.size() != Ns.size()) bad("trials", "give one count or one per N");
    RandomMatrixSpec spec;
    const std::string model = text(cfg, "model", "sparse");
    if (model == "dense") spec.model = RandomMatrixModel::DenseGaussian;
    else if (model != "sparse") bad("model", "expected 'sparse' or 'dense'");
    spec.K = num(cfg, "K", 1.0);
    spec.row_cap = count(cfg, "row_cap", 3);
    spec.col_cap = count(cfg, "col_cap", 3);
    json cells = json::array(), rows = json::array();
    for (std::size_t k = 0; k < Ns.size(); ++k) {
      const FrequencyReport r = positive_solution_frequency(Ns[k], trials[k], spec, derive_seed(seed, k), workers);
      const auto hits = static_cast<std::size_t>(std::count(r.outcomes.begin(), r.outcomes.end(), std::uint8_t{1}));
      json cell = {{"N", Ns[k]}, {"positive_solution", prop_json(r.p)}};
      // The full log is large for big trial counts; successes are listed by index instead.
      std::vector<std::size_t> idx;
      idx.reserve(hits);
      for (std::size_t i = 0; i < r.outcomes.size(); ++i) {
        if (r.outcomes[i]) idx.push_back(i);
      }
      cell["success_indices"] = std::move(idx);
      cells.push_back(std::move(cell));
      rows.push_back({Ns[k], r.p.freq, r.p.lo, r.p.hi});
    }
    rep["config"] = config_echo(cfg);
    rep["seed"] = seed;
    rep["cells"] = std::move(cells);
    res.tables.push_back(table("positive", {"N", "freq", "lo", "hi"}, std::move(rows)));
    return res;
  }
  fail(ErrorCode::InvalidArgument, "ensemble: unknown subcommand '" + sub + "'");
}

Result run_netgen(const json& cfg) {
  check_keys(cfg, {{"n", "m", "hubs", "x_min"}, kRunKeys});
  const std::uint64_t seed = seed_of(cfg);
  const NetworkTopology topo = generate_scale_free(count(cfg, "n", 1000), count(cfg, "m", 2), seed);
  const auto deg = topo.degrees();
  std::vector<std::size_t> order(deg.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return deg[x] > deg[y]; });
  const std::size_t k = std::min(count(cfg, "hubs", 5), order.size());
  std::vector<std::size_t> hubs(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  Result res;
  json& rep = res.report;
  rep["config"] = config_echo(cfg);
  rep["seed"] = seed;
  rep["n_nodes"] = topo.n_nodes;
  rep["edges"] = topo.edges.size();
  rep["connectance"] = topo.n_nodes >= 2 ? json(connectance(topo)) : json(nullptr);
  try {
    rep["power_law_exponent"] = fit_power_law_exponent(deg, count(cfg, "x_min", 5));
  } catch (const Error&) {
    rep["power_law_exponent"] = nullptr;
  }
  rep["hubs"] = hubs;
  rep["overlap"] = overlap_count(topo, hubs);
  std::ostringstream os;
  for (const auto& [u, v] : topo.edges) os << u << ' ' << v << '\n';
  res.files.push_back({{"name", "topology.txt"}, {"content", os.str()}});
  json rows = json::array();
  for (std::size_t i = 0; i < deg.size(); ++i) rows.push_back({i, deg[i]});
  res.tables.push_back(table("degrees", {"node", "degree"}, std::move(rows)));
  return res;
}

}  // namespace

Result run(const std::string& command, const json& cfg) {
  if (!cfg.is_object()) fail(ErrorCode::Parse, "configuration: expected a JSON object");
  const auto dot = command.find('.');
  const std::string head = command.substr(0, dot);
  const std::string sub = dot == std::string::npos ? "" : command.substr(dot + 1);
  if (command == "check") return run_check(cfg);
  if (command == "simulate") return run_simulate(cfg);
  if (command == "canonical") return run_canonical(cfg);
  if (head == "star" && !sub.empty()) return run_star(sub, cfg);
  if (command == "average") return run_average(cfg);
  if (command == "resonance") return run_resonance(cfg);
  if (head == "ensemble" && !sub.empty()) return run_ensemble(sub, cfg);
  if (command == "netgen") return run_netgen(cfg);
  fail(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
}

}  // namespace hlv::cmd
