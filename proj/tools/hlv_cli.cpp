// hlv: command-line front end over the C API.

#include "hlv/hlv.h"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kCliVersion = "1.0.0";
constexpr int kSchemaVersion = 1;

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("--input: cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr)) throw CliError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string fmt_number(const json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
  }
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

std::string table_csv(const json& t) {
  std::ostringstream os;
  const auto& cols = t.at("columns");
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].get<std::string>();
  os << '\n';
  for (const auto& row : t.at("rows")) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << fmt_number(row[i]);
    os << '\n';
  }
  return os.str();
}

// Line chart of columns 2.. against column 1.
std::string table_svg(const json& t) {
  const auto& rows = t.at("rows");
  const auto& cols = t.at("columns");
  const double W = 640, H = 400, pad = 40;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& r : rows) {
    if (!r[0].is_number()) continue;
    x0 = std::min(x0, r[0].get<double>());
    x1 = std::max(x1, r[0].get<double>());
    for (std::size_t k = 1; k < r.size(); ++k) {
      if (!r[k].is_number()) continue;
      const double y = r[k].get<double>();
      if (!std::isfinite(y)) continue;
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  std::ostringstream os;
  char buf[64];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
     << "\" fill=\"none\" stroke=\"#888\"/>\n";
  for (std::size_t k = 1; k < cols.size(); ++k) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[(k - 1) % 6] << "\" points=\"";
    for (const auto& r : rows) {
      if (!r[0].is_number() || !r[k].is_number()) continue;
      const double y = r[k].get<double>();
      if (!std::isfinite(y)) continue;
      const double px = pad + (r[0].get<double>() - x0) / (x1 - x0) * (W - 2 * pad);
      const double py = H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad);
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px, py);
      os << buf;
    }
    os << "\"><title>" << cols[k].get<std::string>() << "</title></polyline>\n";
  }
  std::snprintf(buf, sizeof buf, "%.6g", x0);
  os << "<text x=\"" << pad << "\" y=\"" << H - 10 << "\" font-size=\"11\">" << cols[0].get<std::string>() << " "
     << buf;
  std::snprintf(buf, sizeof buf, "%.6g", x1);
  os << " .. " << buf << "</text>\n";
  std::snprintf(buf, sizeof buf, "%.6g .. %.6g", y0, y1);
  os << "<text x=\"" << pad << "\" y=\"20\" font-size=\"11\">" << buf << "</text>\n</svg>\n";
  return os.str();
}

json parse_param_value(const std::string& key, const std::string& raw) {
  try {
    return json::parse(raw);
  } catch (const json::exception&) {
    if (raw.empty()) throw CliError("--param " + key + ": empty value");
    return raw;  // bare word becomes a string
  }
}

std::optional<std::uint64_t> seed_from_env() {
  const char* s = std::getenv("HLV_SEED");
  if (!s || !*s) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (errno || *end || s[0] == '-') throw CliError("HLV_SEED: expected a nonnegative integer, got '" + std::string(s) + "'");
  return v;
}

int run_command(const std::string& command, const std::string& input, const std::string& out_dir,
                const std::map<std::string, json>& overrides, const std::string& format) {
  json cfg = json::object();
  if (!input.empty()) {
    try {
      cfg = json::parse(read_file(input));
    } catch (const json::parse_error& e) {
      throw CliError("--input '" + input + "': malformed JSON: " + e.what());
    }
    if (!cfg.is_object()) throw CliError("--input '" + input + "': expected a JSON object");
  }
  for (const auto& [k, v] : overrides) {
    // Dotted keys address nested objects: star.rbar=2.
    json* node = &cfg;
    std::string rest = k;
    for (auto dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
      node = &(*node)[rest.substr(0, dot)];
      if (!node->is_object()) throw CliError("--param " + k + ": '" + rest.substr(0, dot) + "' is not an object");
      rest = rest.substr(dot + 1);
    }
    (*node)[rest] = v;
  }

  char* raw = nullptr;
  const hlv_status st = hlv_run(command.c_str(), cfg.dump().c_str(), &raw);
  if (st != HLV_OK && st != HLV_NEGATIVE) {
    std::cerr << "hlv " << command << ": " << hlv_last_error() << '\n';
    return 1;
  }
  json result = json::parse(raw);
  hlv_string_free(raw);
  json report = result.at("report");
  report["command"] = command;
  report["schema_version"] = kSchemaVersion;
  const std::string report_text = report.dump(2) + "\n";

  if (out_dir.empty()) {
    std::cout << report_text;
    return st == HLV_NEGATIVE ? 2 : 0;
  }
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw CliError("--out: cannot create '" + out_dir + "': " + ec.message());

  std::vector<std::pair<std::string, std::string>> outputs{{"report.json", report_text}};
  for (const auto& t : result.at("tables")) {
    const std::string name = t.at("name").get<std::string>();
    if (format == "json") {
      outputs.emplace_back(name + ".json", t.dump() + "\n");
    } else {
      outputs.emplace_back(name + ".csv", table_csv(t));
      if (format == "svg") outputs.emplace_back(name + ".svg", table_svg(t));
    }
  }
  for (const auto& f : result.at("files")) {
    outputs.emplace_back(f.at("name").get<std::string>(), f.at("content").get<std::string>());
  }

  json files = json::array();
  for (const auto& [name, content] : outputs) {
    const fs::path p = fs::path(out_dir) / name;
    std::ofstream o(p, std::ios::binary);
    o << content;
    if (!o) throw CliError("--out: cannot write '" + p.string() + "'");
    files.push_back({{"name", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
  }
  json manifest = {{"command", command},
                   {"config", cfg},
                   {"seed", cfg.contains("seed") ? cfg["seed"] : json(1)},
                   {"format", format},
                   {"versions", {{"cli", kCliVersion}, {"library", hlv_version()}, {"schema", kSchemaVersion}}},
                   {"exit_status", st == HLV_NEGATIVE ? 2 : 0},
                   {"outputs", files}};
  std::ofstream m(fs::path(out_dir) / "manifest.json", std::ios::binary);
  m << manifest.dump(2) << '\n';
  if (!m) throw CliError("--out: cannot write manifest.json");

  std::cout << report_text;
  return st == HLV_NEGATIVE ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian Lotka-Volterra toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kCliVersion));

  std::string input, out_dir, format = "csv";
  std::optional<std::uint64_t> seed;
  std::optional<double> rtol, atol, E;
  std::optional<std::size_t> trials;
  std::optional<unsigned> workers;
  std::vector<std::string> params;

  auto common = [&](CLI::App* c, bool needs_input) {
    auto* in = c->add_option("--input,-i", input, "JSON configuration file")->check(CLI::ExistingFile);
    if (needs_input) in->required();
    c->add_option("--out,-o", out_dir, "output directory (report, tables, manifest)");
    c->add_option("--seed", seed, "random seed (overrides HLV_SEED)");
    c->add_option("--format", format, "table format")->check(CLI::IsMember({"csv", "json", "svg"}));
    c->add_option("--param,-p", params, "override a configuration field: key=json");
  };
  auto tolerances = [&](CLI::App* c) {
    c->add_option("--rtol", rtol, "relative tolerance");
    c->add_option("--atol", atol, "absolute tolerance");
  };
  auto mc = [&](CLI::App* c) {
    c->add_option("--trials", trials, "trials per cell");
    c->add_option("--workers", workers, "worker threads (0 = all cores)");
  };

  std::string command;
  auto* check = app.add_subcommand("check", "sign classes, Hamiltonian factors, persistence certificates");
  common(check, true);
  auto* simulate = app.add_subcommand("simulate", "direct Lotka-Volterra integration");
  common(simulate, true);
  tolerances(simulate);
  auto* canonical = app.add_subcommand("canonical", "canonical transform and symplectic run");
  common(canonical, true);
  tolerances(canonical);

  auto* star = app.add_subcommand("star", "star-system potential analysis");
  star->require_subcommand(1);
  for (const char* s : {"classify", "period", "profile", "persistence"}) {
    auto* c = star->add_subcommand(s);
    common(c, true);
    if (std::string(s) == "classify" || std::string(s) == "period") c->add_option("--E", E, "energy level");
  }
  auto* average = app.add_subcommand("average", "slow-environment averaged evolution");
  common(average, true);
  auto* resonance = app.add_subcommand("resonance", "two-star resonance analysis");
  common(resonance, true);
  auto* ensemble = app.add_subcommand("ensemble", "Monte Carlo ensembles");
  ensemble->require_subcommand(1);
  for (const char* s : {"census", "curves", "cone", "positive"}) {
    auto* c = ensemble->add_subcommand(s);
    common(c, false);
    mc(c);
  }
  auto* netgen = app.add_subcommand("netgen", "scale-free topology generator");
  common(netgen, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  for (auto* sub : app.get_subcommands()) {
    command = sub->get_name();
    for (auto* leaf : sub->get_subcommands()) command += "." + leaf->get_name();
  }

  try {
    std::map<std::string, json> overrides;
    for (const auto& p : params) {
      const auto eq = p.find('=');
      if (eq == std::string::npos || eq == 0) throw CliError("--param '" + p + "': expected key=value");
      overrides[p.substr(0, eq)] = parse_param_value(p.substr(0, eq), p.substr(eq + 1));
    }
    if (!seed) seed = seed_from_env();
    const bool seeded = command.rfind("ensemble.", 0) == 0 || command == "netgen";
    if (seed && seeded) overrides["seed"] = *seed;
    if (rtol) overrides["rtol"] = *rtol;
    if (atol) overrides["atol"] = *atol;
    if (E) overrides["E"] = *E;
    if (trials) overrides["trials"] = *trials;
    if (workers) overrides["workers"] = *workers;
    return run_command(command, input, out_dir, overrides, format);
  } catch (const std::exception& e) {
    std::cerr << "hlv " << command << ": " << e.what() << '\n';
    return 1;
  }
}
