#pragma once

// Run configuration as a keyed text file, and CSV/JSON artifacts that carry
// it as a header. Artifacts are staged in memory and committed together.

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace phi4::io {

// Invalid configuration or arguments; the message names the field.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string format_double(double x)
{
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline std::string short_double(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct RunConfig {
  int L = 2;
  int n = 1;
  double omega = 2.0;
  int J_cap = 60;
  int resolution = 64;
  int M_cap = 32;
  int J_max = 8;
  std::vector<double> g{0.02};
  std::vector<double> m2{1e-2, 1e-3, 1e-4};
  double eps_hi = 1e-3;
  double eps_lo = 1e-8;
  int eps_per_decade = 4;
  int plateau_steps = 20000;
  std::vector<int> N{6, 7, 8};
  double limit_eps = 1e-2;
  double gff_mass2 = 1.0;
  double gff_alpha = 1.0;
  int draws = 20;
  int oracle_range = 2;
  bool rational = false;
  unsigned long long seed = 20240601ULL;
  double tol_oracle = 1e-10;
  double tol_exponent = 0.05;
  double tol_identity = 1e-12;
  bool printed_pt = false;
  bool printed_quartic_sign = false;
  bool printed_mixed_signs = false;
  std::string out_dir = ".";
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v)
{
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
    throw UsageError("field '" + key + "': '" + v + "' is not a finite number");
  return x;
}

inline long long parse_integer(const std::string& key, const std::string& v)
{
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
    throw UsageError("field '" + key + "': '" + v + "' is not an integer");
  return x;
}

inline bool parse_bool(const std::string& key, const std::string& v)
{
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("field '" + key + "': '" + v + "' is not a boolean");
}

inline std::vector<std::string> split_list(const std::string& key, const std::string& v)
{
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (out.empty() || std::any_of(out.begin(), out.end(), [](const std::string& s) { return s.empty(); }))
    throw UsageError("field '" + key + "': empty list entry");
  return out;
}

template <class T>
void require(const std::string& key, const T& x, bool ok, const std::string& range)
{
  if (!ok) {
    std::ostringstream os;
    os << "field '" << key << "': " << x << " outside " << range;
    throw UsageError(os.str());
  }
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

}  // namespace detail

// Key -> (parse and validate, print). Printing is lossless.
inline const std::map<std::string, detail::Field>& config_fields()
{
  using namespace detail;
  static const std::map<std::string, Field> fields = [] {
    std::map<std::string, Field> f;
    auto integer = [&f](const std::string& key, int RunConfig::*p, long long lo, long long hi) {
      f[key] = {[=](RunConfig& c, const std::string& v) {
                  const long long x = parse_integer(key, v);
                  require(key, x, x >= lo && x <= hi, "[" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
                  c.*p = static_cast<int>(x);
                },
                [=](const RunConfig& c) { return std::to_string(c.*p); }};
    };
    auto real = [&f](const std::string& key, double RunConfig::*p, std::function<bool(double)> ok,
                     const std::string& range) {
      f[key] = {[=](RunConfig& c, const std::string& v) {
                  const double x = parse_double(key, v);
                  require(key, x, ok(x), range);
                  c.*p = x;
                },
                [=](const RunConfig& c) { return format_double(c.*p); }};
    };
    auto boolean = [&f](const std::string& key, bool RunConfig::*p) {
      f[key] = {[=](RunConfig& c, const std::string& v) { c.*p = parse_bool(key, v); },
                [=](const RunConfig& c) { return std::string(c.*p ? "true" : "false"); }};
    };
    auto reals = [&f](const std::string& key, std::vector<double> RunConfig::*p, std::function<bool(double)> ok,
                      const std::string& range) {
      f[key] = {[=](RunConfig& c, const std::string& v) {
                  std::vector<double> out;
                  for (const auto& s : split_list(key, v)) {
                    const double x = parse_double(key, s);
                    require(key, x, ok(x), range);
                    out.push_back(x);
                  }
                  c.*p = out;
                },
                [=](const RunConfig& c) {
                  std::string s;
                  for (double x : c.*p) s += (s.empty() ? "" : ", ") + format_double(x);
                  return s;
                }};
    };
    integer("L", &RunConfig::L, 2, 8);
    integer("n", &RunConfig::n, 0, 32);
    real("omega", &RunConfig::omega, [](double x) { return x > 1.0; }, "(1, inf)");
    integer("J_cap", &RunConfig::J_cap, 2, 63);
    f["resolution"] = {[](RunConfig& c, const std::string& v) {
                         const long long x = parse_integer("resolution", v);
                         require("resolution", x, x >= 8 && x <= 256 && x % 2 == 0, "even values in [8, 256]");
                         c.resolution = static_cast<int>(x);
                       },
                       [](const RunConfig& c) { return std::to_string(c.resolution); }};
    integer("M_cap", &RunConfig::M_cap, 4, 256);
    integer("J_max", &RunConfig::J_max, 1, 12);
    reals("g", &RunConfig::g, [](double x) { return x >= 0.0 && x <= 0.5; }, "[0, 0.5]");
    reals("m2", &RunConfig::m2, [](double x) { return x > 0.0 && x <= 10.0; }, "(0, 10]");
    real("eps_hi", &RunConfig::eps_hi, [](double x) { return x > 0.0 && x < 1.0; }, "(0, 1)");
    real("eps_lo", &RunConfig::eps_lo, [](double x) { return x > 0.0 && x < 1.0; }, "(0, 1)");
    integer("eps_per_decade", &RunConfig::eps_per_decade, 1, 64);
    integer("plateau_steps", &RunConfig::plateau_steps, 0, 10000000);
    f["N"] = {[](RunConfig& c, const std::string& v) {
                std::vector<int> out;
                for (const auto& s : split_list("N", v)) {
                  const long long x = parse_integer("N", s);
                  require("N", x, x >= 1 && x <= 24, "[1, 24]");
                  out.push_back(static_cast<int>(x));
                }
                c.N = out;
              },
              [](const RunConfig& c) {
                std::string s;
                for (int x : c.N) s += (s.empty() ? "" : ", ") + std::to_string(x);
                return s;
              }};
    real("limit_eps", &RunConfig::limit_eps, [](double x) { return x > 0.0 && x < 1.0; }, "(0, 1)");
    real("gff_mass2", &RunConfig::gff_mass2, [](double x) { return x > 0.0; }, "(0, inf)");
    real("gff_alpha", &RunConfig::gff_alpha, [](double x) { return x > 0.0; }, "(0, inf)");
    integer("draws", &RunConfig::draws, 1, 1000);
    integer("oracle_range", &RunConfig::oracle_range, 1, 3);
    boolean("rational", &RunConfig::rational);
    f["seed"] = {[](RunConfig& c, const std::string& v) {
                   const long long x = parse_integer("seed", v);
                   require("seed", x, x >= 0, "[0, 2^63)");
                   c.seed = static_cast<unsigned long long>(x);
                 },
                 [](const RunConfig& c) { return std::to_string(c.seed); }};
    real("tol_oracle", &RunConfig::tol_oracle, [](double x) { return x > 0.0; }, "(0, inf)");
    real("tol_exponent", &RunConfig::tol_exponent, [](double x) { return x > 0.0; }, "(0, inf)");
    real("tol_identity", &RunConfig::tol_identity, [](double x) { return x > 0.0; }, "(0, inf)");
    boolean("printed_pt", &RunConfig::printed_pt);
    boolean("printed_quartic_sign", &RunConfig::printed_quartic_sign);
    boolean("printed_mixed_signs", &RunConfig::printed_mixed_signs);
    f["out_dir"] = {[](RunConfig& c, const std::string& v) {
                      if (v.empty()) throw UsageError("field 'out_dir': empty path");
                      c.out_dir = v;
                    },
                    [](const RunConfig& c) { return c.out_dir; }};
    return f;
  }();
  return fields;
}

// Cross-field constraints.
inline void validate(const RunConfig& c)
{
  if (!(c.eps_lo < c.eps_hi)) throw UsageError("field 'eps_lo': must be below eps_hi");
  if (c.g.empty()) throw UsageError("field 'g': empty list");
  if (c.m2.empty()) throw UsageError("field 'm2': empty list");
  if (c.N.empty()) throw UsageError("field 'N': empty list");
}

inline void set_value(RunConfig& c, const std::string& key, const std::string& value)
{
  const auto& f = config_fields();
  const auto it = f.find(key);
  if (it == f.end()) throw UsageError("unknown configuration key '" + key + "'");
  it->second.set(c, trim(value));
}

// "key = value" per line; '#' starts a comment.
inline RunConfig parse_config(const std::string& text, RunConfig base = {})
{
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("line " + std::to_string(lineno) + ": expected 'key = value', got '" + line + "'");
    set_value(base, trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  validate(base);
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {})
{
  std::ifstream f(path);
  if (!f) throw UsageError("cannot read configuration file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

inline std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c)
{
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, f] : config_fields()) out.emplace_back(k, f.get(c));
  return out;
}

inline std::string to_text(const RunConfig& c)
{
  std::string s;
  for (const auto& [k, v] : config_entries(c)) s += k + " = " + v + "\n";
  return s;
}

inline nlohmann::ordered_json to_json(const RunConfig& c)
{
  nlohmann::ordered_json j;
  for (const auto& [k, v] : config_entries(c)) j[k] = v;
  return j;
}

// <subcommand>_n<n>_g<g...>_L<L>.<ext>
inline std::string artifact_name(const std::string& sub, const RunConfig& c, const std::string& ext,
                                 const std::string& suffix = "")
{
  std::string g;
  for (double x : c.g) g += (g.empty() ? "" : "-") + short_double(x);
  return sub + "_n" + std::to_string(c.n) + "_g" + g + "_L" + std::to_string(c.L) + suffix + "." + ext;
}

inline std::string csv_field(const std::string& s)
{
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(const std::vector<std::string>& cells)
  {
    if (cells.size() != columns_.size()) throw std::invalid_argument("CsvTable: row width mismatch");
    rows_.push_back(cells);
  }
  void add_row(const std::vector<double>& values)
  {
    std::vector<std::string> cells;
    for (double v : values) cells.push_back(format_double(v));
    add_row(cells);
  }
  std::size_t rows() const { return rows_.size(); }

  std::string render(const RunConfig& c, const std::string& subcommand) const
  {
    std::string s = "# subcommand = " + subcommand + "\n";
    for (const auto& [k, v] : config_entries(c)) s += "# " + k + " = " + v + "\n";
    auto line = [](const std::vector<std::string>& cells) {
      std::string l;
      for (std::size_t i = 0; i < cells.size(); ++i) l += (i ? "," : "") + csv_field(cells[i]);
      return l + "\n";
    };
    s += line(columns_);
    for (const auto& r : rows_) s += line(r);
    return s;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Parses the "# key = value" header of a rendered CSV back into a RunConfig.
inline RunConfig config_from_csv(const std::string& csv)
{
  std::istringstream in(csv);
  std::string line, body;
  while (std::getline(in, line) && line.rfind("# ", 0) == 0) {
    const std::string kv = line.substr(2);
    if (kv.rfind("subcommand", 0) == 0) continue;
    body += kv + "\n";
  }
  return parse_config(body);
}

inline std::string render_json(const RunConfig& c, const std::string& subcommand, nlohmann::ordered_json body)
{
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["config"] = to_json(c);
  for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
  return j.dump(2) + "\n";
}

// Files staged in memory; commit() writes each through a temporary and a rename.
class ArtifactSet {
 public:
  void add(std::string name, std::string content) { files_.emplace_back(std::move(name), std::move(content)); }
  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

  std::vector<std::string> commit(const std::string& dir) const
  {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> written;
    for (const auto& [name, content] : files_) {
      const fs::path target = fs::path(dir) / name;
      const fs::path tmp = fs::path(dir) / ("." + name + ".tmp");
      {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        f << content;
        if (!f) throw std::runtime_error("write failed for '" + tmp.string() + "'");
      }
      fs::rename(tmp, target);
      written.push_back(target.string());
    }
    return written;
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

}  // namespace phi4::io
