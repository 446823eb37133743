#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nlc/experiments.hpp"

namespace nlc::config {

/// Configuration problem; line is 0 when it does not belong to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class Type { real, integer, boolean, text, real_list };

inline const char* type_name(Type t) {
  switch (t) {
    case Type::real: return "real";
    case Type::integer: return "integer";
    case Type::boolean: return "boolean";
    case Type::text: return "string";
    case Type::real_list: return "list of reals";
  }
  return "?";
}

struct Key {
  std::string name;
  Type type = Type::real;
  std::string fallback;  // empty + required -> must be given
  bool required = false;
};

using Schema = std::vector<Key>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline bool parse_real(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && p == last && std::isfinite(out);
}

inline bool parse_int(const std::string& s, long long& out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && p == s.data() + s.size();
}

inline bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return out = true, true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return out = false, true;
  return false;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline std::string format_real(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

/// Canonical text of a value; throws a plain message on mismatch.
inline std::string canonical(const Key& k, const std::string& raw) {
  const std::string mismatch = "key '" + k.name + "' expects " + type_name(k.type) + ", got '" + raw + "'";
  switch (k.type) {
    case Type::real: {
      double x;
      if (!parse_real(raw, x)) throw std::invalid_argument(mismatch);
      return format_real(x);
    }
    case Type::integer: {
      long long x;
      if (!parse_int(raw, x)) throw std::invalid_argument(mismatch);
      return std::to_string(x);
    }
    case Type::boolean: {
      bool b;
      if (!parse_bool(raw, b)) throw std::invalid_argument(mismatch);
      return b ? "true" : "false";
    }
    case Type::text:
      if (raw.empty()) throw std::invalid_argument(mismatch);
      return raw;
    case Type::real_list: {
      std::string out;
      for (const auto& item : split_list(raw)) {
        double x;
        if (!parse_real(item, x)) throw std::invalid_argument(mismatch);
        if (!out.empty()) out += ", ";
        out += format_real(x);
      }
      return out;
    }
  }
  throw std::invalid_argument(mismatch);
}

}  // namespace detail

/// Fully resolved key/value set in schema order.
class Resolved {
 public:
  Resolved() = default;
  Resolved(Schema schema, std::map<std::string, std::string> values, std::map<std::string, std::size_t> lines)
      : schema_(std::move(schema)), values_(std::move(values)), lines_(std::move(lines)) {}

  bool has(const std::string& k) const { return values_.count(k) > 0; }
  const std::string& text(const std::string& k) const {
    auto it = values_.find(k);
    if (it == values_.end()) throw ConfigError(0, "missing key '" + k + "'");
    return it->second;
  }
  double real(const std::string& k) const {
    double x = 0.0;
    detail::parse_real(text(k), x);
    return x;
  }
  long long integer(const std::string& k) const {
    long long x = 0;
    detail::parse_int(text(k), x);
    return x;
  }
  bool boolean(const std::string& k) const {
    bool b = false;
    detail::parse_bool(text(k), b);
    return b;
  }
  std::vector<double> reals(const std::string& k) const {
    std::vector<double> out;
    for (const auto& item : detail::split_list(text(k))) {
      double x = 0.0;
      detail::parse_real(item, x);
      out.push_back(x);
    }
    return out;
  }
  /// Line the key was set on, 0 when defaulted.
  std::size_t line(const std::string& k) const {
    auto it = lines_.find(k);
    return it == lines_.end() ? 0 : it->second;
  }
  void set(const std::string& k, const std::string& raw) {
    for (const auto& key : schema_)
      if (key.name == k) {
        try {
          values_[k] = detail::canonical(key, raw);
        } catch (const std::invalid_argument& e) {
          throw ConfigError(0, e.what());
        }
        return;
      }
    throw ConfigError(0, "unknown key '" + k + "'");
  }
  /// "key = value" per line in schema order; parsing it reproduces this object.
  std::string echo() const {
    std::string out;
    for (const auto& k : schema_) {
      auto it = values_.find(k.name);
      if (it != values_.end()) out += k.name + " = " + it->second + "\n";
    }
    return out;
  }
  const Schema& schema() const { return schema_; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  Schema schema_;
  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
};

/// Parses `key = value` lines; '#' starts a comment.
inline Resolved parse_text(const std::string& body, const Schema& schema) {
  std::map<std::string, std::string> values;
  std::map<std::string, std::size_t> lines;
  std::istringstream in(body);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value', got '" + line + "'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    auto spec = std::find_if(schema.begin(), schema.end(), [&](const Key& k) { return k.name == key; });
    if (spec == schema.end()) throw ConfigError(lineno, "unknown key '" + key + "'");
    if (lines.count(key)) throw ConfigError(lineno, "duplicate key '" + key + "' (first set on line " + std::to_string(lines[key]) + ")");
    try {
      values[key] = detail::canonical(*spec, val);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(lineno, e.what());
    }
    lines[key] = lineno;
  }
  for (const auto& k : schema) {
    if (values.count(k.name)) continue;
    if (k.required) throw ConfigError(lineno + 1, "missing required key '" + k.name + "'");
    if (!k.fallback.empty()) values[k.name] = detail::canonical(k, k.fallback);
  }
  return Resolved(schema, std::move(values), std::move(lines));
}

inline Resolved parse_file(const std::string& path, const Schema& schema) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(0, "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_text(ss.str(), schema);
}

// ---- schemas -------------------------------------------------------------

inline Schema flow_keys() {
  return {
      {"dim", Type::integer, "2"},
      {"N", Type::integer, "64"},
      {"mu", Type::real, "1"},
      {"gamma", Type::real, "2"},
      {"T", Type::real, "0.5"},
      {"dt", Type::real, "2.5e-4"},
      {"snapshot_every", Type::integer, "20"},
      {"renormalize", Type::boolean, "true"},
      {"preset", Type::text, "tg-plus-director-twist"},
      {"eps", Type::real, "0.1"},
      {"eps1", Type::real, "0.2"},
      {"eps2", Type::real, "0.2"},
      {"grad_amp", Type::real, "0.05"},
      {"rule", Type::text, "dealiased"},
      {"seed", Type::integer, "0"},
  };
}

inline Schema schema_for(const std::string& sub) {
  if (sub == "run-compressible") {
    Schema s = flow_keys();
    s.insert(s.begin() + 3, Key{"lambda", Type::real, "23"});
    return s;
  }
  if (sub == "run-incompressible") return flow_keys();
  if (sub == "limit-sweep") {
    Schema s = flow_keys();
    s.insert(s.begin(), Key{"nus", Type::real_list, "25, 100, 400, 1600"});
    s.push_back({"j0", Type::text, "auto"});
    return s;
  }
  if (sub == "verify-inequalities") {
    return {
        {"trials", Type::integer, "100"},
        {"bernstein_trials", Type::integer, "200"},
        {"dim", Type::integer, "2"},
        {"N", Type::integer, "64"},
        {"sizes", Type::real_list, "32, 64"},
        {"seed", Type::integer, "0"},
    };
  }
  if (sub == "validate") {
    return {
        {"N", Type::integer, "64"},
        {"T", Type::real, "1"},
        {"dt", Type::real, "1e-3"},
        {"mu", Type::real, "1"},
        {"phase_eps", Type::real, "0.3"},
        {"pulse_eps", Type::real, "0.1"},
        {"acoustic_nus", Type::real_list, "100, 2"},
        {"tol_taylor_green", Type::real, "1e-6"},
        {"tol_phase_heat", Type::real, "1e-6"},
        {"tol_unit_length", Type::real, "1e-10"},
        {"tol_acoustic", Type::real, "1e-10"},
        {"seed", Type::integer, "0"},
    };
  }
  throw ConfigError(0, "no configuration schema for '" + sub + "'");
}

// ---- validation ----------------------------------------------------------

inline bool power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

inline void check(const Resolved& r, bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw ConfigError(r.line(key), "invalid " + key + ": " + msg);
}

/// Physical and numerical sanity of whatever keys the schema carries.
inline void validate(const Resolved& r) {
  if (r.has("dim")) check(r, r.integer("dim") == 2 || r.integer("dim") == 3, "dim", "must be 2 or 3");
  if (r.has("N")) check(r, power_of_two(r.integer("N")) && r.integer("N") >= 16, "N", "must be a power of two >= 16");
  if (r.has("gamma")) check(r, r.real("gamma") > 1.0, "gamma", "requires gamma > 1");
  if (r.has("mu")) check(r, r.real("mu") > 0.0, "mu", "requires mu > 0");
  if (r.has("lambda"))
    check(r, r.real("lambda") + 2.0 * r.real("mu") > 0.0, "lambda", "requires nu = lambda + 2 mu > 0");
  if (r.has("T")) check(r, r.real("T") > 0.0, "T", "must be positive");
  if (r.has("dt")) check(r, r.real("dt") > 0.0, "dt", "must be positive");
  if (r.has("snapshot_every")) check(r, r.integer("snapshot_every") >= 1, "snapshot_every", "must be >= 1");
  if (r.has("seed")) check(r, r.integer("seed") >= 0, "seed", "must be nonnegative");
  if (r.has("preset")) {
    const auto& names = preset_names();
    check(r, std::find(names.begin(), names.end(), r.text("preset")) != names.end(), "preset",
          "unknown preset '" + r.text("preset") + "'");
  }
  if (r.has("rule")) check(r, r.text("rule") == "dealiased" || r.text("rule") == "exact", "rule", "dealiased or exact");
  if (r.has("nus")) {
    const auto nus = r.reals("nus");
    bool ok = !nus.empty() && nus.front() > 0.0;
    for (std::size_t i = 1; i < nus.size(); ++i) ok = ok && nus[i] > nus[i - 1];
    check(r, ok, "nus", "must be positive and strictly increasing");
  }
  if (r.has("j0") && r.text("j0") != "auto") {
    long long j;
    check(r, detail::parse_int(r.text("j0"), j), "j0", "integer or 'auto'");
  }
  for (const char* k : {"trials", "bernstein_trials"})
    if (r.has(k)) check(r, r.integer(k) >= 1, k, "must be >= 1");
  if (r.has("sizes")) {
    bool ok = true;
    for (double s : r.reals("sizes")) ok = ok && s == std::floor(s) && power_of_two(static_cast<long long>(s)) && s >= 16;
    check(r, ok, "sizes", "powers of two >= 16");
  }
  if (r.has("acoustic_nus")) {
    bool ok = true;
    for (double s : r.reals("acoustic_nus")) ok = ok && s > 0.0;
    check(r, ok, "acoustic_nus", "must be positive");
  }
}

// ---- typed views ---------------------------------------------------------

inline PresetParams preset(const Resolved& r) {
  PresetParams p;
  p.name = r.text("preset");
  p.eps = r.real("eps");
  p.eps1 = r.real("eps1");
  p.eps2 = r.real("eps2");
  p.grad_amp = r.real("grad_amp");
  return p;
}

inline ProductRule rule(const Resolved& r) {
  return r.text("rule") == "exact" ? ProductRule::exact : ProductRule::dealiased;
}

inline StepperConfig stepper(const Resolved& r) {
  StepperConfig c;
  c.dt = r.real("dt");
  c.snapshot_every = static_cast<int>(r.integer("snapshot_every"));
  c.renormalize_director = r.boolean("renormalize");
  return c;
}

inline FluidParams fluid(const Resolved& r) {
  FluidParams fp;
  const double mu = r.real("mu");
  fp.visc = Viscosity{mu, r.has("lambda") ? r.real("lambda") : 0.0};
  fp.law = PressureLaw(r.real("gamma"));
  fp.rule = rule(r);
  return fp;
}

inline SweepConfig sweep(const Resolved& r) {
  SweepConfig c;
  c.nus = r.reals("nus");
  c.mu = r.real("mu");
  c.gamma = r.real("gamma");
  c.dim = static_cast<int>(r.integer("dim"));
  c.n = static_cast<int>(r.integer("N"));
  c.T = r.real("T");
  c.dt = r.real("dt");
  c.snapshot_every = static_cast<int>(r.integer("snapshot_every"));
  c.preset = preset(r);
  c.renormalize = r.boolean("renormalize");
  c.rule = rule(r);
  if (r.text("j0") != "auto") c.j0 = static_cast<int>(std::stoll(r.text("j0")));
  c.seed = static_cast<std::uint64_t>(r.integer("seed"));
  return c;
}

inline ExactSettings exact_settings(const Resolved& r) {
  ExactSettings s;
  s.n = static_cast<int>(r.integer("N"));
  s.T = r.real("T");
  s.dt = r.real("dt");
  s.mu = r.real("mu");
  s.phase_eps = r.real("phase_eps");
  s.pulse_eps = r.real("pulse_eps");
  s.acoustic_nus = r.reals("acoustic_nus");
  return s;
}

inline ExactTolerances exact_tolerances(const Resolved& r) {
  ExactTolerances t;
  t.taylor_green = r.real("tol_taylor_green");
  t.phase_heat = r.real("tol_phase_heat");
  t.unit_length = r.real("tol_unit_length");
  t.acoustic = r.real("tol_acoustic");
  return t;
}

}  // namespace nlc::config
