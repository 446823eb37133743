#pragma once

#include <openssl/evp.h>
#include <unistd.h>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlc/config.hpp"
#include "nlc/diagnostics.hpp"
#include "nlc/experiments.hpp"
#include "nlc/inequalities.hpp"

namespace nlc::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr std::uint32_t snapshot_version = 1;
inline constexpr int series_version = 1;

// ---- bytes ---------------------------------------------------------------

inline std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

/// Writes to a sibling temporary and renames it into place.
inline void atomic_write(const fs::path& p, const std::string& bytes) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for '" + p.string() + "'");
    }
  }
  fs::rename(tmp, p);
}

inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace detail {

template <class T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw std::runtime_error("snapshot truncated");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

// ---- snapshots -----------------------------------------------------------

/// Physical samples of every component at one time.
/// Compressible order: a, v_1..v_n, d_1..d_n. Incompressible: V_1..V_n, D_1..D_n.
struct Snapshot {
  int dim = 2;
  int n = 0;
  double time = 0.0;
  std::vector<RealField> components;

  bool compressible() const { return static_cast<int>(components.size()) == 2 * dim + 1; }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    const bool c = compressible();
    if (c) out.push_back("a");
    for (int m = 0; m < dim; ++m) out.push_back((c ? "v" : "V") + std::to_string(m + 1));
    for (int m = 0; m < dim; ++m) out.push_back((c ? "d" : "D") + std::to_string(m + 1));
    return out;
  }
};

inline Snapshot snapshot_of(const CompressibleState& s) {
  Snapshot out{s.grid().dim(), s.grid().n(), s.t, {to_physical(s.a)}};
  for (const auto& f : to_physical(s.v)) out.components.push_back(f);
  for (const auto& f : to_physical(s.d)) out.components.push_back(f);
  return out;
}

inline Snapshot snapshot_of(const IncompressibleState& s) {
  Snapshot out{s.grid().dim(), s.grid().n(), s.t, {}};
  for (const auto& f : to_physical(s.V)) out.components.push_back(f);
  for (const auto& f : to_physical(s.D)) out.components.push_back(f);
  return out;
}

inline std::string encode(const Snapshot& s) {
  std::string out = "NLCF";
  detail::put<std::uint32_t>(out, snapshot_version);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(s.dim));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(s.n));
  detail::put<double>(out, s.time);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(s.components.size()));
  for (const auto& c : s.components)
    for (std::size_t i = 0; i < c.size(); ++i) detail::put<double>(out, c[i]);
  return out;
}

inline Snapshot decode(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "NLCF") != 0) throw std::runtime_error("not an NLCF snapshot");
  std::size_t pos = 4;
  const auto version = detail::get<std::uint32_t>(bytes, pos);
  if (version != snapshot_version) throw std::runtime_error("unsupported snapshot version " + std::to_string(version));
  Snapshot s;
  s.dim = static_cast<int>(detail::get<std::uint32_t>(bytes, pos));
  s.n = static_cast<int>(detail::get<std::uint32_t>(bytes, pos));
  s.time = detail::get<double>(bytes, pos);
  const auto ncomp = detail::get<std::uint32_t>(bytes, pos);
  const Grid g(s.dim, s.n);
  if (ncomp != static_cast<std::uint32_t>(2 * s.dim) && ncomp != static_cast<std::uint32_t>(2 * s.dim + 1))
    throw std::runtime_error("unexpected component count " + std::to_string(ncomp));
  for (std::uint32_t c = 0; c < ncomp; ++c) {
    std::vector<double> v(g.real_size());
    for (auto& x : v) x = detail::get<double>(bytes, pos);
    s.components.emplace_back(g, std::move(v));
  }
  if (pos != bytes.size()) throw std::runtime_error("trailing bytes after snapshot");
  return s;
}

inline CompressibleState to_compressible(const Snapshot& s) {
  if (!s.compressible()) throw std::runtime_error("snapshot holds an incompressible state");
  const auto& c = s.components;
  std::vector<SpectralScalar> v, d;
  for (int m = 0; m < s.dim; ++m) {
    v.push_back(to_spectral(c[static_cast<std::size_t>(1 + m)]));
    d.push_back(to_spectral(c[static_cast<std::size_t>(1 + s.dim + m)]));
  }
  return {to_spectral(c[0]), SpectralVector(std::move(v)), SpectralVector(std::move(d)), s.time};
}

inline IncompressibleState to_incompressible(const Snapshot& s) {
  if (s.compressible()) throw std::runtime_error("snapshot holds a compressible state");
  const auto& c = s.components;
  std::vector<SpectralScalar> v, d;
  for (int m = 0; m < s.dim; ++m) {
    v.push_back(to_spectral(c[static_cast<std::size_t>(m)]));
    d.push_back(to_spectral(c[static_cast<std::size_t>(s.dim + m)]));
  }
  return {SpectralVector(std::move(v)), SpectralVector(std::move(d)), s.time};
}

/// Field selected by name: a, v, d, V, D, or a single component such as v2.
inline std::vector<SpectralScalar> select_component(const Snapshot& s, const std::string& name) {
  const auto names = s.names();
  std::vector<SpectralScalar> out;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name || (names[i].size() > 1 && names[i].substr(0, names[i].size() - 1) == name))
      out.push_back(to_spectral(s.components[i]));
  if (out.empty()) throw std::invalid_argument("snapshot has no component '" + name + "'");
  return out;
}

// ---- text formatting -----------------------------------------------------

/// Shortest round-trip decimal; identical bits give identical text.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

inline json jnum(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : cols_(header.size()) { row_text(header); }
  void row(const std::vector<double>& values) {
    if (values.size() != cols_) throw std::logic_error("csv row width mismatch");
    std::vector<std::string> t;
    for (double v : values) t.push_back(num(v));
    row_text(t);
  }
  void row_text(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) body_ += (i ? "," : "") + cells[i];
    body_ += "\n";
  }
  const std::string& str() const { return body_; }

 private:
  std::size_t cols_;
  std::string body_;
};

// ---- report serialisation ------------------------------------------------

inline json to_json(const lp::BesovReport& r) {
  json j;
  j["s"] = jnum(r.s);
  j["value"] = jnum(r.value);
  json blocks = json::array();
  for (std::size_t i = 0; i < r.j.size(); ++i) blocks.push_back({{"j", r.j[i]}, {"weighted_l2", jnum(r.per_j[i])}});
  j["blocks"] = blocks;
  j["mean_norm"] = jnum(r.mean_norm);
  j["truncation_mass"] = jnum(r.truncation_mass);
  return j;
}

inline json to_json(const TheoremCheck& t) {
  return {{"nu", jnum(t.nu)},
          {"E_linf", jnum(t.E_linf)},
          {"E_l1", jnum(t.E_l1)},
          {"E", jnum(t.E)},
          {"nu_a_sup", jnum(t.nu_a_sup)},
          {"a_sup", jnum(t.a_sup)},
          {"blowup_integral", jnum(t.blowup_integral)},
          {"M_proxy", jnum(t.M_proxy)},
          {"sqrt_mu_over_nu", jnum(t.rate_bound_shape)}};
}

inline json to_json(const RateFit& f) {
  return {{"slope", jnum(f.slope)}, {"intercept", jnum(f.intercept)}, {"max_residual", jnum(f.max_residual)},
          {"points", f.points}};
}

inline json to_json(const ExactReport& r) {
  json arr = json::array();
  for (const auto& c : r.checks)
    arr.push_back({{"name", c.name},
                   {"error", jnum(c.error)},
                   {"tolerance", jnum(c.tolerance)},
                   {"unit_length_error", jnum(c.unit_error)},
                   {"unit_length_tolerance", jnum(c.unit_tolerance)},
                   {"passed", c.passed},
                   {"detail", c.detail}});
  return {{"passed", r.passed()}, {"checks", arr}};
}

inline json to_json(const lp::StabilityReport& r) {
  json sizes = json::array();
  for (std::size_t i = 0; i < r.n.size(); ++i)
    sizes.push_back({{"N", r.n[i]}, {"max_ratio", jnum(r.max_ratio[i])}, {"worst_seed", r.worst_seed[i]}});
  return {{"name", r.name}, {"trials", r.trials}, {"sizes", sizes}, {"growth", jnum(r.growth)},
          {"finite", r.finite}, {"passed", r.passed()}};
}

inline json to_json(const lp::BernsteinReport& r) {
  json bands = json::array();
  for (const auto& b : r.bands)
    bands.push_back({{"j", b.j}, {"trials", b.trials}, {"min_ratio", jnum(b.min_ratio)}, {"max_ratio", jnum(b.max_ratio)}});
  return {{"bands", bands}, {"offending_seeds", r.offending_seeds}, {"passed", r.passed()}};
}

inline const std::vector<std::string>& functional_columns() {
  static const std::vector<std::string> cols{
      "t",        "qu",     "a_lo",   "nu_grad_a", "x_tuple", "qut_grad_a", "nu_lap_qu", "nu_lap_a_low",
      "grad_a_high", "y_tuple", "pu",  "delta",     "put",     "mu_lap_pu",  "w_tuple",   "delta_top",
      "V_lo",     "D_mid",  "Vt_lo",  "V_hi",      "D_top",   "a_mid",      "blowup",    "energy",
      "mean_a"};
  return cols;
}

inline std::string functional_csv(const FunctionalSeries& s) {
  Csv csv(functional_columns());
  for (const auto& x : s.samples)
    csv.row({x.t, x.qu, x.a_lo, x.nu_grad_a, x.x_tuple, x.qut_grad_a, x.nu_lap_qu, x.nu_lap_a_low, x.grad_a_high,
             x.y_tuple, x.pu, x.delta, x.put, x.mu_lap_pu, x.w_tuple, x.delta_top, x.V_lo, x.D_mid, x.Vt_lo, x.V_hi,
             x.D_top, x.a_mid, x.blowup, x.energy, x.mean_a});
  return csv.str();
}

inline json to_json(const SweepReport& r) {
  json runs = json::array();
  for (const auto& x : r.runs) {
    json j{{"nu", jnum(x.nu)}, {"ok", x.ok}, {"error", x.error}, {"j0", x.j0}};
    if (x.ok) {
      j["theorem_check"] = to_json(x.check);
      j["functionals"] = {{"X", jnum(x.series.X)}, {"Y", jnum(x.series.Y)}, {"Z", jnum(x.series.Z)},
                          {"W", jnum(x.series.W)}, {"V", jnum(x.series.M_proxy)}};
      j["health"] = {{"mean_a_drift", jnum(x.health.mean_a_drift)},
                     {"energy_growth_rate", jnum(x.health.energy_growth_rate)},
                     {"max_director_deviation", jnum(x.health.max_director_deviation)},
                     {"steps", x.health.steps}};
    }
    runs.push_back(j);
  }
  json fits = json::object();
  fits["E"] = r.E_fit ? to_json(*r.E_fit) : json(nullptr);
  fits["a_sup"] = r.a_fit ? to_json(*r.a_fit) : json(nullptr);
  fits["nu_a_sup"] = r.nu_a_fit ? to_json(*r.nu_a_fit) : json(nullptr);
  return {{"incompressible", {{"ok", r.incompressible_ok},
                              {"error", r.incompressible_error},
                              {"max_divergence_l2", jnum(r.incompressible_max_divergence)}}},
          {"runs", runs},
          {"fits", fits},
          {"E_strictly_decreasing", r.E_strictly_decreasing()},
          {"all_ok", r.all_ok()}};
}

inline std::string sweep_csv(const SweepReport& r) {
  Csv csv({"nu", "ok", "E_linf", "E_l1", "E", "nu_a_sup", "a_sup", "blowup_integral", "M_proxy", "X", "Y",
           "mean_a_drift", "energy_growth_rate", "max_director_deviation"});
  for (const auto& x : r.runs) {
    if (!x.ok) {
      csv.row_text({num(x.nu), "0", "", "", "", "", "", "", "", "", "", "", "", ""});
      continue;
    }
    const auto& c = x.check;
    csv.row_text({num(x.nu), "1", num(c.E_linf), num(c.E_l1), num(c.E), num(c.nu_a_sup), num(c.a_sup),
                  num(c.blowup_integral), num(c.M_proxy), num(x.series.X), num(x.series.Y),
                  num(x.health.mean_a_drift), num(x.health.energy_growth_rate),
                  num(x.health.max_director_deviation)});
  }
  return csv.str();
}

// ---- run directory -------------------------------------------------------

/// Collects every emitted file with its checksum; results and timing stay separate
/// so reruns produce byte-identical manifests.
class RunDirectory {
 public:
  explicit RunDirectory(fs::path root) : root_(std::move(root)) {}

  void write(const std::string& name, const std::string& bytes) {
    atomic_write(root_ / name, bytes);
    files_.push_back({{"name", name}, {"bytes", bytes.size()}, {"sha256", sha256_hex(bytes)}});
  }
  void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  /// run.json: config echo, code version, results and the file inventory.
  void finish(const std::string& subcommand, const config::Resolved* cfg, const json& results) {
    json m;
    m["tool"] = "nlcflow";
    m["code_version"] = code_version();
    m["subcommand"] = subcommand;
    json echo = json::object();
    if (cfg)
      for (const auto& k : cfg->schema())
        if (cfg->has(k.name)) echo[k.name] = cfg->text(k.name);
    m["config"] = echo;
    m["series_version"] = series_version;
    m["snapshot_version"] = snapshot_version;
    m["results"] = results;
    m["files"] = files_;
    atomic_write(root_ / "run.json", m.dump(2) + "\n");
  }
  void write_timing(const std::string& text) { atomic_write(root_ / "timing.txt", text); }

  static std::string code_version() { return "0.1.0"; }
  const fs::path& root() const { return root_; }
  const json& files() const { return files_; }

 private:
  fs::path root_;
  json files_ = json::array();
};

}  // namespace nlc::io
