#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "nlc/config.hpp"
#include "nlc/diagnostics.hpp"
#include "nlc/experiments.hpp"
#include "nlc/inequalities.hpp"
#include "nlc/integrator.hpp"
#include "nlc/io.hpp"

using namespace nlc;
using io::json;

namespace {

struct Globals {
  std::optional<long long> seed;
  std::string out_dir = "out";
  int threads = 1;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string timing_text(const std::string& sub, const Globals& g, double secs) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.3f", secs);
  return "subcommand = " + sub + "\nthreads = " + std::to_string(g.threads) + "\nwall_seconds = " + buf + "\n";
}

config::Resolved load(const std::string& sub, const std::string& path, const Globals& g) {
  const config::Schema schema = config::schema_for(sub);
  config::Resolved r = path.empty() ? config::parse_text("", schema) : config::parse_file(path, schema);
  if (g.seed) r.set("seed", std::to_string(*g.seed));
  config::validate(r);
  return r;
}

// ---- run-compressible / run-incompressible ------------------------------

template <class State>
double blowup_of(const State& s, const lp::DyadicFilter& f) {
  if constexpr (std::is_same_v<State, CompressibleState>) {
    return blowup_integrand(s, f);
  } else {
    const double half = s.grid().dim() / 2.0;
    const double dn = lp::besov(s.D, half + 1.0, f);
    return lp::besov(s.V, half, f, 1) + dn * dn;
  }
}

template <class State>
int run_single(const std::string& sub, const config::Resolved& cfg, const Globals& g) {
  Stopwatch clock;
  io::RunDirectory dir(g.out_dir);
  dir.write("config_echo.txt", cfg.echo());
  const Grid grid(static_cast<int>(cfg.integer("dim")), static_cast<int>(cfg.integer("N")));
  const lp::DyadicFilter filter(grid);
  const FluidParams fp = config::fluid(cfg);
  const StepperConfig sc = config::stepper(cfg);
  const CompressibleState c0 = make_compressible(grid, config::preset(cfg));
  State s0;
  if constexpr (std::is_same_v<State, CompressibleState>) {
    s0 = c0;
  } else {
    s0 = make_incompressible(c0);
  }

  json results;
  int code = 0;
  try {
    const Trajectory<State> tr = run_to(s0, cfg.real("T"), sc, fp);
    constexpr bool comp = std::is_same_v<State, CompressibleState>;
    io::Csv csv(comp ? std::vector<std::string>{"t", "step", "kinetic", "internal", "elastic", "energy", "mean_a",
                                                "max_abs_a", "blowup_integrand", "director_deviation"}
                     : std::vector<std::string>{"t", "step", "kinetic", "elastic", "energy", "divergence_l2",
                                                "blowup_integrand", "director_deviation"});
    std::vector<double> times, blow;
    double div_max = 0.0;
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
      const State& s = tr.snapshots[i];
      const std::size_t step = tr.snapshot_steps[i];
      dir.write("snap_" + std::to_string(step) + ".nlcf", io::encode(io::snapshot_of(s)));
      double dev = 0.0;
      const std::size_t from = i ? tr.snapshot_steps[i - 1] : 0;
      for (std::size_t k = from; k < step; ++k) dev = std::max(dev, tr.director_deviation[k]);
      const double b = blowup_of(s, filter);
      times.push_back(s.t);
      blow.push_back(b);
      if constexpr (comp) {
        const Energy e = energy(s, fp.law);
        csv.row({s.t, static_cast<double>(step), e.kinetic, e.internal, e.elastic, e.total, mean(s.a),
                 to_physical(s.a).max_abs(), b, dev});
      } else {
        const Energy e = energy(s);
        const double div = l2_norm(divergence(s.V));
        div_max = std::max(div_max, div);
        csv.row({s.t, static_cast<double>(step), e.kinetic, e.elastic, e.total, div, b, dev});
      }
    }
    dir.write("series.csv", csv.str());
    results["ok"] = true;
    results["steps"] = tr.steps;
    results["final_time"] = io::jnum(tr.snapshots.back().t);
    results["snapshots"] = tr.snapshots.size();
    results["blowup_integral"] = io::jnum(trapezoid(times, blow));
    results["max_director_deviation"] = io::jnum(tr.max_director_deviation());
    if constexpr (comp) {
      const RunHealth h = run_health(tr, fp.law);
      results["mean_a_drift"] = io::jnum(h.mean_a_drift);
      results["energy_growth_rate"] = io::jnum(h.energy_growth_rate);
    } else {
      results["max_divergence_l2"] = io::jnum(div_max);
    }
  } catch (const StepRejected& e) {
    results["ok"] = false;
    results["error"] = e.what();
    code = 1;
  }
  dir.finish(sub, &cfg, results);
  dir.write_timing(timing_text(sub, g, clock.seconds()));
  std::cout << results.dump(2) << "\n";
  return code;
}

// ---- limit-sweep ---------------------------------------------------------

int limit_sweep(const config::Resolved& cfg, const Globals& g) {
  Stopwatch clock;
  io::RunDirectory dir(g.out_dir);
  dir.write("config_echo.txt", cfg.echo());
  const SweepReport rep = run_limit_sweep(config::sweep(cfg), g.threads);
  const json j = io::to_json(rep);
  dir.write_json("sweep.json", j);
  dir.write("sweep.csv", io::sweep_csv(rep));
  for (const auto& r : rep.runs)
    if (r.ok) dir.write("series_nu" + io::num(r.nu) + ".csv", io::functional_csv(r.series));
  json summary{{"all_ok", rep.all_ok()}, {"E_strictly_decreasing", rep.E_strictly_decreasing()}, {"fits", j["fits"]}};
  dir.finish("limit-sweep", &cfg, summary);
  dir.write_timing(timing_text("limit-sweep", g, clock.seconds()));
  std::cout << summary.dump(2) << "\n";
  return rep.all_ok() ? 0 : 1;
}

// ---- analyze-besov -------------------------------------------------------

int analyze_besov(const std::string& path, std::optional<double> s, std::string component, bool write,
                  const Globals& g) {
  const io::Snapshot snap = io::decode(io::read_file(path));
  if (component.empty()) component = snap.compressible() ? "a" : "V";
  const auto fields = io::select_component(snap, component);
  const Grid& grid = fields.front().grid();
  const lp::DyadicFilter filter(grid);
  const double order = s ? *s : grid.dim() / 2.0;
  std::vector<lp::Weighted> parts;
  for (const auto& f : fields) parts.push_back({&f, 0, 1.0});
  json j = io::to_json(lp::besov_norm(parts, order, filter));
  j["component"] = component;
  j["time"] = io::jnum(snap.time);
  j["N"] = snap.n;
  j["dim"] = snap.dim;
  if (write) {
    io::RunDirectory dir(g.out_dir);
    dir.write_json("besov.json", j);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ---- verify-inequalities -------------------------------------------------

int verify_inequalities(const config::Resolved& cfg, const Globals& g) {
  Stopwatch clock;
  io::RunDirectory dir(g.out_dir);
  dir.write("config_echo.txt", cfg.echo());
  const int dim = static_cast<int>(cfg.integer("dim"));
  const int trials = static_cast<int>(cfg.integer("trials"));
  const auto seed = static_cast<std::uint64_t>(cfg.integer("seed"));
  std::vector<int> sizes;
  for (double x : cfg.reals("sizes")) sizes.push_back(static_cast<int>(x));
  const double half = dim / 2.0;

  json parts[4];
  bool ok[4] = {false, false, false, false};
  parallel_for(4, g.threads, [&](std::size_t i) {
    switch (i) {
      case 0: {
        const Grid grid(dim, static_cast<int>(cfg.integer("N")));
        const lp::DyadicFilter f(grid);
        const auto r = lp::verify_bernstein(static_cast<int>(cfg.integer("bernstein_trials")), f, derive_seed(seed, 0));
        parts[i] = io::to_json(r);
        ok[i] = r.passed();
        break;
      }
      case 1: {
        const auto r = lp::verify_product_law(trials, half, half, dim, sizes, derive_seed(seed, 1));
        parts[i] = io::to_json(r);
        ok[i] = r.passed();
        break;
      }
      default: {
        const double s = i == 2 ? half : half - 1.0;
        const auto r = lp::verify_commutator(trials, s, dim, sizes, derive_seed(seed, i));
        parts[i] = io::to_json(r);
        parts[i]["s"] = s;
        ok[i] = r.passed();
        break;
      }
    }
  });
  const bool all = ok[0] && ok[1] && ok[2] && ok[3];
  json j{{"bernstein", parts[0]}, {"product_law", parts[1]}, {"commutator", json::array({parts[2], parts[3]})},
         {"passed", all}};
  dir.write_json("inequalities.json", j);
  dir.finish("verify-inequalities", &cfg, {{"passed", all}});
  dir.write_timing(timing_text("verify-inequalities", g, clock.seconds()));
  std::cout << json{{"passed", all}}.dump(2) << "\n";
  return all ? 0 : 1;
}

// ---- validate ------------------------------------------------------------

int validate(const config::Resolved& cfg, const Globals& g) {
  Stopwatch clock;
  io::RunDirectory dir(g.out_dir);
  dir.write("config_echo.txt", cfg.echo());
  const ExactReport r = validate_exact_solutions(config::exact_settings(cfg), config::exact_tolerances(cfg));
  const json j = io::to_json(r);
  dir.write_json("validate.json", j);
  dir.finish("validate", &cfg, {{"passed", r.passed()}});
  dir.write_timing(timing_text("validate", g, clock.seconds()));
  std::cout << j.dump(2) << "\n";
  for (const auto& c : r.checks)
    if (!c.passed) std::cerr << "validation failed: " << c.name << " error " << c.error << "\n";
  return r.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressible/incompressible nematic flow solver and incompressible-limit diagnostics"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Override the configured seed");
  app.add_option("--out-dir", g.out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for independent runs (results do not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string cfg_path;
  auto with_config = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("config", cfg_path, "key = value configuration file (defaults when omitted)");
    return sub;
  };
  auto* rc = with_config("run-compressible", "Evolve the compressible system");
  auto* ri = with_config("run-incompressible", "Evolve the incompressible system");
  auto* ls = with_config("limit-sweep", "Incompressible-limit sweep over nu with rate fits");
  auto* vi = with_config("verify-inequalities", "Bernstein, product and commutator checks");
  auto* va = with_config("validate", "Exact-solution checks");

  std::string snap_path, component;
  std::optional<double> s_order;
  auto* ab = app.add_subcommand("analyze-besov", "Besov norm of a snapshot component");
  ab->add_option("snapshot", snap_path, "NLCF snapshot")->required()->check(CLI::ExistingFile);
  ab->add_option("--s", s_order, "Regularity index (default n/2)");
  ab->add_option("--component", component, "a, v, d, V, D or a single component like v2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ab->parsed()) return analyze_besov(snap_path, s_order, component, app.count("--out-dir") > 0, g);
    for (auto* sub : {rc, ri, ls, vi, va}) {
      if (!sub->parsed()) continue;
      const std::string name = sub->get_name();
      const config::Resolved cfg = load(name, cfg_path, g);
      if (sub == rc) return run_single<CompressibleState>(name, cfg, g);
      if (sub == ri) return run_single<IncompressibleState>(name, cfg, g);
      if (sub == ls) return limit_sweep(cfg, g);
      if (sub == vi) return verify_inequalities(cfg, g);
      return validate(cfg, g);
    }
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
