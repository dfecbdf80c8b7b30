#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "stripes/errors.hpp"
#include "stripes/parallel.hpp"

using namespace stripes;
namespace fs = std::filesystem;

namespace {

enum class Kind { Int, Double, Bool, String, List };

struct FlagSpec {
  std::string flag;
  std::string key;
  Kind kind;
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<FlagSpec> flags;
  std::function<void(cli::Context&)> run;
};

struct Common {
  std::string config_file;
  std::string out_dir;
  std::string seed;
  int threads = 0;
  std::map<std::string, std::string> model;  // d, p, tau, eps, L
  bool allow_low_exponent = false;
  bool allow_large_tau = false;
  std::vector<std::string> tolerances;       // name=value
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
};

json parse_value(const std::string& s, Kind k) {
  switch (k) {
    case Kind::Int: return std::stoi(s);
    case Kind::Double: return std::stod(s);
    case Kind::String: return s;
    case Kind::List: {
      json a = json::array();
      std::stringstream ss(s);
      std::string item;
      while (std::getline(ss, item, ',')) a.push_back(std::stod(item));
      return a;
    }
    case Kind::Bool: return s == "true" || s == "1";
  }
  return nullptr;
}

std::vector<Command> commands() {
  return {
      {"kernel-moments", "closed-form kernel moments against quadrature",
       {{"--tau-sweep", "tau_sweep", Kind::List, "comma-separated tau values"}},
       cli::kernel_moments},
      {"optimal-period", "optimal 1D period by scan and golden section",
       {{"--n", "n", Kind::Int, "cells on [0,h]"},
        {"--h-lo", "h_lo", Kind::Double, "lower end of the h range"},
        {"--h-hi", "h_hi", Kind::Double, "upper end of the h range"},
        {"--rel-tol", "rel_tol", Kind::Double, "relative tolerance in h"},
        {"--scan-points", "scan_points", Kind::Int, "bracketing scan size"}},
       cli::optimal_period},
      {"minimize-1d", "minimize the reflected 1D profile at fixed h",
       {{"--h", "h", Kind::Double, "half-period (default: sharp optimum)"},
        {"--n", "n", Kind::Int, "cells on [0,h]"},
        {"--init", "init", Kind::String, "profile CSV to start from"},
        {"--max-iter", "max_iter", Kind::Int, "iteration cap"}},
       cli::minimize_1d},
      {"minimize-2d", "gradient flow from noise and stripe diagnostics",
       {{"--k", "k", Kind::Int, "periods per box"},
        {"--n", "n", Kind::Int, "grid points per side"},
        {"--seeds", "seeds", Kind::Int, "number of runs"},
        {"--noise", "noise", Kind::Double, "noise amplitude around 1/2"},
        {"--anisotropy-threshold", "anisotropy_threshold", Kind::Double, "stripe threshold"},
        {"--gap-threshold", "gap_threshold", Kind::Double, "relative energy gap threshold"},
        {"--required-fraction", "required_fraction", Kind::Double, "fraction of successful runs required"},
        {"--allow-incommensurate", "allow_incommensurate", Kind::Bool, "allow L not a multiple of 2h*"},
        {"--box-L", "box_L", Kind::Double, "box period (needs --allow-incommensurate unless commensurate)"},
        {"--h-star", "h_star", Kind::Double, "skip the period search"},
        {"--period-n", "period_n", Kind::Int, "1D grid for the period search"},
        {"--kappa", "kappa", Kind::Double, "sign smoothing in the gradient"},
        {"--max-iter", "max_iter", Kind::Int, "iteration cap per run"},
        {"--resume", "resume", Kind::String, ".pfd field to continue from"}},
       cli::minimize_2d},
      {"verify-decomposition", "lower-bound decomposition of a field",
       {{"--field", "field", Kind::String, ".pfd input (default: random smooth field)"},
        {"--n", "n", Kind::Int, "grid for the random field"},
        {"--one-dimensional", "one_dimensional", Kind::Bool, "random field varies along axis 0 only"},
        {"--delta-grad", "delta_grad", Kind::Double, "gradient cutoff"},
        {"--trunc-radius", "trunc_radius", Kind::Double, "minimum image radius"}},
       cli::verify_decomposition},
      {"verify-el", "Euler-Lagrange diagnostics of a 1D minimizer",
       {{"--profile", "profile", Kind::String, "profile CSV (default: minimize first)"},
        {"--h", "h", Kind::Double, "half-period"},
        {"--n", "n", Kind::Int, "cells on [0,h]"},
        {"--delta-el", "delta_el", Kind::Double, "residual mask level"},
        {"--no-refine", "refine", Kind::Bool, "skip the n -> 2n study"}},
       cli::verify_el},
      {"gamma-study", "penalized gamma family along an m schedule",
       {{"--h", "h", Kind::Double, "half-period"},
        {"--n", "n", Kind::Int, "cells on [0,h]"},
        {"--m-schedule", "m_schedule", Kind::List, "comma-separated m values"},
        {"--gamma-threshold", "gamma_threshold", Kind::Double, "gamma > 1 + threshold counts"},
        {"--delta", "delta", Kind::Double, "margin mask level"}},
       cli::gamma_study},
      {"rp-check", "reflection positivity and chessboard trials",
       {{"--trials", "trials", Kind::Int, "random crossing windows"},
        {"--chess-trials", "chess_trials", Kind::Int, "multi-arc profiles"},
        {"--window", "window", Kind::Int, "window cells"},
        {"--spacing", "spacing", Kind::Double, "grid spacing"},
        {"--n", "n", Kind::Int, "nodes of the multi-arc profiles"}},
       cli::rp_check},
  };
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_file, "JSON run configuration");
  sub->add_option("--out", c.out_dir, "output directory");
  sub->add_option("--seed", c.seed, "64-bit seed");
  sub->add_option("--threads", c.threads, "worker cap (also STRIPES_THREADS)");
  for (const char* k : {"d", "p", "tau", "eps", "L"}) {
    sub->add_option(std::string("--") + k, c.model[k], std::string("model parameter ") + k);
  }
  sub->add_flag("--allow-low-exponent", c.allow_low_exponent, "permit d+1 < p < d+2");
  sub->add_flag("--allow-large-tau", c.allow_large_tau, "permit tau > 1");
  sub->add_option("--tol", c.tolerances, "tolerance override name=value")->take_all();
}

RunConfig resolve(const std::string& command, const Command& spec, const Common& c) {
  json j = json{{"params", json{{"d", 1}, {"p", 3.0}, {"tau", 0.05}, {"eps", 0.05}, {"L", 1.0}}},
                {"command", command}, {"options", json::object()}, {"seed", 20240607},
                {"out_dir", "out"}, {"tolerances", json::object()}, {"threads", 0}};
  if (!c.config_file.empty()) {
    const json file = read_json(c.config_file);
    for (auto& [k, v] : file.items()) {
      if (v.is_object() && j.contains(k) && j[k].is_object()) {
        for (auto& [k2, v2] : v.items()) j[k][k2] = v2;
      } else if (k != "format_version") {
        j[k] = v;
      }
    }
  }
  for (const auto& [k, v] : c.model) {
    if (v.empty()) continue;
    j["params"][k] = k == "d" ? json(std::stoi(v)) : json(std::stod(v));
  }
  if (c.allow_low_exponent) j["params"]["allow_low_exponent"] = true;
  if (c.allow_large_tau) j["params"]["allow_large_tau"] = true;
  if (!c.out_dir.empty()) j["out_dir"] = c.out_dir;
  if (!c.seed.empty()) j["seed"] = std::stoull(c.seed);
  if (c.threads > 0) j["threads"] = c.threads;
  for (const auto& t : c.tolerances) {
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParameterError("--tol expects name=value, got " + t);
    j["tolerances"][t.substr(0, eq)] = std::stod(t.substr(eq + 1));
  }
  for (const auto& f : spec.flags) {
    if (f.kind == Kind::Bool) {
      auto it = c.switches.find(f.key);
      // --no-refine style flags store the negation
      if (it != c.switches.end() && it->second) j["options"][f.key] = f.flag.rfind("--no-", 0) != 0;
    } else {
      auto it = c.values.find(f.key);
      if (it != c.values.end() && !it->second.empty()) j["options"][f.key] = parse_value(it->second, f.kind);
    }
  }
  j["command"] = command;
  return j.get<RunConfig>();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diffuse-interface stripe lab"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  const auto cmds = commands();
  std::map<std::string, Common> common;
  for (const auto& cmd : cmds) {
    auto* sub = app.add_subcommand(cmd.name, cmd.help);
    Common& c = common[cmd.name];
    add_common(sub, c);
    for (const auto& f : cmd.flags) {
      if (f.kind == Kind::Bool) {
        sub->add_flag(f.flag, c.switches[f.key], f.help);
      } else {
        sub->add_option(f.flag, c.values[f.key], f.help);
      }
    }
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  for (const auto& cmd : cmds) {
    if (!app.got_subcommand(cmd.name)) continue;
    try {
      RunConfig cfg = resolve(cmd.name, cmd, common[cmd.name]);
      if (cfg.threads > 0) set_default_threads(cfg.threads);
      fs::create_directories(cfg.out_dir);
      write_json(fs::path(cfg.out_dir) / "config.json", json(cfg));
      cli::Context ctx(cfg);
      cmd.run(ctx);
      int failures = 0;
      for (const auto& c : ctx.checks()) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        failures += !c.pass;
      }
      if (failures > 0) {
        std::cerr << failures << " check(s) failed\n";
        return 1;
      }
      return 0;
    } catch (const stripes::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    }
  }
  return 2;
}
