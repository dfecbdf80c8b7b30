#include "stripes/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>

#include "stripes/errors.hpp"

namespace stripes {

static_assert(std::endian::native == std::endian::little, ".pfd payloads are written in host order");

json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

double number_from(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  throw FormatError("expected a number, got " + j.dump());
}

namespace {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw FormatError("bad number '" + s + "'");
  return v;
}

json vec(std::span<const double> v) {
  json a = json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

}  // namespace

void to_json(json& j, const RunConfig& c) {
  j = json{{"params", c.params}, {"command", c.command}, {"options", c.options},
           {"seed", c.seed},     {"out_dir", c.out_dir}, {"tolerances", c.tolerances},
           {"threads", c.threads}};
}

void from_json(const json& j, RunConfig& c) {
  c = RunConfig{};
  if (j.contains("params")) c.params = j.at("params").get<ModelParams>();
  if (j.contains("command")) c.command = j.at("command").get<std::string>();
  if (j.contains("options")) c.options = j.at("options");
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("tolerances")) c.tolerances = j.at("tolerances");
  if (j.contains("threads")) c.threads = j.at("threads").get<int>();
}

void write_json(const std::filesystem::path& path, json j) {
  j["format_version"] = kFormatVersion;
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns,
                     const json& config)
    : out_(path), columns_(columns.size()) {
  if (!out_) throw FormatError("cannot write " + path.string());
  out_ << "# format=" << kFormatVersion << " config=" << config.dump() << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw FormatError("CSV row has the wrong number of columns");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
  out_ << '\n';
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# format=", 0) != 0) throw FormatError("missing CSV preamble");
  const auto cpos = line.find(" config=");
  if (cpos == std::string::npos) throw FormatError("CSV preamble lacks config");
  t.version = line.substr(9, cpos - 9);
  t.config = json::parse(line.substr(cpos + 8));
  if (!std::getline(in, line)) throw FormatError("missing CSV header");
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) t.columns.push_back(col);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell));
    if (row.size() != t.columns.size()) throw FormatError("ragged CSV row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_pfd(const std::filesystem::path& path, const PeriodicField& u, const ModelParams* params,
               const json* config) {
  json h{{"dims", u.dims()}, {"n", u.n()}, {"L", u.L()}, {"version", kFormatVersion}};
  if (params) h["params"] = *params;
  if (config) h["config"] = *config;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << h.dump() << '\n';
  out.write(reinterpret_cast<const char*>(u.values().data()),
            static_cast<std::streamsize>(u.size() * sizeof(double)));
}

PfdFile read_pfd(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty .pfd file");
  json h;
  try {
    h = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad .pfd header: ") + e.what());
  }
  const int dims = h.at("dims").get<int>();
  const int n = h.at("n").get<int>();
  const double L = h.at("L").get<double>();
  std::size_t N = 1;
  for (int k = 0; k < dims; ++k) N *= n;
  std::vector<double> v(N);
  in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(N * sizeof(double)));
  if (in.gcount() != static_cast<std::streamsize>(N * sizeof(double))) throw FormatError("truncated .pfd payload");
  PfdFile f{PeriodicField(dims, n, L, std::move(v)), std::nullopt, h.value("version", ""),
            h.value("config", json::object())};
  if (h.contains("params")) f.params = h.at("params").get<ModelParams>();
  return f;
}

void write_profile_csv(const std::filesystem::path& path, const Profile1D& g, const json& config) {
  CsvWriter w(path, {"x", "g", "gamma"}, config);
  for (int k = 0; k < g.n(); ++k) w.row({k * g.spacing(), g.g[k], g.gamma_at(k)});
}

void write_profile_csv(const std::filesystem::path& path, const ReflectedProfile& p, const json& config) {
  json c = config;
  c["half_period"] = p.h;
  CsvWriter w(path, {"x", "g", "gamma"}, c);
  // gamma of the cell to the right of each node; the last node repeats the last cell
  for (int k = 0; k <= p.n(); ++k) {
    const double gm = p.has_gamma() ? p.gamma[std::min(k, p.n() - 1)] : 1.0;
    w.row({k * p.spacing(), p.g[k], gm});
  }
}

ReflectedProfile read_profile_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.columns != std::vector<std::string>{"x", "g", "gamma"}) throw FormatError("expected columns x,g,gamma");
  if (t.rows.size() < 3) throw FormatError("profile too short");
  const double h = t.config.contains("half_period") ? t.config.at("half_period").get<double>() : t.rows.back()[0];
  std::vector<double> g, gamma;
  bool any_gamma = false;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    g.push_back(t.rows[i][1]);
    if (i + 1 < t.rows.size()) {
      gamma.push_back(t.rows[i][2]);
      if (t.rows[i][2] != 1.0) any_gamma = true;
    }
  }
  if (!any_gamma) gamma.clear();
  return reflect_periodic(h, std::move(g), std::move(gamma));
}

json to_json_value(const KernelMoments& m) {
  return json{{"mass", number(m.mass)},
              {"first_moment", number(m.first_moment)},
              {"c_tau", number(m.c_tau)},
              {"half_mass_marginal", number(m.half_mass_marginal)},
              {"marginal_constant", number(m.marginal_constant)}};
}

json to_json_value(const EnergyBreakdown& e) {
  return json{{"mm_raw", number(e.mm_raw)},       {"nonlocal_raw", number(e.nonlocal_raw)},
              {"mm_term", number(e.mm_term)},     {"nonlocal_term", number(e.nonlocal_term)},
              {"total", number(e.total)},         {"n", e.n},
              {"L", e.L},                         {"params", e.params}};
}

json to_json_value(const DecompositionReport& r) {
  json dirs = json::array();
  for (std::size_t i = 0; i < r.directions.size(); ++i) {
    const auto& t = r.directions[i];
    dirs.push_back(json{{"axis", i},
                        {"mbar", number(t.mbar)},
                        {"gbar", number(t.gbar)},
                        {"cross", number(t.cross)},
                        {"gbar_min_slice", number(t.gbar_min_slice)}});
  }
  return json{{"directions", dirs},
              {"wcal", number(r.wcal)},
              {"lower_bound", number(r.lower_bound)},
              {"lower_bound_unit", number(r.lower_bound_unit)},
              {"full_energy", number(r.full_energy)},
              {"slack", number(r.slack)},
              {"slack_unit", number(r.slack_unit)},
              {"delta_grad", number(r.delta_grad)},
              {"trunc_radius", number(r.trunc_radius)},
              {"kernel_tail_bound", number(r.kernel_tail_bound)}};
}

json to_json_value(const PeriodSearchResult& r) {
  json trace = json::array();
  for (const auto& [h, v] : r.trace) trace.push_back(json::array({h, number(v)}));
  return json{{"h_star", r.h_star},
              {"c_star", number(r.c_star)},
              {"h_lo", r.h_lo},
              {"h_hi", r.h_hi},
              {"n", r.best.profile.n()},
              {"inner_iterations", r.best.iterations},
              {"inner_converged", r.best.converged},
              {"inner_residual", number(r.best.residual)},
              {"trace", trace}};
}

json to_json_value(const ELDiagnostics& d) {
  return json{{"l2_residual", number(d.l2_residual)},
              {"max_residual", number(d.max_residual)},
              {"scale", number(d.scale)},
              {"obstacle_min_residual", number(d.obstacle_min_residual)},
              {"first_integral_gap_4", number(d.first_integral_gap_4)},
              {"first_integral_gap_2", number(d.first_integral_gap_2)},
              {"first_integral_scale", number(d.first_integral_scale)},
              {"gamma1_margin", number(d.gamma1_margin)},
              {"gamma2_violations", d.gamma2_violations},
              {"gamma3_violations", d.gamma3_violations},
              {"obstacle_found", d.obstacle.found},
              {"x1", d.obstacle.x1},
              {"x2", d.obstacle.x2}};
}

json to_json_value(const GammaStudyReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back(json{{"m", row.m},
                        {"value", number(row.value)},
                        {"sup_gamma_minus_one", number(row.sup_gamma_minus_one)},
                        {"cells_above", row.cells_above},
                        {"measure_above", row.measure_above},
                        {"margin", number(row.margin)},
                        {"converged", row.converged}});
  }
  return json{{"h", r.h},
              {"n", r.n},
              {"gamma_threshold", r.gamma_threshold},
              {"delta", r.delta},
              {"rows", rows},
              {"obstacle_found", r.obstacle.found},
              {"x1", r.obstacle.x1},
              {"x2", r.obstacle.x2},
              {"free_boundary_ok", r.free_boundary_ok}};
}

json to_json_value(const RPCheck& r) {
  return json{{"lhs", number(r.lhs)}, {"left", number(r.left)}, {"right", number(r.right)}, {"gap", number(r.gap)}};
}

json to_json_value(const ChessboardCheck& r) {
  return json{{"lhs", number(r.lhs)}, {"rhs", number(r.rhs)}, {"gap", number(r.gap)}, {"arc_energies", vec(r.arc_energies)}};
}

json to_json_value(const StripeMetrics& m) {
  return json{{"best_axis", m.best_axis},
              {"best_h", m.best_h},
              {"best_nu", m.best_nu},
              {"l1_to_best_stripes", number(m.l1_to_best_stripes)},
              {"fourier_anisotropy", number(m.fourier_anisotropy)},
              {"energy_gap_to_1d", number(m.energy_gap_to_1d)}};
}

json to_json_value(const ExperimentReport& r) {
  json runs = json::array();
  for (const auto& run : r.runs) {
    runs.push_back(json{{"seed", run.seed},
                        {"initial_energy", number(run.initial_energy)},
                        {"final_energy", number(run.final_energy)},
                        {"relative_gap", number(run.relative_gap)},
                        {"metrics", to_json_value(run.metrics)},
                        {"stripe_like", run.stripe_like},
                        {"success", run.success},
                        {"undercuts", run.undercuts},
                        {"monotone", run.monotone},
                        {"iterations", run.iterations},
                        {"converged", run.converged}});
  }
  return json{{"params", r.params},
              {"h_star", r.h_star},
              {"c_star", number(r.c_star)},
              {"benchmark", number(r.benchmark)},
              {"tol_disc", number(r.tol_disc)},
              {"commensurate", r.commensurate},
              {"exploratory", r.exploratory},
              {"k", r.options.k},
              {"n", r.options.n},
              {"n_seeds", r.options.n_seeds},
              {"base_seed", r.options.seed},
              {"anisotropy_threshold", r.options.anisotropy_threshold},
              {"gap_threshold", r.options.gap_threshold},
              {"runs", runs},
              {"successes", r.successes},
              {"success_fraction", r.success_fraction},
              {"undercut_count", r.undercut_count}};
}

}  // namespace stripes
