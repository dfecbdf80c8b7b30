#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stripes/decomposition.hpp"
#include "stripes/energy.hpp"
#include "stripes/field.hpp"
#include "stripes/flow.hpp"
#include "stripes/kernel.hpp"
#include "stripes/model.hpp"
#include "stripes/onedim.hpp"

namespace stripes {

inline constexpr const char* kFormatVersion = "stripes-lab/1";

using json = nlohmann::json;

// Non-finite doubles become the strings "inf", "-inf", "nan".
json number(double x);
double number_from(const json& j);

struct RunConfig {
  ModelParams params;
  std::string command;
  json options = json::object();     // command-specific
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  json tolerances = json::object();  // overrides keyed by name
  int threads = 0;
};
void to_json(json& j, const RunConfig& c);
void from_json(const json& j, RunConfig& c);

// Adds "format_version" to the object and writes it with indentation.
void write_json(const std::filesystem::path& path, json j);
json read_json(const std::filesystem::path& path);

// First line "# format=<version> config=<compact json>", then the header row.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns,
            const json& config);
  void row(const std::vector<double>& values);

 private:
  std::ofstream out_;
  std::size_t columns_ = 0;
};

struct CsvTable {
  json config;
  std::string version;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

// Header line {"dims","n","L","params"?,"version"} then n^dims little-endian doubles.
void write_pfd(const std::filesystem::path& path, const PeriodicField& u, const ModelParams* params = nullptr,
               const json* config = nullptr);
struct PfdFile {
  PeriodicField field;
  std::optional<ModelParams> params;
  std::string version;
  json config;
};
PfdFile read_pfd(const std::filesystem::path& path);

// x,g,gamma with gamma = inf allowed.
void write_profile_csv(const std::filesystem::path& path, const Profile1D& g, const json& config);
void write_profile_csv(const std::filesystem::path& path, const ReflectedProfile& p, const json& config);
ReflectedProfile read_profile_csv(const std::filesystem::path& path);

json to_json_value(const KernelMoments& m);
json to_json_value(const EnergyBreakdown& e);
json to_json_value(const DecompositionReport& r);
json to_json_value(const PeriodSearchResult& r);
json to_json_value(const ELDiagnostics& d);
json to_json_value(const GammaStudyReport& r);
json to_json_value(const RPCheck& r);
json to_json_value(const ChessboardCheck& r);
json to_json_value(const StripeMetrics& m);
json to_json_value(const ExperimentReport& r);

}  // namespace stripes
