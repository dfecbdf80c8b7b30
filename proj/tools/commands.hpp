#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stripes/io.hpp"

namespace stripes::cli {

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

class Context {
 public:
  explicit Context(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const ModelParams& params() const { return cfg_.params; }
  json config_json() const;
  std::filesystem::path out(const std::string& file) const;

  template <class T>
  T opt(const std::string& key, T fallback) const {
    return cfg_.options.contains(key) ? cfg_.options.at(key).get<T>() : fallback;
  }
  bool has(const std::string& key) const { return cfg_.options.contains(key); }
  double tol(const std::string& key, double fallback) const;
  std::vector<double> list(const std::string& key, std::vector<double> fallback) const;

  void check(const std::string& name, bool pass, const std::string& detail);
  const std::vector<Check>& checks() const { return checks_; }
  // Writes the report with the resolved config and check table embedded.
  void report(const std::string& file, json body) const;

 private:
  RunConfig cfg_;
  std::vector<Check> checks_;
};

void kernel_moments(Context& ctx);
void optimal_period(Context& ctx);
void minimize_1d(Context& ctx);
void minimize_2d(Context& ctx);
void verify_decomposition(Context& ctx);
void verify_el(Context& ctx);
void gamma_study(Context& ctx);
void rp_check(Context& ctx);

}  // namespace stripes::cli
