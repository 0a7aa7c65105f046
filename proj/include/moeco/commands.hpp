#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "moeco/features.hpp"
#include "moeco/scheduler.hpp"

namespace moeco {

// Everything a subcommand needs; paths left empty fall back to the standard
// layout under `out`: workload/, registry.json, traces/, metrics.csv, compare.csv.
struct RunConfig {
  std::filesystem::path out = "run";
  std::filesystem::path spec;      // gen: optional workload spec
  std::filesystem::path workload;  // default out/workload
  std::filesystem::path registry;  // default out/registry.json
  std::filesystem::path task;      // predict: task file
  std::vector<Policy> policies{Policy::MoE};
  std::vector<std::uint64_t> seeds{42};
  std::optional<double> threshold;  // train default 1.0; elsewhere overrides the registry's
  ScalingMode scaling = ScalingMode::MinMax;
  double headroom = 0.0;
  double kappa = 4.0;
  double interference_rate = 0.05;

  std::filesystem::path workload_dir() const;
  std::filesystem::path registry_path() const;
};

// Each command writes progress text to `log` and returns normally on success;
// failures surface as moeco::Error.
void cmd_gen(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_predict(const RunConfig& cfg, std::ostream& out);
void cmd_simulate(const RunConfig& cfg, std::ostream& log);
void cmd_compare(const RunConfig& cfg, std::ostream& out);

std::filesystem::path trace_path(const std::filesystem::path& out, Policy policy,
                                 std::uint64_t seed);

}  // namespace moeco
