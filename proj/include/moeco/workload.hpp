#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "moeco/experts.hpp"
#include "moeco/features.hpp"
#include "moeco/predictor.hpp"
#include "moeco/registry.hpp"

namespace moeco {

struct ClusterConfig {
  std::size_t nodes = 4;
  double memory_gb = 64.0;
  int cores = 16;
};

struct CoefficientRange {
  double m_lo = 1.0, m_hi = 1.0;
  double b_lo = 1.0, b_hi = 1.0;
};

// Synthetic workload description. Program features come from a low-dimensional
// latent space: each family owns a centroid, programs scatter around it, and a
// fixed random mixing matrix maps latent points onto the raw counters.
struct WorkloadSpec {
  std::uint64_t seed = 42;
  std::size_t tasks = 20;
  std::size_t training_programs = 16;
  std::size_t applications = 0;  // distinct unseen programs in the stream; 0 = tasks / 2
  double known_program_fraction = 0.0;

  // Probability of each family, indexed like kAllFamilies.
  std::array<double, 3> family_mix{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::array<CoefficientRange, 3> coefficients{
      CoefficientRange{1.0, 3.0, 0.3, 0.7},    // power law
      CoefficientRange{6.0, 30.0, 0.02, 0.5},  // exponential
      CoefficientRange{6.0, 16.0, 0.5, 2.5},   // napierian log
  };

  double input_min_gb = 0.3;  // log-uniform input sizes
  double input_max_gb = 300.0;
  double cpu_min = 0.1;
  double cpu_max = 0.4;
  double runtime_min_s = 600.0;  // log-uniform isolated runtimes
  double runtime_max_s = 3600.0;
  double mean_interarrival_s = 0.0;  // 0 submits every task at t = 0
  double max_demand_gb = 48.0;       // input sizes are trimmed so demand stays below this

  std::vector<std::string> feature_names;  // empty = the 22 default counters
  std::size_t latent_dim = 5;
  double spread = 0.1;  // RMS distance from the family centroid, in centroid separations
  double noise = 0.02;  // relative measurement noise (features and footprints)
  std::vector<double> curve_sizes_gb{0.3, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0};

  ClusterConfig cluster;
};

const std::vector<std::string>& default_feature_names();

// One application with its hidden behaviour.
struct Program {
  std::string name;
  std::string checksum;
  MemoryFunction ground_truth;
  std::vector<double> features;  // noise-free raw counters
  double cpu_load = 0.0;
};

struct Task {
  TaskSubmission submission;
  MemoryFunction ground_truth;  // peak footprint vs input size
  double cpu_load = 0.0;
  double base_runtime = 0.0;  // isolated, all cores, full memory
  std::vector<double> latent_features;

  std::uint64_t id() const { return submission.id; }
  double required_gb() const { return eval(ground_truth, submission.input_gb); }
};

struct Workload {
  WorkloadSpec spec;
  FeatureSchema schema;
  std::vector<Program> training_programs;
  std::vector<CorpusEntry> corpus;
  std::vector<Program> applications;
  std::vector<Task> tasks;
};

void validate(const WorkloadSpec& spec);
Workload generate_workload(const WorkloadSpec& spec);

Task make_task(const Program& program, std::uint64_t id, double arrival, double input_gb,
               double base_runtime);

// A training-corpus row for `program`, with curve and feature noise drawn
// from stream `index` of the workload seed.
CorpusEntry make_corpus_entry(const Program& program, const FeatureSchema& schema,
                              const WorkloadSpec& spec, std::uint64_t index);

std::string random_checksum(std::uint64_t seed, std::string_view stream, std::uint64_t index);

// JSON persistence. The workload directory holds spec.json, corpus.json and tasks.json.
std::string spec_to_json_text(const WorkloadSpec& spec);
WorkloadSpec spec_from_json_text(std::string_view text);
std::string task_to_json_text(const Task& task);
Task task_from_json_text(std::string_view text);
void save_workload(const Workload& w, const std::filesystem::path& dir);
Workload load_workload(const std::filesystem::path& dir);

}  // namespace moeco
