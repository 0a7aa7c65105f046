#include "moeco/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "moeco/error.hpp"
#include "moeco/metrics.hpp"
#include "moeco/predictor.hpp"
#include "moeco/profiler.hpp"
#include "moeco/registry.hpp"
#include "moeco/simulator.hpp"
#include "moeco/workload.hpp"

namespace moeco {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::UsageError, "cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::UsageError, "cannot write '" + p.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::UsageError, "failed writing '" + p.string() + "'");
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Registry load_registry(const RunConfig& cfg) {
  Registry r = load(cfg.registry_path());
  if (cfg.threshold) r = r.with_threshold(*cfg.threshold);
  return r;
}

SimConfig sim_config(const RunConfig& cfg) {
  SimConfig sc;
  sc.kappa = cfg.kappa;
  sc.interference_rate = cfg.interference_rate;
  sc.predictor.headroom = cfg.headroom;
  return sc;
}

void check_knobs(const RunConfig& cfg) {
  if (!(cfg.headroom >= 0.0)) throw Error(ErrorCode::UsageError, "--headroom must be >= 0");
  if (!(cfg.kappa >= 0.0)) throw Error(ErrorCode::UsageError, "--kappa must be >= 0");
  if (!(cfg.interference_rate >= 0.0)) {
    throw Error(ErrorCode::UsageError, "--interference must be >= 0");
  }
  if (cfg.threshold && !(*cfg.threshold > 0.0)) {
    throw Error(ErrorCode::UsageError, "--threshold must be > 0");
  }
}

// Non-MoE policies never consult the registry, so it is optional for them.
Registry registry_for(const RunConfig& cfg, std::span<const Policy> policies) {
  const bool needed = std::find(policies.begin(), policies.end(), Policy::MoE) != policies.end();
  if (!needed && !fs::exists(cfg.registry_path())) return Registry{};
  return load_registry(cfg);
}

SimTrace simulate_one(const Workload& w, const Registry& registry, Policy policy,
                      std::uint64_t seed, const SimConfig& sc) {
  return run(w.spec.cluster, w.tasks, policy, registry, w.schema, seed, sc);
}

}  // namespace

fs::path RunConfig::workload_dir() const { return workload.empty() ? out / "workload" : workload; }

fs::path RunConfig::registry_path() const {
  return registry.empty() ? out / "registry.json" : registry;
}

fs::path trace_path(const fs::path& out, Policy policy, std::uint64_t seed) {
  return out / "traces" / (to_string(policy) + "-" + std::to_string(seed) + ".events");
}

void cmd_gen(const RunConfig& cfg, std::ostream& log) {
  WorkloadSpec spec = cfg.spec.empty() ? WorkloadSpec{} : spec_from_json_text(read_text(cfg.spec));
  spec.seed = cfg.seeds.front();
  const Workload w = generate_workload(spec);
  save_workload(w, cfg.workload_dir());
  log << "wrote " << w.corpus.size() << " training programs and " << w.tasks.size()
      << " tasks to " << cfg.workload_dir().string() << '\n';
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
  check_knobs(cfg);
  const Workload w = load_workload(cfg.workload_dir());
  TrainOptions opts;
  opts.scaling = cfg.scaling;
  opts.knn_threshold = cfg.threshold.value_or(1.0);
  const Registry r = Registry::train(w.schema, w.corpus, opts);
  write_text(cfg.registry_path(), to_json_text(r));
  log << "trained " << r.records().size() << " records, " << r.pca().k
      << " principal components; wrote " << cfg.registry_path().string() << '\n';
}

void cmd_predict(const RunConfig& cfg, std::ostream& out) {
  check_knobs(cfg);
  if (cfg.task.empty()) throw Error(ErrorCode::UsageError, "predict needs --task");
  const Registry registry = load_registry(cfg);
  Task task;
  try {
    task = task_from_json_text(read_text(cfg.task));
  } catch (const Error& e) {
    throw Error(e.code(), cfg.task.string() + ": " + e.message());
  }
  const std::uint64_t seed = cfg.seeds.front();
  const SimulatedProfiler profiler(registry.schema(), std::span<const Task>(&task, 1),
                                   sim_config(cfg).profiler_noise, seed);
  PredictorConfig pc;
  pc.headroom = cfg.headroom;
  const PredictOutcome res = predict(task.submission, registry, profiler, pc);
  const Prediction& p = res.prediction;

  nlohmann::json j{{"task", p.task_id},
                   {"allocation_gb", p.allocation_gb},
                   {"function", {{"family", to_string(p.function.family)},
                                 {"m", p.function.m},
                                 {"b", p.function.b}}},
                   {"source", to_string(p.source)},
                   {"cpu_load", p.cpu_load},
                   {"profiling_cost_s", p.profiling_cost}};
  if (p.source != PredictionSource::NewFunction) {
    j["expert"] = {{"id", p.expert_id}, {"distance", p.expert_distance}};
  }
  out << j.dump(2) << '\n';
}

void cmd_simulate(const RunConfig& cfg, std::ostream& log) {
  check_knobs(cfg);
  const Workload w = load_workload(cfg.workload_dir());
  const Registry registry = registry_for(cfg, cfg.policies);
  const SimConfig sc = sim_config(cfg);

  // metrics.csv accumulates one row per (policy, seed); rerunning a cell
  // replaces its row.
  const fs::path metrics_path = cfg.out / "metrics.csv";
  std::map<std::pair<std::string, std::uint64_t>, std::string> rows;
  if (fs::exists(metrics_path)) {
    std::istringstream in(read_text(metrics_path));
    std::string line;
    std::getline(in, line);
    if (line != csv_header()) {
      throw Error(ErrorCode::ParseError, metrics_path.string() + ": unexpected header");
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos) {
        throw Error(ErrorCode::ParseError, metrics_path.string() + ": malformed row");
      }
      rows[{line.substr(0, c1), std::stoull(line.substr(c1 + 1, c2 - c1 - 1))}] = line;
    }
  }

  for (Policy policy : cfg.policies) {
    for (std::uint64_t seed : cfg.seeds) {
      const SimTrace trace = simulate_one(w, registry, policy, seed, sc);
      const MetricsReport rep = report(trace);
      write_text(trace_path(cfg.out, policy, seed), trace_to_text(trace));
      std::ostringstream js;
      write_report_json(rep, js);
      auto json_path = trace_path(cfg.out, policy, seed);
      json_path.replace_extension(".metrics.json");
      write_text(json_path, js.str());
      rows[{rep.policy, seed}] = csv_row(rep);
      log << rep.policy << " seed " << seed << ": STP " << fixed(rep.stp, 3) << ", ANTT "
          << fixed(rep.antt, 3) << ", " << trace.paging_events << " paging, " << trace.oom_events
          << " oom\n";
    }
  }

  std::string text = csv_header() + "\n";
  for (const auto& [key, line] : rows) text += line + "\n";
  write_text(metrics_path, text);
}

void cmd_compare(const RunConfig& cfg, std::ostream& out) {
  check_knobs(cfg);
  std::vector<Policy> policies{Policy::Isolation};
  for (Policy p : cfg.policies) {
    if (std::find(policies.begin(), policies.end(), p) == policies.end()) policies.push_back(p);
  }
  const Workload w = load_workload(cfg.workload_dir());
  const Registry registry = registry_for(cfg, policies);
  const SimConfig sc = sim_config(cfg);

  std::vector<Summary> summaries;
  for (Policy policy : policies) {
    std::vector<MetricsReport> reps;
    for (std::uint64_t seed : cfg.seeds) {
      reps.push_back(report(simulate_one(w, registry, policy, seed, sc)));
    }
    summaries.push_back(aggregate(reps));
  }

  const Summary& iso = summaries.front();
  std::string csv = "policy,runs,stp,antt,normalized_stp,antt_reduction_pct\n";
  std::ostringstream table;
  table << "policy      runs      STP     ANTT  norm.STP  ANTT red.\n";
  for (const Summary& s : summaries) {
    const double norm_stp = s.stp_geomean / iso.stp_geomean;
    const double reduction = 100.0 * (1.0 - s.antt_geomean / iso.antt_geomean);
    csv += s.policy + "," + std::to_string(s.reports) + "," + fixed(s.stp_geomean, 6) + "," +
           fixed(s.antt_geomean, 6) + "," + fixed(norm_stp, 6) + "," + fixed(reduction, 4) + "\n";
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %5zu %8.3f %8.3f %9.3f %9.1f%%\n", s.policy.c_str(),
                  s.reports, s.stp_geomean, s.antt_geomean, norm_stp, reduction);
    table << line;
  }
  write_text(cfg.out / "compare.csv", csv);
  out << table.str();
}

}  // namespace moeco
