#include "moeco/workload.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "moeco/error.hpp"
#include "moeco/rng.hpp"

namespace moeco {

using nlohmann::json;

const std::vector<std::string>& default_feature_names() {
  static const std::vector<std::string> names{
      "L1_TCM", "L1_DCM", "vcache", "L1_STM", "bo",     "L2_TCM", "L3_TCM", "cs",
      "FLOPs",  "in",     "L2_DCM", "L2_LDM", "L1_ICM", "swpd",   "L2_STM", "IPC",
      "L1_LDM", "L2_ICM", "ID",     "WA",     "US",     "SY"};
  return names;
}

std::string random_checksum(std::uint64_t seed, std::string_view stream, std::uint64_t index) {
  const std::uint64_t hi = derive_seed(seed, stream, 2 * index);
  const std::uint64_t lo = derive_seed(seed, stream, 2 * index + 1);
  char buf[33];
  std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(hi),
                static_cast<unsigned long long>(lo));
  return buf;
}

void validate(const WorkloadSpec& s) {
  auto fail = [](const std::string& m) { throw Error(ErrorCode::SpecError, m); };
  if (s.tasks == 0) fail("workload needs at least one task");
  if (s.training_programs < 2) fail("training corpus needs at least two programs");
  double mix = 0.0;
  for (double p : s.family_mix) {
    if (p < 0.0) fail("family probabilities must be non-negative");
    mix += p;
  }
  if (std::abs(mix - 1.0) > 1e-9) fail("family probabilities must sum to 1");
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& c = s.coefficients[i];
    if (!(c.m_lo <= c.m_hi) || !(c.b_lo <= c.b_hi)) fail("coefficient ranges must be ordered");
    if (kAllFamilies[i] != Family::NapierianLog && !(c.m_lo > 0.0)) {
      fail(to_string(kAllFamilies[i]) + " amplitude must be positive");
    }
    if (!(c.b_lo > 0.0)) fail("shape coefficients must be positive");
  }
  if (!(s.input_min_gb > 0.0) || !(s.input_min_gb <= s.input_max_gb)) fail("bad input-size range");
  if (!(s.cpu_min > 0.0) || !(s.cpu_min <= s.cpu_max) || s.cpu_max > 1.0) {
    fail("cpu load range must lie in (0, 1]");
  }
  if (!(s.runtime_min_s > 0.0) || !(s.runtime_min_s <= s.runtime_max_s)) fail("bad runtime range");
  if (s.mean_interarrival_s < 0.0) fail("mean inter-arrival time must be non-negative");
  if (!(s.max_demand_gb > 0.0)) fail("max demand must be positive");
  if (s.latent_dim < 1) fail("latent dimension must be at least 1");
  if (s.spread < 0.0) fail("spread must be non-negative");
  if (s.noise < 0.0) fail("noise must be non-negative");
  if (s.known_program_fraction < 0.0 || s.known_program_fraction > 1.0) {
    fail("known-program fraction must lie in [0, 1]");
  }
  if (s.curve_sizes_gb.size() < 3) fail("training curves need at least 3 sizes");
  for (double x : s.curve_sizes_gb) {
    if (!(x > 0.0)) fail("curve sizes must be positive");
  }
  if (s.cluster.nodes < 1 || s.cluster.cores < 1 || !(s.cluster.memory_gb > 0.0)) {
    fail("cluster needs at least one node with memory and cores");
  }
}

namespace {

double log_uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

double uniform(Rng& rng, double lo, double hi) {
  if (lo == hi) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Fixed geometry shared by every program of a workload.
struct FeatureSpace {
  std::vector<std::vector<double>> centroids;  // per family, latent
  std::vector<std::vector<double>> mixing;     // per raw feature, unit latent direction
  std::vector<double> scales;                  // per raw feature
};

constexpr double kFeatureOffset = 2.0;

FeatureSpace make_feature_space(const WorkloadSpec& spec, std::size_t dim) {
  Rng rng = make_stream(spec.seed, "features.geometry");
  std::normal_distribution<double> normal;
  FeatureSpace fs;
  const std::size_t latent = spec.latent_dim;
  // Families sit on scaled unit axes so every pair of centroids is one unit apart.
  for (std::size_t f = 0; f < 3; ++f) {
    std::vector<double> c(latent, 0.0);
    if (latent >= 3) {
      c[f] = 1.0 / std::sqrt(2.0);
    } else if (latent == 2) {
      const double tri[3][2] = {{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}};
      c = {tri[f][0], tri[f][1]};
    } else {
      c[0] = static_cast<double>(f);
    }
    fs.centroids.push_back(c);
  }
  for (std::size_t d = 0; d < dim; ++d) {
    std::vector<double> a(latent);
    double norm = 0.0;
    for (auto& x : a) {
      x = normal(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (auto& x : a) x /= norm;
    fs.mixing.push_back(a);
    fs.scales.push_back(log_uniform(rng, 1e-3, 1e6));
  }
  return fs;
}

MemoryFunction draw_function(const WorkloadSpec& spec, Rng& rng) {
  std::discrete_distribution<std::size_t> pick(spec.family_mix.begin(), spec.family_mix.end());
  const std::size_t f = pick(rng);
  const auto& r = spec.coefficients[f];
  return {kAllFamilies[f], uniform(rng, r.m_lo, r.m_hi), uniform(rng, r.b_lo, r.b_hi)};
}

std::vector<double> draw_features(const WorkloadSpec& spec, const FeatureSpace& fs, Family family,
                                  Rng& rng) {
  std::normal_distribution<double> normal;
  const auto& centroid = fs.centroids[static_cast<std::size_t>(family)];
  std::vector<double> z = centroid;
  const double per_dim = spec.spread / std::sqrt(static_cast<double>(spec.latent_dim));
  for (auto& x : z) x += per_dim * normal(rng);
  std::vector<double> raw(fs.mixing.size());
  for (std::size_t d = 0; d < raw.size(); ++d) {
    double dot = 0.0;
    for (std::size_t l = 0; l < z.size(); ++l) dot += fs.mixing[d][l] * z[l];
    raw[d] = fs.scales[d] * (kFeatureOffset + dot);
  }
  return raw;
}

Program draw_program(const WorkloadSpec& spec, const FeatureSpace& fs, std::string_view stream,
                     std::uint64_t index, const std::string& prefix) {
  Rng rng = make_stream(spec.seed, stream, index);
  Program p;
  p.ground_truth = draw_function(spec, rng);
  p.name = prefix + "-" + std::to_string(index) + "-" + to_string(p.ground_truth.family);
  p.checksum = random_checksum(spec.seed, std::string(stream) + ".checksum", index);
  p.features = draw_features(spec, fs, p.ground_truth.family, rng);
  p.cpu_load = uniform(rng, spec.cpu_min, spec.cpu_max);
  return p;
}

double trim_input(const MemoryFunction& f, double input, double max_demand) {
  if (eval(f, input) <= max_demand) return input;
  try {
    return inverse(f, max_demand);
  } catch (const Error&) {
    return input;
  }
}

}  // namespace

CorpusEntry make_corpus_entry(const Program& program, const FeatureSchema& schema,
                              const WorkloadSpec& spec, std::uint64_t index) {
  Rng rng = make_stream(spec.seed, "training.observation", index);
  std::normal_distribution<double> normal;
  CorpusEntry e;
  e.name = program.name;
  e.checksum = program.checksum;
  std::vector<double> observed = program.features;
  for (auto& v : observed) v *= 1.0 + spec.noise * normal(rng);
  e.features = FeatureVector(schema, std::move(observed));
  for (double x : spec.curve_sizes_gb) {
    e.curve.push_back({x, eval(program.ground_truth, x) * (1.0 + spec.noise * normal(rng))});
  }
  e.cpu_load = program.cpu_load;
  return e;
}

Task make_task(const Program& program, std::uint64_t id, double arrival, double input_gb,
               double base_runtime) {
  Task t;
  t.submission = {id, program.name, program.checksum, input_gb, arrival};
  t.ground_truth = program.ground_truth;
  t.cpu_load = program.cpu_load;
  t.base_runtime = base_runtime;
  t.latent_features = program.features;
  return t;
}

Workload generate_workload(const WorkloadSpec& spec) {
  validate(spec);
  Workload w;
  w.spec = spec;
  w.schema.names = spec.feature_names.empty() ? default_feature_names() : spec.feature_names;
  const FeatureSpace fs = make_feature_space(spec, w.schema.dimension());

  for (std::size_t i = 0; i < spec.training_programs; ++i) {
    w.training_programs.push_back(draw_program(spec, fs, "training", i, "train"));
    w.corpus.push_back(make_corpus_entry(w.training_programs.back(), w.schema, spec, i));
  }
  const std::size_t apps = spec.applications > 0 ? spec.applications
                                                 : std::max<std::size_t>(1, spec.tasks / 2);
  for (std::size_t i = 0; i < apps; ++i) {
    w.applications.push_back(draw_program(spec, fs, "application", i, "app"));
  }

  Rng rng = make_stream(spec.seed, "stream");
  std::uniform_real_distribution<double> unit;
  double clock = 0.0;
  for (std::size_t i = 0; i < spec.tasks; ++i) {
    if (spec.mean_interarrival_s > 0.0 && i > 0) {
      clock += std::exponential_distribution<double>(1.0 / spec.mean_interarrival_s)(rng);
    }
    const bool known = unit(rng) < spec.known_program_fraction;
    const auto& pool = known ? w.training_programs : w.applications;
    const Program& p = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    const double input =
        trim_input(p.ground_truth, log_uniform(rng, spec.input_min_gb, spec.input_max_gb),
                   spec.max_demand_gb);
    const double runtime = log_uniform(rng, spec.runtime_min_s, spec.runtime_max_s);
    w.tasks.push_back(make_task(p, i, clock, input, runtime));
  }
  return w;
}

// ---------------------------------------------------------------------------
// JSON persistence

namespace {

json function_json(const MemoryFunction& f) {
  return {{"family", to_string(f.family)}, {"m", f.m}, {"b", f.b}};
}

MemoryFunction function_from(const json& j) {
  return {family_from_string(j.at("family").get<std::string>()), j.at("m").get<double>(),
          j.at("b").get<double>()};
}

json task_json(const Task& t) {
  return {{"id", t.submission.id},
          {"name", t.submission.name},
          {"checksum", t.submission.checksum},
          {"arrival", t.submission.arrival},
          {"input_gb", t.submission.input_gb},
          {"ground_truth", function_json(t.ground_truth)},
          {"cpu_load", t.cpu_load},
          {"base_runtime", t.base_runtime},
          {"latent_features", t.latent_features}};
}

Task task_from(const json& j) {
  Task t;
  t.submission.id = j.at("id").get<std::uint64_t>();
  t.submission.name = j.at("name").get<std::string>();
  t.submission.checksum = j.at("checksum").get<std::string>();
  t.submission.arrival = j.at("arrival").get<double>();
  t.submission.input_gb = j.at("input_gb").get<double>();
  t.ground_truth = function_from(j.at("ground_truth"));
  t.cpu_load = j.at("cpu_load").get<double>();
  t.base_runtime = j.at("base_runtime").get<double>();
  t.latent_features = j.at("latent_features").get<std::vector<double>>();
  if (!(t.submission.input_gb > 0.0) || !(t.base_runtime > 0.0) || !(t.cpu_load > 0.0) ||
      t.cpu_load > 1.0) {
    throw Error(ErrorCode::ParseError, "task " + std::to_string(t.submission.id) +
                                           " violates input/runtime/cpu bounds");
  }
  return t;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::UsageError, "cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorCode::UsageError, "cannot write '" + p.string() + "'");
  out << text;
}

template <typename F>
auto parsing(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, what + ": " + e.what());
  }
}

}  // namespace

std::string spec_to_json_text(const WorkloadSpec& s) {
  json coeffs;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& c = s.coefficients[i];
    coeffs[to_string(kAllFamilies[i])] = {{"m", {c.m_lo, c.m_hi}}, {"b", {c.b_lo, c.b_hi}}};
  }
  json mix;
  for (std::size_t i = 0; i < 3; ++i) mix[to_string(kAllFamilies[i])] = s.family_mix[i];
  json doc{{"seed", s.seed},
           {"tasks", s.tasks},
           {"training_programs", s.training_programs},
           {"applications", s.applications},
           {"known_program_fraction", s.known_program_fraction},
           {"family_mix", mix},
           {"coefficients", coeffs},
           {"input_gb", {s.input_min_gb, s.input_max_gb}},
           {"cpu_load", {s.cpu_min, s.cpu_max}},
           {"runtime_s", {s.runtime_min_s, s.runtime_max_s}},
           {"mean_interarrival_s", s.mean_interarrival_s},
           {"max_demand_gb", s.max_demand_gb},
           {"feature_names", s.feature_names},
           {"latent_dim", s.latent_dim},
           {"spread", s.spread},
           {"noise", s.noise},
           {"curve_sizes_gb", s.curve_sizes_gb},
           {"cluster",
            {{"nodes", s.cluster.nodes}, {"memory_gb", s.cluster.memory_gb},
             {"cores", s.cluster.cores}}}};
  return doc.dump(2) + "\n";
}

WorkloadSpec spec_from_json_text(std::string_view text) {
  return parsing("workload spec", [&] {
    const json j = json::parse(text.begin(), text.end());
    WorkloadSpec s;
    read_opt(j, "seed", s.seed);
    read_opt(j, "tasks", s.tasks);
    read_opt(j, "training_programs", s.training_programs);
    read_opt(j, "applications", s.applications);
    read_opt(j, "known_program_fraction", s.known_program_fraction);
    if (j.contains("family_mix")) {
      for (std::size_t i = 0; i < 3; ++i) {
        s.family_mix[i] = j["family_mix"].value(to_string(kAllFamilies[i]), 0.0);
      }
    }
    if (j.contains("coefficients")) {
      for (std::size_t i = 0; i < 3; ++i) {
        const auto key = to_string(kAllFamilies[i]);
        if (!j["coefficients"].contains(key)) continue;
        const auto& c = j["coefficients"][key];
        auto m = c.at("m").get<std::array<double, 2>>();
        auto b = c.at("b").get<std::array<double, 2>>();
        s.coefficients[i] = {m[0], m[1], b[0], b[1]};
      }
    }
    auto pair = [&](const char* key, double& lo, double& hi) {
      if (!j.contains(key)) return;
      auto v = j.at(key).get<std::array<double, 2>>();
      lo = v[0];
      hi = v[1];
    };
    pair("input_gb", s.input_min_gb, s.input_max_gb);
    pair("cpu_load", s.cpu_min, s.cpu_max);
    pair("runtime_s", s.runtime_min_s, s.runtime_max_s);
    read_opt(j, "mean_interarrival_s", s.mean_interarrival_s);
    read_opt(j, "max_demand_gb", s.max_demand_gb);
    read_opt(j, "feature_names", s.feature_names);
    read_opt(j, "latent_dim", s.latent_dim);
    read_opt(j, "spread", s.spread);
    read_opt(j, "noise", s.noise);
    read_opt(j, "curve_sizes_gb", s.curve_sizes_gb);
    if (j.contains("cluster")) {
      const auto& c = j["cluster"];
      read_opt(c, "nodes", s.cluster.nodes);
      read_opt(c, "memory_gb", s.cluster.memory_gb);
      read_opt(c, "cores", s.cluster.cores);
    }
    validate(s);
    return s;
  });
}

std::string task_to_json_text(const Task& task) { return task_json(task).dump(2) + "\n"; }

Task task_from_json_text(std::string_view text) {
  return parsing("task", [&] { return task_from(json::parse(text.begin(), text.end())); });
}

void save_workload(const Workload& w, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "spec.json", spec_to_json_text(w.spec));

  json corpus{{"schema", w.schema.names}, {"programs", json::array()}};
  for (std::size_t i = 0; i < w.corpus.size(); ++i) {
    const auto& e = w.corpus[i];
    json pts = json::array();
    for (const auto& p : e.curve) pts.push_back({p.x, p.y});
    json row{{"name", e.name},
             {"checksum", e.checksum},
             {"features", e.features.values()},
             {"curve", pts},
             {"cpu_load", e.cpu_load}};
    if (i < w.training_programs.size()) {
      row["ground_truth"] = function_json(w.training_programs[i].ground_truth);
    }
    corpus["programs"].push_back(row);
  }
  write_file(dir / "corpus.json", corpus.dump(2) + "\n");

  json tasks = json::array();
  for (const auto& t : w.tasks) tasks.push_back(task_json(t));
  write_file(dir / "tasks.json", tasks.dump(2) + "\n");
}

Workload load_workload(const std::filesystem::path& dir) {
  Workload w;
  w.spec = spec_from_json_text(read_file(dir / "spec.json"));
  parsing("corpus.json", [&] {
    const json corpus = json::parse(read_file(dir / "corpus.json"));
    w.schema.names = corpus.at("schema").get<std::vector<std::string>>();
    for (const auto& row : corpus.at("programs")) {
      CorpusEntry e;
      e.name = row.at("name").get<std::string>();
      e.checksum = row.at("checksum").get<std::string>();
      e.features = FeatureVector(w.schema, row.at("features").get<std::vector<double>>());
      for (const auto& p : row.at("curve")) e.curve.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      e.cpu_load = row.value("cpu_load", 0.0);
      if (row.contains("ground_truth")) {
        Program p;
        p.name = e.name;
        p.checksum = e.checksum;
        p.ground_truth = function_from(row["ground_truth"]);
        p.features = e.features.values();
        p.cpu_load = e.cpu_load;
        w.training_programs.push_back(std::move(p));
      }
      w.corpus.push_back(std::move(e));
    }
    return 0;
  });
  parsing("tasks.json", [&] {
    const json tasks = json::parse(read_file(dir / "tasks.json"));
    for (const auto& t : tasks) w.tasks.push_back(task_from(t));
    return 0;
  });
  return w;
}

}  // namespace moeco
