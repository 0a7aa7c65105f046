#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "moeco/commands.hpp"
#include "moeco/error.hpp"

namespace {

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  using moeco::RunConfig;
  RunConfig cfg;
  std::vector<std::string> sim_policies{"moe"};
  std::vector<std::string> cmp_policies{"isolation", "simple", "moe", "oracle"};
  std::string scaling = "minmax";
  double threshold = 1.0;

  CLI::App app{"Memory-function prediction and co-location scheduling simulator"};
  app.require_subcommand(1);

  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", cfg.out, "Run directory")->capture_default_str();
  };
  auto add_seed = [&](CLI::App* sub, bool many) {
    auto* o = sub->add_option("--seed", cfg.seeds, many ? "Seeds (comma separated)" : "Seed");
    o->capture_default_str();
    if (many) {
      o->delimiter(',');
    } else {
      o->expected(1);
    }
  };
  auto add_paths = [&](CLI::App* sub) {
    sub->add_option("--workload", cfg.workload, "Workload directory (default <out>/workload)");
    sub->add_option("--registry", cfg.registry, "Registry file (default <out>/registry.json)");
  };
  CLI::Option* threshold_opts[4] = {};
  auto add_model = [&](CLI::App* sub, int slot) {
    threshold_opts[slot] =
        sub->add_option("--threshold", threshold, "KNN distance threshold")->capture_default_str();
    sub->add_option("--headroom", cfg.headroom, "Fractional over-provisioning")
        ->capture_default_str();
  };
  auto add_sim = [&](CLI::App* sub, std::vector<std::string>& policies) {
    sub->add_option("--policy", policies, "Policies (comma separated)")
        ->check(CLI::IsMember({"isolation", "simple", "moe", "oracle"}))
        ->delimiter(',')
        ->capture_default_str();
    sub->add_option("--kappa", cfg.kappa, "Paging slowdown coefficient")->capture_default_str();
    sub->add_option("--interference", cfg.interference_rate, "Slowdown per co-runner")
        ->capture_default_str();
  };

  auto* gen = app.add_subcommand("gen", "Generate a synthetic workload");
  gen->add_option("--spec", cfg.spec, "Workload spec (JSON); defaults when omitted")
      ->check(CLI::ExistingFile);
  add_seed(gen, false);
  add_out(gen);
  gen->add_option("--workload", cfg.workload, "Output directory (default <out>/workload)");

  auto* train = app.add_subcommand("train", "Build the expert registry from a workload corpus");
  add_paths(train);
  add_out(train);
  threshold_opts[0] =
      train->add_option("--threshold", threshold, "KNN distance threshold")->capture_default_str();
  train->add_option("--scaling", scaling, "Feature scaling")
      ->check(CLI::IsMember({"minmax", "zscore"}))
      ->capture_default_str();

  auto* pred = app.add_subcommand("predict", "Predict the memory allocation of one task");
  pred->add_option("--task", cfg.task, "Task file (JSON)")->required();
  add_paths(pred);
  add_out(pred);
  add_seed(pred, false);
  add_model(pred, 1);

  auto* sim = app.add_subcommand("simulate", "Run the cluster simulator");
  add_paths(sim);
  add_out(sim);
  add_seed(sim, true);
  add_model(sim, 2);
  add_sim(sim, sim_policies);

  auto* cmp = app.add_subcommand("compare", "Compare policies, normalized to isolation");
  add_paths(cmp);
  add_out(cmp);
  add_seed(cmp, true);
  add_model(cmp, 3);
  add_sim(cmp, cmp_policies);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "moeco: error: UsageError: " << one_line(e.what()) << '\n';
    return 1;
  }

  try {
    for (auto* o : threshold_opts) {
      if (o != nullptr && o->count() > 0) cfg.threshold = threshold;
    }
    cfg.scaling = moeco::scaling_mode_from_string(scaling);
    cfg.policies.clear();
    for (const auto& p : *cmp ? cmp_policies : sim_policies) {
      cfg.policies.push_back(moeco::policy_from_string(p));
    }

    if (*gen) moeco::cmd_gen(cfg, std::cerr);
    else if (*train) moeco::cmd_train(cfg, std::cerr);
    else if (*pred) moeco::cmd_predict(cfg, std::cout);
    else if (*sim) moeco::cmd_simulate(cfg, std::cerr);
    else if (*cmp) moeco::cmd_compare(cfg, std::cout);
  } catch (const moeco::Error& e) {
    std::cerr << "moeco: error: " << moeco::to_string(e.code()) << ": " << one_line(e.message())
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "moeco: internal error: " << one_line(e.what()) << '\n';
    return 2;
  }
  return 0;
}
