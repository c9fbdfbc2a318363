// Command-line front end; talks to the library exclusively through the C API.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "cadet/cadet.h"
#include "json.hpp"

using nlohmann::json;

namespace {

int exit_code_for(cadet_status s) {
  switch (s) {
    case CADET_OK: return 0;
    case CADET_EINVAL:
    case CADET_EIO: return 1;
    default: return 2;  // numeric / internal
  }
}

void check(cadet_status s) {
  if (s == CADET_OK) return;
  std::fprintf(stderr, "error: %s\n", cadet_last_error());
  std::exit(exit_code_for(s));
}

[[noreturn]] void user_error(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  std::exit(1);
}

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) user_error("cannot read config file: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const std::exception& e) {
    user_error("invalid JSON in " + path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
  if (ec) user_error("cannot create directory for " + path);
  std::ofstream out(path, std::ios::trunc);
  out << text;
  if (!out) user_error("cannot write " + path);
}

void reject_config(const std::string& config_path, const char* command) {
  if (!config_path.empty())
    user_error(std::string(command) + " takes no --config; use its flags instead");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"amortized inference of causal structure from simulated data"};
  app.require_subcommand(1);

  std::string config_path, out_dir, log_level = "info";
  uint64_t seed = 0;
  int parallel = 0;
  auto* config_opt = app.add_option("--config", config_path, "JSON configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  auto* out_opt = app.add_option("--out", out_dir, "output directory");
  auto* parallel_opt =
      app.add_option("--parallel", parallel, "simulation worker threads (0 = synchronous)");
  app.add_option("--log-level", log_level, "debug|info|warn|error|off");

  auto* sim = app.add_subcommand("simulate", "generate task directories");
  sim->fallthrough();
  int sim_d = 5;
  int64_t sim_n = 100;
  int sim_count = 1;
  sim->add_option("--d", sim_d, "number of variables");
  sim->add_option("--n", sim_n, "observations per task");
  sim->add_option("--count", sim_count, "number of tasks");

  auto* trn = app.add_subcommand("train", "train the posterior network");
  trn->fallthrough();
  std::string resume;
  trn->add_option("--resume", resume, "checkpoint to continue from");

  auto* prd = app.add_subcommand("predict", "edge beliefs for a dataset");
  prd->fallthrough();
  std::string ckpt, data_dir;
  prd->add_option("--checkpoint", ckpt, "trained checkpoint (file or directory)");
  prd->add_option("--data", data_dir, "task directory holding values.csv (and mask.csv)");

  auto* evl = app.add_subcommand("evaluate", "score a prediction against a ground-truth graph");
  evl->fallthrough();
  std::string prediction, truth;
  double tau = 0.5;
  evl->add_option("--prediction", prediction, "theta.csv or adjacency graph.csv");
  evl->add_option("--truth", truth, "ground-truth graph.csv");
  evl->add_option("--tau", tau, "edge-probability threshold");

  auto* sut = app.add_subcommand("suite", "run a verification suite");
  sut->fallthrough();
  std::string suite_name, suite_ckpt;
  sut->add_option("--name", suite_name, "suite name (see --list)");
  bool list_suites = false;
  sut->add_flag("--list", list_suites, "print suite names and exit");
  sut->add_option("--checkpoint", suite_ckpt, "reuse a trained checkpoint");

  CLI11_PARSE(app, argc, argv);

  check(cadet_set_log_level(log_level.c_str()));
  const bool have_seed = seed_opt->count() > 0;
  const bool have_out = out_opt->count() > 0;
  (void)config_opt;

  if (sim->parsed()) {
    if (!have_out) user_error("simulate requires --out");
    std::string domain_text;
    json domain_cfg = json::object();
    if (!config_path.empty()) {
      domain_cfg = read_config(config_path);
      domain_text = domain_cfg.dump();
    }
    check(cadet_simulate_run(domain_text.c_str(), sim_d, sim_n, sim_count, seed,
                             out_dir.c_str()));
    json summary{{"tasks", sim_count},
                 {"d", sim_d},
                 {"n", sim_n},
                 {"domain", domain_cfg.value("kind", "linear")},
                 {"seed", seed}};
    std::printf("%s\n", summary.dump().c_str());
    return 0;
  }

  if (trn->parsed()) {
    if (!have_out) user_error("train requires --out");
    json cfg = config_path.empty() ? json::object() : read_config(config_path);
    if (!cfg.is_object()) user_error("train config must be a JSON object");
    if (have_seed) cfg["seed"] = seed;
    if (parallel_opt->count() > 0) cfg["workers"] = parallel;
    if (!resume.empty()) cfg["resume"] = resume;
    check(cadet_train_run(cfg.dump().c_str(), out_dir.c_str()));
    json summary{{"out", out_dir}, {"checkpoint", out_dir + "/checkpoint.json"}};
    std::printf("%s\n", summary.dump().c_str());
    return 0;
  }

  if (prd->parsed()) {
    reject_config(config_path, "predict");
    if (!have_out) user_error("predict requires --out");
    if (ckpt.empty() || data_dir.empty()) user_error("predict requires --checkpoint and --data");
    cadet_model* model = nullptr;
    check(cadet_model_open(ckpt.c_str(), &model));
    cadet_status s = cadet_predict_to_file(model, data_dir.c_str(), out_dir.c_str());
    cadet_model_close(model);
    check(s);
    json resolved{{"command", "predict"}, {"checkpoint", ckpt}, {"data", data_dir}};
    write_file(out_dir + "/resolved_config.json", resolved.dump(2) + "\n");
    json summary{{"theta", out_dir + "/theta.csv"}};
    std::printf("%s\n", summary.dump().c_str());
    return 0;
  }

  if (evl->parsed()) {
    reject_config(config_path, "evaluate");
    if (!have_out) user_error("evaluate requires --out");
    if (prediction.empty() || truth.empty()) user_error("evaluate requires --prediction and --truth");
    char* report = nullptr;
    check(cadet_evaluate_files(prediction.c_str(), truth.c_str(), tau,
                               (out_dir + "/report.json").c_str(), &report));
    json resolved{
        {"command", "evaluate"}, {"prediction", prediction}, {"truth", truth}, {"tau", tau}};
    write_file(out_dir + "/resolved_config.json", resolved.dump(2) + "\n");
    std::fputs(report, stdout);
    cadet_string_free(report);
    return 0;
  }

  if (sut->parsed()) {
    reject_config(config_path, "suite");
    if (list_suites) {
      char* names = nullptr;
      check(cadet_suite_names(&names));
      std::fputs(names, stdout);
      cadet_string_free(names);
      return 0;
    }
    if (suite_name.empty()) user_error("suite requires --name (or --list)");
    if (!have_out) user_error("suite requires --out");
    char* result_text = nullptr;
    int pass = 0;
    check(cadet_suite_run(suite_name.c_str(), have_seed ? seed : 1234, suite_ckpt.c_str(),
                          out_dir.c_str(), parallel, &result_text, &pass));
    json resolved{{"command", "suite"},
                  {"name", suite_name},
                  {"seed", have_seed ? seed : 1234},
                  {"checkpoint", suite_ckpt},
                  {"workers", parallel}};
    write_file(out_dir + "/resolved_config.json", resolved.dump(2) + "\n");
    write_file(out_dir + "/suite_" + suite_name + ".json", result_text);
    json result = json::parse(result_text);
    cadet_string_free(result_text);
    for (const auto& c : result.at("checks"))
      std::printf("%s  %s\n", c.at("pass").get<bool>() ? "PASS" : "FAIL",
                  c.at("name").get<std::string>().c_str());
    std::printf("suite %s: %s\n", suite_name.c_str(), pass ? "PASS" : "FAIL");
    return pass ? 0 : 3;
  }

  return 0;
}
