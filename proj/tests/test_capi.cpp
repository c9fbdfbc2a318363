#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cadet/cadet.h"
#include "core/train.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / "cadet_capi_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tiny_train_json(uint64_t seed, int64_t steps) {
  cadet::TrainConfig cfg;
  cfg.domain = cadet::DomainConfig::defaults(cadet::DomainKind::linear);
  cfg.model.layers = 1;
  cfg.model.dim = 8;
  cfg.model.key_dim = 4;
  cfg.model.heads = 2;
  cfg.model.ff_dim = 12;
  cfg.schedule.total_steps = steps;
  cfg.schedule.batch_max = 4;
  cfg.schedule.d_low = 2;
  cfg.schedule.d_high = 2;
  cfg.schedule.n_choices = {12};
  cfg.schedule.buffer_capacity = 4;
  cfg.schedule.log_every = 1;
  cfg.acyclicity.t = 4;
  cfg.seed = seed;
  return cadet::train_config_to_json(cfg).dump();
}

}  // namespace

TEST_SUITE("capi") {

TEST_CASE("version and log level") {
  const char* v = cadet_version();
  REQUIRE(v != nullptr);
  CHECK(std::strlen(v) > 0);

  CHECK_EQ(cadet_set_log_level("warn"), CADET_OK);
  CHECK_EQ(cadet_set_log_level("debug"), CADET_OK);
  CHECK_EQ(cadet_set_log_level("bogus"), CADET_EINVAL);
  CHECK(std::strlen(cadet_last_error()) > 0);
  CHECK_EQ(cadet_set_log_level("warn"), CADET_OK);
}

TEST_CASE("simulate writes deterministic task directories") {
  fs::path out_a = fresh_dir("sim_a");
  CHECK_EQ(cadet_simulate_run(nullptr, 3, 10, 2, 5, out_a.string().c_str()), CADET_OK);
  for (const char* task : {"task_00000", "task_00001"})
    for (const char* f : {"values.csv", "mask.csv", "graph.csv", "meta.json"})
      CHECK(fs::exists(out_a / task / f));
  CHECK(fs::exists(out_a / "resolved_config.json"));

  fs::path out_b = fresh_dir("sim_b");
  CHECK_EQ(cadet_simulate_run("", 3, 10, 2, 5, out_b.string().c_str()), CADET_OK);
  CHECK_EQ(slurp(out_a / "task_00000" / "values.csv"), slurp(out_b / "task_00000" / "values.csv"));
  CHECK_EQ(slurp(out_a / "task_00001" / "graph.csv"), slurp(out_b / "task_00001" / "graph.csv"));

  // Different task indices give different data.
  CHECK(slurp(out_a / "task_00000" / "values.csv") != slurp(out_a / "task_00001" / "values.csv"));
}

TEST_CASE("simulate rejects bad arguments") {
  fs::path out = fresh_dir("sim_bad");
  CHECK_EQ(cadet_simulate_run(nullptr, 3, 10, 0, 5, out.string().c_str()), CADET_EINVAL);
  CHECK_EQ(cadet_simulate_run(nullptr, 0, 10, 1, 5, out.string().c_str()), CADET_EINVAL);
  CHECK_EQ(cadet_simulate_run(nullptr, 3, 10, 1, 5, nullptr), CADET_EINVAL);
  CHECK_EQ(cadet_simulate_run("{ not json", 3, 10, 1, 5, out.string().c_str()), CADET_EINVAL);
  CHECK_EQ(cadet_simulate_run(R"({"kind":"linear","bogus":1})", 3, 10, 1, 5,
                              out.string().c_str()),
           CADET_EINVAL);
  CHECK(std::strlen(cadet_last_error()) > 0);
}

TEST_CASE("train, open, predict, and evaluate end to end") {
  fs::path run = fresh_dir("e2e_run");
  std::string cfg = tiny_train_json(41, 2);
  REQUIRE_EQ(cadet_train_run(cfg.c_str(), run.string().c_str()), CADET_OK);
  CHECK(fs::exists(run / "checkpoint.json"));
  CHECK(fs::exists(run / "params.bin"));
  CHECK(fs::exists(run / "metrics.jsonl"));
  CHECK(fs::exists(run / "resolved_config.json"));

  // The resolved config is accepted verbatim as a training config.
  fs::path run2 = fresh_dir("e2e_run2");
  std::string resolved = slurp(run / "resolved_config.json");
  REQUIRE_EQ(cadet_train_run(resolved.c_str(), run2.string().c_str()), CADET_OK);
  CHECK_EQ(slurp(run / "params.bin"), slurp(run2 / "params.bin"));

  cadet_model* model = nullptr;
  REQUIRE_EQ(cadet_model_open(run.string().c_str(), &model), CADET_OK);
  REQUIRE(model != nullptr);

  const int64_t n = 6;
  const int d = 3;
  std::vector<double> values(static_cast<size_t>(n) * d);
  for (size_t i = 0; i < values.size(); ++i)
    values[i] = 0.1 * static_cast<double>(i % 7) - 0.3;
  std::vector<double> theta(static_cast<size_t>(d) * d, -1.0);
  REQUIRE_EQ(cadet_model_predict(model, values.data(), nullptr, n, d, theta.data()), CADET_OK);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double v = theta[static_cast<size_t>(i) * d + j];
      if (i == j) {
        CHECK_EQ(v, 0.0);
      } else {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
      }
    }

  // A NULL mask means all-observational, the same as an explicit zero mask.
  std::vector<double> zero_mask(values.size(), 0.0);
  std::vector<double> theta2(theta.size(), -1.0);
  REQUIRE_EQ(cadet_model_predict(model, values.data(), zero_mask.data(), n, d, theta2.data()),
             CADET_OK);
  CHECK_EQ(theta, theta2);

  // File-based prediction over a simulated task.
  fs::path sim = fresh_dir("e2e_sim");
  REQUIRE_EQ(cadet_simulate_run(nullptr, d, 12, 1, 9, sim.string().c_str()), CADET_OK);
  fs::path pred = fresh_dir("e2e_pred");
  REQUIRE_EQ(cadet_predict_to_file(model, (sim / "task_00000").string().c_str(),
                                   pred.string().c_str()),
             CADET_OK);
  CHECK(fs::exists(pred / "theta.csv"));

  // Score the prediction against the simulated truth.
  char* report_text = nullptr;
  fs::path report_path = fresh_dir("e2e_report") / "nested" / "report.json";
  REQUIRE_EQ(cadet_evaluate_files((pred / "theta.csv").string().c_str(),
                                  (sim / "task_00000" / "graph.csv").string().c_str(), 0.5,
                                  report_path.string().c_str(), &report_text),
             CADET_OK);
  REQUIRE(report_text != nullptr);
  cadet::json report = cadet::json::parse(report_text);
  cadet_string_free(report_text);
  for (const char* key : {"shd", "sid", "precision", "recall", "f1", "auroc", "auprc",
                          "edges_predicted", "acyclic"})
    CHECK(report.contains(key));
  CHECK(fs::exists(report_path));
  CHECK_EQ(cadet::json::parse(slurp(report_path)).dump(), report.dump());

  cadet_model_close(model);
}

TEST_CASE("prediction and evaluation argument errors") {
  cadet_model* model = nullptr;
  CHECK_EQ(cadet_model_open("/nonexistent/checkpoint", &model), CADET_EIO);
  CHECK(std::strlen(cadet_last_error()) > 0);
  CHECK_EQ(cadet_model_open(nullptr, &model), CADET_EINVAL);

  fs::path run = fresh_dir("err_run");
  std::string cfg = tiny_train_json(43, 1);
  REQUIRE_EQ(cadet_train_run(cfg.c_str(), run.string().c_str()), CADET_OK);
  cadet_model* m = nullptr;
  REQUIRE_EQ(cadet_model_open(run.string().c_str(), &m), CADET_OK);

  std::vector<double> values(6, 0.0);
  std::vector<double> theta(4, 0.0);
  CHECK_EQ(cadet_model_predict(nullptr, values.data(), nullptr, 3, 2, theta.data()),
           CADET_EINVAL);
  CHECK_EQ(cadet_model_predict(m, nullptr, nullptr, 3, 2, theta.data()), CADET_EINVAL);
  CHECK_EQ(cadet_model_predict(m, values.data(), nullptr, 0, 2, theta.data()), CADET_EINVAL);
  std::vector<double> bad_mask(6, 0.5);
  CHECK_EQ(cadet_model_predict(m, values.data(), bad_mask.data(), 3, 2, theta.data()),
           CADET_EINVAL);
  cadet_model_close(m);

  // Evaluation validates the threshold and the shapes.
  fs::path dir = fresh_dir("err_eval");
  {
    std::ofstream pred(dir / "theta.csv");
    pred << "0,0.9\n0.2,0\n";
    std::ofstream truth(dir / "graph.csv");
    truth << "0,1\n0,0\n";
  }
  std::string pred_path = (dir / "theta.csv").string();
  std::string truth_path = (dir / "graph.csv").string();
  CHECK_EQ(cadet_evaluate_files(pred_path.c_str(), truth_path.c_str(), 1.5, nullptr, nullptr),
           CADET_EINVAL);
  CHECK_EQ(cadet_evaluate_files(pred_path.c_str(), "/nonexistent/graph.csv", 0.5, nullptr,
                                nullptr),
           CADET_EIO);

  char* text = nullptr;
  REQUIRE_EQ(cadet_evaluate_files(pred_path.c_str(), truth_path.c_str(), 0.5, nullptr, &text),
             CADET_OK);
  REQUIRE(text != nullptr);
  cadet::json rep = cadet::json::parse(text);
  cadet_string_free(text);
  CHECK_EQ(rep.at("shd").get<int>(), 0);
}

TEST_CASE("train rejects malformed configs without touching the output") {
  fs::path run = fresh_dir("bad_cfg");
  CHECK_EQ(cadet_train_run("{ nope", run.string().c_str()), CADET_EINVAL);
  CHECK_EQ(cadet_train_run(R"({"unknown_key":1})", run.string().c_str()), CADET_EINVAL);
  CHECK_EQ(cadet_train_run(nullptr, run.string().c_str()), CADET_EINVAL);
  CHECK_FALSE(fs::exists(run / "checkpoint.json"));
}

TEST_CASE("suite names are listed and the gradient suite passes") {
  char* names = nullptr;
  REQUIRE_EQ(cadet_suite_names(&names), CADET_OK);
  REQUIRE(names != nullptr);
  std::string list(names);
  cadet_string_free(names);
  for (const char* expected :
       {"invariance", "gradients", "oracles", "learning", "acyclicity", "size_generalization"})
    CHECK(list.find(expected) != std::string::npos);

  fs::path work = fresh_dir("suite_work");
  char* result_text = nullptr;
  int pass = 0;
  REQUIRE_EQ(cadet_suite_run("gradients", 1234, nullptr, work.string().c_str(), 0, &result_text,
                             &pass),
             CADET_OK);
  REQUIRE(result_text != nullptr);
  cadet::json result = cadet::json::parse(result_text);
  cadet_string_free(result_text);
  CHECK_EQ(pass, 1);
  CHECK_EQ(result.at("suite").get<std::string>(), "gradients");
  CHECK(result.at("pass").get<bool>());
  CHECK(result.at("checks").is_array());
  CHECK(!result.at("checks").empty());

  CHECK_EQ(cadet_suite_run("made_up", 1, nullptr, work.string().c_str(), 0, nullptr, &pass),
           CADET_EINVAL);
}

}  // TEST_SUITE
