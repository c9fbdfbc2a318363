#include "cadet/cadet.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>

#include "core/buffer.hpp"
#include "core/checkpoint.hpp"
#include "core/dataset_io.hpp"
#include "core/scm.hpp"
#include "core/suites.hpp"
#include "core/train.hpp"

using namespace cadet;

namespace {

thread_local std::string g_last_error;

cadet_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_argument: return CADET_EINVAL;
    case ErrorKind::io: return CADET_EIO;
    case ErrorKind::numeric: return CADET_ENUMERIC;
    case ErrorKind::internal: return CADET_EINTERNAL;
  }
  return CADET_EINTERNAL;
}

template <class F>
cadet_status guarded(F&& f) {
  try {
    f();
    return CADET_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CADET_EINTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return CADET_EINTERNAL;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::string require(const char* s, const char* what) {
  if (!s || !*s) raise(ErrorKind::invalid_argument, std::string(what) + " is required");
  return s;
}

}  // namespace

struct cadet_model {
  ParamStore store;
  ModelConfig config;
};

extern "C" {

const char* cadet_version(void) { return "0.1.0"; }

const char* cadet_last_error(void) { return g_last_error.c_str(); }

void cadet_string_free(char* s) { std::free(s); }

cadet_status cadet_set_log_level(const char* level) {
  return guarded([&] { set_log_level(require(level, "log level")); });
}

cadet_status cadet_simulate_run(const char* domain_json, int d, int64_t n, int count,
                                uint64_t seed, const char* out_dir) {
  return guarded([&] {
    std::string out = require(out_dir, "out_dir");
    if (count < 1) raise(ErrorKind::invalid_argument, "count must be >= 1");
    DomainConfig domain = (domain_json && *domain_json)
                              ? domain_from_json(parse_json(domain_json, "domain config"))
                              : DomainConfig::defaults(DomainKind::linear);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) raise(ErrorKind::io, "cannot create directory: " + out);
    write_json_file(out + "/resolved_config.json", json{{"command", "simulate"},
                                                        {"d", d},
                                                        {"n", n},
                                                        {"count", count},
                                                        {"seed", seed},
                                                        {"domain", domain_to_json(domain)}});
    for (int k = 0; k < count; ++k) {
      Rng rng(task_seed(seed, d, k));
      Task task = build_task(domain, d, n, rng);
      char name[32];
      std::snprintf(name, sizeof name, "task_%05d", k);
      write_task_dir(out + "/" + name, task, domain);
    }
  });
}

cadet_status cadet_train_run(const char* config_json, const char* out_dir) {
  return guarded([&] {
    std::string out = require(out_dir, "out_dir");
    std::string cfg_text = require(config_json, "config_json");
    TrainConfig cfg = train_config_from_json(parse_json(cfg_text, "train config"));
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) raise(ErrorKind::io, "cannot create directory: " + out);
    // The resolved config round-trips: it is accepted verbatim as a train config.
    write_json_file(out + "/resolved_config.json", train_config_to_json(cfg));
    train(cfg, out);
  });
}

cadet_status cadet_model_open(const char* checkpoint_path, cadet_model** out) {
  return guarded([&] {
    std::string path = require(checkpoint_path, "checkpoint_path");
    if (!out) raise(ErrorKind::invalid_argument, "out handle is required");
    Checkpoint ck = load_checkpoint(path);
    auto* m = new cadet_model{std::move(ck.store), ck.model};
    *out = m;
  });
}

void cadet_model_close(cadet_model* m) { delete m; }

cadet_status cadet_model_predict(cadet_model* m, const double* values, const double* mask,
                                 int64_t n, int d, double* theta_out) {
  return guarded([&] {
    if (!m) raise(ErrorKind::invalid_argument, "model handle is required");
    if (!values || !theta_out) raise(ErrorKind::invalid_argument, "values/theta_out are required");
    if (n < 1 || d < 1) raise(ErrorKind::invalid_argument, "need n >= 1 and d >= 1");
    Dataset ds(n, d);
    std::copy(values, values + static_cast<size_t>(n) * d, ds.values.begin());
    if (mask) {
      for (size_t i = 0; i < ds.mask.size(); ++i) {
        double v = mask[i];
        if (v != 0.0 && v != 1.0)
          raise(ErrorKind::invalid_argument, "mask entries must be 0 or 1");
        ds.mask[i] = static_cast<uint8_t>(v);
      }
    }
    Tensor theta = predict_theta(m->store, m->config, ds);
    std::copy(theta.data.begin(), theta.data.end(), theta_out);
  });
}

cadet_status cadet_predict_to_file(cadet_model* m, const char* task_dir, const char* out_dir) {
  return guarded([&] {
    if (!m) raise(ErrorKind::invalid_argument, "model handle is required");
    std::string dir = require(task_dir, "task_dir");
    std::string out = require(out_dir, "out_dir");
    int64_t rows = 0, cols = 0;
    std::vector<double> values = read_matrix_csv(dir + "/values.csv", &rows, &cols);
    Dataset ds(rows, static_cast<int>(cols));
    ds.values = std::move(values);
    const std::string mask_path = dir + "/mask.csv";
    if (std::filesystem::exists(mask_path)) {
      int64_t mr = 0, mc = 0;
      std::vector<double> mask = read_matrix_csv(mask_path, &mr, &mc);
      if (mr != rows || mc != cols)
        raise(ErrorKind::invalid_argument, "mask/values shape mismatch in " + dir);
      for (size_t i = 0; i < mask.size(); ++i) {
        if (mask[i] != 0.0 && mask[i] != 1.0)
          raise(ErrorKind::invalid_argument, "mask entries must be 0 or 1 in " + dir);
        ds.mask[i] = static_cast<uint8_t>(mask[i]);
      }
    }
    Tensor theta = predict_theta(m->store, m->config, ds);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec) raise(ErrorKind::io, "cannot create directory: " + out);
    write_theta_csv(out + "/theta.csv", theta);
  });
}

cadet_status cadet_evaluate_files(const char* prediction_csv, const char* truth_csv, double tau,
                                  const char* out_path, char** report_json_out) {
  return guarded([&] {
    std::string pred = require(prediction_csv, "prediction_csv");
    std::string truth = require(truth_csv, "truth_csv");
    Tensor theta = read_theta_csv(pred);
    Graph g_true = read_graph_csv(truth);
    if (theta.shape[0] != g_true.d)
      raise(ErrorKind::invalid_argument, "prediction/truth dimension mismatch");
    EvalReport report = evaluate(theta, g_true, tau);
    json j = eval_report_to_json(report);
    if (out_path && *out_path) {
      std::error_code ec;
      std::filesystem::create_directories(std::filesystem::path(out_path).parent_path(), ec);
      write_json_file(out_path, j);
    }
    if (report_json_out) *report_json_out = dup_string(j.dump(2) + "\n");
  });
}

cadet_status cadet_suite_run(const char* name, uint64_t seed, const char* checkpoint,
                             const char* work_dir, int workers, char** result_json_out,
                             int* pass_out) {
  return guarded([&] {
    SuiteOptions opt;
    opt.seed = seed;
    if (checkpoint) opt.checkpoint = checkpoint;
    if (work_dir && *work_dir) opt.work_dir = work_dir;
    opt.workers = workers;
    SuiteResult result = run_suite(require(name, "suite name"), opt);
    if (pass_out) *pass_out = result.pass ? 1 : 0;
    if (result_json_out) *result_json_out = dup_string(suite_result_to_json(result).dump(2) + "\n");
  });
}

cadet_status cadet_suite_names(char** names_out) {
  return guarded([&] {
    if (!names_out) raise(ErrorKind::invalid_argument, "names_out is required");
    std::string all;
    for (const auto& n : suite_names()) {
      all += n;
      all += '\n';
    }
    *names_out = dup_string(all);
  });
}

}  // extern "C"
