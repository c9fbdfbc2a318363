#include "core/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>

#include "core/dataset_io.hpp"

namespace cadet {

AcyclicityConfig acyclicity_from_json(const json& j) {
  AcyclicityConfig cfg;
  check_keys(j, {"enabled", "t", "eta", "dual_every", "warmup_frac"}, "acyclicity");
  assign_if<bool>(j, "enabled", cfg.enabled);
  assign_if<int>(j, "t", cfg.t);
  assign_if<double>(j, "eta", cfg.eta);
  assign_if<int64_t>(j, "dual_every", cfg.dual_every);
  assign_if<double>(j, "warmup_frac", cfg.warmup_frac);
  if (cfg.t < 1) raise(ErrorKind::invalid_argument, "acyclicity.t must be >= 1");
  if (cfg.eta < 0.0) raise(ErrorKind::invalid_argument, "acyclicity.eta must be >= 0");
  if (cfg.dual_every < 1) raise(ErrorKind::invalid_argument, "acyclicity.dual_every must be >= 1");
  if (cfg.warmup_frac < 0.0 || cfg.warmup_frac > 1.0)
    raise(ErrorKind::invalid_argument, "acyclicity.warmup_frac must be in [0,1]");
  return cfg;
}

json acyclicity_to_json(const AcyclicityConfig& cfg) {
  return json{{"enabled", cfg.enabled},
              {"t", cfg.t},
              {"eta", cfg.eta},
              {"dual_every", cfg.dual_every},
              {"warmup_frac", cfg.warmup_frac}};
}

ScheduleConfig schedule_from_json(const json& j) {
  ScheduleConfig cfg;
  check_keys(j,
             {"total_steps", "batch_max", "d_low", "d_high", "n_choices", "base_lr",
              "lr_drop_frac", "buffer_capacity", "log_every", "checkpoint_every"},
             "schedule");
  assign_if<int64_t>(j, "total_steps", cfg.total_steps);
  assign_if<int>(j, "batch_max", cfg.batch_max);
  assign_if<int>(j, "d_low", cfg.d_low);
  assign_if<int>(j, "d_high", cfg.d_high);
  if (j.contains("n_choices")) cfg.n_choices = j.at("n_choices").get<std::vector<int64_t>>();
  assign_if<double>(j, "base_lr", cfg.base_lr);
  assign_if<double>(j, "lr_drop_frac", cfg.lr_drop_frac);
  assign_if<int64_t>(j, "buffer_capacity", cfg.buffer_capacity);
  assign_if<int64_t>(j, "log_every", cfg.log_every);
  assign_if<int64_t>(j, "checkpoint_every", cfg.checkpoint_every);
  if (cfg.total_steps < 0) raise(ErrorKind::invalid_argument, "total_steps must be >= 0");
  if (cfg.batch_max < 1) raise(ErrorKind::invalid_argument, "batch_max must be >= 1");
  if (cfg.d_low < 1 || cfg.d_high < cfg.d_low)
    raise(ErrorKind::invalid_argument, "need 1 <= d_low <= d_high");
  if (cfg.n_choices.empty()) raise(ErrorKind::invalid_argument, "n_choices must be non-empty");
  for (int64_t n : cfg.n_choices)
    if (n < 2) raise(ErrorKind::invalid_argument, "dataset sizes must be >= 2");
  if (cfg.base_lr <= 0.0) raise(ErrorKind::invalid_argument, "base_lr must be > 0");
  if (cfg.lr_drop_frac < 0.0 || cfg.lr_drop_frac > 1.0)
    raise(ErrorKind::invalid_argument, "lr_drop_frac must be in [0,1]");
  if (cfg.buffer_capacity < 1) raise(ErrorKind::invalid_argument, "buffer_capacity must be >= 1");
  return cfg;
}

json schedule_to_json(const ScheduleConfig& cfg) {
  return json{{"total_steps", cfg.total_steps},
              {"batch_max", cfg.batch_max},
              {"d_low", cfg.d_low},
              {"d_high", cfg.d_high},
              {"n_choices", cfg.n_choices},
              {"base_lr", cfg.base_lr},
              {"lr_drop_frac", cfg.lr_drop_frac},
              {"buffer_capacity", cfg.buffer_capacity},
              {"log_every", cfg.log_every},
              {"checkpoint_every", cfg.checkpoint_every}};
}

int batch_size_for(const ScheduleConfig& schedule, int d) {
  double raw = 2.0 * static_cast<double>(schedule.batch_max) / static_cast<double>(d);
  int b = static_cast<int>(std::llround(raw));
  return std::clamp(b, 4, 16);
}

int pick_d(const ScheduleConfig& schedule, Rng& rng) {
  // Weight 1/batch(d) so each d contributes the same number of examples in
  // expectation even though steps at small d carry bigger batches.
  double total = 0.0;
  for (int d = schedule.d_low; d <= schedule.d_high; ++d)
    total += 1.0 / static_cast<double>(batch_size_for(schedule, d));
  double u = rng.u01() * total;
  double acc = 0.0;
  for (int d = schedule.d_low; d <= schedule.d_high; ++d) {
    acc += 1.0 / static_cast<double>(batch_size_for(schedule, d));
    if (u < acc) return d;
  }
  return schedule.d_high;
}

double learning_rate(const ScheduleConfig& schedule, int64_t step) {
  double lr = schedule.base_lr * std::sqrt(static_cast<double>(schedule.batch_max));
  int64_t drop_at = std::llround(schedule.lr_drop_frac * static_cast<double>(schedule.total_steps));
  if (step > drop_at) lr *= 0.1;
  return lr;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig cfg;
  check_keys(j, {"domain", "model", "schedule", "acyclicity", "seed", "workers", "resume"},
             "train config");
  if (j.contains("resume")) cfg.resume = j.at("resume").get<std::string>();
  if (j.contains("domain")) cfg.domain = domain_from_json(j.at("domain"));
  if (j.contains("model")) cfg.model = model_config_from_json(j.at("model"));
  if (j.contains("schedule")) cfg.schedule = schedule_from_json(j.at("schedule"));
  if (j.contains("acyclicity")) cfg.acyclicity = acyclicity_from_json(j.at("acyclicity"));
  assign_if<uint64_t>(j, "seed", cfg.seed);
  assign_if<int>(j, "workers", cfg.workers);
  if (cfg.workers < 0) raise(ErrorKind::invalid_argument, "workers must be >= 0");
  return cfg;
}

json train_config_to_json(const TrainConfig& cfg) {
  json j{{"domain", domain_to_json(cfg.domain)},
         {"model", model_config_to_json(cfg.model)},
         {"schedule", schedule_to_json(cfg.schedule)},
         {"acyclicity", acyclicity_to_json(cfg.acyclicity)},
         {"seed", cfg.seed},
         {"workers", cfg.workers}};
  if (!cfg.resume.empty()) j["resume"] = cfg.resume;
  return j;
}

StepOutput loss_and_grads(const ParamStore& store, const ModelConfig& model,
                          const std::vector<Task>& batch, double lambda,
                          const AcyclicityConfig& acyc, bool training, Rng& step_rng) {
  if (batch.empty()) raise(ErrorKind::invalid_argument, "empty batch");
  const int d = batch.front().data.d;
  for (const auto& t : batch)
    if (t.data.d != d) raise(ErrorKind::invalid_argument, "batch tasks must share d");

  Tape tape;
  BoundParams bound = bind_params(tape, store);
  Var sum_logq, sum_h;
  bool have_logq = false, have_h = false;
  double f_total = 0.0;
  for (const auto& task : batch) {
    ModelOutput out = model_forward(tape, bound, model, task.data, training, &step_rng);
    Var lq = model_log_q(tape, out.theta, task.g);
    sum_logq = have_logq ? t_add(tape, sum_logq, lq) : lq;
    have_logq = true;
    if (acyc.enabled) {
      Var h = spectral_penalty_var(tape, out.theta, acyc.t, step_rng);
      f_total += h.v()[0];
      if (lambda != 0.0) {
        sum_h = have_h ? t_add(tape, sum_h, h) : h;
        have_h = true;
      }
    }
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  Var loss = t_scale(tape, sum_logq, -inv_b);
  if (have_h) loss = t_add(tape, loss, t_scale(tape, sum_h, lambda * inv_b));

  StepOutput out;
  out.loss = loss.v()[0];
  out.f_mean = acyc.enabled ? f_total * inv_b : 0.0;
  std::vector<Tensor> grads = tape.backward(loss);
  out.grads = grads_by_path(grads, bound);
  return out;
}

namespace {

void dump_diagnostics(const std::string& out_dir, int64_t step, int d,
                      const std::vector<Task>& batch, double lambda, double loss) {
  json seeds = json::array();
  for (const auto& t : batch) seeds.push_back(t.seed);
  json j{{"step", step},
         {"d", d},
         {"task_seeds", seeds},
         {"lambda", lambda},
         {"loss", std::isfinite(loss) ? json(loss) : json(nullptr)}};
  try {
    write_json_file(out_dir + "/diagnostics.json", j);
  } catch (const Error&) {
    CADET_LOG_ERROR("failed to write diagnostics file");
  }
}

}  // namespace

TrainResult train(const TrainConfig& cfg_in, const std::string& out_dir) {
  TrainConfig cfg = cfg_in;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) raise(ErrorKind::io, "cannot create directory: " + out_dir);

  ParamStore store;
  TrainStateSnapshot st;
  Rng trainer(mix_seed(cfg.seed, hash_tag("train")));
  int64_t start_step = 0;
  bool resuming = !cfg.resume.empty();

  if (resuming) {
    Checkpoint ck = load_checkpoint(cfg.resume);
    if (ck.run_config.is_null() || !ck.state)
      raise(ErrorKind::invalid_argument, "checkpoint does not carry resumable training state");
    std::string resume_path = cfg.resume;
    cfg = train_config_from_json(ck.run_config);
    cfg.resume = resume_path;
    store = std::move(ck.store);
    st = *ck.state;
    trainer.set_state(st.trainer_rng);
    start_step = st.step;
  } else {
    Rng init_rng(mix_seed(cfg.seed, hash_tag("init")));
    init_params(store, cfg.model, init_rng);
  }

  const ScheduleConfig& sch = cfg.schedule;
  const AcyclicityConfig& acyc = cfg.acyclicity;
  if (start_step > sch.total_steps)
    raise(ErrorKind::invalid_argument, "checkpoint is past the configured total_steps");

  TaskBuffer buffer(sch.buffer_capacity);
  if (resuming) {
    for (const auto& [d, counters] : st.queue_counters)
      for (int64_t c : counters)
        buffer.insert_replayed(d, c, generate_task(cfg.domain, d, sch.n_choices, cfg.seed, c));
    for (const auto& [d, c] : st.next_counter) buffer.set_next_counter(d, c);
    for (const auto& [d, c] : st.samples) buffer.set_samples(d, c);
  }

  json run_config = train_config_to_json(cfg);
  run_config.erase("resume");  // the embedded config always describes a fresh run

  double lambda = st.lambda;
  double f_ema = st.f_ema;
  const double ema_step =
      std::min(0.05, 1e-4 * 250000.0 / static_cast<double>(std::max<int64_t>(1, sch.total_steps)));
  const int64_t warmup_steps = std::llround(acyc.warmup_frac * static_cast<double>(sch.total_steps));

  std::ofstream metrics(out_dir + "/metrics.jsonl",
                        resuming ? (std::ios::binary | std::ios::app)
                                 : (std::ios::binary | std::ios::trunc));
  if (!metrics) raise(ErrorKind::io, "cannot open metrics stream in " + out_dir);

  std::vector<std::thread> producers;
  std::atomic<bool> stop_producers{false};
  if (cfg.workers > 0) {
    for (int w = 0; w < cfg.workers; ++w) {
      producers.emplace_back([&, w] {
        Rng prod(mix_seed(mix_seed(cfg.seed, hash_tag("producer")), static_cast<uint64_t>(w)));
        while (!stop_producers.load()) {
          try {
            int d = pick_d(sch, prod);
            buffer.insert_next(d, cfg.domain, sch.n_choices, cfg.seed);
          } catch (const std::exception& e) {
            CADET_LOG_ERROR("task producer error (respawning): %s", e.what());
          }
        }
      });
    }
  }
  auto shutdown = [&] {
    stop_producers.store(true);
    buffer.stop();
    for (auto& t : producers)
      if (t.joinable()) t.join();
  };

  auto save = [&](int64_t step) {
    st.step = step;
    st.lambda = lambda;
    st.f_ema = f_ema;
    st.trainer_rng = trainer.state();
    st.next_counter = buffer.next_counters();
    st.queue_counters = buffer.queue_counters();
    st.samples = buffer.sample_counts();
    save_checkpoint(out_dir, store, cfg.model, step, &run_config, &st);
  };

  try {
    for (int64_t step = start_step + 1; step <= sch.total_steps; ++step) {
      int d = pick_d(sch, trainer);
      int bsize = batch_size_for(sch, d);
      if (cfg.workers == 0) {
        int64_t want = std::min<int64_t>(bsize, sch.buffer_capacity);
        if (buffer.size(d) == 0) {
          for (int64_t k = 0; k < want; ++k)
            buffer.insert_next(d, cfg.domain, sch.n_choices, cfg.seed);
        } else {
          buffer.insert_next(d, cfg.domain, sch.n_choices, cfg.seed);
        }
      }
      std::vector<Task> batch = buffer.sample(d, bsize, trainer);

      StepOutput so;
      try {
        so = loss_and_grads(store, cfg.model, batch, acyc.enabled ? lambda : 0.0, acyc, true,
                            trainer);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::numeric) {
          dump_diagnostics(out_dir, step, d, batch, lambda,
                           std::numeric_limits<double>::quiet_NaN());
          shutdown();
          raise(ErrorKind::numeric,
                std::string("non-finite training computation at step ") +
                    std::to_string(step) + ": " + e.what());
        }
        throw;
      }
      if (!std::isfinite(so.loss)) {
        dump_diagnostics(out_dir, step, d, batch, lambda, so.loss);
        shutdown();
        raise(ErrorKind::numeric, "non-finite loss at step " + std::to_string(step));
      }

      if (acyc.enabled) f_ema += ema_step * (so.f_mean - f_ema);
      double lr = learning_rate(sch, step);
      std::vector<std::string> skipped = lamb_update(store, so.grads, step, lr);
      if (!skipped.empty())
        CADET_LOG_WARN("skipped %zu parameter update(s) with non-finite gradients at step %lld",
                       skipped.size(), static_cast<long long>(step));
      if (acyc.enabled && step % acyc.dual_every == 0) {
        double eta_t = acyc.eta;
        if (warmup_steps > 0)
          eta_t *= std::min(1.0, static_cast<double>(step) / static_cast<double>(warmup_steps));
        lambda = std::max(0.0, lambda + eta_t * f_ema);
      }

      if (sch.log_every > 0 && step % sch.log_every == 0) {
        json line{{"step", step}, {"loss", so.loss}, {"F_ema", f_ema}, {"lambda", lambda},
                  {"lr", lr}};
        metrics << line.dump() << "\n";
        metrics.flush();
      }
      if (sch.checkpoint_every > 0 && step % sch.checkpoint_every == 0 &&
          step != sch.total_steps)
        save(step);
    }
  } catch (...) {
    shutdown();
    throw;
  }
  shutdown();
  save(sch.total_steps);

  TrainResult result;
  result.store = std::move(store);
  result.model = cfg.model;
  result.steps = sch.total_steps;
  result.lambda = lambda;
  result.f_ema = f_ema;
  return result;
}

}  // namespace cadet
