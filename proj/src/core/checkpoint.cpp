#include "core/checkpoint.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace cadet {

namespace {

constexpr int kVersion = 1;

json state_to_json(const TrainStateSnapshot& s) {
  json q = json::object(), nc = json::object(), sm = json::object();
  for (const auto& [d, counters] : s.queue_counters) q[std::to_string(d)] = counters;
  for (const auto& [d, c] : s.next_counter) nc[std::to_string(d)] = c;
  for (const auto& [d, c] : s.samples) sm[std::to_string(d)] = c;
  return json{{"step", s.step},         {"lambda", s.lambda},
              {"f_ema", s.f_ema},       {"trainer_rng", s.trainer_rng},
              {"next_counter", nc},     {"queue_counters", q},
              {"samples", sm}};
}

TrainStateSnapshot state_from_json(const json& j) {
  TrainStateSnapshot s;
  check_keys(j, {"step", "lambda", "f_ema", "trainer_rng", "next_counter", "queue_counters",
                 "samples"},
             "train_state");
  s.step = j.at("step").get<int64_t>();
  s.lambda = j.at("lambda").get<double>();
  s.f_ema = j.at("f_ema").get<double>();
  s.trainer_rng = j.at("trainer_rng").get<std::string>();
  for (const auto& [k, v] : j.at("next_counter").items())
    s.next_counter[std::stoi(k)] = v.get<int64_t>();
  for (const auto& [k, v] : j.at("queue_counters").items())
    s.queue_counters[std::stoi(k)] = v.get<std::vector<int64_t>>();
  for (const auto& [k, v] : j.at("samples").items()) s.samples[std::stoi(k)] = v.get<int64_t>();
  return s;
}

}  // namespace

void save_checkpoint(const std::string& dir, const ParamStore& store, const ModelConfig& model,
                     int64_t opt_step, const json* run_config, const TrainStateSnapshot* state) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) raise(ErrorKind::io, "cannot create directory: " + dir);

  json params = json::array();
  int64_t offset = 0;
  for (const auto& [path, t] : store.params) {
    params.push_back(json{{"path", path}, {"shape", t.shape}, {"offset", offset}});
    offset += t.numel();
  }
  const int64_t total = offset;
  json manifest{{"version", kVersion},
                {"model", model_config_to_json(model)},
                {"params", params},
                {"total_elems", total},
                {"optimizer", json{{"step", opt_step}, {"m_offset", total}, {"v_offset", 2 * total}}}};
  manifest["run_config"] = run_config ? *run_config : json(nullptr);
  manifest["train_state"] = state ? state_to_json(*state) : json(nullptr);

  std::ofstream bin(dir + "/params.bin", std::ios::binary);
  if (!bin) raise(ErrorKind::io, "cannot open for writing: " + dir + "/params.bin");
  auto write_block = [&](const std::map<std::string, Tensor>& block, bool allow_missing) {
    for (const auto& [path, t] : store.params) {
      auto it = block.find(path);
      if (it == block.end() || !it->second.defined()) {
        if (!allow_missing) raise(ErrorKind::internal, "missing optimizer slot for " + path);
        std::vector<double> zeros(static_cast<size_t>(t.numel()), 0.0);
        bin.write(reinterpret_cast<const char*>(zeros.data()),
                  static_cast<std::streamsize>(zeros.size() * sizeof(double)));
      } else {
        if (it->second.numel() != t.numel())
          raise(ErrorKind::internal, "optimizer slot shape mismatch for " + path);
        bin.write(reinterpret_cast<const char*>(it->second.data.data()),
                  static_cast<std::streamsize>(it->second.data.size() * sizeof(double)));
      }
    }
  };
  write_block(store.params, false);
  write_block(store.m, true);
  write_block(store.v, true);
  if (!bin) raise(ErrorKind::io, "write failed: " + dir + "/params.bin");
  bin.close();

  std::ofstream mf(dir + "/checkpoint.json", std::ios::binary);
  if (!mf) raise(ErrorKind::io, "cannot open for writing: " + dir + "/checkpoint.json");
  mf << manifest.dump(2) << "\n";
  if (!mf) raise(ErrorKind::io, "write failed: " + dir + "/checkpoint.json");
}

Checkpoint load_checkpoint(const std::string& path) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (fs::is_directory(p)) p /= "checkpoint.json";
  std::ifstream mf(p, std::ios::binary);
  if (!mf) raise(ErrorKind::io, "cannot open checkpoint: " + p.string());
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    raise(ErrorKind::invalid_argument, std::string("bad checkpoint manifest: ") + e.what());
  }
  check_keys(manifest,
             {"version", "model", "params", "total_elems", "optimizer", "run_config",
              "train_state"},
             "checkpoint");
  if (!manifest.contains("version") || manifest["version"].get<int>() != kVersion)
    raise(ErrorKind::invalid_argument, "unsupported checkpoint version");

  Checkpoint ck;
  ck.model = model_config_from_json(manifest.at("model"));
  ck.opt_step = manifest.at("optimizer").at("step").get<int64_t>();
  if (!manifest.at("run_config").is_null()) ck.run_config = manifest.at("run_config");
  if (!manifest.at("train_state").is_null())
    ck.state = state_from_json(manifest.at("train_state"));

  const int64_t total = manifest.at("total_elems").get<int64_t>();
  fs::path bin_path = p.parent_path() / "params.bin";
  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) raise(ErrorKind::io, "cannot open checkpoint data: " + bin_path.string());
  std::vector<double> flat(static_cast<size_t>(3 * total));
  bin.read(reinterpret_cast<char*>(flat.data()),
           static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (bin.gcount() != static_cast<std::streamsize>(flat.size() * sizeof(double)))
    raise(ErrorKind::invalid_argument, "checkpoint data truncated: " + bin_path.string());

  for (const auto& entry : manifest.at("params")) {
    std::string ppath = entry.at("path").get<std::string>();
    std::vector<int64_t> shape = entry.at("shape").get<std::vector<int64_t>>();
    int64_t offset = entry.at("offset").get<int64_t>();
    int64_t numel = shape_numel(shape);
    if (offset < 0 || offset + numel > total)
      raise(ErrorKind::invalid_argument, "checkpoint manifest offsets out of range");
    auto slice = [&](int64_t base) {
      Tensor t;
      t.shape = shape;
      t.data.assign(flat.begin() + base + offset, flat.begin() + base + offset + numel);
      return t;
    };
    ck.store.add(ppath, slice(0));
    ck.store.m[ppath] = slice(total);
    ck.store.v[ppath] = slice(2 * total);
  }

  // The stored parameter set must exactly match what the model config implies.
  for (const auto& path : param_paths(ck.model))
    if (!ck.store.has(path))
      raise(ErrorKind::invalid_argument, "checkpoint is missing parameter: " + path);
  if (ck.store.params.size() != param_paths(ck.model).size())
    raise(ErrorKind::invalid_argument, "checkpoint contains unexpected parameters");
  return ck;
}

}  // namespace cadet
