#pragma once

#include "core/evalset.hpp"
#include "core/train.hpp"

namespace cadet {

// One named assertion inside a suite, with machine-readable evidence.
struct SuiteCheck {
  std::string name;
  bool pass = false;
  json details;
};

struct SuiteResult {
  std::string suite;
  bool pass = true;
  std::vector<SuiteCheck> checks;
};
json suite_result_to_json(const SuiteResult& r);

struct SuiteOptions {
  uint64_t seed = 1234;
  std::string checkpoint;  // reuse an existing model; empty = train/initialize as needed
  std::string work_dir = "suite_work";
  int workers = 0;
};

std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name, const SuiteOptions& opt);

// --- independent oracles (slow, brute-force reference implementations) ---

// Largest absolute eigenvalue via a dense eigensolver.
double dense_spectral_radius(const Tensor& w);

// Every DAG on d labelled nodes, by enumeration of all edge subsets (d <= 5).
std::vector<Graph> all_dags(int d);

// Intervention distance recomputed with exhaustive path enumeration: directed
// reachability by simple-path search and d-separation by checking every
// undirected path against the collider rule.
int64_t sid_oracle(const Graph& g_true, const Graph& g_pred);

// AUROC by pair counting; average precision by per-threshold rescans.
RankAreas rank_areas_oracle(const std::vector<double>& scores, const std::vector<int>& labels);

// Frozen configuration of the bundled reference training run.
TrainConfig reference_train_config();
// Trains the reference model under <work_dir>/reference unless a checkpoint is
// already present there; returns the checkpoint directory.
std::string ensure_reference_checkpoint(const std::string& work_dir, int workers);

// --- individual check groups (composed into the suites above) ---

SuiteResult run_gradient_checks(uint64_t seed);
SuiteResult run_invariance_checks(const std::string& checkpoint, uint64_t seed);
SuiteResult run_spectral_checks(uint64_t seed);
SuiteResult run_ranking_checks(uint64_t seed);
SuiteResult run_sid_checks(uint64_t seed);
SuiteResult run_simulation_checks(uint64_t seed);
SuiteResult run_learning_checks(const std::string& checkpoint_dir, uint64_t seed);
SuiteResult run_ood_checks(const std::string& checkpoint_dir, uint64_t seed);
SuiteResult run_acyclicity_checks(const std::string& work_dir, uint64_t seed, int workers);
SuiteResult run_size_generalization_checks(const std::string& checkpoint_dir, uint64_t seed);

}  // namespace cadet
