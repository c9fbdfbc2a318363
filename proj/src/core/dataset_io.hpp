#pragma once

#include <string>

#include "core/domain.hpp"
#include "core/json_util.hpp"
#include "core/tensor.hpp"

namespace cadet {

// Plain-text matrix files: comma-separated rows, %.17g (lossless for doubles),
// no header.
void write_matrix_csv(const std::string& path, const double* data, int64_t rows, int64_t cols);
std::vector<double> read_matrix_csv(const std::string& path, int64_t* rows, int64_t* cols);

void write_graph_csv(const std::string& path, const Graph& g);
Graph read_graph_csv(const std::string& path);

void write_theta_csv(const std::string& path, const Tensor& theta);
Tensor read_theta_csv(const std::string& path);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

// Task directory: values.csv, mask.csv, graph.csv, meta.json.
void write_task_dir(const std::string& dir, const Task& task, const DomainConfig& domain);
Task read_task_dir(const std::string& dir);

}  // namespace cadet
