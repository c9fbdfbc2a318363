#include "core/dataset_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cadet {

namespace {

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorKind::io, "cannot open for writing: " + path);
  out << content;
  if (!out) raise(ErrorKind::io, "write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_matrix_csv(const std::string& path, const double* data, int64_t rows, int64_t cols) {
  std::string out;
  out.reserve(static_cast<size_t>(rows * cols) * 20);
  char buf[40];
  for (int64_t i = 0; i < rows; ++i) {
    for (int64_t j = 0; j < cols; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data[i * cols + j]);
      out += buf;
      out += (j + 1 < cols) ? ',' : '\n';
    }
  }
  write_text(path, out);
}

std::vector<double> read_matrix_csv(const std::string& path, int64_t* rows, int64_t* cols) {
  std::string text = read_text(path);
  std::vector<double> values;
  int64_t r = 0, c = -1;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    if (line.empty()) continue;
    int64_t row_cols = 0;
    size_t p = 0;
    while (p <= line.size()) {
      size_t comma = line.find(',', p);
      if (comma == std::string_view::npos) comma = line.size();
      std::string cell(line.substr(p, comma - p));
      char* end = nullptr;
      double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        raise(ErrorKind::invalid_argument, "bad numeric cell in " + path + ": '" + cell + "'");
      values.push_back(v);
      ++row_cols;
      p = comma + 1;
      if (comma == line.size()) break;
    }
    if (c == -1) c = row_cols;
    else if (c != row_cols)
      raise(ErrorKind::invalid_argument, "ragged rows in " + path);
    ++r;
  }
  if (r == 0) raise(ErrorKind::invalid_argument, "empty matrix file: " + path);
  *rows = r;
  *cols = c;
  return values;
}

void write_graph_csv(const std::string& path, const Graph& g) {
  std::string out;
  for (int i = 0; i < g.d; ++i) {
    for (int j = 0; j < g.d; ++j) {
      out += g.edge(i, j) ? '1' : '0';
      out += (j + 1 < g.d) ? ',' : '\n';
    }
  }
  write_text(path, out);
}

Graph read_graph_csv(const std::string& path) {
  int64_t r = 0, c = 0;
  std::vector<double> values = read_matrix_csv(path, &r, &c);
  if (r != c) raise(ErrorKind::invalid_argument, "graph matrix must be square: " + path);
  Graph g(static_cast<int>(r));
  for (int i = 0; i < g.d; ++i)
    for (int j = 0; j < g.d; ++j) {
      double v = values[static_cast<size_t>(i) * r + j];
      if (v != 0.0 && v != 1.0)
        raise(ErrorKind::invalid_argument, "graph entries must be 0 or 1: " + path);
      if (i == j && v != 0.0)
        raise(ErrorKind::invalid_argument, "graph diagonal must be 0: " + path);
      g.set_edge(i, j, v == 1.0);
    }
  return g;
}

void write_theta_csv(const std::string& path, const Tensor& theta) {
  if (theta.rank() != 2) raise(ErrorKind::invalid_argument, "beliefs must be a matrix");
  write_matrix_csv(path, theta.data.data(), theta.shape[0], theta.shape[1]);
}

Tensor read_theta_csv(const std::string& path) {
  int64_t r = 0, c = 0;
  std::vector<double> values = read_matrix_csv(path, &r, &c);
  return Tensor::from({r, c}, std::move(values));
}

json read_json_file(const std::string& path) { return parse_json(read_text(path), path); }

void write_json_file(const std::string& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

void write_task_dir(const std::string& dir, const Task& task, const DomainConfig& domain) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) raise(ErrorKind::io, "cannot create directory: " + dir);
  write_matrix_csv(dir + "/values.csv", task.data.values.data(), task.data.n, task.data.d);
  std::vector<double> mask_d(task.data.mask.begin(), task.data.mask.end());
  write_matrix_csv(dir + "/mask.csv", mask_d.data(), task.data.n, task.data.d);
  write_graph_csv(dir + "/graph.csv", task.g);
  json meta{{"n", task.data.n},
            {"d", task.data.d},
            {"domain", domain_kind_to_string(domain.kind)},
            {"seed", task.seed},
            {"standardized", domain.kind == DomainKind::grn ? true : domain.standardize}};
  write_json_file(dir + "/meta.json", meta);
}

Task read_task_dir(const std::string& dir) {
  Task task;
  int64_t r = 0, c = 0;
  task.data.values = read_matrix_csv(dir + "/values.csv", &r, &c);
  task.data.n = r;
  task.data.d = static_cast<int>(c);
  int64_t mr = 0, mc = 0;
  std::vector<double> mask_d = read_matrix_csv(dir + "/mask.csv", &mr, &mc);
  if (mr != r || mc != c) raise(ErrorKind::invalid_argument, "mask/values shape mismatch in " + dir);
  task.data.mask.resize(mask_d.size());
  for (size_t i = 0; i < mask_d.size(); ++i) {
    if (mask_d[i] != 0.0 && mask_d[i] != 1.0)
      raise(ErrorKind::invalid_argument, "mask entries must be 0 or 1 in " + dir);
    task.data.mask[i] = static_cast<uint8_t>(mask_d[i]);
  }
  task.g = read_graph_csv(dir + "/graph.csv");
  if (task.g.d != task.data.d)
    raise(ErrorKind::invalid_argument, "graph/values dimension mismatch in " + dir);
  json meta = read_json_file(dir + "/meta.json");
  if (meta.contains("seed")) task.seed = meta["seed"].get<uint64_t>();
  return task;
}

}  // namespace cadet
