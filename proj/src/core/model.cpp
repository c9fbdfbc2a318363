#include "core/model.hpp"

#include <cmath>

namespace cadet {

ModelConfig model_config_from_json(const json& j) {
  ModelConfig cfg;
  check_keys(j, {"layers", "dim", "key_dim", "heads", "ff_dim", "dropout"}, "model");
  assign_if<int>(j, "layers", cfg.layers);
  assign_if<int>(j, "dim", cfg.dim);
  assign_if<int>(j, "key_dim", cfg.key_dim);
  assign_if<int>(j, "heads", cfg.heads);
  assign_if<int>(j, "ff_dim", cfg.ff_dim);
  assign_if<double>(j, "dropout", cfg.dropout);
  if (cfg.layers < 1 || cfg.dim < 1 || cfg.key_dim < 1 || cfg.heads < 1 || cfg.ff_dim < 1)
    raise(ErrorKind::invalid_argument, "model dimensions must be positive");
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0)
    raise(ErrorKind::invalid_argument, "dropout must lie in [0, 1)");
  return cfg;
}

json model_config_to_json(const ModelConfig& cfg) {
  return json{{"layers", cfg.layers}, {"dim", cfg.dim},       {"key_dim", cfg.key_dim},
              {"heads", cfg.heads},   {"ff_dim", cfg.ff_dim}, {"dropout", cfg.dropout}};
}

namespace {

struct ParamSpec {
  std::string path;
  std::vector<int64_t> shape;
  enum class Init { kaiming, head_map, zero, one, edge_bias } init;
  int64_t fan_in = 0;
};

std::vector<ParamSpec> param_specs(const ModelConfig& cfg) {
  using Init = ParamSpec::Init;
  const int64_t k = cfg.dim, kk = cfg.key_dim, h = cfg.heads, ff = cfg.ff_dim;
  const int64_t hk = h * kk;
  std::vector<ParamSpec> specs;
  specs.push_back({"embed/w", {2, k}, Init::kaiming, 2});
  specs.push_back({"embed/b", {k}, Init::zero, 0});
  for (int l = 0; l < cfg.layers; ++l) {
    for (const char* axis : {"obs", "var"}) {
      std::string p = "enc/" + std::to_string(l) + "/" + axis + "/";
      specs.push_back({p + "ln1/gain", {k}, Init::one, 0});
      specs.push_back({p + "ln1/offset", {k}, Init::zero, 0});
      specs.push_back({p + "wq", {k, hk}, Init::kaiming, k});
      specs.push_back({p + "bq", {hk}, Init::zero, 0});
      specs.push_back({p + "wk", {k, hk}, Init::kaiming, k});
      specs.push_back({p + "bk", {hk}, Init::zero, 0});
      specs.push_back({p + "wv", {k, hk}, Init::kaiming, k});
      specs.push_back({p + "bv", {hk}, Init::zero, 0});
      specs.push_back({p + "wo", {hk, k}, Init::kaiming, hk});
      specs.push_back({p + "bo", {k}, Init::zero, 0});
      specs.push_back({p + "ln2/gain", {k}, Init::one, 0});
      specs.push_back({p + "ln2/offset", {k}, Init::zero, 0});
      specs.push_back({p + "w1", {k, ff}, Init::kaiming, k});
      specs.push_back({p + "b1", {ff}, Init::zero, 0});
      specs.push_back({p + "w2", {ff, k}, Init::kaiming, ff});
      specs.push_back({p + "b2", {k}, Init::zero, 0});
    }
  }
  specs.push_back({"final_ln/gain", {k}, Init::one, 0});
  specs.push_back({"final_ln/offset", {k}, Init::zero, 0});
  specs.push_back({"head/u/w", {k, k}, Init::head_map, k});
  specs.push_back({"head/u/b", {k}, Init::zero, 0});
  specs.push_back({"head/v/w", {k, k}, Init::head_map, k});
  specs.push_back({"head/v/b", {k}, Init::zero, 0});
  specs.push_back({"head/bias", {}, Init::edge_bias, 0});
  return specs;
}

}  // namespace

std::vector<std::string> param_paths(const ModelConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& s : param_specs(cfg)) out.push_back(s.path);
  return out;
}

void init_params(ParamStore& store, const ModelConfig& cfg, Rng& rng) {
  using Init = ParamSpec::Init;
  for (const auto& s : param_specs(cfg)) {
    Tensor t(s.shape);
    switch (s.init) {
      case Init::kaiming: {
        double bound = std::sqrt(6.0 / static_cast<double>(s.fan_in));
        for (auto& e : t.data) e = rng.uniform(-bound, bound);
        break;
      }
      case Init::head_map: {
        // The edge scorers u and v feed a dot product of dimension fan_in, so
        // plain Kaiming scaling leaves initial logits with a standard
        // deviation of ~2*sqrt(dim): nearly every edge belief starts pinned
        // against 0 or 1 and the clamped log-likelihood has no gradient
        // there. Shrinking the bound by an extra 1/fan_in keeps untrained
        // logits within a few hundredths of the bias, so beliefs start near
        // sigmoid(-3) and every entry stays on the responsive part of the
        // logistic curve.
        double fan = static_cast<double>(s.fan_in);
        double bound = std::sqrt(6.0 / fan) / fan;
        for (auto& e : t.data) e = rng.uniform(-bound, bound);
        break;
      }
      case Init::zero:
        break;
      case Init::one:
        for (auto& e : t.data) e = 1.0;
        break;
      case Init::edge_bias:
        t.data[0] = -3.0;
        break;
    }
    store.add(s.path, std::move(t));
  }
}

const Var& BoundParams::at(const std::string& path) const {
  auto it = vars.find(path);
  if (it == vars.end()) raise(ErrorKind::internal, "unbound parameter: " + path);
  return it->second;
}

BoundParams bind_params(Tape& tape, const ParamStore& store) {
  BoundParams bound;
  for (const auto& [path, t] : store.params) {
    bound.vars.emplace(path, tape.recording ? tape.leaf(t) : Tape::constant(t));
  }
  return bound;
}

std::map<std::string, Tensor> grads_by_path(const std::vector<Tensor>& grads,
                                            const BoundParams& bound) {
  std::map<std::string, Tensor> out;
  for (const auto& [path, var] : bound.vars) out.emplace(path, Tape::grad_of(grads, var));
  return out;
}

namespace {

Var linear(Tape& tape, const Var& x, const Var& w, const Var& b) {
  return t_add(tape, t_matmul(tape, x, w), b);
}

Var dropout(Tape& tape, const Var& x, double rate, bool training, Rng* rng) {
  if (!training || rate <= 0.0) return x;
  if (rng == nullptr) raise(ErrorKind::internal, "dropout requires an rng during training");
  Tensor mask(x.v().shape);
  double keep = 1.0 - rate;
  for (auto& e : mask.data) e = rng->bernoulli(keep) ? 1.0 / keep : 0.0;
  return t_mul(tape, x, Tape::constant(std::move(mask)));
}

// Pre-norm multi-head self-attention plus feed-forward over the middle axis of
// an (B, T, k) activation; both sublayers end with dropout and a residual add.
Var encoder_sublayer(Tape& tape, const BoundParams& params, const ModelConfig& cfg, Var h,
                     const std::string& prefix, bool training, Rng* drop_rng) {
  const int64_t B = h.v().shape[0], T = h.v().shape[1];
  const int64_t H = cfg.heads, kk = cfg.key_dim;
  auto p = [&](const char* name) -> const Var& { return params.at(prefix + name); };

  Var x = t_layernorm(tape, h, p("ln1/gain"), p("ln1/offset"));
  auto split_heads = [&](Var y) {
    // (B, T, H*kk) -> (B, H, T, kk)
    return t_transpose(tape, t_reshape(tape, y, {B, T, H, kk}), {0, 2, 1, 3});
  };
  Var q = split_heads(linear(tape, x, p("wq"), p("bq")));
  Var k = split_heads(linear(tape, x, p("wk"), p("bk")));
  Var v = split_heads(linear(tape, x, p("wv"), p("bv")));
  Var scores = t_scale(tape, t_matmul(tape, q, t_transpose(tape, k, {0, 1, 3, 2})),
                       1.0 / std::sqrt(static_cast<double>(kk)));
  Var att = t_softmax(tape, scores, 3);
  Var ctx = t_matmul(tape, att, v);  // (B, H, T, kk)
  Var merged = t_reshape(tape, t_transpose(tape, ctx, {0, 2, 1, 3}), {B, T, H * kk});
  Var attn_out = linear(tape, merged, p("wo"), p("bo"));
  attn_out = dropout(tape, attn_out, cfg.dropout, training, drop_rng);
  h = t_add(tape, h, attn_out);

  Var x2 = t_layernorm(tape, h, p("ln2/gain"), p("ln2/offset"));
  Var ff = linear(tape, t_relu(tape, linear(tape, x2, p("w1"), p("b1"))), p("w2"), p("b2"));
  ff = dropout(tape, ff, cfg.dropout, training, drop_rng);
  return t_add(tape, h, ff);
}

}  // namespace

ModelOutput model_forward(Tape& tape, const BoundParams& params, const ModelConfig& cfg,
                          const Dataset& data, bool training, Rng* drop_rng) {
  const int64_t n = data.n, d = data.d;
  if (n < 1 || d < 1) raise(ErrorKind::invalid_argument, "dataset must be non-empty");
  if (static_cast<int64_t>(data.values.size()) != n * d ||
      static_cast<int64_t>(data.mask.size()) != n * d)
    raise(ErrorKind::invalid_argument, "dataset buffers have the wrong size");

  // Two input channels per token: the value and the intervention indicator.
  Tensor tokens({n * d, 2});
  for (int64_t t = 0; t < n * d; ++t) {
    tokens[t * 2 + 0] = data.values[static_cast<size_t>(t)];
    tokens[t * 2 + 1] = data.mask[static_cast<size_t>(t)];
  }
  Var h0 = linear(tape, Tape::constant(std::move(tokens)), params.at("embed/w"),
                  params.at("embed/b"));
  Var h = t_reshape(tape, h0, {n, d, cfg.dim});  // (n, d, k)

  for (int l = 0; l < cfg.layers; ++l) {
    std::string base = "enc/" + std::to_string(l) + "/";
    // Attend across observations (per variable), then across variables
    // (per observation).
    h = t_transpose(tape, h, {1, 0, 2});  // (d, n, k)
    h = encoder_sublayer(tape, params, cfg, h, base + "obs/", training, drop_rng);
    h = t_transpose(tape, h, {1, 0, 2});  // (n, d, k)
    h = encoder_sublayer(tape, params, cfg, h, base + "var/", training, drop_rng);
  }
  h = t_layernorm(tape, h, params.at("final_ln/gain"), params.at("final_ln/offset"));

  Var pooled = t_maxpool(tape, h, 0);  // (d, k)
  Var u = linear(tape, pooled, params.at("head/u/w"), params.at("head/u/b"));
  Var v = linear(tape, pooled, params.at("head/v/w"), params.at("head/v/b"));
  Var logits = t_add(tape, t_matmul(tape, u, t_transpose(tape, v, {1, 0})),
                     params.at("head/bias"));

  Tensor offdiag({d, d}, 1.0);
  for (int64_t i = 0; i < d; ++i) offdiag[i * d + i] = 0.0;
  Var theta = t_mul(tape, t_logistic(tape, logits), Tape::constant(std::move(offdiag)));
  return {logits, theta};
}

Var model_log_q(Tape& tape, const Var& theta, const Graph& g) {
  const int64_t d = g.d;
  if (theta.v().shape != std::vector<int64_t>{d, d})
    raise(ErrorKind::invalid_argument, "edge-probability matrix does not match graph size");
  constexpr double kEps = 1e-7;
  Tensor gmat({d, d});
  Tensor gcomp({d, d});
  Tensor offdiag({d, d}, 1.0);
  for (int64_t i = 0; i < d; ++i) {
    for (int64_t j = 0; j < d; ++j) {
      double e = g.edge(static_cast<int>(i), static_cast<int>(j)) ? 1.0 : 0.0;
      gmat[i * d + j] = e;
      gcomp[i * d + j] = 1.0 - e;
    }
    offdiag[i * d + i] = 0.0;
  }
  Var log_p = t_log(tape, t_clamp(tape, theta, kEps, 1.0 - kEps));
  Var one_minus = t_sub(tape, Tape::constant(Tensor({d, d}, 1.0)), theta);
  Var log_np = t_log(tape, t_clamp(tape, one_minus, kEps, 1.0 - kEps));
  Var term = t_add(tape, t_mul(tape, Tape::constant(std::move(gmat)), log_p),
                   t_mul(tape, Tape::constant(std::move(gcomp)), log_np));
  return t_sum(tape, t_mul(tape, term, Tape::constant(std::move(offdiag))));
}

Tensor predict_theta(const ParamStore& store, const ModelConfig& cfg, const Dataset& data) {
  Tape tape;
  tape.recording = false;
  BoundParams bound = bind_params(tape, store);
  ModelOutput out = model_forward(tape, bound, cfg, data, false, nullptr);
  return *out.theta.val;
}

}  // namespace cadet
