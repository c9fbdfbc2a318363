#include "core/domain.hpp"

#include <cmath>

namespace cadet {

DomainKind domain_kind_from_string(const std::string& s) {
  if (s == "linear") return DomainKind::linear;
  if (s == "rff") return DomainKind::rff;
  if (s == "grn") return DomainKind::grn;
  raise(ErrorKind::invalid_argument, "unknown domain kind: " + s);
}

std::string domain_kind_to_string(DomainKind k) {
  switch (k) {
    case DomainKind::linear: return "linear";
    case DomainKind::rff: return "rff";
    case DomainKind::grn: return "grn";
  }
  raise(ErrorKind::internal, "bad domain kind enum");
}

NoiseFamily noise_family_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseFamily::gaussian;
  if (s == "cauchy") return NoiseFamily::cauchy;
  if (s == "laplace") return NoiseFamily::laplace;
  raise(ErrorKind::invalid_argument, "unknown noise family: " + s);
}

std::string noise_family_to_string(NoiseFamily f) {
  switch (f) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::cauchy: return "cauchy";
    case NoiseFamily::laplace: return "laplace";
  }
  raise(ErrorKind::internal, "bad noise family enum");
}

TechNoiseParams tech_noise_preset(const std::string& name) {
  TechNoiseParams p;
  if (name == "umi_low") {
    p = {0.01, 1.0, 0.4, std::log(1e4), 0.25, 20.0, 8.0};
  } else if (name == "umi_medium") {
    p = {0.05, 1.0, 0.5, std::log(5e3), 0.35, 40.0, 8.0};
  } else if (name == "umi_noisy") {
    p = {0.10, 1.2, 0.6, std::log(2e3), 0.45, 60.0, 6.0};
  } else {
    raise(ErrorKind::invalid_argument, "unknown tech-noise preset: " + name);
  }
  return p;
}

DomainConfig DomainConfig::defaults(DomainKind kind) {
  DomainConfig c;
  c.kind = kind;
  // o.o.d. counterparts: shifted graph family, disjoint mechanism ranges,
  // heavy-tailed heteroscedastic noise.
  c.graph_ood.family = GraphFamily::watts_strogatz;
  c.graph_ood.ws_degree = 2;
  c.graph_ood.ws_rewire = 0.1;
  c.mechanism_ood.weight_low = 2.5;
  c.mechanism_ood.weight_high = 4.0;
  c.mechanism_ood.length_scale_low = 0.3;
  c.mechanism_ood.length_scale_high = 0.8;
  c.mechanism_ood.output_scale_low = 3.0;
  c.mechanism_ood.output_scale_high = 5.0;
  c.noise_ood.family = NoiseFamily::laplace;
  c.noise_ood.heteroscedastic = true;
  if (kind == DomainKind::grn) {
    c.graph.family = GraphFamily::subgraph_extraction;
    c.graph.source_family = GraphFamily::scale_free;
    c.graph.source_d = 40;
    c.graph.source_edges_per_node = 2.0;
    c.graph.source_power = 1.0;
    c.graph.percentile = 20.0;
    // hub-heavy source for the o.o.d. switch
    c.graph_ood = c.graph;
    c.graph_ood.source_edges_per_node = 3.0;
    c.graph_ood.source_power = 2.5;
  }
  return c;
}

json graph_model_to_json(const GraphModelConfig& c) {
  return json{{"family", graph_family_to_string(c.family)},
              {"edges_per_node", c.edges_per_node},
              {"power", c.power},
              {"ws_degree", c.ws_degree},
              {"ws_rewire", c.ws_rewire},
              {"blocks", c.blocks},
              {"damping", c.damping},
              {"radius", c.radius},
              {"source_family", graph_family_to_string(c.source_family)},
              {"source_d", c.source_d},
              {"source_edges_per_node", c.source_edges_per_node},
              {"source_power", c.source_power},
              {"percentile", c.percentile}};
}

GraphModelConfig graph_model_from_json(const json& j, const GraphModelConfig& base) {
  check_keys(j,
             {"family", "edges_per_node", "power", "ws_degree", "ws_rewire", "blocks", "damping",
              "radius", "source_family", "source_d", "source_edges_per_node", "source_power",
              "percentile"},
             "graph config");
  GraphModelConfig c = base;
  if (j.contains("family")) c.family = graph_family_from_string(j.at("family").get<std::string>());
  assign_if(j, "edges_per_node", c.edges_per_node);
  assign_if(j, "power", c.power);
  assign_if(j, "ws_degree", c.ws_degree);
  assign_if(j, "ws_rewire", c.ws_rewire);
  assign_if(j, "blocks", c.blocks);
  assign_if(j, "damping", c.damping);
  assign_if(j, "radius", c.radius);
  if (j.contains("source_family")) {
    c.source_family = graph_family_from_string(j.at("source_family").get<std::string>());
  }
  assign_if(j, "source_d", c.source_d);
  assign_if(j, "source_edges_per_node", c.source_edges_per_node);
  assign_if(j, "source_power", c.source_power);
  assign_if(j, "percentile", c.percentile);
  return c;
}

namespace {

json mechanism_to_json(const MechanismRanges& m) {
  return json{{"weight_low", m.weight_low},
              {"weight_high", m.weight_high},
              {"bias_low", m.bias_low},
              {"bias_high", m.bias_high},
              {"rff_features", m.rff_features},
              {"length_scale_low", m.length_scale_low},
              {"length_scale_high", m.length_scale_high},
              {"output_scale_low", m.output_scale_low},
              {"output_scale_high", m.output_scale_high}};
}

MechanismRanges mechanism_from_json(const json& j, const MechanismRanges& base) {
  check_keys(j,
             {"weight_low", "weight_high", "bias_low", "bias_high", "rff_features",
              "length_scale_low", "length_scale_high", "output_scale_low", "output_scale_high"},
             "mechanism config");
  MechanismRanges m = base;
  assign_if(j, "weight_low", m.weight_low);
  assign_if(j, "weight_high", m.weight_high);
  assign_if(j, "bias_low", m.bias_low);
  assign_if(j, "bias_high", m.bias_high);
  assign_if(j, "rff_features", m.rff_features);
  assign_if(j, "length_scale_low", m.length_scale_low);
  assign_if(j, "length_scale_high", m.length_scale_high);
  assign_if(j, "output_scale_low", m.output_scale_low);
  assign_if(j, "output_scale_high", m.output_scale_high);
  return m;
}

json noise_to_json(const NoiseConfig& n) {
  return json{{"family", noise_family_to_string(n.family)},
              {"scale_low", n.scale_low},
              {"scale_high", n.scale_high},
              {"heteroscedastic", n.heteroscedastic}};
}

NoiseConfig noise_from_json(const json& j, const NoiseConfig& base) {
  check_keys(j, {"family", "scale_low", "scale_high", "heteroscedastic"}, "noise config");
  NoiseConfig n = base;
  if (j.contains("family")) n.family = noise_family_from_string(j.at("family").get<std::string>());
  assign_if(j, "scale_low", n.scale_low);
  assign_if(j, "scale_high", n.scale_high);
  assign_if(j, "heteroscedastic", n.heteroscedastic);
  return n;
}

json grn_to_json(const GrnConfig& g) {
  return json{{"cell_types_low", g.cell_types_low},
              {"cell_types_high", g.cell_types_high},
              {"b_low", g.b_low},
              {"b_high", g.b_high},
              {"k_low", g.k_low},
              {"k_high", g.k_high},
              {"gamma_low", g.gamma_low},
              {"gamma_high", g.gamma_high},
              {"hill_k_low", g.hill_k_low},
              {"hill_k_high", g.hill_k_high},
              {"lambda_low", g.lambda_low},
              {"lambda_high", g.lambda_high},
              {"zeta_low", g.zeta_low},
              {"zeta_high", g.zeta_high},
              {"polarity_alpha", g.polarity_alpha},
              {"polarity_beta", g.polarity_beta},
              {"dt", g.dt},
              {"burn_in", g.burn_in},
              {"stride_min", g.stride_min},
              {"stride_jitter", g.stride_jitter},
              {"state_cap", g.state_cap},
              {"tech_noise_presets", g.tech_noise_presets},
              {"tech_noise_presets_ood", g.tech_noise_presets_ood}};
}

GrnConfig grn_from_json(const json& j, const GrnConfig& base) {
  check_keys(j,
             {"cell_types_low", "cell_types_high", "b_low", "b_high", "k_low", "k_high",
              "gamma_low", "gamma_high", "hill_k_low", "hill_k_high", "lambda_low", "lambda_high",
              "zeta_low", "zeta_high", "polarity_alpha", "polarity_beta", "dt", "burn_in",
              "stride_min", "stride_jitter", "state_cap", "tech_noise_presets",
              "tech_noise_presets_ood"},
             "grn config");
  GrnConfig g = base;
  assign_if(j, "cell_types_low", g.cell_types_low);
  assign_if(j, "cell_types_high", g.cell_types_high);
  assign_if(j, "b_low", g.b_low);
  assign_if(j, "b_high", g.b_high);
  assign_if(j, "k_low", g.k_low);
  assign_if(j, "k_high", g.k_high);
  assign_if(j, "gamma_low", g.gamma_low);
  assign_if(j, "gamma_high", g.gamma_high);
  assign_if(j, "hill_k_low", g.hill_k_low);
  assign_if(j, "hill_k_high", g.hill_k_high);
  assign_if(j, "lambda_low", g.lambda_low);
  assign_if(j, "lambda_high", g.lambda_high);
  assign_if(j, "zeta_low", g.zeta_low);
  assign_if(j, "zeta_high", g.zeta_high);
  assign_if(j, "polarity_alpha", g.polarity_alpha);
  assign_if(j, "polarity_beta", g.polarity_beta);
  assign_if(j, "dt", g.dt);
  assign_if(j, "burn_in", g.burn_in);
  assign_if(j, "stride_min", g.stride_min);
  assign_if(j, "stride_jitter", g.stride_jitter);
  assign_if(j, "state_cap", g.state_cap);
  assign_if(j, "tech_noise_presets", g.tech_noise_presets);
  assign_if(j, "tech_noise_presets_ood", g.tech_noise_presets_ood);
  for (const auto& name : g.tech_noise_presets) tech_noise_preset(name);
  for (const auto& name : g.tech_noise_presets_ood) tech_noise_preset(name);
  return g;
}

json interventions_to_json(const InterventionConfig& iv) {
  return json{{"probability", iv.probability},
              {"value_low", iv.value_low},
              {"value_high", iv.value_high}};
}

InterventionConfig interventions_from_json(const json& j, const InterventionConfig& base) {
  check_keys(j, {"probability", "value_low", "value_high"}, "interventions config");
  InterventionConfig iv = base;
  assign_if(j, "probability", iv.probability);
  assign_if(j, "value_low", iv.value_low);
  assign_if(j, "value_high", iv.value_high);
  if (iv.probability < 0 || iv.probability > 1) {
    raise(ErrorKind::invalid_argument, "interventions.probability must be in [0,1]");
  }
  return iv;
}

}  // namespace

DomainConfig domain_from_json(const json& j) {
  check_keys(j,
             {"kind", "standardize", "ood_graphs", "ood_mechanisms", "ood_noise", "graph",
              "graph_ood", "mechanism", "mechanism_ood", "noise", "noise_ood", "interventions",
              "grn"},
             "domain config");
  DomainKind kind = DomainKind::linear;
  if (j.contains("kind")) kind = domain_kind_from_string(j.at("kind").get<std::string>());
  DomainConfig c = DomainConfig::defaults(kind);
  assign_if(j, "standardize", c.standardize);
  assign_if(j, "ood_graphs", c.ood_graphs);
  assign_if(j, "ood_mechanisms", c.ood_mechanisms);
  assign_if(j, "ood_noise", c.ood_noise);
  if (j.contains("graph")) c.graph = graph_model_from_json(j.at("graph"), c.graph);
  if (j.contains("graph_ood")) c.graph_ood = graph_model_from_json(j.at("graph_ood"), c.graph_ood);
  if (j.contains("mechanism")) c.mechanism = mechanism_from_json(j.at("mechanism"), c.mechanism);
  if (j.contains("mechanism_ood")) {
    c.mechanism_ood = mechanism_from_json(j.at("mechanism_ood"), c.mechanism_ood);
  }
  if (j.contains("noise")) c.noise = noise_from_json(j.at("noise"), c.noise);
  if (j.contains("noise_ood")) c.noise_ood = noise_from_json(j.at("noise_ood"), c.noise_ood);
  if (j.contains("interventions")) {
    c.interventions = interventions_from_json(j.at("interventions"), c.interventions);
  }
  if (j.contains("grn")) c.grn = grn_from_json(j.at("grn"), c.grn);
  return c;
}

json domain_to_json(const DomainConfig& c) {
  return json{{"kind", domain_kind_to_string(c.kind)},
              {"standardize", c.standardize},
              {"ood_graphs", c.ood_graphs},
              {"ood_mechanisms", c.ood_mechanisms},
              {"ood_noise", c.ood_noise},
              {"graph", graph_model_to_json(c.graph)},
              {"graph_ood", graph_model_to_json(c.graph_ood)},
              {"mechanism", mechanism_to_json(c.mechanism)},
              {"mechanism_ood", mechanism_to_json(c.mechanism_ood)},
              {"noise", noise_to_json(c.noise)},
              {"noise_ood", noise_to_json(c.noise_ood)},
              {"interventions", interventions_to_json(c.interventions)},
              {"grn", grn_to_json(c.grn)}};
}

}  // namespace cadet
