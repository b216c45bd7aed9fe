#include "wctg/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wctg/errors.hpp"

namespace wctg {

std::string_view to_string(ModelKind k) {
  return k == ModelKind::wctext_gcn ? "wctext_gcn" : "wctext_gat";
}

std::optional<ModelKind> parse_model_kind(std::string_view s) {
  if (s == "wctext_gcn") return ModelKind::wctext_gcn;
  if (s == "wctext_gat") return ModelKind::wctext_gat;
  return std::nullopt;
}

void ModelConfig::validate() const {
  if (hidden_dim == 0) throw std::invalid_argument("hidden_dim must be > 0");
  if (num_layers == 0) throw std::invalid_argument("num_layers must be >= 1");
  if (model == ModelKind::wctext_gat && (heads == 0 || head_dim == 0 || edge_dim == 0))
    throw std::invalid_argument("GAT needs heads, head_dim and edge_dim >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
  if (!(leaky_slope >= 0.0)) throw std::invalid_argument("leaky_slope must be >= 0");
}

Model::Model(const HetGraph& graph, const ModelConfig& config)
    : graph_(ablate(graph, config.ablation)), config_(config) {
  config_.validate();
  if (graph_.class_names.empty()) throw DataError("graph has no classes");
  if (graph_.count(NodeType::doc) == 0) throw DataError("graph has no document nodes");
}

Parameter& Model::parameter(std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("no parameter named " + std::string(name));
  return params_[it->second];
}

const Parameter& Model::parameter(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("no parameter named " + std::string(name));
  return params_[it->second];
}

std::size_t Model::add_glorot(std::string name, std::size_t rows, std::size_t cols,
                              std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (auto& v : m.values()) v = dist(rng);
  index_.emplace(name, params_.size());
  params_.push_back({std::move(name), std::move(m), std::nullopt, false});
  return params_.size() - 1;
}

std::size_t Model::add_zeros(std::string name, std::size_t rows, std::size_t cols) {
  index_.emplace(name, params_.size());
  params_.push_back({std::move(name), Matrix(rows, cols), std::nullopt, false});
  return params_.size() - 1;
}

// ---------------------------------------------------------------------------
// GCN

GcnModel::GcnModel(const HetGraph& graph, const ModelConfig& config, std::uint64_t seed)
    : Model(graph, config) {
  a_hat_ = normalize_adjacency(assemble_adjacency(graph_, true));
  a_hat_docs_ = a_hat_.row_block(0, graph_.count(NodeType::doc));

  std::mt19937_64 rng(seed);
  const std::size_t n = graph_.total_nodes();
  const std::size_t k = config_.hidden_dim;
  const std::size_t layers = config_.num_layers;
  for (std::size_t l = 0; l < layers; ++l) {
    const std::size_t in = l == 0 ? n : k;
    const std::size_t out = l + 1 == layers ? num_classes() : k;
    add_glorot("gcn.W" + std::to_string(l), in, out, rng);
  }
  params_.front().flat_rows = true;
}

ad::Var GcnModel::forward(ad::Tape& tape, bool training, std::mt19937_64& rng) const {
  const double p = training ? config_.dropout : 0.0;
  const std::size_t layers = config_.num_layers;

  // Identity features: X W0 is W0 itself, and input dropout drops whole rows.
  ad::Var h = ad::row_dropout(tape.variable_ref(params_[0].value), p, rng);
  if (layers == 1) return ad::spmm(a_hat_docs_, h);
  h = ad::relu(ad::spmm(a_hat_, h));
  for (std::size_t l = 1; l < layers; ++l) {
    ad::Var xw = ad::matmul(ad::dropout(h, p, rng), tape.variable_ref(params_[l].value));
    if (l + 1 == layers) return ad::spmm(a_hat_docs_, xw);
    h = ad::relu(ad::spmm(a_hat_, xw));
  }
  return h;  // unreachable
}

// ---------------------------------------------------------------------------
// GAT

const std::vector<NodeType>& phase_sources(NodeType target) {
  static const std::array<std::vector<NodeType>, kNodeTypes> table = {
      std::vector<NodeType>{NodeType::doc, NodeType::word, NodeType::gram},
      std::vector<NodeType>{NodeType::doc, NodeType::word, NodeType::gram, NodeType::chargram},
      std::vector<NodeType>{NodeType::doc, NodeType::word},
      std::vector<NodeType>{NodeType::word},
  };
  return table[static_cast<std::size_t>(target)];
}

std::vector<Phase> build_phases(const HetGraph& graph, NodeType target) {
  std::vector<Phase> phases;
  if (graph.count(target) == 0) return phases;
  for (NodeType source : phase_sources(target)) {
    if (graph.count(source) == 0) continue;
    struct Link {
      std::size_t t, s;
      double w;
    };
    std::vector<Link> links;
    for (auto etype : kAllEdgeTypes) {
      const bool forward = source_type(etype) == target && target_type(etype) == source;
      const bool backward = target_type(etype) == target && source_type(etype) == source;
      for (const auto& e : graph.edges_of(etype)) {
        if (forward) links.push_back({e.src, e.dst, e.weight});
        if (backward) links.push_back({e.dst, e.src, e.weight});
      }
    }
    std::sort(links.begin(), links.end(),
              [](const Link& a, const Link& b) { return a.t != b.t ? a.t < b.t : a.s < b.s; });
    Phase ph{target, source, {}, {}, Matrix(links.size(), 1), {}};
    for (std::size_t i = 0; i < links.size(); ++i) {
      ph.targets.push_back(links[i].t);
      ph.sources.push_back(links[i].s);
      ph.weights(i, 0) = links[i].w;
    }
    ph.segments = {ph.targets, graph.count(target)};
    phases.push_back(std::move(ph));
  }
  return phases;
}

std::string GatModel::param_prefix(std::size_t layer, const Phase& phase, std::size_t head) {
  return "gat.l" + std::to_string(layer) + "." + std::string(to_string(phase.target)) + "<-" +
         std::string(to_string(phase.source)) + ".h" + std::to_string(head) + ".";
}

GatModel::GatModel(const HetGraph& graph, const ModelConfig& config, std::uint64_t seed)
    : Model(graph, config) {
  for (std::size_t t = 0; t < kNodeTypes; ++t)
    phases_[t] = build_phases(graph_, static_cast<NodeType>(t));

  std::mt19937_64 rng(seed);
  const std::size_t hd = config_.head_dim;
  const std::size_t k = config_.hidden_dim;
  for (std::size_t l = 0; l < config_.num_layers; ++l) {
    for (std::size_t t = 0; t < kNodeTypes; ++t) {
      for (const auto& ph : phases_[t]) {
        for (std::size_t h = 0; h < config_.heads; ++h) {
          const auto prefix = param_prefix(l, ph, h);
          const std::size_t in_t = l == 0 ? graph_.count(ph.target) : k;
          const std::size_t in_s = l == 0 ? graph_.count(ph.source) : k;
          add_glorot(prefix + "W_v", in_t, hd, rng);
          if (l == 0) params_.back().row_nodes = ph.target;
          add_glorot(prefix + "W_t", in_s, hd, rng);
          if (l == 0) params_.back().row_nodes = ph.source;
          add_glorot(prefix + "W_e", 1, config_.edge_dim, rng);
          add_zeros(prefix + "a", 2 * hd + config_.edge_dim, 1);
        }
      }
      if (!phases_[t].empty())
        add_glorot("gat.l" + std::to_string(l) + "." + std::string(to_string(static_cast<NodeType>(t))) +
                       ".W_out",
                   phases_[t].size() * config_.heads * hd, k, rng);
    }
  }
  add_glorot("gat.cls.W", k, num_classes(), rng);
}

NodeStates GatModel::layer(ad::Tape& tape, std::size_t index, const NodeStates* inputs,
                           bool training, std::mt19937_64& rng) const {
  const double p = training ? config_.dropout : 0.0;
  const double attn_p = training && config_.attention_dropout ? config_.dropout : 0.0;
  const std::size_t hd = config_.head_dim;

  // Input dropout is sampled once per node type and shared by every phase.
  std::array<std::vector<double>, kNodeTypes> row_masks;
  NodeStates dropped{};
  for (std::size_t t = 0; t < kNodeTypes; ++t) {
    const std::size_t n = graph_.count(static_cast<NodeType>(t));
    if (n == 0) continue;
    if (inputs) {
      dropped[t] = ad::dropout((*inputs)[t], p, rng);
    } else if (p > 0.0) {
      std::bernoulli_distribution keep(1.0 - p);
      row_masks[t].resize(n);
      for (auto& m : row_masks[t]) m = keep(rng) ? 1.0 / (1.0 - p) : 0.0;
    }
  }
  auto project = [&](NodeType type, const std::string& name) {
    ad::Var w = tape.variable_ref(parameter(name).value);
    const auto t = static_cast<std::size_t>(type);
    if (inputs) return ad::matmul(dropped[t], w);
    return row_masks[t].empty() ? w : ad::scale_rows(w, row_masks[t]);
  };

  NodeStates out{};
  for (std::size_t t = 0; t < kNodeTypes; ++t) {
    const auto type = static_cast<NodeType>(t);
    const std::size_t n = graph_.count(type);
    if (n == 0) continue;
    if (phases_[t].empty()) {
      out[t] = tape.constant(Matrix(n, config_.hidden_dim));
      continue;
    }
    std::vector<ad::Var> parts;
    for (const auto& ph : phases_[t]) {
      const ad::Var edge_scalars = tape.constant(ph.weights);
      for (std::size_t h = 0; h < config_.heads; ++h) {
        const auto prefix = param_prefix(index, ph, h);
        const ad::Var proj_t = project(ph.target, prefix + "W_v");
        const ad::Var proj_s = project(ph.source, prefix + "W_t");
        const ad::Var a = tape.variable_ref(parameter(prefix + "a").value);
        const ad::Var a_t = ad::slice_rows(a, 0, hd);
        const ad::Var a_s = ad::slice_rows(a, hd, 2 * hd);
        const ad::Var a_e = ad::slice_rows(a, 2 * hd, 2 * hd + config_.edge_dim);
        const ad::Var w_e = tape.variable_ref(parameter(prefix + "W_e").value);

        const ad::Var target_score = ad::gather_rows(ad::matmul(proj_t, a_t), ph.targets);
        const ad::Var source_score = ad::gather_rows(ad::matmul(proj_s, a_s), ph.sources);
        const ad::Var edge_score = ad::matmul(ad::matmul(edge_scalars, w_e), a_e);
        const ad::Var logits = ad::leaky_relu(
            ad::add(ad::add(target_score, source_score), edge_score), config_.leaky_slope);
        ad::Var alpha = ad::segment_softmax(logits, ph.segments);
        alpha = ad::dropout(alpha, attn_p, rng);
        const ad::Var messages = ad::gather_rows(proj_s, ph.sources);
        parts.push_back(ad::elu(ad::segment_weighted_sum(messages, alpha, ph.segments)));
      }
    }
    const ad::Var w_out = tape.variable_ref(
        parameter("gat.l" + std::to_string(index) + "." + std::string(to_string(type)) + ".W_out").value);
    out[t] = ad::matmul(ad::concat_cols(parts), w_out);
  }
  return out;
}

ad::Var GatModel::forward(ad::Tape& tape, bool training, std::mt19937_64& rng) const {
  NodeStates states = layer(tape, 0, nullptr, training, rng);
  for (std::size_t l = 1; l < config_.num_layers; ++l) states = layer(tape, l, &states, training, rng);
  const double p = training ? config_.dropout : 0.0;
  const ad::Var docs = ad::dropout(states[static_cast<std::size_t>(NodeType::doc)], p, rng);
  return ad::matmul(docs, tape.variable_ref(parameter("gat.cls.W").value));
}

std::unique_ptr<Model> make_model(const HetGraph& graph, const ModelConfig& config,
                                  std::uint64_t seed) {
  if (config.model == ModelKind::wctext_gcn) return std::make_unique<GcnModel>(graph, config, seed);
  return std::make_unique<GatModel>(graph, config, seed);
}

}  // namespace wctg
