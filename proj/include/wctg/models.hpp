#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wctg/autodiff.hpp"
#include "wctg/het_graph.hpp"
#include "wctg/matrix.hpp"

namespace wctg {

enum class ModelKind { wctext_gcn, wctext_gat };

std::string_view to_string(ModelKind k);
std::optional<ModelKind> parse_model_kind(std::string_view s);

struct ModelConfig {
  ModelKind model = ModelKind::wctext_gcn;
  std::size_t hidden_dim = 200;
  std::size_t num_layers = 2;
  std::size_t heads = 8;
  std::size_t head_dim = 16;
  std::size_t edge_dim = 32;
  double dropout = 0.5;
  bool attention_dropout = true;
  double leaky_slope = 0.2;
  AblationFlags ablation;

  void validate() const;
};

struct Parameter {
  std::string name;
  Matrix value;
  // Set when rows are indexed by the nodes of one type (1-of-K inputs).
  std::optional<NodeType> row_nodes;
  // Set when rows are indexed by flat node id.
  bool flat_rows = false;
};

class Model {
 public:
  virtual ~Model() = default;

  // Logits of every document node, n_docs x num_classes.
  virtual ad::Var forward(ad::Tape& tape, bool training, std::mt19937_64& rng) const = 0;

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  Parameter& parameter(std::string_view name);
  const Parameter& parameter(std::string_view name) const;

  // The graph after ablation; node indices refer to it.
  const HetGraph& graph() const { return graph_; }
  const ModelConfig& config() const { return config_; }
  std::size_t num_classes() const { return graph_.class_names.size(); }

 protected:
  Model(const HetGraph& graph, const ModelConfig& config);

  // Glorot-uniform initialized parameter.
  std::size_t add_glorot(std::string name, std::size_t rows, std::size_t cols, std::mt19937_64& rng);
  std::size_t add_zeros(std::string name, std::size_t rows, std::size_t cols);

  HetGraph graph_;
  ModelConfig config_;
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Two-layer (by default) GCN over the normalized block adjacency with
// identity input features.
class GcnModel final : public Model {
 public:
  GcnModel(const HetGraph& graph, const ModelConfig& config, std::uint64_t seed);

  ad::Var forward(ad::Tape& tape, bool training, std::mt19937_64& rng) const override;

  const SparseMatrix& normalized_adjacency() const { return a_hat_; }

 private:
  SparseMatrix a_hat_;
  SparseMatrix a_hat_docs_;  // doc rows of a_hat_
};

// Node types each type attends over, one phase per entry.
const std::vector<NodeType>& phase_sources(NodeType target);

// Neighbor lists of one phase, sorted by target then source.
struct Phase {
  NodeType target;
  NodeType source;
  std::vector<std::size_t> targets;
  std::vector<std::size_t> sources;
  Matrix weights;  // E x 1 edge scalars
  ad::Segments segments;
};

// Phases whose source type has at least one node, in phase_sources order.
std::vector<Phase> build_phases(const HetGraph& graph, NodeType target);

using NodeStates = std::array<ad::Var, kNodeTypes>;

// Multi-phase, multi-head attention network over the heterogeneous graph.
class GatModel final : public Model {
 public:
  GatModel(const HetGraph& graph, const ModelConfig& config, std::uint64_t seed);

  ad::Var forward(ad::Tape& tape, bool training, std::mt19937_64& rng) const override;

  // One attention layer. `inputs` is null for the first layer (1-of-K features).
  NodeStates layer(ad::Tape& tape, std::size_t index, const NodeStates* inputs, bool training,
                   std::mt19937_64& rng) const;

  const std::vector<Phase>& phases(NodeType target) const {
    return phases_[static_cast<std::size_t>(target)];
  }

  static std::string param_prefix(std::size_t layer, const Phase& phase, std::size_t head);

 private:
  std::array<std::vector<Phase>, kNodeTypes> phases_;
};

std::unique_ptr<Model> make_model(const HetGraph& graph, const ModelConfig& config,
                                  std::uint64_t seed);

}  // namespace wctg
