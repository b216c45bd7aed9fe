#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wctg/corpus.hpp"
#include "wctg/sparse.hpp"
#include "wctg/text_stats.hpp"

namespace wctg {

// Block order of the flat node id space.
enum class NodeType : std::size_t { doc = 0, word = 1, gram = 2, chargram = 3 };
inline constexpr std::size_t kNodeTypes = 4;

std::string_view to_string(NodeType t);
std::optional<NodeType> parse_node_type(std::string_view s);

struct NodeRef {
  NodeType type;
  std::size_t index;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

// "word:42" style references.
std::optional<NodeRef> parse_node_ref(std::string_view s);

enum class EdgeType : std::size_t { dw = 0, dg = 1, ww = 2, dd = 3, gw = 4, cw = 5 };
inline constexpr std::size_t kEdgeTypes = 6;

std::string_view to_string(EdgeType t);
std::optional<EdgeType> parse_edge_type(std::string_view s);
NodeType source_type(EdgeType t);
NodeType target_type(EdgeType t);
// ww and dd join nodes of the same type and are stored once with src < dst.
bool is_homogeneous(EdgeType t);

inline constexpr std::array<EdgeType, kEdgeTypes> kAllEdgeTypes = {
    EdgeType::dw, EdgeType::dg, EdgeType::ww, EdgeType::dd, EdgeType::gw, EdgeType::cw};

struct Edge {
  std::size_t src;  // index within source_type(etype)
  std::size_t dst;  // index within target_type(etype)
  double weight;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct AblationFlags {
  bool use_grams = true;
  bool use_chargrams = true;
  bool use_doc_sim = true;
};

// Word-character heterogeneous text graph. Edge lists are kept in canonical
// order (sorted by src, dst).
struct HetGraph {
  std::array<std::vector<std::string>, kNodeTypes> keys;
  std::array<std::vector<Edge>, kEdgeTypes> edges;
  std::vector<std::string> class_names;
  std::vector<std::size_t> labels;  // per doc, index into class_names
  std::vector<Split> splits;        // per doc

  std::size_t count(NodeType t) const { return keys[static_cast<std::size_t>(t)].size(); }
  std::size_t total_nodes() const;
  std::size_t offset(NodeType t) const;
  std::size_t flat_id(NodeRef n) const { return offset(n.type) + n.index; }
  NodeRef node_at(std::size_t flat) const;

  const std::vector<Edge>& edges_of(EdgeType t) const {
    return edges[static_cast<std::size_t>(t)];
  }
  std::vector<Edge>& edges_of(EdgeType t) { return edges[static_cast<std::size_t>(t)]; }
  std::size_t edge_count() const;

  // Throws DataError describing the first violated invariant.
  void validate() const;
  void canonicalize();

  friend bool operator==(const HetGraph&, const HetGraph&) = default;
};

HetGraph build_graph(const Corpus& corpus, const StatTables& stats);

// Drops disabled node types (with their edges) and/or doc-doc similarity edges.
HetGraph ablate(const HetGraph& graph, const AblationFlags& flags);

// Symmetric block adjacency over the flat node space.
SparseMatrix assemble_adjacency(const HetGraph& graph, bool self_loops);

// D^{-1/2} A D^{-1/2} with D the row sums of A.
SparseMatrix normalize_adjacency(const SparseMatrix& a);

struct Neighbor {
  EdgeType etype;
  NodeRef node;
  double weight;
};

// Neighbors of `node` grouped by edge type (kAllEdgeTypes order), each group
// sorted by weight descending.
std::vector<Neighbor> neighbors(const HetGraph& graph, NodeRef node);

// Line-oriented "WCTG v1" text format.
void write_graph(const HetGraph& graph, std::ostream& out);
HetGraph read_graph(std::istream& in);
void save_graph(const HetGraph& graph, const std::filesystem::path& path);
HetGraph load_graph(const std::filesystem::path& path);

}  // namespace wctg
