#include "wctg/het_graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "wctg/errors.hpp"

namespace wctg {

namespace {

constexpr std::array<std::string_view, kNodeTypes> kNodeTypeNames = {"doc", "word", "gram",
                                                                     "chargram"};
constexpr std::array<std::string_view, kEdgeTypes> kEdgeTypeNames = {"dw", "dg", "ww",
                                                                     "dd", "gw", "cw"};

bool edge_less(const Edge& a, const Edge& b) {
  return a.src != b.src ? a.src < b.src : a.dst < b.dst;
}

}  // namespace

std::string_view to_string(NodeType t) { return kNodeTypeNames[static_cast<std::size_t>(t)]; }

std::optional<NodeType> parse_node_type(std::string_view s) {
  for (std::size_t i = 0; i < kNodeTypes; ++i)
    if (kNodeTypeNames[i] == s) return static_cast<NodeType>(i);
  return std::nullopt;
}

std::optional<NodeRef> parse_node_ref(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  const auto type = parse_node_type(s.substr(0, colon));
  if (!type) return std::nullopt;
  const auto digits = s.substr(colon + 1);
  std::size_t index = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty())
    return std::nullopt;
  return NodeRef{*type, index};
}

std::string_view to_string(EdgeType t) { return kEdgeTypeNames[static_cast<std::size_t>(t)]; }

std::optional<EdgeType> parse_edge_type(std::string_view s) {
  for (std::size_t i = 0; i < kEdgeTypes; ++i)
    if (kEdgeTypeNames[i] == s) return static_cast<EdgeType>(i);
  return std::nullopt;
}

NodeType source_type(EdgeType t) {
  switch (t) {
    case EdgeType::dw:
    case EdgeType::dg:
    case EdgeType::dd: return NodeType::doc;
    case EdgeType::ww: return NodeType::word;
    case EdgeType::gw: return NodeType::gram;
    case EdgeType::cw: return NodeType::chargram;
  }
  return NodeType::doc;
}

NodeType target_type(EdgeType t) {
  switch (t) {
    case EdgeType::dw:
    case EdgeType::ww:
    case EdgeType::gw:
    case EdgeType::cw: return NodeType::word;
    case EdgeType::dg: return NodeType::gram;
    case EdgeType::dd: return NodeType::doc;
  }
  return NodeType::word;
}

bool is_homogeneous(EdgeType t) { return t == EdgeType::ww || t == EdgeType::dd; }

std::size_t HetGraph::total_nodes() const {
  std::size_t n = 0;
  for (const auto& k : keys) n += k.size();
  return n;
}

std::size_t HetGraph::offset(NodeType t) const {
  std::size_t off = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(t); ++i) off += keys[i].size();
  return off;
}

NodeRef HetGraph::node_at(std::size_t flat) const {
  for (std::size_t i = 0; i < kNodeTypes; ++i) {
    if (flat < keys[i].size()) return {static_cast<NodeType>(i), flat};
    flat -= keys[i].size();
  }
  throw DataError("flat node id out of range");
}

std::size_t HetGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& e : edges) n += e.size();
  return n;
}

void HetGraph::canonicalize() {
  for (auto etype : kAllEdgeTypes) {
    auto& list = edges_of(etype);
    if (is_homogeneous(etype))
      for (auto& e : list)
        if (e.src > e.dst) std::swap(e.src, e.dst);
    std::sort(list.begin(), list.end(), edge_less);
  }
}

void HetGraph::validate() const {
  const std::size_t n_docs = count(NodeType::doc);
  if (labels.size() != n_docs || splits.size() != n_docs)
    throw DataError("label/split vectors do not match the " + std::to_string(n_docs) +
                    " document nodes");
  for (auto l : labels)
    if (l >= class_names.size()) throw DataError("label index out of range");

  for (auto etype : kAllEdgeTypes) {
    const auto& list = edges_of(etype);
    const std::string name(to_string(etype));
    const auto n_src = count(source_type(etype));
    const auto n_dst = count(target_type(etype));
    for (std::size_t k = 0; k < list.size(); ++k) {
      const auto& e = list[k];
      if (e.src >= n_src || e.dst >= n_dst)
        throw DataError(name + " edge (" + std::to_string(e.src) + ", " + std::to_string(e.dst) +
                        ") references a missing node");
      if (!std::isfinite(e.weight) || e.weight <= 0.0)
        throw DataError(name + " edge has non-positive or non-finite weight");
      if ((etype == EdgeType::gw || etype == EdgeType::cw) && e.weight != 1.0)
        throw DataError(name + " edge weight must be exactly 1");
      if (etype == EdgeType::dd && e.weight > 1.0)
        throw DataError("dd edge similarity exceeds 1");
      if (is_homogeneous(etype) && e.src >= e.dst)
        throw DataError(name + " edge must satisfy src < dst");
      if (k > 0 && !edge_less(list[k - 1], e))
        throw DataError(name + " edges unsorted or duplicated");
    }
  }
}

HetGraph build_graph(const Corpus& corpus, const StatTables& stats) {
  HetGraph g;
  auto& docs = g.keys[static_cast<std::size_t>(NodeType::doc)];
  for (const auto& d : corpus.documents()) {
    docs.push_back(d.id);
    g.labels.push_back(corpus.label_index(d.label));
    g.splits.push_back(d.split);
  }
  g.class_names = corpus.labels();
  g.keys[static_cast<std::size_t>(NodeType::word)] = corpus.vocabulary().words();
  g.keys[static_cast<std::size_t>(NodeType::gram)] = stats.gram_keys;
  g.keys[static_cast<std::size_t>(NodeType::chargram)] = stats.chargram_keys;

  auto add_table = [&](EdgeType etype, const SparseTable& table, bool upper_only) {
    auto& list = g.edges_of(etype);
    for (const auto& e : table) {
      if (upper_only && e.row >= e.col) continue;
      if (e.value == 0.0) continue;
      list.push_back({e.row, e.col, e.value});
    }
  };
  auto add_pairs = [&](EdgeType etype, const PairSet& pairs) {
    auto& list = g.edges_of(etype);
    for (const auto& [a, b] : pairs) list.push_back({a, b, 1.0});
  };
  add_table(EdgeType::dw, stats.tfidf_dw, false);
  add_table(EdgeType::dg, stats.tfidf_dg, false);
  add_table(EdgeType::ww, stats.pmi_ww, true);
  add_table(EdgeType::dd, stats.sim_dd, true);
  add_pairs(EdgeType::gw, stats.contain_gw);
  add_pairs(EdgeType::cw, stats.contain_cw);

  g.canonicalize();
  try {
    g.validate();
  } catch (const DataError& e) {
    throw DataError(std::string("statistics do not match the corpus: ") + e.what());
  }
  return g;
}

HetGraph ablate(const HetGraph& graph, const AblationFlags& flags) {
  HetGraph g = graph;
  if (!flags.use_grams) {
    g.keys[static_cast<std::size_t>(NodeType::gram)].clear();
    g.edges_of(EdgeType::dg).clear();
    g.edges_of(EdgeType::gw).clear();
  }
  if (!flags.use_chargrams) {
    g.keys[static_cast<std::size_t>(NodeType::chargram)].clear();
    g.edges_of(EdgeType::cw).clear();
  }
  if (!flags.use_doc_sim) g.edges_of(EdgeType::dd).clear();
  return g;
}

SparseMatrix assemble_adjacency(const HetGraph& graph, bool self_loops) {
  const std::size_t n = graph.total_nodes();
  std::vector<Triplet> t;
  t.reserve(2 * graph.edge_count() + (self_loops ? n : 0));
  for (auto etype : kAllEdgeTypes) {
    const auto src_off = graph.offset(source_type(etype));
    const auto dst_off = graph.offset(target_type(etype));
    for (const auto& e : graph.edges_of(etype)) {
      t.push_back({src_off + e.src, dst_off + e.dst, e.weight});
      t.push_back({dst_off + e.dst, src_off + e.src, e.weight});
    }
  }
  if (self_loops)
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return SparseMatrix::from_triplets(n, n, std::move(t));
}

SparseMatrix normalize_adjacency(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("normalize_adjacency: matrix is not square");
  const auto degree = a.row_sums();
  for (std::size_t i = 0; i < degree.size(); ++i)
    if (!(degree[i] > 0.0))
      throw NumericError("node " + std::to_string(i) + " has zero degree; add self-loops");
  auto entries = a.triplets();
  // sqrt(d_i * d_j) is symmetric in i, j, so the result stays exactly symmetric.
  for (auto& e : entries) e.value = e.value / std::sqrt(degree[e.row] * degree[e.col]);
  return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(entries));
}

std::vector<Neighbor> neighbors(const HetGraph& graph, NodeRef node) {
  if (node.index >= graph.count(node.type))
    throw DataError("unknown node " + std::string(to_string(node.type)) + ":" +
                    std::to_string(node.index));
  std::vector<Neighbor> out;
  for (auto etype : kAllEdgeTypes) {
    const auto src_t = source_type(etype);
    const auto dst_t = target_type(etype);
    const auto group_begin = out.size();
    for (const auto& e : graph.edges_of(etype)) {
      if (src_t == node.type && e.src == node.index)
        out.push_back({etype, {dst_t, e.dst}, e.weight});
      else if (dst_t == node.type && e.dst == node.index)
        out.push_back({etype, {src_t, e.src}, e.weight});
    }
    std::stable_sort(out.begin() + static_cast<std::ptrdiff_t>(group_begin), out.end(),
                     [](const Neighbor& a, const Neighbor& b) { return a.weight > b.weight; });
  }
  return out;
}

}  // namespace wctg
