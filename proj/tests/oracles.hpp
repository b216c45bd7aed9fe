#pragma once

// Brute-force reference implementations used only by tests. They read the
// same inputs as the library but share none of its code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "wctg/autodiff.hpp"
#include "wctg/corpus.hpp"
#include "wctg/het_graph.hpp"
#include "wctg/matrix.hpp"
#include "wctg/models.hpp"
#include "wctg/text_stats.hpp"

namespace oracle {

using wctg::Matrix;

// ---------------------------------------------------------------- statistics

// tf-idf by scanning raw token lists; dense n_docs x n_terms.
inline Matrix tfidf_dense(const std::vector<std::vector<std::size_t>>& docs, std::size_t n_terms) {
  Matrix out(docs.size(), n_terms);
  for (std::size_t t = 0; t < n_terms; ++t) {
    std::size_t df = 0;
    for (const auto& d : docs)
      if (std::find(d.begin(), d.end(), t) != d.end()) ++df;
    if (df == 0) continue;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      const auto tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), t));
      out(d, t) = tf * std::log(static_cast<double>(docs.size()) / static_cast<double>(df));
    }
  }
  return out;
}

// PMI by materializing every window and testing membership pair by pair.
inline Matrix pmi_dense(const std::vector<std::vector<std::size_t>>& docs, std::size_t n_words,
                        std::size_t window) {
  std::vector<std::vector<std::size_t>> windows;
  for (const auto& d : docs) {
    if (d.size() <= window) {
      windows.push_back(d);
      continue;
    }
    for (std::size_t s = 0; s + window <= d.size(); ++s)
      windows.emplace_back(d.begin() + static_cast<long>(s), d.begin() + static_cast<long>(s + window));
  }
  auto contains = [](const std::vector<std::size_t>& w, std::size_t x) {
    return std::find(w.begin(), w.end(), x) != w.end();
  };
  Matrix out(n_words, n_words);
  const double total = static_cast<double>(windows.size());
  for (std::size_t i = 0; i < n_words; ++i) {
    for (std::size_t j = 0; j < n_words; ++j) {
      if (i == j) continue;
      double wi = 0, wj = 0, wij = 0;
      for (const auto& w : windows) {
        const bool a = contains(w, i), b = contains(w, j);
        wi += a;
        wj += b;
        wij += a && b;
      }
      if (wij == 0) continue;
      const double v = std::log(wij * total / (wi * wj));
      if (v > 0) out(i, j) = v;
    }
  }
  return out;
}

inline Matrix cosine_dense(const Matrix& x, double threshold) {
  Matrix out(x.rows(), x.rows());
  for (std::size_t a = 0; a < x.rows(); ++a) {
    for (std::size_t b = 0; b < x.rows(); ++b) {
      if (a == b) continue;
      double dot = 0, na = 0, nb = 0;
      for (std::size_t c = 0; c < x.cols(); ++c) {
        dot += x(a, c) * x(b, c);
        na += x(a, c) * x(a, c);
        nb += x(b, c) * x(b, c);
      }
      if (na == 0 || nb == 0) continue;
      const double s = std::min(1.0, dot / std::sqrt(na * nb));
      if (s > 0 && s >= threshold) out(a, b) = s;
    }
  }
  return out;
}

inline Matrix table_dense(const wctg::SparseTable& t, std::size_t rows, std::size_t cols) {
  Matrix out(rows, cols);
  for (const auto& e : t) out(e.row, e.col) = e.value;
  return out;
}

// ---------------------------------------------------------------- graphs

// Dense adjacency built straight from the typed edge lists.
inline Matrix adjacency_dense(const wctg::HetGraph& g, bool self_loops) {
  std::size_t off[4];
  std::size_t n = 0;
  for (std::size_t t = 0; t < 4; ++t) {
    off[t] = n;
    n += g.keys[t].size();
  }
  // (edge tag, source type, target type)
  const std::vector<std::tuple<wctg::EdgeType, int, int>> blocks = {
      {wctg::EdgeType::dw, 0, 1}, {wctg::EdgeType::dg, 0, 2}, {wctg::EdgeType::ww, 1, 1},
      {wctg::EdgeType::dd, 0, 0}, {wctg::EdgeType::gw, 2, 1}, {wctg::EdgeType::cw, 3, 1}};
  Matrix a(n, n);
  for (const auto& [et, st, tt] : blocks) {
    for (const auto& e : g.edges_of(et)) {
      a(off[st] + e.src, off[tt] + e.dst) = e.weight;
      a(off[tt] + e.dst, off[st] + e.src) = e.weight;
    }
  }
  if (self_loops)
    for (std::size_t i = 0; i < n; ++i) a(i, i) += 1.0;
  return a;
}

inline Matrix normalize_dense(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  std::vector<double> d(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d[i] += a(i, j);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      out(i, j) = a(i, j) / (std::sqrt(d[i]) * std::sqrt(d[j]));
  return out;
}

inline Matrix dense_mul(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

// Plain dense GCN: relu chain over the normalized adjacency, doc rows of the last layer.
inline Matrix gcn_logits(const wctg::GcnModel& model) {
  const auto& g = model.graph();
  const Matrix a_hat = normalize_dense(adjacency_dense(g, true));
  const std::size_t layers = model.config().num_layers;
  Matrix h = Matrix::identity(g.total_nodes());
  for (std::size_t l = 0; l < layers; ++l) {
    h = dense_mul(a_hat, dense_mul(h, model.parameter("gcn.W" + std::to_string(l)).value));
    if (l + 1 < layers)
      for (auto& v : h.values()) v = std::max(0.0, v);
  }
  Matrix docs(g.keys[0].size(), h.cols());
  for (std::size_t i = 0; i < docs.rows(); ++i)
    for (std::size_t j = 0; j < docs.cols(); ++j) docs(i, j) = h(i, j);
  return docs;
}

struct Link {
  std::size_t neighbor;
  double weight;
};

// Neighbors of node (t, i) of type s by scanning every edge list.
inline std::vector<Link> typed_neighbors(const wctg::HetGraph& g, int t, std::size_t i, int s) {
  const std::vector<std::tuple<wctg::EdgeType, int, int>> blocks = {
      {wctg::EdgeType::dw, 0, 1}, {wctg::EdgeType::dg, 0, 2}, {wctg::EdgeType::ww, 1, 1},
      {wctg::EdgeType::dd, 0, 0}, {wctg::EdgeType::gw, 2, 1}, {wctg::EdgeType::cw, 3, 1}};
  std::vector<Link> out;
  for (const auto& [et, st, tt] : blocks) {
    for (const auto& e : g.edges_of(et)) {
      if (st == t && tt == s && e.src == i) out.push_back({e.dst, e.weight});
      if (tt == t && st == s && e.dst == i) out.push_back({e.src, e.weight});
    }
  }
  return out;
}

inline std::vector<double> row_times(const std::vector<double>& x, const Matrix& w) {
  std::vector<double> out(w.cols(), 0.0);
  for (std::size_t k = 0; k < w.rows(); ++k)
    for (std::size_t c = 0; c < w.cols(); ++c) out[c] += x[k] * w(k, c);
  return out;
}

inline std::vector<double> matrix_row(const Matrix& m, std::size_t r) {
  return {m.row(r).begin(), m.row(r).end()};
}

// One attention layer computed node by node, edge by edge. `inputs` empty
// means identity features.
inline std::vector<Matrix> gat_layer(const wctg::GatModel& model, std::size_t layer,
                                     const std::vector<Matrix>& inputs) {
  static const std::vector<std::vector<int>> sources = {{0, 1, 2}, {0, 1, 2, 3}, {0, 1}, {1}};
  static const char* names[] = {"doc", "word", "gram", "chargram"};
  const auto& g = model.graph();
  const auto& cfg = model.config();
  const std::size_t hd = cfg.head_dim;
  auto feature_proj = [&](int type, std::size_t node, const Matrix& w) {
    if (inputs.empty()) return matrix_row(w, node);
    return row_times(matrix_row(inputs[static_cast<std::size_t>(type)], node), w);
  };
  std::vector<Matrix> out(4);
  for (int t = 0; t < 4; ++t) {
    const std::size_t n = g.keys[static_cast<std::size_t>(t)].size();
    if (n == 0) continue;
    std::vector<int> active;
    for (int s : sources[static_cast<std::size_t>(t)])
      if (!g.keys[static_cast<std::size_t>(s)].empty()) active.push_back(s);
    const std::string base = "gat.l" + std::to_string(layer) + ".";
    const Matrix& w_out = model.parameter(base + names[t] + ".W_out").value;
    out[static_cast<std::size_t>(t)] = Matrix(n, w_out.cols());
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> concat;
      for (int s : active) {
        const auto links = typed_neighbors(g, t, i, s);
        for (std::size_t h = 0; h < cfg.heads; ++h) {
          const std::string p = base + names[t] + "<-" + names[s] + ".h" + std::to_string(h) + ".";
          const Matrix& wv = model.parameter(p + "W_v").value;
          const Matrix& wt = model.parameter(p + "W_t").value;
          const Matrix& we = model.parameter(p + "W_e").value;
          const Matrix& a = model.parameter(p + "a").value;
          const auto hi = feature_proj(t, i, wv);
          std::vector<double> z;
          std::vector<std::vector<double>> hj;
          for (const auto& l : links) {
            hj.push_back(feature_proj(s, l.neighbor, wt));
            double score = 0;
            for (std::size_t c = 0; c < hd; ++c) score += a(c, 0) * hi[c] + a(hd + c, 0) * hj.back()[c];
            for (std::size_t c = 0; c < cfg.edge_dim; ++c) score += a(2 * hd + c, 0) * we(0, c) * l.weight;
            z.push_back(score > 0 ? score : cfg.leaky_slope * score);
          }
          std::vector<double> agg(hd, 0.0);
          if (!z.empty()) {
            const double mx = *std::max_element(z.begin(), z.end());
            double denom = 0;
            for (double v : z) denom += std::exp(v - mx);
            for (std::size_t j = 0; j < z.size(); ++j) {
              const double alpha = std::exp(z[j] - mx) / denom;
              for (std::size_t c = 0; c < hd; ++c) agg[c] += alpha * hj[j][c];
            }
          }
          for (double v : agg) concat.push_back(v > 0 ? v : std::expm1(v));
        }
      }
      const auto row = row_times(concat, w_out);
      std::copy(row.begin(), row.end(), out[static_cast<std::size_t>(t)].row(i).begin());
    }
  }
  return out;
}

inline Matrix gat_logits(const wctg::GatModel& model) {
  std::vector<Matrix> states = gat_layer(model, 0, {});
  for (std::size_t l = 1; l < model.config().num_layers; ++l) states = gat_layer(model, l, states);
  return dense_mul(states[0], model.parameter("gat.cls.W").value);
}

// ---------------------------------------------------------------- gradients

struct GradCheck {
  double worst = 0.0;  // max |analytic - numeric| / max(1, |numeric|)
};

// Central differences of a scalar function of `inputs`, compared against the
// tape's gradients. `build` must be deterministic.
inline GradCheck check_gradients(
    std::vector<Matrix> inputs,
    const std::function<wctg::ad::Var(wctg::ad::Tape&, const std::vector<wctg::ad::Var>&)>& build,
    double eps = 1e-6) {
  auto evaluate = [&](const std::vector<Matrix>& xs) {
    wctg::ad::Tape tape;
    std::vector<wctg::ad::Var> vars;
    for (const auto& x : xs) vars.push_back(tape.variable(x));
    return build(tape, vars).value()(0, 0);
  };
  wctg::ad::Tape tape;
  std::vector<wctg::ad::Var> vars;
  for (const auto& x : inputs) vars.push_back(tape.variable(x));
  tape.backward(build(tape, vars));

  GradCheck result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Matrix analytic = vars[k].grad();
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double orig = inputs[k].values()[i];
      inputs[k].values()[i] = orig + eps;
      const double up = evaluate(inputs);
      inputs[k].values()[i] = orig - eps;
      const double down = evaluate(inputs);
      inputs[k].values()[i] = orig;
      const double numeric = (up - down) / (2 * eps);
      const double err = std::abs(analytic.values()[i] - numeric) / std::max(1.0, std::abs(numeric));
      result.worst = std::max(result.worst, err);
    }
  }
  return result;
}

// Same check against every parameter of a model; the loss is the masked
// cross-entropy over train rows with dropout masks fixed by `seed`.
inline GradCheck check_model_gradients(wctg::Model& model, std::uint64_t seed, double eps = 1e-6) {
  const auto& g = model.graph();
  std::vector<std::size_t> rows;
  for (std::size_t d = 0; d < g.splits.size(); ++d)
    if (g.splits[d] == wctg::Split::train) rows.push_back(d);
  auto loss_value = [&] {
    wctg::ad::Tape tape;
    std::mt19937_64 rng(seed);
    return wctg::ad::masked_cross_entropy(model.forward(tape, true, rng), g.labels, rows).value()(0, 0);
  };
  wctg::ad::Tape tape;
  std::mt19937_64 rng(seed);
  tape.backward(wctg::ad::masked_cross_entropy(model.forward(tape, true, rng), g.labels, rows));

  GradCheck result;
  for (auto& p : model.parameters()) {
    const Matrix analytic = tape.grad_of(p.value);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double orig = p.value.values()[i];
      p.value.values()[i] = orig + eps;
      const double up = loss_value();
      p.value.values()[i] = orig - eps;
      const double down = loss_value();
      p.value.values()[i] = orig;
      const double numeric = (up - down) / (2 * eps);
      const double err = std::abs(analytic.values()[i] - numeric) / std::max(1.0, std::abs(numeric));
      result.worst = std::max(result.worst, err);
    }
  }
  return result;
}

}  // namespace oracle
