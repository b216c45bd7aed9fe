#include "wctg/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wctg/errors.hpp"

namespace wctg::ad {

const Matrix& Var::value() const { return tape_->value(id_); }
const Matrix& Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

void Tape::check_open() const {
  if (finished_) throw std::logic_error("tape already consumed by backward()");
}

Var Tape::constant(Matrix value) {
  return record(std::move(value), false, nullptr, "constant");
}

Var Tape::variable(Matrix value) { return record(std::move(value), true, nullptr, "variable"); }

Var Tape::variable_ref(const Matrix& value) {
  check_open();
  Node node;
  node.borrowed = &value;
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  borrowers_[&value].push_back(nodes_.size() - 1);
  return {this, nodes_.size() - 1};
}

Matrix Tape::grad_of(const Matrix& value) const {
  Matrix total(value.rows(), value.cols());
  auto it = borrowers_.find(&value);
  if (it == borrowers_.end()) return total;
  for (auto id : it->second) {
    const auto& g = nodes_[id].grad;
    if (g.empty()) continue;
    for (std::size_t i = 0; i < g.size(); ++i) total.values()[i] += g.values()[i];
  }
  return total;
}

Var Tape::record(Matrix value, bool requires_grad, BackwardFn backward, const char* op) {
  check_open();
  if (!all_finite(value))
    throw NumericError(std::string("non-finite value produced by ") + op);
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  if (requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return {this, nodes_.size() - 1};
}

const Matrix& Tape::value(std::size_t id) const {
  const auto& n = nodes_.at(id);
  return n.borrowed ? *n.borrowed : n.value;
}

const Matrix& Tape::grad(std::size_t id) const { return nodes_.at(id).grad; }

Matrix& Tape::grad_buffer(std::size_t id) {
  auto& n = nodes_[id];
  if (n.grad.empty()) {
    const auto& v = value(id);
    n.grad = Matrix(v.rows(), v.cols());
  }
  return n.grad;
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  auto& n = nodes_[id];
  if (!n.requires_grad) return;
  if (n.grad.empty()) {
    n.grad = g;
    return;
  }
  auto& dst = n.grad.values();
  const auto& src = g.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::backward(Var loss) {
  check_open();
  if (&loss.tape() != this) throw std::invalid_argument("backward: loss is on another tape");
  const auto& lv = value(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1)
    throw ShapeError("backward: loss must be 1x1, got " + shape_string(lv));
  finished_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  nodes_[loss.id()].grad = Matrix(1, 1, 1.0);
  for (std::size_t id = loss.id() + 1; id-- > 0;) {
    auto& n = nodes_[id];
    if (n.backward && !n.grad.empty()) n.backward(*this, n.grad);
  }
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    auto& n = nodes_[id];
    n.backward = nullptr;
    if (n.requires_grad && n.grad.empty()) {
      const auto& v = value(id);
      n.grad = Matrix(v.rows(), v.cols());
    }
  }
}

void Segments::validate() const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= num_segments) throw std::invalid_argument("segment id out of range");
    if (i > 0 && ids[i] < ids[i - 1]) throw std::invalid_argument("segment ids must be sorted");
  }
}

namespace {

void require_same_tape(Var a, Var b, const char* op) {
  if (&a.tape() != &b.tape()) throw std::invalid_argument(std::string(op) + ": operands on different tapes");
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": " + shape_string(a) + " vs " + shape_string(b));
}

// Elementwise unary op with derivative expressed via input and output.
template <typename F, typename D>
Var unary(Var a, const char* op, F f, D dfdx) {
  Tape& t = a.tape();
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.size(); ++i) y.values()[i] = f(x.values()[i]);
  const std::size_t ia = a.id();
  const std::size_t out = t.size();
  return t.record(std::move(y), a.requires_grad(),
                  [ia, out, dfdx](Tape& tape, const Matrix& g) {
                    const Matrix& xv = tape.value(ia);
                    const Matrix& yv = tape.value(out);
                    Matrix dx(g.rows(), g.cols());
                    for (std::size_t i = 0; i < g.size(); ++i)
                      dx.values()[i] = g.values()[i] * dfdx(xv.values()[i], yv.values()[i]);
                    tape.accumulate(ia, dx);
                  },
                  op);
}

Var masked_by(Var a, std::vector<double> mask, const char* op) {
  Tape& t = a.tape();
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.values()[i] *= mask[i];
  const std::size_t ia = a.id();
  return t.record(std::move(y), a.requires_grad(),
                  [ia, mask = std::move(mask)](Tape& tape, const Matrix& g) {
                    Matrix dx = g;
                    for (std::size_t i = 0; i < dx.size(); ++i) dx.values()[i] *= mask[i];
                    tape.accumulate(ia, dx);
                  },
                  op);
}

void check_dropout_p(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("dropout p must be in [0, 1)");
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b, "matmul");
  Tape& t = a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(wctg::matmul(a.value(), b.value()), a.requires_grad() || b.requires_grad(),
                  [ia, ib](Tape& tape, const Matrix& g) {
                    if (tape.requires_grad(ia)) tape.accumulate(ia, matmul_nt(g, tape.value(ib)));
                    if (tape.requires_grad(ib)) tape.accumulate(ib, matmul_tn(tape.value(ia), g));
                  },
                  "matmul");
}

Var spmm(const SparseMatrix& s, Var x) {
  Tape& t = x.tape();
  const std::size_t ix = x.id();
  const SparseMatrix* sp = &s;
  return t.record(s.multiply(x.value()), x.requires_grad(),
                  [ix, sp](Tape& tape, const Matrix& g) {
                    tape.accumulate(ix, sp->transpose_multiply(g));
                  },
                  "spmm");
}

Var add(Var a, Var b) {
  require_same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Tape& t = a.tape();
  Matrix y = a.value();
  for (std::size_t i = 0; i < y.size(); ++i) y.values()[i] += b.value().values()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(std::move(y), a.requires_grad() || b.requires_grad(),
                  [ia, ib](Tape& tape, const Matrix& g) {
                    tape.accumulate(ia, g);
                    tape.accumulate(ib, g);
                  },
                  "add");
}

Var scale(Var a, double c) {
  return unary(a, "scale", [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var sum(Var a) {
  Tape& t = a.tape();
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  const std::size_t ia = a.id();
  return t.record(Matrix(1, 1, s), a.requires_grad(),
                  [ia](Tape& tape, const Matrix& g) {
                    const auto& x = tape.value(ia);
                    tape.accumulate(ia, Matrix(x.rows(), x.cols(), g(0, 0)));
                  },
                  "sum");
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no operands");
  Tape& t = parts.front().tape();
  const std::size_t rows = parts.front().rows();
  std::size_t cols = 0;
  bool needs_grad = false;
  std::vector<std::size_t> ids;
  for (const auto& p : parts) {
    require_same_tape(parts.front(), p, "concat_cols");
    if (p.rows() != rows)
      throw ShapeError("concat_cols: " + shape_string(parts.front().value()) + " vs " +
                       shape_string(p.value()));
    cols += p.cols();
    needs_grad = needs_grad || p.requires_grad();
    ids.push_back(p.id());
  }
  Matrix y(rows, cols);
  std::size_t off = 0;
  for (const auto& p : parts) {
    const Matrix& v = p.value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(v.row(r).begin(), v.row(r).end(), y.row(r).begin() + static_cast<std::ptrdiff_t>(off));
    off += v.cols();
  }
  return t.record(std::move(y), needs_grad,
                  [ids](Tape& tape, const Matrix& g) {
                    std::size_t off = 0;
                    for (auto id : ids) {
                      const auto width = tape.value(id).cols();
                      if (tape.requires_grad(id)) {
                        Matrix part(g.rows(), width);
                        for (std::size_t r = 0; r < g.rows(); ++r)
                          for (std::size_t c = 0; c < width; ++c) part(r, c) = g(r, off + c);
                        tape.accumulate(id, part);
                      }
                      off += width;
                    }
                  },
                  "concat_cols");
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  const Matrix& x = a.value();
  if (begin > end || end > x.rows())
    throw ShapeError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                     ") of " + shape_string(x));
  Tape& t = a.tape();
  Matrix y(end - begin, x.cols());
  std::copy(x.values().begin() + static_cast<std::ptrdiff_t>(begin * x.cols()),
            x.values().begin() + static_cast<std::ptrdiff_t>(end * x.cols()), y.values().begin());
  const std::size_t ia = a.id();
  return t.record(std::move(y), a.requires_grad(),
                  [ia, begin](Tape& tape, const Matrix& g) {
                    Matrix& dx = tape.grad_buffer(ia);
                    for (std::size_t i = 0; i < g.size(); ++i)
                      dx.values()[begin * g.cols() + i] += g.values()[i];
                  },
                  "slice_rows");
}

Var gather_rows(Var a, std::span<const std::size_t> rows) {
  const Matrix& x = a.value();
  Matrix y(rows.size(), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= x.rows())
      throw ShapeError("gather_rows: row " + std::to_string(rows[i]) + " of " + shape_string(x));
    std::copy(x.row(rows[i]).begin(), x.row(rows[i]).end(), y.row(i).begin());
  }
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  return t.record(std::move(y), a.requires_grad(),
                  [ia, idx = std::vector<std::size_t>(rows.begin(), rows.end())](
                      Tape& tape, const Matrix& g) {
                    Matrix& dx = tape.grad_buffer(ia);
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                      auto dst = dx.row(idx[i]);
                      auto src = g.row(i);
                      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
                    }
                  },
                  "gather_rows");
}

Var scale_rows(Var a, std::span<const double> factors) {
  const Matrix& x = a.value();
  if (factors.size() != x.rows())
    throw ShapeError("scale_rows: " + std::to_string(factors.size()) + " factors for " +
                     shape_string(x));
  std::vector<double> mask(x.size());
  for (std::size_t r = 0; r < x.rows(); ++r)
    std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(r * x.cols()), x.cols(), factors[r]);
  return masked_by(a, std::move(mask), "scale_rows");
}

Var relu(Var a) {
  return unary(a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var leaky_relu(Var a, double slope) {
  return unary(a, "leaky_relu", [slope](double x) { return x > 0.0 ? x : slope * x; },
               [slope](double x, double) { return x > 0.0 ? 1.0 : slope; });
}

Var elu(Var a, double alpha) {
  return unary(a, "elu", [alpha](double x) { return x > 0.0 ? x : alpha * std::expm1(x); },
               [alpha](double x, double y) { return x > 0.0 ? 1.0 : y + alpha; });
}

Var exp(Var a) {
  return unary(a, "exp", [](double x) { return std::exp(x); },
               [](double, double y) { return y; });
}

Var log(Var a) {
  return unary(a, "log", [](double x) { return std::log(x); },
               [](double x, double) { return 1.0 / x; });
}

Var row_softmax(Var a) {
  const Matrix& x = a.value();
  Matrix y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto in = x.row(r);
    auto out = y.row(r);
    if (in.empty()) continue;
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (std::size_t c = 0; c < in.size(); ++c) z += (out[c] = std::exp(in[c] - mx));
    for (auto& v : out) v /= z;
  }
  Tape& t = a.tape();
  const std::size_t ia = a.id();
  const std::size_t out_id = t.size();
  return t.record(std::move(y), a.requires_grad(),
                  [ia, out_id](Tape& tape, const Matrix& g) {
                    const Matrix& yv = tape.value(out_id);
                    Matrix dx(g.rows(), g.cols());
                    for (std::size_t r = 0; r < g.rows(); ++r) {
                      double dot = 0.0;
                      for (std::size_t c = 0; c < g.cols(); ++c) dot += g(r, c) * yv(r, c);
                      for (std::size_t c = 0; c < g.cols(); ++c) dx(r, c) = yv(r, c) * (g(r, c) - dot);
                    }
                    tape.accumulate(ia, dx);
                  },
                  "row_softmax");
}

Var segment_softmax(Var values, const Segments& segments) {
  const Matrix& x = values.value();
  if (segments.ids.size() != x.rows())
    throw ShapeError("segment_softmax: " + std::to_string(segments.ids.size()) +
                     " segment ids for " + shape_string(x));
  segments.validate();
  // Row ranges of each non-empty segment.
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t b = 0; b < x.rows();) {
    std::size_t e = b;
    while (e < x.rows() && segments.ids[e] == segments.ids[b]) ++e;
    ranges.emplace_back(b, e);
    b = e;
  }
  Matrix y(x.rows(), x.cols());
  for (const auto& [b, e] : ranges) {
    for (std::size_t c = 0; c < x.cols(); ++c) {
      double mx = x(b, c);
      for (std::size_t r = b + 1; r < e; ++r) mx = std::max(mx, x(r, c));
      double z = 0.0;
      for (std::size_t r = b; r < e; ++r) z += (y(r, c) = std::exp(x(r, c) - mx));
      for (std::size_t r = b; r < e; ++r) y(r, c) /= z;
    }
  }
  Tape& t = values.tape();
  const std::size_t ia = values.id();
  const std::size_t out_id = t.size();
  return t.record(std::move(y), values.requires_grad(),
                  [ia, out_id, ranges = std::move(ranges)](Tape& tape, const Matrix& g) {
                    const Matrix& yv = tape.value(out_id);
                    Matrix dx(g.rows(), g.cols());
                    for (const auto& [b, e] : ranges) {
                      for (std::size_t c = 0; c < g.cols(); ++c) {
                        double dot = 0.0;
                        for (std::size_t r = b; r < e; ++r) dot += g(r, c) * yv(r, c);
                        for (std::size_t r = b; r < e; ++r) dx(r, c) = yv(r, c) * (g(r, c) - dot);
                      }
                    }
                    tape.accumulate(ia, dx);
                  },
                  "segment_softmax");
}

Var segment_weighted_sum(Var values, Var weights, const Segments& segments) {
  require_same_tape(values, weights, "segment_weighted_sum");
  const Matrix& v = values.value();
  const Matrix& w = weights.value();
  if (w.cols() != 1 || w.rows() != v.rows() || segments.ids.size() != v.rows())
    throw ShapeError("segment_weighted_sum: values " + shape_string(v) + ", weights " +
                     shape_string(w) + ", " + std::to_string(segments.ids.size()) + " segment ids");
  segments.validate();
  Matrix y(segments.num_segments, v.cols());
  for (std::size_t r = 0; r < v.rows(); ++r) {
    auto out = y.row(segments.ids[r]);
    auto in = v.row(r);
    const double wr = w(r, 0);
    for (std::size_t c = 0; c < in.size(); ++c) out[c] += wr * in[c];
  }
  Tape& t = values.tape();
  const std::size_t iv = values.id(), iw = weights.id();
  return t.record(std::move(y), values.requires_grad() || weights.requires_grad(),
                  [iv, iw, seg = segments.ids](Tape& tape, const Matrix& g) {
                    const Matrix& vv = tape.value(iv);
                    const Matrix& wv = tape.value(iw);
                    if (tape.requires_grad(iv)) {
                      Matrix dv(vv.rows(), vv.cols());
                      for (std::size_t r = 0; r < vv.rows(); ++r) {
                        auto gs = g.row(seg[r]);
                        auto out = dv.row(r);
                        for (std::size_t c = 0; c < out.size(); ++c) out[c] = wv(r, 0) * gs[c];
                      }
                      tape.accumulate(iv, dv);
                    }
                    if (tape.requires_grad(iw)) {
                      Matrix dw(wv.rows(), 1);
                      for (std::size_t r = 0; r < vv.rows(); ++r) {
                        auto gs = g.row(seg[r]);
                        auto in = vv.row(r);
                        double dot = 0.0;
                        for (std::size_t c = 0; c < in.size(); ++c) dot += gs[c] * in[c];
                        dw(r, 0) = dot;
                      }
                      tape.accumulate(iw, dw);
                    }
                  },
                  "segment_weighted_sum");
}

Var dropout(Var a, double p, std::mt19937_64& rng) {
  check_dropout_p(p);
  if (p == 0.0) return a;
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<double> mask(a.value().size());
  const double kept = 1.0 / (1.0 - p);
  for (auto& m : mask) m = keep(rng) ? kept : 0.0;
  return masked_by(a, std::move(mask), "dropout");
}

Var dropout(Var a, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return dropout(a, p, rng);
}

Var row_dropout(Var a, double p, std::mt19937_64& rng) {
  check_dropout_p(p);
  if (p == 0.0) return a;
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<double> factors(a.rows());
  const double kept = 1.0 / (1.0 - p);
  for (auto& f : factors) f = keep(rng) ? kept : 0.0;
  return scale_rows(a, factors);
}

Var masked_cross_entropy(Var logits, std::span<const std::size_t> labels,
                         std::span<const std::size_t> rows) {
  const Matrix& x = logits.value();
  if (rows.empty()) throw std::invalid_argument("masked_cross_entropy: empty mask");
  if (labels.size() != x.rows())
    throw ShapeError("masked_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     shape_string(x));
  Matrix probs(rows.size(), x.cols());
  double loss = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t r = rows[k];
    if (r >= x.rows() || labels[r] >= x.cols())
      throw ShapeError("masked_cross_entropy: row or label out of range");
    auto in = x.row(r);
    const double mx = *std::max_element(in.begin(), in.end());
    double z = 0.0;
    for (double v : in) z += std::exp(v - mx);
    const double log_z = mx + std::log(z);
    for (std::size_t c = 0; c < in.size(); ++c) probs(k, c) = std::exp(in[c] - log_z);
    loss += log_z - in[labels[r]];
  }
  const double n = static_cast<double>(rows.size());
  Tape& t = logits.tape();
  const std::size_t ia = logits.id();
  return t.record(
      Matrix(1, 1, loss / n), logits.requires_grad(),
      [ia, n, probs = std::move(probs), idx = std::vector<std::size_t>(rows.begin(), rows.end()),
       lab = std::vector<std::size_t>(labels.begin(), labels.end())](Tape& tape, const Matrix& g) {
        Matrix& dx = tape.grad_buffer(ia);
        const double s = g(0, 0) / n;
        for (std::size_t k = 0; k < idx.size(); ++k) {
          auto out = dx.row(idx[k]);
          for (std::size_t c = 0; c < out.size(); ++c)
            out[c] += s * (probs(k, c) - (c == lab[idx[k]] ? 1.0 : 0.0));
        }
      },
      "masked_cross_entropy");
}

}  // namespace wctg::ad
