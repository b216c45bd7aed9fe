#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wctg/matrix.hpp"
#include "wctg/sparse.hpp"

namespace wctg::ad {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Matrix& value() const;
  // Gradient of the last backward() loss; zeros if nothing flowed here.
  const Matrix& grad() const;
  bool requires_grad() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Records primitive applications in execution order; backward() replays them
// in reverse. A tape supports exactly one backward pass.
class Tape {
 public:
  // Receives the output gradient; accumulates into inputs via Tape::accumulate.
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);
  // Leaf that borrows `value`; it must outlive the tape. Used for parameters.
  Var variable_ref(const Matrix& value);

  void backward(Var loss);

  // Sum of gradients over every variable_ref() leaf borrowing `value`; zeros
  // (shaped like `value`) when it was never referenced.
  Matrix grad_of(const Matrix& value) const;

  const Matrix& value(std::size_t id) const;
  const Matrix& grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const { return nodes_.size(); }
  bool finished() const { return finished_; }

  // Primitive plumbing.
  Var record(Matrix value, bool requires_grad, BackwardFn backward, const char* op);
  void accumulate(std::size_t id, const Matrix& g);
  // Lazily sized gradient buffer, for primitives that scatter into it.
  Matrix& grad_buffer(std::size_t id);

 private:
  struct Node {
    Matrix value;
    const Matrix* borrowed = nullptr;
    Matrix grad;
    bool requires_grad = false;
    BackwardFn backward;
  };

  void check_open() const;

  std::vector<Node> nodes_;
  std::unordered_map<const Matrix*, std::vector<std::size_t>> borrowers_;
  bool finished_ = false;
};

// Sorted segment ids (non-decreasing) assigning each row to one of
// `num_segments` groups.
struct Segments {
  std::vector<std::size_t> ids;
  std::size_t num_segments = 0;

  // Throws std::invalid_argument when ids are unsorted or out of range.
  void validate() const;
};

Var matmul(Var a, Var b);
// `s` is constant and must outlive the tape.
Var spmm(const SparseMatrix& s, Var x);
Var add(Var a, Var b);
Var scale(Var a, double c);
Var sum(Var a);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var gather_rows(Var a, std::span<const std::size_t> rows);
// Multiplies row i by factors[i] (constant).
Var scale_rows(Var a, std::span<const double> factors);

Var relu(Var a);
Var leaky_relu(Var a, double slope = 0.2);
Var elu(Var a, double alpha = 1.0);
Var exp(Var a);
Var log(Var a);
Var row_softmax(Var a);

// Softmax over the rows of each segment, independently per column.
Var segment_softmax(Var values, const Segments& segments);
// out[s] = sum over rows r in segment s of weights[r] * values[r]; weights is E x 1.
Var segment_weighted_sum(Var values, Var weights, const Segments& segments);

// Inverted dropout; p == 0 returns `a` unchanged.
Var dropout(Var a, double p, std::mt19937_64& rng);
Var dropout(Var a, double p, std::uint64_t seed);
// Same mask value for every column of a row.
Var row_dropout(Var a, double p, std::mt19937_64& rng);

// Mean over selected rows of -log softmax(logits)[label].
Var masked_cross_entropy(Var logits, std::span<const std::size_t> labels,
                         std::span<const std::size_t> rows);

}  // namespace wctg::ad
