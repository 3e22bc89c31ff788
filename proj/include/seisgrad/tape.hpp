#pragma once

#include <cstdint>
#include <memory>
#include <unordered_map>
#include <utility>
#include <vector>

#include "seisgrad/tensor.hpp"

namespace seisgrad {

enum class Op : std::uint8_t {
  leaf,
  add,
  sub,
  mul,
  div,
  neg,
  smul,
  pow,
  sqrt,
  exp,
  log,
  abs,
  tanh,
  leaky_relu,
  sum,
  mean,
  dot,
  matmul,
  conv2d,
  upsample2x,
  dense,
  dropout,
  gather,
  scatter_add,
  shift2d,
  stencil2d,
  hilbert,
  softmin3,
  clamp,
  reshape,
  stack_rows,
  softdtw_pair,
  sinkhorn_pair,
};

// Input slot: `id` routes the gradient (< 0 for constants); `val` always holds
// the forward value so backward rules never chase the tape.
struct NodeArg {
  std::int64_t id = -1;
  Tensor val;
};

using IndexList = std::shared_ptr<const std::vector<std::int64_t>>;

inline IndexList make_indices(std::vector<std::int64_t> v) {
  return std::make_shared<const std::vector<std::int64_t>>(std::move(v));
}

struct TapeNode {
  Op op = Op::leaf;
  Tensor out;
  std::vector<NodeArg> in;
  double p0 = 0, p1 = 0, p2 = 0;  // op scalars: slope, gamma, lo/hi, coeff...
  std::int64_t i0 = 0, i1 = 0;    // op ints: axis, offset, order, flags
  IndexList idx;                  // gather / scatter targets
  std::vector<Tensor> saved;      // extra values the backward rule needs
};

// Append-only record of one forward computation. Single-writer; distinct
// tapes are fully independent, so shots may run in parallel one tape each.
class Tape {
 public:
  bool recording() const { return recording_; }
  void pause() { recording_ = false; }
  void resume() { recording_ = true; }

  std::int64_t size() const { return static_cast<std::int64_t>(nodes_.size()); }
  const TapeNode& node(std::int64_t id) const { return nodes_[id]; }

  std::int64_t push(TapeNode&& n) {
    nodes_.push_back(std::move(n));
    return size() - 1;
  }

  // Registers a differentiable input. The returned tensor shares storage with
  // the argument but carries the node handle.
  Tensor leaf(const Tensor& t) {
    TapeNode n;
    n.op = Op::leaf;
    n.out = t.detached();
    Tensor r = t.detached();
    r.set_node(push(std::move(n)));
    return r;
  }

  void clear() { nodes_.clear(); }

 private:
  std::vector<TapeNode> nodes_;
  bool recording_ = true;
};

namespace detail {
inline Tape*& active_tape_slot() {
  thread_local Tape* t = nullptr;
  return t;
}
}  // namespace detail

inline Tape* active_tape() { return detail::active_tape_slot(); }

// RAII: make `t` the thread's recording tape.
class Recording {
 public:
  explicit Recording(Tape& t) : prev_(detail::active_tape_slot()) {
    detail::active_tape_slot() = &t;
  }
  ~Recording() { detail::active_tape_slot() = prev_; }
  Recording(const Recording&) = delete;
  Recording& operator=(const Recording&) = delete;

 private:
  Tape* prev_;
};

// RAII: suspend recording on the active tape (if any). Existing nodes are
// never touched.
class Paused {
 public:
  Paused() : tape_(detail::active_tape_slot()) {
    if (tape_) {
      was_ = tape_->recording();
      tape_->pause();
    }
  }
  ~Paused() {
    if (tape_ && was_) tape_->resume();
  }
  Paused(const Paused&) = delete;
  Paused& operator=(const Paused&) = delete;

 private:
  Tape* tape_;
  bool was_ = false;
};

// node id -> gradient of the backward root w.r.t. that node's output.
class GradientMap {
 public:
  void set(std::int64_t id, Tensor g) { g_[id] = std::move(g); }
  bool contains(std::int64_t id) const { return g_.count(id) != 0; }
  const Tensor& at(std::int64_t id) const {
    auto it = g_.find(id);
    require(it != g_.end(), "no gradient recorded for node " + std::to_string(id));
    return it->second;
  }
  const Tensor& at(const Tensor& leaf) const { return at(leaf.node()); }

 private:
  std::unordered_map<std::int64_t, Tensor> g_;
};

}  // namespace seisgrad
