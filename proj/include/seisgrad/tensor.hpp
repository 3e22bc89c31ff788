#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "seisgrad/common.hpp"

namespace seisgrad {

// Rank 0 (scalar), 1 (vector) or 2 (row-major matrix). 2-D fields are indexed
// (row, col) = (iz, ix) throughout the library.
class Shape {
 public:
  Shape() = default;

  static Shape scalar() { return Shape(); }
  static Shape vec(std::int64_t n) {
    Shape s;
    s.rank_ = 1;
    s.d_[0] = n;
    return s;
  }
  static Shape mat(std::int64_t rows, std::int64_t cols) {
    Shape s;
    s.rank_ = 2;
    s.d_[0] = rows;
    s.d_[1] = cols;
    return s;
  }

  int rank() const { return rank_; }
  std::int64_t rows() const { return rank_ == 2 ? d_[0] : 1; }
  std::int64_t cols() const { return rank_ == 2 ? d_[1] : d_[0]; }
  std::int64_t dim(int i) const { return d_[i]; }
  std::int64_t numel() const {
    if (rank_ == 0) return 1;
    if (rank_ == 1) return d_[0];
    return d_[0] * d_[1];
  }

  bool operator==(const Shape& o) const {
    if (rank_ != o.rank_) return false;
    if (rank_ >= 1 && d_[0] != o.d_[0]) return false;
    if (rank_ == 2 && d_[1] != o.d_[1]) return false;
    return true;
  }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    if (rank_ == 0) return "()";
    if (rank_ == 1) return "(" + std::to_string(d_[0]) + ")";
    return "(" + std::to_string(d_[0]) + "," + std::to_string(d_[1]) + ")";
  }

 private:
  std::int64_t d_[2] = {1, 1};
  int rank_ = 0;
};

// Dense 64-bit real array with shared storage and an optional handle onto the
// tape it was recorded on (node < 0 means plain constant data).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& s) { return Tensor(s); }

  static Tensor full(const Shape& s, double v) {
    Tensor t(s);
    std::fill_n(t.data(), t.numel(), v);
    return t;
  }

  static Tensor scalar(double v) { return full(Shape::scalar(), v); }

  static Tensor from(const Shape& s, std::span<const double> v) {
    require(static_cast<std::int64_t>(v.size()) == s.numel(),
            "tensor init size " + std::to_string(v.size()) +
                " does not match shape " + s.str());
    Tensor t(s);
    std::copy(v.begin(), v.end(), t.data());
    return t;
  }

  static Tensor from(const Shape& s, std::initializer_list<double> v) {
    return from(s, std::span<const double>(v.begin(), v.size()));
  }

  static Tensor vec(std::initializer_list<double> v) {
    return from(Shape::vec(static_cast<std::int64_t>(v.size())), v);
  }

  bool empty() const { return !data_; }
  const Shape& shape() const { return shape_; }
  std::int64_t numel() const { return shape_.numel(); }
  std::int64_t rows() const { return shape_.rows(); }
  std::int64_t cols() const { return shape_.cols(); }

  double* data() { return data_.get(); }
  const double* data() const { return data_.get(); }
  std::span<const double> values() const {
    return {data_.get(), static_cast<std::size_t>(numel())};
  }

  double operator[](std::int64_t i) const { return data_[i]; }
  double& operator[](std::int64_t i) { return data_[i]; }
  double at(std::int64_t r, std::int64_t c) const {
    return data_[r * shape_.cols() + c];
  }
  double& at(std::int64_t r, std::int64_t c) {
    return data_[r * shape_.cols() + c];
  }

  double scalar_value() const {
    require(!empty() && numel() == 1, "tensor is not a scalar");
    return data_[0];
  }

  std::int64_t node() const { return node_; }
  bool on_tape() const { return node_ >= 0; }
  void set_node(std::int64_t id) { node_ = id; }

  // Same storage, no tape handle.
  Tensor detached() const {
    Tensor t = *this;
    t.node_ = -1;
    return t;
  }

  Tensor clone() const {
    if (empty()) return Tensor();
    Tensor t(shape_);
    std::copy_n(data(), numel(), t.data());
    return t;
  }

  bool all_finite() const {
    const double* p = data();
    const std::int64_t n = numel();
    bool ok = true;
    for (std::int64_t i = 0; i < n; ++i) ok &= (p[i] - p[i] == 0.0);
    return ok;
  }

 private:
  explicit Tensor(const Shape& s) : shape_(s) {
    data_ = std::shared_ptr<double[]>(new double[s.numel()]());
  }

  std::shared_ptr<double[]> data_;
  Shape shape_;
  std::int64_t node_ = -1;
};

inline std::int64_t argmin_index(const Tensor& t) {
  const double* p = t.data();
  std::int64_t best = 0;
  for (std::int64_t i = 1; i < t.numel(); ++i)
    if (p[i] < p[best]) best = i;
  return best;
}

inline std::int64_t argmax_index(const Tensor& t) {
  const double* p = t.data();
  std::int64_t best = 0;
  for (std::int64_t i = 1; i < t.numel(); ++i)
    if (p[i] > p[best]) best = i;
  return best;
}

inline double min_value(const Tensor& t) { return t[argmin_index(t)]; }
inline double max_value(const Tensor& t) { return t[argmax_index(t)]; }

}  // namespace seisgrad
