#pragma once

#include <Eigen/Core>
#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

namespace supergaze {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<MatrixRM>;
using ConstMatMap = Eigen::Map<const MatrixRM>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

/// Dense row-major double tensor, rank 1 to 4. All model math runs in
/// double so the analytic gradients can be checked against central
/// differences at tight tolerances.
class Tensor {
public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(count(shape_), 0.0);
  }

  Tensor(std::initializer_list<int> shape) : Tensor(std::vector<int>(shape)) {}

  static Tensor zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<int> shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
  }

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& operator()(int i) { return data_[static_cast<std::size_t>(i)]; }
  double operator()(int i) const { return data_[static_cast<std::size_t>(i)]; }

  double& operator()(int i, int j) {
    assert(rank() == 2);
    return data_[static_cast<std::size_t>(i) * shape_[1] + j];
  }
  double operator()(int i, int j) const {
    assert(rank() == 2);
    return data_[static_cast<std::size_t>(i) * shape_[1] + j];
  }

  double& operator()(int c, int y, int x) {
    assert(rank() == 3);
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }
  double operator()(int c, int y, int x) const {
    assert(rank() == 3);
    return data_[(static_cast<std::size_t>(c) * shape_[1] + y) * shape_[2] + x];
  }

  double& operator()(int n, int c, int y, int x) {
    assert(rank() == 4);
    return data_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }
  double operator()(int n, int c, int y, int x) const {
    assert(rank() == 4);
    return data_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + y) * shape_[3] + x];
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  void set_zero() { fill(0.0); }

  /// Reinterpret with a new shape of identical element count.
  Tensor reshaped(std::vector<int> shape) const {
    assert(count(shape) == size());
    Tensor t;
    t.shape_ = std::move(shape);
    t.data_ = data_;
    return t;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  /// View as a rows x cols row-major matrix (element count must match).
  MatMap mat(int rows, int cols) {
    assert(static_cast<std::size_t>(rows) * cols == size());
    return MatMap(data(), rows, cols);
  }
  ConstMatMap mat(int rows, int cols) const {
    assert(static_cast<std::size_t>(rows) * cols == size());
    return ConstMatMap(data(), rows, cols);
  }

  /// Rank-2 tensors viewed with their own shape.
  MatMap mat() { return mat(shape_[0], shape_[1]); }
  ConstMatMap mat() const { return mat(shape_[0], shape_[1]); }

  VecMap vec() { return VecMap(data(), static_cast<Eigen::Index>(size())); }
  ConstVecMap vec() const { return ConstVecMap(data(), static_cast<Eigen::Index>(size())); }

  Tensor& operator+=(const Tensor& o) {
    assert(same_shape(o));
    vec() += o.vec();
    return *this;
  }

  Tensor& operator*=(double s) {
    vec() *= s;
    return *this;
  }

  static std::size_t count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return shape.empty() ? 0 : n;
  }

private:
  std::vector<int> shape_;
  std::vector<double> data_;
};

}  // namespace supergaze
