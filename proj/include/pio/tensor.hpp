#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pio {

// Dense row-major double array with a dynamic shape. All numeric state in the
// library (fields, wavelet coefficients, network parameters) lives in these.
class Array {
 public:
  Array() = default;

  explicit Array(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(count(shape_), 0.0);
  }

  Array(std::vector<int64_t> shape, double fill) : shape_(std::move(shape)) {
    data_.assign(count(shape_), fill);
  }

  Array(std::vector<int64_t> shape, std::vector<double> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (static_cast<int64_t>(data_.size()) != count(shape_))
      throw std::invalid_argument("Array: data size does not match shape");
  }

  static int64_t count(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d < 0) throw std::invalid_argument("Array: negative dimension");
      n *= d;
    }
    return n;
  }

  const std::vector<int64_t>& shape() const { return shape_; }
  int ndim() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int i) const { return shape_.at(i); }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vec() { return data_; }
  const std::vector<double>& vec() const { return data_; }

  double& operator[](int64_t i) { return data_[i]; }
  double operator[](int64_t i) const { return data_[i]; }

  double& at(int64_t i, int64_t j) {
    return data_[i * shape_[1] + j];
  }
  double at(int64_t i, int64_t j) const {
    return data_[i * shape_[1] + j];
  }
  double& at(int64_t i, int64_t j, int64_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double at(int64_t i, int64_t j, int64_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  double& at(int64_t i, int64_t j, int64_t k, int64_t l) {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }
  double at(int64_t i, int64_t j, int64_t k, int64_t l) const {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
  }

  void fill(double v) { data_.assign(data_.size(), v); }

  Array& operator+=(const Array& o) {
    assert(size() == o.size());
    for (int64_t i = 0; i < size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Array& operator-=(const Array& o) {
    assert(size() == o.size());
    for (int64_t i = 0; i < size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Array& operator*=(double c) {
    for (double& x : data_) x *= c;
    return *this;
  }

  bool same_shape(const Array& o) const { return shape_ == o.shape_; }

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

inline Array zeros_like(const Array& a) { return Array(a.shape()); }

inline double dot(const Array& a, const Array& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double max_abs(const Array& a) {
  double m = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) {
    double v = a[i] < 0 ? -a[i] : a[i];
    if (v > m) m = v;
  }
  return m;
}

inline double norm2(const Array& a) {
  double s = 0.0;
  for (int64_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
  return std::sqrt(s);
}

}  // namespace pio
