#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace freqmosaic {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major tensor of doubles.
///
/// `requires_grad` and `grad` are only meaningful for leaves that get bound
/// to a Tape (model parameters, inputs under gradient check). The grad
/// buffer, when present, always has the same length as the data.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }
  static Tensor full(Shape shape, double v) { return Tensor(std::move(shape), v); }
  static Tensor scalar(double v) { return Tensor(Shape{1}, v); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t numel() const { return data_.size(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Rank-3 [C,H,W] accessors.
  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }
  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data_[(c * shape_[1] + y) * shape_[2] + x];
  }

  bool requires_grad() const { return requires_grad_; }
  void set_requires_grad(bool on) { requires_grad_ = on; }

  bool has_grad() const { return grad_.has_value(); }
  std::span<const double> grad() const;
  void set_grad(std::vector<double> g);
  void clear_grad() { grad_.reset(); }

  Tensor reshaped(Shape shape) const;
  double item() const;

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  std::vector<double> data_;
  bool requires_grad_ = false;
  std::optional<std::vector<double>> grad_;
};

/// Complex tensor stored as separate real and imaginary planes.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(Shape shape);
  ComplexTensor(Shape shape, std::vector<double> re, std::vector<double> im);
  static ComplexTensor from_real(const Tensor& t);

  const Shape& shape() const { return shape_; }
  std::size_t numel() const { return re_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }

  std::span<double> re() { return re_; }
  std::span<double> im() { return im_; }
  std::span<const double> re() const { return re_; }
  std::span<const double> im() const { return im_; }

  Tensor real_part() const { return Tensor(shape_, re_); }
  Tensor imag_part() const { return Tensor(shape_, im_); }

  friend bool operator==(const ComplexTensor& a, const ComplexTensor& b) {
    return a.shape_ == b.shape_ && a.re_ == b.re_ && a.im_ == b.im_;
  }

 private:
  Shape shape_;
  std::vector<double> re_;
  std::vector<double> im_;
};

double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace freqmosaic
