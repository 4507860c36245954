#include "freqmosaic/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "freqmosaic/error.hpp"

namespace freqmosaic {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  require(data_.size() == shape_numel(shape_),
          "tensor data length " + std::to_string(data_.size()) + " does not match shape " +
              shape_string(shape_));
}

std::span<const double> Tensor::grad() const {
  if (!grad_) return {};
  return *grad_;
}

void Tensor::set_grad(std::vector<double> g) {
  require(g.size() == data_.size(), "grad length does not match tensor " + shape_string(shape_));
  grad_ = std::move(g);
}

Tensor Tensor::reshaped(Shape shape) const {
  require(shape_numel(shape) == numel(),
          "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  return Tensor(std::move(shape), data_);
}

double Tensor::item() const {
  require(numel() == 1, "item() on non-scalar tensor " + shape_string(shape_));
  return data_[0];
}

ComplexTensor::ComplexTensor(Shape shape)
    : shape_(std::move(shape)), re_(shape_numel(shape_), 0.0), im_(shape_numel(shape_), 0.0) {}

ComplexTensor::ComplexTensor(Shape shape, std::vector<double> re, std::vector<double> im)
    : shape_(std::move(shape)), re_(std::move(re)), im_(std::move(im)) {
  const auto n = shape_numel(shape_);
  require(re_.size() == n && im_.size() == n,
          "complex tensor planes do not match shape " + shape_string(shape_));
}

ComplexTensor ComplexTensor::from_real(const Tensor& t) {
  return ComplexTensor(t.shape(), t.storage(), std::vector<double>(t.numel(), 0.0));
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "max_abs_diff: length mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace freqmosaic
