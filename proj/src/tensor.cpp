#include "banet/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "banet/error.hpp"

namespace banet {

std::string Shape::str() const {
  return "[" + std::to_string(n) + "," + std::to_string(c) + "," + std::to_string(h) + "," +
         std::to_string(w) + "]";
}

Tensor Tensor::zeros(const Shape& shape, bool requires_grad) {
  return full(shape, 0.0, requires_grad);
}

Tensor Tensor::full(const Shape& shape, double value, bool requires_grad) {
  auto s = std::make_shared<Storage>();
  s->shape = shape;
  s->data.assign(shape.numel(), value);
  s->requires_grad = requires_grad;
  return Tensor(std::move(s));
}

Tensor Tensor::from(const Shape& shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape.numel()) {
    throw DimensionError("Tensor::from: " + std::to_string(values.size()) +
                         " values for shape " + shape.str());
  }
  require_finite(values, "Tensor::from");
  auto s = std::make_shared<Storage>();
  s->shape = shape;
  s->data = std::move(values);
  s->requires_grad = requires_grad;
  return Tensor(std::move(s));
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return from(Shape{1, 1, 1, 1}, {value}, requires_grad);
}

Tensor::Storage& Tensor::storage() const {
  if (!impl_) throw UsageError("use of an undefined tensor");
  return *impl_;
}

const Shape& Tensor::shape() const { return storage().shape; }

std::span<const double> Tensor::data() const { return storage().data; }
std::span<double> Tensor::mutable_data() { return storage().data; }

std::span<const double> Tensor::grad() const { return storage().grad; }

std::span<double> Tensor::mutable_grad() {
  auto& s = storage();
  if (s.grad.size() != s.data.size()) s.grad.assign(s.data.size(), 0.0);
  return s.grad;
}

bool Tensor::has_grad() const { return !storage().grad.empty(); }

void Tensor::zero_grad() {
  auto& g = storage().grad;
  std::fill(g.begin(), g.end(), 0.0);
}

bool Tensor::requires_grad() const { return storage().requires_grad; }
void Tensor::set_requires_grad(bool value) { storage().requires_grad = value; }

double Tensor::at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
  const auto& s = storage();
  return s.data[((n * s.shape.c + c) * s.shape.h + y) * s.shape.w + x];
}

double& Tensor::at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
  auto& s = storage();
  return s.data[((n * s.shape.c + c) * s.shape.h + y) * s.shape.w + x];
}

double Tensor::item() const {
  const auto& s = storage();
  if (s.data.size() != 1) throw DimensionError("item() on tensor of shape " + s.shape.str());
  return s.data[0];
}

Tensor Tensor::clone() const {
  const auto& s = storage();
  auto copy = std::make_shared<Storage>();
  copy->shape = s.shape;
  copy->data = s.data;
  return Tensor(std::move(copy));
}

void require_finite(std::span<const double> values, const char* op) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string(op) + ": non-finite value");
  }
}

}  // namespace banet
