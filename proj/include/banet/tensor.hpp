#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace banet {

/// Extents of a 4-d tensor in (batch, channels, height, width) order.
struct Shape {
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t h = 0;
  std::size_t w = 0;

  constexpr std::size_t numel() const { return n * c * h * w; }
  constexpr std::size_t plane() const { return h * w; }
  constexpr bool operator==(const Shape&) const = default;

  std::string str() const;
};

/// Dense row-major float64 tensor with an optional gradient buffer.
///
/// A Tensor is a shared handle: copies alias the same storage, which is how
/// the tape and the parameter registry refer to one buffer. Use clone() for
/// an independent copy.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape, bool requires_grad = false);
  static Tensor full(const Shape& shape, double value, bool requires_grad = false);
  static Tensor from(const Shape& shape, std::vector<double> values, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const;
  std::size_t numel() const { return shape().numel(); }

  std::span<const double> data() const;
  std::span<double> mutable_data();

  /// Empty until a gradient has been accumulated or mutable_grad() was called.
  std::span<const double> grad() const;
  std::span<double> mutable_grad();
  bool has_grad() const;
  void zero_grad();

  bool requires_grad() const;
  void set_requires_grad(bool value);

  double at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const;
  double& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x);
  double item() const;

  /// Deep copy of the values; the copy carries no gradient and no tape history.
  Tensor clone() const;

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  struct Storage {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;
    bool requires_grad = false;
  };

  explicit Tensor(std::shared_ptr<Storage> impl) : impl_(std::move(impl)) {}
  Storage& storage() const;

  std::shared_ptr<Storage> impl_;
};

/// Throws NumericError naming `op` if any value is NaN or Inf.
void require_finite(std::span<const double> values, const char* op);

}  // namespace banet
