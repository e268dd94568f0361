#include "axiomgrad/tensor.h"

#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>
#include <utility>

#include "axiomgrad/error.h"

namespace axiomgrad {

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

std::string shape_to_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_size(shape_) != data_.size()) {
    throw ShapeError("tensor shape " + shape_to_string(shape_) + " needs " +
                     std::to_string(shape_size(shape_)) + " values, got " +
                     std::to_string(data_.size()));
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return vector(std::vector<double>(values));
}

Tensor Tensor::vector(std::vector<double> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

Tensor Tensor::filled(Shape shape, double value) {
  Tensor t(std::move(shape));
  std::fill(t.data_.begin(), t.data_.end(), value);
  return t;
}

Tensor Tensor::reshaped(Shape shape) const& {
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::reshaped(Shape shape) && {
  return Tensor(std::move(shape), std::move(data_));
}

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(const Tensor& t, const std::string& what) {
  if (!t.all_finite()) throw ValueError(what + " contains NaN or Inf");
}

void require_same_shape(const Tensor& a, const Tensor& b,
                        const std::string& what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(what + ": shape " + shape_to_string(a.shape()) +
                     " vs " + shape_to_string(b.shape()));
  }
}

namespace {

template <typename Op>
Tensor zip(const Tensor& a, const Tensor& b, Op op, const char* what) {
  require_same_shape(a, b, what);
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
  return out;
}

Tensor pairwise_range(std::span<const Tensor> parts) {
  if (parts.size() == 1) return parts[0];
  const std::size_t half = parts.size() / 2;
  Tensor left = pairwise_range(parts.first(half));
  const Tensor right = pairwise_range(parts.subspan(half));
  require_same_shape(left, right, "pairwise_sum");
  for (std::size_t i = 0; i < left.size(); ++i) left[i] += right[i];
  return left;
}

double pairwise_range(std::span<const double> parts) {
  if (parts.size() <= 2) {
    double s = 0.0;
    for (double v : parts) s += v;
    return s;
  }
  const std::size_t half = parts.size() / 2;
  return pairwise_range(parts.first(half)) + pairwise_range(parts.subspan(half));
}

}  // namespace

Tensor operator+(const Tensor& a, const Tensor& b) {
  return zip(a, b, std::plus<>(), "tensor add");
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  return zip(a, b, std::minus<>(), "tensor subtract");
}

Tensor operator*(double s, const Tensor& a) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  return zip(a, b, std::multiplies<>(), "hadamard");
}

Tensor axpy(const Tensor& a, double s, const Tensor& b) {
  return zip(a, b, [s](double u, double v) { return u + s * v; }, "axpy");
}

double sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return s;
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ShapeError("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const Tensor& a) { return std::sqrt(dot(a, a)); }

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw ShapeError("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

Tensor pairwise_sum(std::span<const Tensor> parts) {
  if (parts.empty()) throw ValueError("pairwise_sum of nothing");
  return pairwise_range(parts);
}

double pairwise_sum(std::span<const double> parts) {
  return pairwise_range(parts);
}

}  // namespace axiomgrad
