#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace axiomgrad {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_to_string(const Shape& shape);
// Shortest decimal text that reads back as the same double.
std::string format_number(double value);

// Dense row-major array of doubles. The element count always equals the
// product of the shape.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<double> data);

  // Rank-1 tensor holding `values`.
  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(std::vector<double> values);
  static Tensor filled(Shape shape, double value);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  const std::vector<double>& values() const { return data_; }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  // Same data, different shape with equal element count.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  bool all_finite() const;

  friend bool operator==(const Tensor& a, const Tensor& b) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// Throws ValueError naming `what` if any entry is NaN or infinite.
void require_finite(const Tensor& t, const std::string& what);
void require_same_shape(const Tensor& a, const Tensor& b,
                        const std::string& what);

Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);
// Elementwise product.
Tensor hadamard(const Tensor& a, const Tensor& b);
// a + s * b
Tensor axpy(const Tensor& a, double s, const Tensor& b);

double sum(const Tensor& a);
double dot(const Tensor& a, const Tensor& b);
double norm2(const Tensor& a);
double max_abs(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);

// Sums the tensors by recursive halving; the association order depends only
// on parts.size(), so the result is reproducible for any worker count.
Tensor pairwise_sum(std::span<const Tensor> parts);
double pairwise_sum(std::span<const double> parts);

}  // namespace axiomgrad
