#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "axiomgrad/tensor.h"

namespace axiomgrad {

// Constant-velocity polyline from waypoints.front() (the baseline) to
// waypoints.back() (the input), parameterized over t in [0, 1]. Knot times
// are proportional to cumulative arc length.
class Path {
 public:
  struct Segment {
    const Tensor* start;
    const Tensor* end;
    double t0;
    double t1;
    double length;
  };

  // At least two waypoints of identical shape. Throws ShapeError/ValueError.
  explicit Path(std::vector<Tensor> waypoints);

  static Path straight_line(const Tensor& x, const Tensor& x_prime);

  const std::vector<Tensor>& waypoints() const { return waypoints_; }
  const Tensor& baseline() const { return waypoints_.front(); }
  const Tensor& input() const { return waypoints_.back(); }
  const Shape& shape() const { return waypoints_.front().shape(); }

  std::size_t num_segments() const { return waypoints_.size() - 1; }
  Segment segment(std::size_t k) const;
  double length() const { return total_length_; }

  // gamma(t); endpoints and interior knots are returned bit-exactly.
  Tensor eval(double t) const;
  // Right derivative d gamma / dt; zero for a degenerate path. At t = 1 the
  // last segment with positive duration is used.
  Tensor velocity(double t) const;

  // True iff every coordinate is non-increasing or non-decreasing along the
  // whole waypoint sequence.
  bool is_monotone() const;

  // Maps each waypoint y of a reference path on the unit box through
  // T(y) = x' + (x - x') * y (elementwise).
  Path affine_transport(const Tensor& x, const Tensor& x_prime) const;

  bool inside(const Tensor& lower, const Tensor& upper) const;

  nlohmann::json to_json() const;
  // Accepts {"waypoints": [[...], ...]}; each waypoint is read as a flat
  // vector and given `shape` when non-empty.
  static Path from_json(const nlohmann::json& j, const Shape& shape = {});

 private:
  std::vector<Tensor> waypoints_;
  std::vector<double> knots_;  // knots_[k] = t at waypoints_[k]
  double total_length_ = 0.0;
};

// Finite probability mixture of path methods.
class EnsembleSpec {
 public:
  struct Member {
    Path path;
    double weight;
  };

  // Weights must be >= 0 and sum to 1 within 1e-12. All paths must share
  // endpoints.
  explicit EnsembleSpec(std::vector<Member> members);

  const std::vector<Member>& members() const { return members_; }

 private:
  std::vector<Member> members_;
};

// ---- reference paths on the unit square, traced from (0,0) to (1,1) or
// (1,0) as noted. They are meant for affine_transport or direct use.

// (0,0) -> (1,0) -> (1,1) -> (0,1) -> (0,0) -> (1,1).
Path five_segment_loop();
// (0,0) -> (0,1) -> (1,1) -> (1,0).
Path square_detour();
// Axis-ordered corner path through (1,0) (first_axis = 0) or (0,1).
Path corner_path(std::size_t first_axis);
// n full boundary loops starting at (0,0), clockwise for n > 0 and
// counter-clockwise for n < 0, then the diagonal to (1,1).
Path boundary_loops(int n);

// Unit-cube path from 0 to 1 in `dims` dimensions that raises one coordinate
// at a time, fully, in the given order.
Path axis_ordered_path(const std::vector<std::size_t>& order);
// Monotone staircase from 0 to 1: every coordinate rises in two axis-aligned
// moves of random size, the moves visited in a seeded random order.
Path monotone_staircase(std::size_t dims, std::uint64_t seed);

}  // namespace axiomgrad
