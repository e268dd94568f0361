#include "axiomgrad/paths.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "axiomgrad/error.h"

namespace axiomgrad {

using nlohmann::json;

Path::Path(std::vector<Tensor> waypoints) : waypoints_(std::move(waypoints)) {
  if (waypoints_.size() < 2) throw ValueError("a path needs at least two waypoints");
  for (const Tensor& w : waypoints_) {
    require_same_shape(waypoints_.front(), w, "path waypoint");
    require_finite(w, "path waypoint");
  }
  std::vector<double> cumulative(waypoints_.size(), 0.0);
  for (std::size_t k = 1; k < waypoints_.size(); ++k) {
    cumulative[k] = cumulative[k - 1] + norm2(waypoints_[k] - waypoints_[k - 1]);
  }
  total_length_ = cumulative.back();
  knots_.resize(waypoints_.size());
  for (std::size_t k = 0; k < waypoints_.size(); ++k) {
    knots_[k] = total_length_ > 0.0 ? cumulative[k] / total_length_ : 0.0;
  }
  knots_.back() = 1.0;
}

Path Path::straight_line(const Tensor& x, const Tensor& x_prime) {
  require_same_shape(x, x_prime, "straight_line endpoints");
  return Path({x_prime, x});
}

Path::Segment Path::segment(std::size_t k) const {
  const double len = norm2(waypoints_.at(k + 1) - waypoints_.at(k));
  return Segment{&waypoints_[k], &waypoints_[k + 1], knots_[k], knots_[k + 1], len};
}

namespace {

void require_unit_interval(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw ValueError("path parameter t=" + std::to_string(t) + " outside [0, 1]");
  }
}

}  // namespace

Tensor Path::eval(double t) const {
  require_unit_interval(t);
  if (t == 0.0 || total_length_ == 0.0) return waypoints_.front();
  if (t == 1.0) return waypoints_.back();
  for (std::size_t k = 0; k + 1 < waypoints_.size(); ++k) {
    const double t0 = knots_[k];
    const double t1 = knots_[k + 1];
    if (t < t0 || t >= t1) continue;
    if (t == t0) return waypoints_[k];
    const double s = (t - t0) / (t1 - t0);
    return axpy(waypoints_[k], s, waypoints_[k + 1] - waypoints_[k]);
  }
  return waypoints_.back();
}

Tensor Path::velocity(double t) const {
  require_unit_interval(t);
  if (total_length_ == 0.0) return Tensor(shape());
  // First positive-duration segment with t < t1; the last one serves t == 1.
  std::size_t chosen = 0;
  for (std::size_t k = 0; k + 1 < waypoints_.size(); ++k) {
    if (knots_[k + 1] <= knots_[k]) continue;
    chosen = k;
    if (t < knots_[k + 1]) break;
  }
  const double dt = knots_[chosen + 1] - knots_[chosen];
  return (1.0 / dt) * (waypoints_[chosen + 1] - waypoints_[chosen]);
}

bool Path::is_monotone() const {
  const std::size_t n = waypoints_.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    bool up = false;
    bool down = false;
    for (std::size_t k = 1; k < waypoints_.size(); ++k) {
      const double d = waypoints_[k][i] - waypoints_[k - 1][i];
      up |= d > 0.0;
      down |= d < 0.0;
    }
    if (up && down) return false;
  }
  return true;
}

Path Path::affine_transport(const Tensor& x, const Tensor& x_prime) const {
  require_same_shape(x, x_prime, "affine_transport endpoints");
  if (waypoints_.front().size() != x.size()) {
    throw ShapeError("reference path has dimension " +
                     std::to_string(waypoints_.front().size()) +
                     ", endpoints have " + std::to_string(x.size()));
  }
  std::vector<Tensor> mapped;
  mapped.reserve(waypoints_.size());
  for (const Tensor& y : waypoints_) {
    Tensor p(x.shape());
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] = x_prime[i] + (x[i] - x_prime[i]) * y[i];
    }
    mapped.push_back(std::move(p));
  }
  return Path(std::move(mapped));
}

bool Path::inside(const Tensor& lower, const Tensor& upper) const {
  for (const Tensor& w : waypoints_) {
    if (w.size() != lower.size()) return false;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] < lower[i] || w[i] > upper[i]) return false;
    }
  }
  return true;
}

json Path::to_json() const {
  json points = json::array();
  for (const Tensor& w : waypoints_) points.push_back(w.values());
  return {{"waypoints", points}, {"shape", shape()}};
}

Path Path::from_json(const json& j, const Shape& shape) {
  if (!j.is_object() || !j.contains("waypoints") || !j.at("waypoints").is_array()) {
    throw FormatError("path document needs a 'waypoints' array");
  }
  Shape target = shape;
  if (target.empty() && j.contains("shape")) target = j.at("shape").get<Shape>();
  std::vector<Tensor> points;
  try {
    for (const json& w : j.at("waypoints")) {
      auto values = w.get<std::vector<double>>();
      Tensor t = Tensor::vector(std::move(values));
      if (!target.empty()) t = std::move(t).reshaped(target);
      points.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed waypoint: ") + e.what());
  }
  return Path(std::move(points));
}

EnsembleSpec::EnsembleSpec(std::vector<Member> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw ValueError("ensemble has no members");
  double total = 0.0;
  for (const Member& m : members_) {
    if (!(m.weight >= 0.0)) throw ValueError("ensemble weights must be >= 0");
    total += m.weight;
    if (m.path.baseline() != members_.front().path.baseline() ||
        m.path.input() != members_.front().path.input()) {
      throw ValueError("ensemble members must share endpoints");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValueError("ensemble weights sum to " + std::to_string(total) +
                     ", expected 1");
  }
}

Path five_segment_loop() {
  return Path({Tensor::vector({0, 0}), Tensor::vector({1, 0}),
               Tensor::vector({1, 1}), Tensor::vector({0, 1}),
               Tensor::vector({0, 0}), Tensor::vector({1, 1})});
}

Path square_detour() {
  return Path({Tensor::vector({0, 0}), Tensor::vector({0, 1}),
               Tensor::vector({1, 1}), Tensor::vector({1, 0})});
}

Path corner_path(std::size_t first_axis) {
  const Tensor corner =
      first_axis == 0 ? Tensor::vector({1, 0}) : Tensor::vector({0, 1});
  return Path({Tensor::vector({0, 0}), corner, Tensor::vector({1, 1})});
}

Path boundary_loops(int n) {
  std::vector<Tensor> points{Tensor::vector({0, 0})};
  const std::vector<Tensor> clockwise{Tensor::vector({0, 1}), Tensor::vector({1, 1}),
                                      Tensor::vector({1, 0}), Tensor::vector({0, 0})};
  const std::vector<Tensor> counter{Tensor::vector({1, 0}), Tensor::vector({1, 1}),
                                    Tensor::vector({0, 1}), Tensor::vector({0, 0})};
  const auto& loop = n >= 0 ? clockwise : counter;
  for (int k = 0; k < std::abs(n); ++k) {
    points.insert(points.end(), loop.begin(), loop.end());
  }
  points.push_back(Tensor::vector({1, 1}));
  return Path(std::move(points));
}

Path axis_ordered_path(const std::vector<std::size_t>& order) {
  const std::size_t dims = order.size();
  std::vector<bool> seen(dims, false);
  for (std::size_t axis : order) {
    if (axis >= dims || seen[axis]) {
      throw ValueError("axis order must be a permutation of 0.." +
                       std::to_string(dims - 1));
    }
    seen[axis] = true;
  }
  std::vector<Tensor> points{Tensor(Shape{dims})};
  for (std::size_t axis : order) {
    Tensor next = points.back();
    next[axis] = 1.0;
    points.push_back(std::move(next));
  }
  return Path(std::move(points));
}

Path monotone_staircase(std::size_t dims, std::uint64_t seed) {
  if (dims == 0) throw ValueError("staircase needs at least one dimension");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.1, 0.9);
  std::vector<std::size_t> moves;
  std::vector<double> first_stop(dims);
  for (std::size_t axis = 0; axis < dims; ++axis) {
    moves.push_back(axis);
    moves.push_back(axis);
    first_stop[axis] = unit(rng);
  }
  std::shuffle(moves.begin(), moves.end(), rng);
  std::vector<bool> started(dims, false);
  std::vector<Tensor> points{Tensor(Shape{dims})};
  for (std::size_t axis : moves) {
    Tensor next = points.back();
    next[axis] = started[axis] ? 1.0 : first_stop[axis];
    started[axis] = true;
    points.push_back(std::move(next));
  }
  return Path(std::move(points));
}

}  // namespace axiomgrad
