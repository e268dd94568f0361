#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "axiomgrad/attribution.h"
#include "axiomgrad/network.h"
#include "axiomgrad/parallel.h"
#include "axiomgrad/paths.h"
#include "axiomgrad/tensor.h"

namespace axiomgrad {

enum class Axiom {
  kSensitivityA,
  kImplementationInvariance,
  kCompleteness,
  kLinearity,
  kDummy,
  kSymmetry,
  kAsi,
  kNdp,
  kDistSensitivityA,
  kDistCompleteness,
  kDistSymmetry,
  kDistNdp,
  kLemma1,
  // Reproductions of refuted uniqueness claims; see run_counterexamples.
  kCounterexample,
};

std::string axiom_name(Axiom axiom);

enum class Verdict { kHolds, kViolated };

std::string verdict_name(Verdict verdict);

// A baseline attribution method: (F, x, x') -> attribution over the inputs.
struct Method {
  std::string name;
  std::function<Tensor(const Network&, const Tensor&, const Tensor&)> fn;

  Tensor operator()(const Network& f, const Tensor& x, const Tensor& x_prime) const {
    return fn(f, x, x_prime);
  }
};

// Straight-line integrated gradients of output 0.
Method ig_method(int steps);
// Path method whose path is `reference` (a unit-box path from 0 to 1)
// carried to [x', x] by y -> x' + (x - x') * y.
Method transported_path_method(Path reference, int steps, std::string name);
// A(x, x', F) = F(x') - F(x) in every coordinate.
Method difference_method();

// Per-coordinate affine map T(y)_i = scale_i * y_i + shift_i, scale_i != 0.
struct AffineMap {
  Tensor scale;
  Tensor shift;

  static AffineMap identity(std::size_t n);
  // Scales coordinate i by c and shifts it by d; other coordinates fixed.
  static AffineMap on_coordinate(std::size_t n, std::size_t i, double c, double d);

  Tensor apply(const Tensor& y) const;
  // F o T^-1, realized by prepending an affine layer that applies T^-1.
  Network pull_back(const Network& f) const;
};

struct AxiomCase {
  std::string id;
  Axiom axiom = Axiom::kCompleteness;
  // F; plus G for linearity, the second implementation for implementation
  // invariance and the second network for lemma1.
  std::vector<Network> networks;
  Tensor x;
  Tensor x_prime;
  // Baseline samples of the distributional axioms.
  std::vector<Tensor> baseline_samples;
  // The method under test. NDP and lemma1 check every listed method.
  std::vector<Method> methods;
  double tolerance = 1e-9;
  Verdict expected = Verdict::kHolds;
  // Feature indices for dummy, symmetry (i, j) and lemma1 (i).
  std::size_t i = 0;
  std::size_t j = 1;
  double alpha = 1.0;
  double beta = 1.0;
  std::optional<AffineMap> transform;
  // Quadrature steps for the distributional axioms.
  int steps = 1000;
};

struct AxiomReport {
  std::string id;
  Axiom axiom = Axiom::kCompleteness;
  Verdict verdict = Verdict::kHolds;
  Verdict expected = Verdict::kHolds;
  double residual = 0.0;
  double tolerance = 0.0;
  // Inputs and values behind the verdict; always filled when violated.
  nlohmann::json witness;
  // Counterexamples only: whether the computed values match the closed form.
  bool reproduced = true;

  bool ok() const { return verdict == expected && reproduced; }
  nlohmann::json to_json() const;
};

// Evaluates the axiom's defining relation on the case. Equality axioms hold
// iff the residual is within tolerance; sensitivity(a) needs the attribution
// to exceed 10x tolerance in magnitude; NDP needs every component >= -tolerance.
// Throws ValueError for a malformed case.
AxiomReport check_axiom(const AxiomCase& c);

// A(x, x', F) against A(T(x), T(x'), F o T^-1). Throws ValueError when T(x)
// or T(x') leaves F's domain box.
AxiomReport check_asi(const Method& method, const AffineMap& transform,
                      const Network& f, const Tensor& x, const Tensor& x_prime,
                      double tolerance, std::string id = "asi");

// The four distributional axioms for distributional IG.
AxiomReport check_distributional(const AxiomCase& c);

// Attribution i of two networks over every method. The witness records the
// largest difference of the i-th partials seen on a probe grid, so a failed
// precondition is visible next to the verdict.
AxiomReport check_lemma1(const Network& a, const Network& b, std::size_t i,
                         const Tensor& x, const Tensor& x_prime,
                         const std::vector<Method>& methods, double tolerance,
                         std::string id = "lemma1");

// The three refutations: a loop path on x1*x2 with a negative component, the
// five-segment loop on x1*x2^2, and the difference method that passes
// linearity and ASI while giving -1 on a cost-sharing problem. Each expects
// "violated" (the refuted claim fails) and reproduced values.
std::vector<AxiomReport> run_counterexamples(int steps = 1000);

// The shipped corpus of axiom cases.
std::vector<AxiomCase> default_cases();

// default_cases() and run_counterexamples(), ordered by id.
std::vector<AxiomReport> run_suite(Workers workers = {});
std::vector<AxiomReport> run_cases(const std::vector<AxiomCase>& cases,
                                   Workers workers = {});

// Monotone paths used by the NDP checks in `dims` dimensions: the straight
// line, the two axis orders, and one seeded staircase.
std::vector<Method> monotone_battery(std::size_t dims, int steps,
                                     std::uint64_t seed);

// ---- Lipschitz behavior of integrated gradients

struct GradientBounds {
  Tensor max_partial;  // M_i = max |dF/dx_i| over the grid
  Tensor lipschitz;    // L_i, largest 1-norm of grad(dF/dx_i) over the grid
  Tensor bound;        // M_i + |b_i - a_i| L_i / 2
};

// Estimates on a uniform grid with `points_per_axis` points per axis over the
// network's domain box, using central differences of the analytic gradient.
GradientBounds estimate_gradient_bounds(const Network& net, Target target,
                                        std::size_t points_per_axis);

struct LipschitzConfig {
  std::size_t trials = 1000;
  // x-bar is drawn from the box of this half-width around x, clipped.
  double radius = 0.1;
  int steps = 200;
  std::uint64_t seed = 0;
  Target target;
  // 0 skips the bound estimate.
  std::size_t grid_points = 41;
};

struct LipschitzReport {
  // max over trials and i of |IG_i(x) - IG_i(x-bar)| / |x - x-bar|_inf.
  double max_ratio = 0.0;
  std::size_t witness_index = 0;
  Tensor witness_x;
  Tensor witness_x_bar;
  std::optional<GradientBounds> bounds;
  // Every trial's per-coordinate ratio was within bound_i (when estimated).
  bool within_bound = true;
  std::size_t trials = 0;

  nlohmann::json to_json() const;
};

// Requires a domain box on `net`.
LipschitzReport lipschitz_probe(const Network& net, const Tensor& x_prime,
                                const LipschitzConfig& cfg, Workers workers = {});

// |IG_i(x) - IG_i(x_bar)| for a single pair.
double ig_component_jump(const Network& net, const Tensor& x_prime,
                         const Tensor& x, const Tensor& x_bar, std::size_t i,
                         int steps, Target target = {});

// Partial sums sum_{k=1..K} 2^-k A(gamma^{(-2)^k}) for x1*x2 on the unit square,
// where gamma^n circles the boundary n times before the diagonal. The terms
// alternate without shrinking, so the sums do not converge.
std::vector<std::array<double, 2>> loop_series_partial_sums(int terms, int steps);

}  // namespace axiomgrad
