#include "axiomgrad/axioms.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <utility>

#include "axiomgrad/corpus.h"
#include "axiomgrad/error.h"

namespace axiomgrad {

using nlohmann::json;

std::string axiom_name(Axiom axiom) {
  switch (axiom) {
    case Axiom::kSensitivityA: return "sensitivity_a";
    case Axiom::kImplementationInvariance: return "implementation_invariance";
    case Axiom::kCompleteness: return "completeness";
    case Axiom::kLinearity: return "linearity";
    case Axiom::kDummy: return "dummy";
    case Axiom::kSymmetry: return "symmetry";
    case Axiom::kAsi: return "ASI";
    case Axiom::kNdp: return "NDP";
    case Axiom::kDistSensitivityA: return "dist_sensitivity_a";
    case Axiom::kDistCompleteness: return "dist_completeness";
    case Axiom::kDistSymmetry: return "dist_symmetry";
    case Axiom::kDistNdp: return "dist_NDP";
    case Axiom::kLemma1: return "lemma1";
    case Axiom::kCounterexample: return "counterexample";
  }
  return "unknown";
}

std::string verdict_name(Verdict verdict) {
  return verdict == Verdict::kHolds ? "holds" : "violated";
}

json AxiomReport::to_json() const {
  return {{"id", id},
          {"axiom", axiom_name(axiom)},
          {"verdict", verdict_name(verdict)},
          {"expected", verdict_name(expected)},
          {"residual", residual},
          {"tolerance", tolerance},
          {"reproduced", reproduced},
          {"ok", ok()},
          {"witness", witness}};
}

// ---- methods

Method ig_method(int steps) {
  return {"integrated-gradients",
          [steps](const Network& f, const Tensor& x, const Tensor& x_prime) {
            return integrated_gradients(f, x, x_prime, Target{0}, steps).values;
          }};
}

Method transported_path_method(Path reference, int steps, std::string name) {
  return {std::move(name),
          [reference = std::move(reference), steps](
              const Network& f, const Tensor& x, const Tensor& x_prime) {
            return path_attribute(f, reference.affine_transport(x, x_prime),
                                  Target{0}, steps)
                .values;
          }};
}

Method difference_method() {
  return {"difference", [](const Network& f, const Tensor& x, const Tensor& x_prime) {
            const double v = evaluate(f, x_prime, Target{0}) - evaluate(f, x, Target{0});
            return Tensor::filled(x.shape(), v);
          }};
}

// ---- affine maps

AffineMap AffineMap::identity(std::size_t n) {
  return {Tensor::filled({n}, 1.0), Tensor({n})};
}

AffineMap AffineMap::on_coordinate(std::size_t n, std::size_t i, double c,
                                   double d) {
  if (i >= n) throw ValueError("transform coordinate out of range");
  AffineMap t = identity(n);
  t.scale[i] = c;
  t.shift[i] = d;
  return t;
}

Tensor AffineMap::apply(const Tensor& y) const {
  if (y.size() != scale.size()) throw ShapeError("transform size mismatch");
  Tensor out = y;
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = scale[i] * y[i] + shift[i];
  return out;
}

Network AffineMap::pull_back(const Network& f) const {
  if (scale.size() != f.input_size()) throw ShapeError("transform size mismatch");
  Tensor inv_scale = scale.reshaped(f.input_shape());
  Tensor inv_shift = shift.reshaped(f.input_shape());
  for (std::size_t i = 0; i < scale.size(); ++i) {
    if (scale[i] == 0.0) throw ValueError("transform is not invertible");
    inv_scale[i] = 1.0 / scale[i];
    inv_shift[i] = -shift[i] / scale[i];
  }
  std::vector<LayerPtr> layers{std::make_shared<Affine>(
      "inverse_transform", std::move(inv_scale), std::move(inv_shift))};
  for (const LayerPtr& layer : f.layers()) layers.push_back(layer);
  return Network(f.input_shape(), std::move(layers), f.domain_box());
}

// ---- checks

namespace {

json point_witness(const Tensor& x, const Tensor& x_prime) {
  return {{"x", x.values()}, {"x_prime", x_prime.values()}};
}

Verdict holds_if(bool condition) {
  return condition ? Verdict::kHolds : Verdict::kViolated;
}

const Network& network_at(const AxiomCase& c, std::size_t k) {
  if (c.networks.size() <= k) {
    throw ValueError("case '" + c.id + "' needs " + std::to_string(k + 1) +
                     " network(s)");
  }
  return c.networks[k];
}

const Method& first_method(const AxiomCase& c) {
  if (c.methods.empty()) throw ValueError("case '" + c.id + "' lists no method");
  return c.methods.front();
}

void require_index(const AxiomCase& c, std::size_t i) {
  if (i >= c.x.size()) {
    throw ValueError("case '" + c.id + "': feature index " + std::to_string(i) +
                     " out of range");
  }
}

AxiomReport start(const AxiomCase& c) {
  AxiomReport r;
  r.id = c.id;
  r.axiom = c.axiom;
  r.expected = c.expected;
  r.tolerance = c.tolerance;
  return r;
}

AxiomReport check_point_axiom(const AxiomCase& c) {
  AxiomReport r = start(c);
  require_same_shape(c.x, c.x_prime, "case '" + c.id + "' endpoints");
  const Network& f = network_at(c, 0);
  const Method& method = first_method(c);
  json w = point_witness(c.x, c.x_prime);
  w["method"] = method.name;

  switch (c.axiom) {
    case Axiom::kSensitivityA: {
      std::vector<std::size_t> differing;
      for (std::size_t k = 0; k < c.x.size(); ++k) {
        if (c.x[k] != c.x_prime[k]) differing.push_back(k);
      }
      if (differing.size() != 1) {
        throw ValueError("case '" + c.id +
                         "': sensitivity(a) needs x and x' differing in one feature");
      }
      const std::size_t i = differing.front();
      const Tensor a = method(f, c.x, c.x_prime);
      const double df = evaluate(f, c.x, Target{0}) - evaluate(f, c.x_prime, Target{0});
      r.residual = std::abs(a[i] - df);
      r.verdict = holds_if(df == 0.0 || std::abs(a[i]) > 10.0 * c.tolerance);
      w["attribution"] = a.values();
      w["feature"] = i;
      w["value_difference"] = df;
      break;
    }
    case Axiom::kImplementationInvariance: {
      const Network& g = network_at(c, 1);
      const Tensor a = method(f, c.x, c.x_prime);
      const Tensor b = method(g, c.x, c.x_prime);
      r.residual = max_abs_diff(a, b);
      r.verdict = holds_if(r.residual <= c.tolerance);
      w["attribution"] = a.values();
      w["attribution_other"] = b.values();
      w["function_gap"] = std::max(
          std::abs(evaluate(f, c.x, Target{0}) - evaluate(g, c.x, Target{0})),
          std::abs(evaluate(f, c.x_prime, Target{0}) -
                   evaluate(g, c.x_prime, Target{0})));
      break;
    }
    case Axiom::kCompleteness: {
      const Tensor a = method(f, c.x, c.x_prime);
      const double df = evaluate(f, c.x, Target{0}) - evaluate(f, c.x_prime, Target{0});
      r.residual = std::abs(sum(a) - df);
      r.verdict = holds_if(r.residual <= c.tolerance);
      w["attribution"] = a.values();
      w["value_difference"] = df;
      break;
    }
    case Axiom::kLinearity: {
      const Network& g = network_at(c, 1);
      const Network combined = corpus::weighted_sum(f, c.alpha, g, c.beta);
      const Tensor a = method(combined, c.x, c.x_prime);
      const Tensor expected = c.alpha * method(f, c.x, c.x_prime) +
                              c.beta * method(g, c.x, c.x_prime);
      r.residual = max_abs_diff(a, expected);
      r.verdict = holds_if(r.residual <= c.tolerance);
      w["attribution"] = a.values();
      w["combined_attributions"] = expected.values();
      w["alpha"] = c.alpha;
      w["beta"] = c.beta;
      break;
    }
    case Axiom::kDummy: {
      require_index(c, c.i);
      const Tensor a = method(f, c.x, c.x_prime);
      r.residual = std::abs(a[c.i]);
      r.verdict = holds_if(r.residual <= c.tolerance);
      w["attribution"] = a.values();
      w["feature"] = c.i;
      break;
    }
    case Axiom::kSymmetry: {
      require_index(c, c.i);
      require_index(c, c.j);
      if (c.x[c.i] != c.x[c.j] || c.x_prime[c.i] != c.x_prime[c.j]) {
        throw ValueError("case '" + c.id +
                         "': symmetry needs x_i == x_j and x'_i == x'_j");
      }
      const Tensor a = method(f, c.x, c.x_prime);
      r.residual = std::abs(a[c.i] - a[c.j]);
      r.verdict = holds_if(r.residual <= c.tolerance);
      w["attribution"] = a.values();
      w["features"] = {c.i, c.j};
      break;
    }
    case Axiom::kNdp: {
      double worst = std::numeric_limits<double>::infinity();
      json per_method = json::array();
      for (const Method& m : c.methods) {
        const Tensor a = m(f, c.x, c.x_prime);
        double lowest = std::numeric_limits<double>::infinity();
        for (double v : a.data()) lowest = std::min(lowest, v);
        per_method.push_back({{"method", m.name}, {"attribution", a.values()}});
        if (lowest < worst) {
          worst = lowest;
          w["method"] = m.name;
          w["attribution"] = a.values();
        }
      }
      r.residual = std::max(0.0, -worst);
      r.verdict = holds_if(worst >= -c.tolerance);
      w["battery"] = per_method;
      break;
    }
    default:
      throw ValueError("case '" + c.id + "' is not a single-baseline axiom");
  }
  r.witness = std::move(w);
  return r;
}

// Lexicographic order used to compare sample multisets.
bool lex_less(const Tensor& a, const Tensor& b) {
  return std::lexicographical_compare(a.data().begin(), a.data().end(),
                                      b.data().begin(), b.data().end());
}

}  // namespace

AxiomReport check_asi(const Method& method, const AffineMap& transform,
                      const Network& f, const Tensor& x, const Tensor& x_prime,
                      double tolerance, std::string id) {
  const Tensor tx = transform.apply(x).reshaped(x.shape());
  const Tensor tx_prime = transform.apply(x_prime).reshaped(x_prime.shape());
  if (!f.in_domain(tx) || !f.in_domain(tx_prime)) {
    throw ValueError("transform moves the endpoints outside the domain box");
  }
  const Network pulled = transform.pull_back(f);
  const Tensor a = method(f, x, x_prime);
  const Tensor b = method(pulled, tx, tx_prime);
  AxiomReport r;
  r.id = std::move(id);
  r.axiom = Axiom::kAsi;
  r.tolerance = tolerance;
  r.residual = max_abs_diff(a, b);
  r.verdict = holds_if(r.residual <= tolerance);
  r.witness = point_witness(x, x_prime);
  r.witness["method"] = method.name;
  r.witness["attribution"] = a.values();
  r.witness["transformed_attribution"] = b.values();
  r.witness["scale"] = transform.scale.values();
  r.witness["shift"] = transform.shift.values();
  return r;
}

AxiomReport check_distributional(const AxiomCase& c) {
  AxiomReport r = start(c);
  const Network& f = network_at(c, 0);
  if (c.baseline_samples.empty()) {
    throw ValueError("case '" + c.id + "' has no baseline samples");
  }
  for (const Tensor& s : c.baseline_samples) {
    if (s.size() != c.x.size()) {
      throw ValueError("case '" + c.id + "': baseline sample size mismatch");
    }
  }
  const Tensor eg =
      distributional_ig(f, c.x, BaselineDistribution{c.baseline_samples},
                        Target{0}, c.steps)
          .values;
  std::vector<double> baseline_values;
  for (const Tensor& s : c.baseline_samples) {
    baseline_values.push_back(evaluate(f, s, Target{0}));
  }
  const double mean_baseline =
      pairwise_sum(baseline_values) / static_cast<double>(baseline_values.size());
  const double gap = evaluate(f, c.x, Target{0}) - mean_baseline;
  json w = {{"x", c.x.values()},
            {"samples", c.baseline_samples.size()},
            {"attribution", eg.values()},
            {"value_difference", gap}};

  switch (c.axiom) {
    case Axiom::kDistSensitivityA: {
      require_index(c, c.i);
      for (const Tensor& s : c.baseline_samples) {
        for (std::size_t k = 0; k < s.size(); ++k) {
          if (k != c.i && s[k] != c.x[k]) {
            throw ValueError("case '" + c.id +
                             "': baseline samples must match x off feature i");
          }
        }
      }
      r.residual = std::abs(eg[c.i] - gap);
      r.verdict = holds_if(gap == 0.0 || std::abs(eg[c.i]) > 10.0 * c.tolerance);
      w["feature"] = c.i;
      break;
    }
    case Axiom::kDistCompleteness:
      r.residual = std::abs(sum(eg) - gap);
      r.verdict = holds_if(r.residual <= c.tolerance);
      break;
    case Axiom::kDistSymmetry: {
      require_index(c, c.i);
      require_index(c, c.j);
      if (c.x[c.i] != c.x[c.j]) {
        throw ValueError("case '" + c.id + "': symmetry needs x_i == x_j");
      }
      std::vector<Tensor> samples = c.baseline_samples;
      std::vector<Tensor> swapped = samples;
      for (Tensor& s : swapped) std::swap(s[c.i], s[c.j]);
      std::sort(samples.begin(), samples.end(), lex_less);
      std::sort(swapped.begin(), swapped.end(), lex_less);
      for (std::size_t k = 0; k < samples.size(); ++k) {
        if (samples[k].values() != swapped[k].values()) {
          throw ValueError("case '" + c.id +
                           "': baseline samples are not exchangeable in (i, j)");
        }
      }
      r.residual = std::abs(eg[c.i] - eg[c.j]);
      r.verdict = holds_if(r.residual <= c.tolerance);
      w["features"] = {c.i, c.j};
      break;
    }
    case Axiom::kDistNdp: {
      double lowest = std::numeric_limits<double>::infinity();
      for (double v : eg.data()) lowest = std::min(lowest, v);
      r.residual = std::max(0.0, -lowest);
      r.verdict = holds_if(lowest >= -c.tolerance);
      break;
    }
    default:
      throw ValueError("case '" + c.id + "' is not a distributional axiom");
  }
  r.witness = std::move(w);
  return r;
}

AxiomReport check_lemma1(const Network& a, const Network& b, std::size_t i,
                         const Tensor& x, const Tensor& x_prime,
                         const std::vector<Method>& methods, double tolerance,
                         std::string id) {
  if (a.input_size() != b.input_size() || a.output_size() != 1 ||
      b.output_size() != 1) {
    throw ValueError("lemma1 needs two single-output networks on the same inputs");
  }
  if (i >= x.size() || x.size() != a.input_size()) {
    throw ValueError("lemma1 feature index out of range");
  }
  if (methods.empty()) throw ValueError("lemma1 needs at least one method");

  // Probe the precondition on random points of the box spanned by x and x'.
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double partial_gap = 0.0;
  for (int k = 0; k < 64; ++k) {
    Tensor p = x_prime;
    for (std::size_t d = 0; d < p.size(); ++d) {
      p[d] = x_prime[d] + unit(rng) * (x[d] - x_prime[d]);
    }
    partial_gap = std::max(partial_gap,
                           std::abs(a.gradient(p, 0)[i] - b.gradient(p, 0)[i]));
  }

  AxiomReport r;
  r.id = std::move(id);
  r.axiom = Axiom::kLemma1;
  r.tolerance = tolerance;
  json per_method = json::array();
  for (const Method& m : methods) {
    const double va = m(a, x, x_prime)[i];
    const double vb = m(b, x, x_prime)[i];
    r.residual = std::max(r.residual, std::abs(va - vb));
    per_method.push_back({{"method", m.name}, {"first", va}, {"second", vb}});
  }
  r.verdict = holds_if(r.residual <= tolerance);
  r.witness = point_witness(x, x_prime);
  r.witness["feature"] = i;
  r.witness["partial_gap"] = partial_gap;
  r.witness["methods"] = per_method;
  return r;
}

AxiomReport check_axiom(const AxiomCase& c) {
  switch (c.axiom) {
    case Axiom::kAsi: {
      if (!c.transform) throw ValueError("case '" + c.id + "' has no transform");
      AxiomReport r = check_asi(first_method(c), *c.transform, network_at(c, 0),
                                c.x, c.x_prime, c.tolerance, c.id);
      r.expected = c.expected;
      return r;
    }
    case Axiom::kDistSensitivityA:
    case Axiom::kDistCompleteness:
    case Axiom::kDistSymmetry:
    case Axiom::kDistNdp:
      return check_distributional(c);
    case Axiom::kLemma1: {
      AxiomReport r = check_lemma1(network_at(c, 0), network_at(c, 1), c.i, c.x,
                                   c.x_prime, c.methods, c.tolerance, c.id);
      r.expected = c.expected;
      return r;
    }
    case Axiom::kCounterexample:
      throw ValueError("counterexamples run through run_counterexamples");
    default:
      return check_point_axiom(c);
  }
}

// ---- counterexamples

std::vector<AxiomReport> run_counterexamples(int steps) {
  constexpr double kQuadratureTol = 1e-3;
  std::vector<AxiomReport> reports;
  const Tensor origin = Tensor::vector({0, 0});

  {
    // Every monotone path from (0,0) to (1,0) gives x1*x2 non-negative
    // attributions; this loop does not.
    const Network f = corpus::x1x2();
    const Tensor x = Tensor::vector({1, 0});
    const AttributionMap m = path_attribute(f, square_detour(), Target{0}, steps);
    const Tensor monotone = integrated_gradients(f, x, origin, Target{0}, steps).values;
    AxiomReport r;
    r.id = "counterexample/loop-x1x2";
    r.axiom = Axiom::kCounterexample;
    r.expected = Verdict::kViolated;
    r.tolerance = kQuadratureTol;
    r.residual = max_abs_diff(m.values, Tensor::vector({1, -1}));
    r.reproduced = r.residual <= kQuadratureTol;
    r.verdict = holds_if(std::min(m.values[0], m.values[1]) >= -kQuadratureTol);
    r.witness = point_witness(x, origin);
    r.witness["path"] = square_detour().to_json();
    r.witness["attribution"] = m.values.values();
    r.witness["expected_attribution"] = {1.0, -1.0};
    r.witness["monotone_attribution"] = monotone.values();
    r.witness["completeness_gap"] = m.completeness_gap;
    reports.push_back(std::move(r));
  }
  {
    const Network f = corpus::x1x2_squared();
    const Tensor x = Tensor::vector({1, 1});
    const Path loop = five_segment_loop();
    const Tensor a = path_attribute(f, loop, Target{0}, steps).values;
    const Tensor last = integrated_gradients(f, x, origin, Target{0}, steps).values;
    const double loop_error = max_abs_diff(a, Tensor::vector({-2.0 / 3, 5.0 / 3}));
    const double last_error = max_abs_diff(last, Tensor::vector({1.0 / 3, 2.0 / 3}));
    AxiomReport r;
    r.id = "counterexample/five-segment-x1x2sq";
    r.axiom = Axiom::kCounterexample;
    r.expected = Verdict::kViolated;
    r.tolerance = kQuadratureTol;
    r.residual = std::max(loop_error, last_error);
    r.reproduced = r.residual <= kQuadratureTol;
    r.verdict = holds_if(std::min(a[0], a[1]) >= -kQuadratureTol);
    r.witness = point_witness(x, origin);
    r.witness["path"] = loop.to_json();
    r.witness["attribution"] = a.values();
    r.witness["expected_attribution"] = {-2.0 / 3, 5.0 / 3};
    r.witness["last_segment_attribution"] = last.values();
    reports.push_back(std::move(r));
  }
  {
    // One-dimensional problem on [0, 3]: F(y) = y, G(y) = y^2.
    const DomainBox box = corpus::cube(1, 0.0, 3.0);
    const Network f = corpus::linear(Tensor::vector({1.0}), 0.0, box);
    const Network g = corpus::monomial({0, 0}, 1, box);
    const Tensor x = Tensor::vector({1});
    const Tensor x_prime = Tensor::vector({0});
    const Method diff = difference_method();
    AxiomCase lin;
    lin.id = "counterexample/difference-method/linearity";
    lin.axiom = Axiom::kLinearity;
    lin.networks = {f, g};
    lin.x = x;
    lin.x_prime = x_prime;
    lin.methods = {diff};
    lin.alpha = 2.0;
    lin.beta = -3.0;
    lin.tolerance = 1e-12;
    const AxiomReport linearity = check_axiom(lin);
    const AxiomReport asi = check_asi(diff, AffineMap::on_coordinate(1, 0, 2.0, 0.5),
                                      f, x, x_prime, 1e-12);
    const double value = diff(f, x, x_prime)[0];
    AxiomReport r;
    r.id = "counterexample/difference-method";
    r.axiom = Axiom::kCounterexample;
    r.expected = Verdict::kViolated;
    r.tolerance = 0.0;
    r.residual = std::abs(value + 1.0);
    r.reproduced = value == -1.0;
    // A cost-share decomposition needs A(1, 0, F) >= 0 once linearity and ASI
    // hold; the claim fails when both pass and the value is negative.
    const bool premises = linearity.verdict == Verdict::kHolds &&
                          asi.verdict == Verdict::kHolds;
    r.verdict = holds_if(!(premises && value < 0.0));
    r.witness = point_witness(x, x_prime);
    r.witness["attribution"] = {value};
    r.witness["linearity"] = linearity.to_json();
    r.witness["asi"] = asi.to_json();
    reports.push_back(std::move(r));
  }
  return reports;
}

// ---- corpus of cases

std::vector<Method> monotone_battery(std::size_t dims, int steps,
                                     std::uint64_t seed) {
  std::vector<std::size_t> order(dims);
  for (std::size_t k = 0; k < dims; ++k) order[k] = k;
  std::vector<std::size_t> reversed(order.rbegin(), order.rend());
  return {ig_method(steps),
          transported_path_method(axis_ordered_path(order), steps, "axis-order"),
          transported_path_method(axis_ordered_path(reversed), steps,
                                  "reverse-axis-order"),
          transported_path_method(monotone_staircase(dims, seed), steps,
                                  "staircase-" + std::to_string(seed))};
}

std::vector<AxiomCase> default_cases() {
  constexpr int kSteps = 1000;
  constexpr double kExact = 1e-9;
  constexpr double kQuadrature = 1e-3;
  const Method ig = ig_method(kSteps);
  const Method loop = transported_path_method(five_segment_loop(), kSteps,
                                              "five-segment-loop");
  const Tensor origin = Tensor::vector({0, 0});
  const Tensor ones = Tensor::vector({1, 1});
  const Network tanh = corpus::tanh_net({2, 6, 1}, 7);
  const Network tanh3 = corpus::tanh_net({3, 5, 1}, 8);

  std::vector<AxiomCase> cases;
  auto add = [&](AxiomCase c) { cases.push_back(std::move(c)); };
  auto point = [&](std::string id, Axiom axiom, std::vector<Network> nets,
                   Tensor x, Tensor x_prime, Method m, double tol) {
    AxiomCase c;
    c.id = std::move(id);
    c.axiom = axiom;
    c.networks = std::move(nets);
    c.x = std::move(x);
    c.x_prime = std::move(x_prime);
    c.methods = {std::move(m)};
    c.tolerance = tol;
    return c;
  };

  add(point("sensitivity_a/ig-x1x2", Axiom::kSensitivityA, {corpus::x1x2()}, ones,
            Tensor::vector({0, 1}), ig, kQuadrature));
  add(point("sensitivity_a/ig-tanh", Axiom::kSensitivityA, {tanh},
            Tensor::vector({0.8, -0.3}), Tensor::vector({-0.6, -0.3}), ig,
            kQuadrature));

  add(point("implementation_invariance/ig-stacked-dense",
            Axiom::kImplementationInvariance, corpus::equivalent_pair(3),
            Tensor::vector({0.7, -0.4}), Tensor::vector({-0.5, 0.2}), ig, kExact));

  add(point("completeness/ig-x1x2sq", Axiom::kCompleteness,
            {corpus::x1x2_squared()}, ones, origin, ig, kQuadrature));
  add(point("completeness/ig-tanh", Axiom::kCompleteness, {tanh3},
            Tensor::vector({0.9, -0.2, 0.4}), Tensor::vector({-0.5, 0.3, 0.0}), ig,
            kQuadrature));
  add(point("completeness/loop-x1x2sq", Axiom::kCompleteness,
            {corpus::x1x2_squared()}, Tensor::vector({0.9, 0.7}),
            Tensor::vector({0.1, 0.2}), loop, kQuadrature));

  {
    AxiomCase c = point("linearity/ig-tanh-and-x1x2", Axiom::kLinearity,
                        {tanh.with_domain_box(corpus::cube(2, 0.0, 1.0)),
                         corpus::x1x2()},
                        Tensor::vector({0.9, 0.6}), Tensor::vector({0.1, 0.0}), ig,
                        kExact);
    c.alpha = 2.5;
    c.beta = -1.5;
    add(std::move(c));
  }
  {
    AxiomCase c = point("linearity/loop-x1x2sq-and-x1x2", Axiom::kLinearity,
                        {corpus::x1x2_squared(), corpus::x1x2()}, ones, origin,
                        loop, kExact);
    c.alpha = 0.5;
    c.beta = 3.0;
    add(std::move(c));
  }

  {
    const Network first_only = corpus::linear(Tensor::vector({1.0, 0.0}), 0.25,
                                              corpus::cube(2, 0.0, 1.0));
    AxiomCase c = point("dummy/ig-x1-only", Axiom::kDummy, {first_only},
                        Tensor::vector({0.8, 0.9}), Tensor::vector({0.1, 0.2}), ig,
                        0.0);
    c.i = 1;
    add(c);
    c.id = "dummy/loop-x1-only";
    c.methods = {loop};
    add(std::move(c));
  }

  {
    AxiomCase c = point("symmetry/ig-x1x2", Axiom::kSymmetry, {corpus::x1x2()},
                        Tensor::vector({0.7, 0.7}), Tensor::vector({0.1, 0.1}), ig,
                        kExact);
    add(c);
    // An axis-ordered path favors the axis it visits second.
    c.id = "symmetry/corner-path-x1x2";
    c.methods = {transported_path_method(corner_path(0), kSteps, "corner-path")};
    c.expected = Verdict::kViolated;
    add(std::move(c));
  }

  {
    AxiomCase c = point("ASI/identity", Axiom::kAsi, {tanh},
                        Tensor::vector({0.5, -0.2}), Tensor::vector({-0.3, 0.4}), ig,
                        0.0);
    c.transform = AffineMap::identity(2);
    add(std::move(c));
  }
  {
    AxiomCase c = point("ASI/ig-x1x2-scale", Axiom::kAsi, {corpus::x1x2(2.0)},
                        Tensor::vector({0.8, 0.6}), Tensor::vector({0.1, 0.2}), ig,
                        1e-6);
    c.transform = AffineMap::on_coordinate(2, 0, 2.0, 0.0);
    add(std::move(c));
  }
  {
    AxiomCase c = point("ASI/loop-x1x2sq", Axiom::kAsi, {corpus::x1x2_squared()},
                        Tensor::vector({0.6, 0.5}), Tensor::vector({0.1, 0.2}),
                        loop, 1e-6);
    AffineMap t = AffineMap::identity(2);
    t.scale = Tensor::vector({1.5, -1.0});
    t.shift = Tensor::vector({0.05, 0.9});
    c.transform = t;
    add(std::move(c));
  }
  {
    AxiomCase c = point("ASI/difference-tanh", Axiom::kAsi, {tanh},
                        Tensor::vector({0.5, -0.2}), Tensor::vector({-0.3, 0.4}),
                        difference_method(), 1e-12);
    c.transform = AffineMap::on_coordinate(2, 1, -1.5, 0.1);
    add(std::move(c));
  }

  {
    AxiomCase c;
    c.id = "NDP/monotone-battery-x1x2sq";
    c.axiom = Axiom::kNdp;
    c.networks = {corpus::x1x2_squared()};
    c.x = Tensor::vector({1.0, 0.5});
    c.x_prime = origin;
    c.methods = monotone_battery(2, kSteps, 1);
    c.tolerance = 1e-12;
    add(c);
    c.id = "NDP/monotone-battery-linear3";
    c.networks = {corpus::linear(Tensor::vector({0.5, 0.0, 2.0}), -1.0,
                                 corpus::cube(3, 0.0, 1.0))};
    c.x = Tensor::vector({0.9, 0.4, 0.7});
    c.x_prime = Tensor::vector({0.1, 0.4, 0.2});
    c.methods = monotone_battery(3, kSteps, 2);
    add(c);
    // The non-monotone loop breaks NDP on the same non-decreasing function.
    c.id = "NDP/loop-x1x2sq";
    c.networks = {corpus::x1x2_squared()};
    c.x = ones;
    c.x_prime = origin;
    c.methods = {loop};
    c.expected = Verdict::kViolated;
    add(std::move(c));
  }

  {
    AxiomCase c;
    c.networks = {corpus::x1x2()};
    c.steps = kSteps;
    c.x = ones;
    c.id = "dist_sensitivity_a/x1x2";
    c.axiom = Axiom::kDistSensitivityA;
    c.baseline_samples = {Tensor::vector({0, 1}), Tensor::vector({0.5, 1})};
    c.i = 0;
    c.tolerance = kQuadrature;
    add(c);
    c.id = "dist_completeness/x1x2";
    c.axiom = Axiom::kDistCompleteness;
    c.baseline_samples = {origin, ones};
    add(c);
    c.id = "dist_symmetry/x1x2";
    c.axiom = Axiom::kDistSymmetry;
    c.baseline_samples = {Tensor::vector({0, 1}), Tensor::vector({1, 0})};
    c.i = 0;
    c.j = 1;
    c.tolerance = kExact;
    add(c);
    c.id = "dist_NDP/x1x2sq";
    c.axiom = Axiom::kDistNdp;
    c.networks = {corpus::x1x2_squared()};
    c.baseline_samples = {origin, Tensor::vector({0.5, 0.2}),
                          Tensor::vector({0.3, 0.9})};
    c.tolerance = 1e-12;
    add(std::move(c));
  }

  {
    const Network a = corpus::x1x2();
    const Network other = corpus::linear(Tensor::vector({0.0, 1.0}), 0.0,
                                         corpus::cube(2, 0.0, 1.0));
    const Network x2_only = Network(
        other.input_shape(),
        {other.layers()[0], std::make_shared<Activation>("squash", ActivationKind::kTanh)},
        other.domain_box());
    const Network first = corpus::linear(Tensor::vector({1.0, 0.0}), 0.0,
                                         corpus::cube(2, 0.0, 1.0));
    std::vector<Method> paths{
        ig, loop, transported_path_method(corner_path(0), kSteps, "corner-path-0"),
        transported_path_method(corner_path(1), kSteps, "corner-path-1")};
    AxiomCase c;
    c.axiom = Axiom::kLemma1;
    c.x = Tensor::vector({0.9, 0.8});
    c.x_prime = Tensor::vector({0.1, 0.3});
    c.methods = paths;
    c.i = 0;
    c.tolerance = kExact;
    c.id = "lemma1/plus-function-of-other-feature";
    c.networks = {a, corpus::weighted_sum(a, 1.0, x2_only, 1.0)};
    add(c);
    c.id = "lemma1/plus-constant";
    c.networks = {a, corpus::plus_constant(a, 0.75)};
    add(c);
    c.id = "lemma1/plus-same-feature";
    c.networks = {a, corpus::weighted_sum(a, 1.0, first, 1.0)};
    c.expected = Verdict::kViolated;
    add(std::move(c));
  }
  return cases;
}

std::vector<AxiomReport> run_cases(const std::vector<AxiomCase>& cases,
                                   Workers workers) {
  std::vector<AxiomReport> reports(cases.size());
  parallel_for(cases.size(), workers,
               [&](std::size_t k) { reports[k] = check_axiom(cases[k]); });
  std::stable_sort(reports.begin(), reports.end(),
                   [](const AxiomReport& a, const AxiomReport& b) { return a.id < b.id; });
  return reports;
}

std::vector<AxiomReport> run_suite(Workers workers) {
  std::vector<AxiomReport> reports = run_cases(default_cases(), workers);
  for (AxiomReport& r : run_counterexamples()) reports.push_back(std::move(r));
  std::stable_sort(reports.begin(), reports.end(),
                   [](const AxiomReport& a, const AxiomReport& b) { return a.id < b.id; });
  return reports;
}

// ---- Lipschitz probe

GradientBounds estimate_gradient_bounds(const Network& net, Target target,
                                        std::size_t points_per_axis) {
  if (!net.domain_box()) throw ValueError("gradient bounds need a domain box");
  if (points_per_axis < 2) throw ValueError("grid needs at least two points per axis");
  const Network f = target_network(net, target.mode);
  const DomainBox& box = *net.domain_box();
  const std::size_t n = net.input_size();
  double total = 1.0;
  for (std::size_t k = 0; k < n; ++k) total *= static_cast<double>(points_per_axis);
  if (total > 1e6) throw ValueError("gradient grid too large for this input size");

  GradientBounds out{Tensor({n}), Tensor({n}), Tensor({n})};
  std::vector<std::size_t> index(n, 0);
  const double h = 1e-5;
  for (std::size_t visited = 0; visited < static_cast<std::size_t>(total); ++visited) {
    Tensor p(Shape{n});
    for (std::size_t k = 0; k < n; ++k) {
      p[k] = box.lower[k] + (box.upper[k] - box.lower[k]) *
                                static_cast<double>(index[k]) /
                                static_cast<double>(points_per_axis - 1);
    }
    const Tensor g = f.gradient(p, target.index);
    for (std::size_t i = 0; i < n; ++i) {
      out.max_partial[i] = std::max(out.max_partial[i], std::abs(g[i]));
    }
    // hessian_row_norm[i] = sum_k |d^2 F / dx_k dx_i|
    std::vector<double> row_norm(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
      Tensor up = p;
      Tensor down = p;
      up[k] += h;
      down[k] -= h;
      const Tensor gu = f.gradient(up, target.index);
      const Tensor gd = f.gradient(down, target.index);
      for (std::size_t i = 0; i < n; ++i) {
        row_norm[i] += std::abs((gu[i] - gd[i]) / (2 * h));
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.lipschitz[i] = std::max(out.lipschitz[i], row_norm[i]);
    }
    for (std::size_t k = 0; k < n; ++k) {
      if (++index[k] < points_per_axis) break;
      index[k] = 0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.bound[i] = out.max_partial[i] +
                   std::abs(box.upper[i] - box.lower[i]) * out.lipschitz[i] / 2.0;
  }
  return out;
}

json LipschitzReport::to_json() const {
  json j = {{"max_ratio", max_ratio},
            {"trials", trials},
            {"witness_index", witness_index},
            {"witness_x", witness_x.values()},
            {"witness_x_bar", witness_x_bar.values()},
            {"within_bound", within_bound}};
  if (bounds) {
    j["M"] = bounds->max_partial.values();
    j["L"] = bounds->lipschitz.values();
    j["bound"] = bounds->bound.values();
  }
  return j;
}

LipschitzReport lipschitz_probe(const Network& net, const Tensor& x_prime,
                                const LipschitzConfig& cfg, Workers workers) {
  if (cfg.trials < 1) throw ValueError("trials must be at least 1");
  if (!net.domain_box()) throw ValueError("the Lipschitz probe needs a domain box");
  const DomainBox& box = *net.domain_box();
  const std::size_t n = net.input_size();

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::pair<Tensor, Tensor>> pairs;
  pairs.reserve(cfg.trials);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    Tensor x(x_prime.shape());
    Tensor x_bar(x_prime.shape());
    for (std::size_t k = 0; k < n; ++k) {
      x[k] = box.lower[k] + unit(rng) * (box.upper[k] - box.lower[k]);
      const double offset = (2.0 * unit(rng) - 1.0) * cfg.radius;
      x_bar[k] = std::clamp(x[k] + offset, box.lower[k], box.upper[k]);
    }
    pairs.emplace_back(std::move(x), std::move(x_bar));
  }

  std::vector<Tensor> ratios(cfg.trials);
  parallel_for(cfg.trials, workers, [&](std::size_t t) {
    const auto& [x, x_bar] = pairs[t];
    const double dist = max_abs_diff(x, x_bar);
    Tensor r(Shape{n});
    if (dist > 0.0) {
      const Tensor a = integrated_gradients(net, x, x_prime, cfg.target, cfg.steps).values;
      const Tensor b =
          integrated_gradients(net, x_bar, x_prime, cfg.target, cfg.steps).values;
      for (std::size_t i = 0; i < n; ++i) r[i] = std::abs(a[i] - b[i]) / dist;
    }
    ratios[t] = std::move(r);
  });

  LipschitzReport report;
  report.trials = cfg.trials;
  if (cfg.grid_points > 0) {
    report.bounds = estimate_gradient_bounds(net, cfg.target, cfg.grid_points);
  }
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      if (ratios[t][i] > report.max_ratio || (t == 0 && i == 0)) {
        report.max_ratio = ratios[t][i];
        report.witness_index = i;
        report.witness_x = pairs[t].first;
        report.witness_x_bar = pairs[t].second;
      }
      if (report.bounds && ratios[t][i] > report.bounds->bound[i]) {
        report.within_bound = false;
      }
    }
  }
  return report;
}

double ig_component_jump(const Network& net, const Tensor& x_prime,
                         const Tensor& x, const Tensor& x_bar, std::size_t i,
                         int steps, Target target) {
  const Tensor a = integrated_gradients(net, x, x_prime, target, steps).values;
  const Tensor b = integrated_gradients(net, x_bar, x_prime, target, steps).values;
  if (i >= a.size()) throw ValueError("feature index out of range");
  return std::abs(a[i] - b[i]);
}

std::vector<std::array<double, 2>> loop_series_partial_sums(int terms, int steps) {
  if (terms < 1) throw ValueError("terms must be at least 1");
  const Network f = corpus::x1x2();
  std::vector<std::array<double, 2>> sums;
  std::array<double, 2> acc{0.0, 0.0};
  double weight = 1.0;
  int loops = 1;
  for (int k = 1; k <= terms; ++k) {
    loops *= -2;
    weight /= 2.0;
    const Tensor a = path_attribute(f, boundary_loops(loops), Target{0}, steps).values;
    acc[0] += weight * a[0];
    acc[1] += weight * a[1];
    sums.push_back(acc);
  }
  return sums;
}

}  // namespace axiomgrad
