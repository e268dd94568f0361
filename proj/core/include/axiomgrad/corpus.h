#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "axiomgrad/network.h"
#include "axiomgrad/tensor.h"

// Small closed-form networks with known attributions.
namespace axiomgrad::corpus {

// Box [lower, upper]^n.
DomainBox cube(std::size_t n, double lower, double upper);

// F(x) = prod_{i in factors} x_i on `box`; repeated indices raise powers.
Network monomial(std::vector<std::size_t> factors, std::size_t inputs,
                 const DomainBox& box);
// x1 * x2 on [0, upper]^2.
Network x1x2(double upper = 1.0);
// x1 * x2^2 on [0, 1]^2.
Network x1x2_squared();
// x1^2 * x2 on [0, 1]^2.
Network x1_squared_x2();
// max(y2 - y1, y1 - y2) on [0, 2]^2, built from dense, reshape and max pool.
Network abs_difference();
// w . x + bias.
Network linear(const Tensor& weights, double bias, const DomainBox& box);
// Tanh network in -> hidden... -> 1 with seeded weights on [-1, 1]^in.
Network tanh_net(const std::vector<std::size_t>& sizes, std::uint64_t seed);
// Same with relu hidden activations.
Network relu_net(const std::vector<std::size_t>& sizes, std::uint64_t seed);

// alpha * f + beta * g via a parallel layer and a 2 -> 1 dense combiner.
// Both networks must have one output and the same input shape; the result
// takes f's domain box.
Network weighted_sum(const Network& f, double alpha, const Network& g,
                     double beta);
// f + c.
Network plus_constant(const Network& f, double c);

// Two networks computing tanh(W x + b) . v: one with a single dense layer, the
// other with two stacked dense layers whose product is W.
std::vector<Network> equivalent_pair(std::uint64_t seed);

// Networks that can be split at an internal layer, with the split layer
// name. Used by the neuron-attribution identities.
struct SplittableNet {
  Network net;
  std::string layer;
};
std::vector<SplittableNet> splittable_nets();

}  // namespace axiomgrad::corpus
