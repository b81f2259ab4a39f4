#pragma once

#include <vector>

#include "fops/config.hpp"

namespace fops {

/// Nodes and weights of a fixed quadrature rule.
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1].
QuadratureRule gauss_legendre(int n);

/// n-point Gauss-Laguerre rule for weight exp(-x) on [0, inf).
QuadratureRule gauss_laguerre(int n);

/// Discrete approximation of the truncated-normal travel law: nodes are
/// durations, weights are probabilities summing to one. Uses an n-point
/// Gauss-Legendre rule over [max(0, mean - 8 spread), mean + 8 spread]; a
/// zero spread gives the point mass at the mean.
QuadratureRule travel_law_rule(const TravelLaw& law, int n);

/// Discrete approximation of an Exponential(rate) law: Gauss-Laguerre nodes
/// scaled to durations, weights summing to one.
QuadratureRule exponential_law_rule(double rate, int n);

}  // namespace fops
