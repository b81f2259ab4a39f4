#include "fops/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace fops {

namespace {

constexpr int kMaxNewton = 100;

void normalize(QuadratureRule& rule)
{
    const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
    for (double& w : rule.weights)
        w /= total;
}

}  // namespace

QuadratureRule gauss_legendre(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < kMaxNewton; ++it) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double step = p0 / dp;
            z -= step;
            if (std::abs(step) < 1e-15)
                break;
        }
        // recompute the derivative at the converged root
        double p0 = 1.0;
        double p1 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

QuadratureRule gauss_laguerre(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_laguerre: n must be >= 1");
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    double z = 0.0;
    for (int i = 0; i < n; ++i) {
        // initial guesses for the i-th root of L_n
        if (i == 0)
            z = 3.0 / (1.0 + 2.4 * n);
        else if (i == 1)
            z += 15.0 / (1.0 + 2.5 * n);
        else {
            const double ai = i - 1;
            z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - rule.nodes[i - 2]);
        }
        double p0 = 0.0;
        double p1 = 0.0;
        double dp = 0.0;
        for (int it = 0; it < kMaxNewton; ++it) {
            p0 = 1.0;
            p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0 - z) * p1 - j * p2) / (j + 1.0);
            }
            dp = n * (p0 - p1) / z;
            const double step = p0 / dp;
            z -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, z))
                break;
        }
        // weight = x / ((n+1)^2 L_{n+1}(x)^2), written via L_{n-1}
        p0 = 1.0;
        p1 = 0.0;
        for (int j = 0; j < n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j + 1.0 - z) * p1 - j * p2) / (j + 1.0);
        }
        rule.nodes[i] = z;
        rule.weights[i] = z / (static_cast<double>(n) * n * p1 * p1);
    }
    return rule;
}

QuadratureRule travel_law_rule(const TravelLaw& law, int n)
{
    if (!(law.mean > 0.0))
        throw std::invalid_argument("travel_law_rule: mean must be > 0");
    if (law.spread <= 0.0)
        return QuadratureRule{{law.mean}, {1.0}};
    const double lo = std::max(0.0, law.mean - 8.0 * law.spread);
    const double hi = law.mean + 8.0 * law.spread;
    const auto base = gauss_legendre(n);
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const double half = 0.5 * (hi - lo);
    const double mid = 0.5 * (hi + lo);
    for (int k = 0; k < n; ++k) {
        const double t = mid + half * base.nodes[k];
        const double z = (t - law.mean) / law.spread;
        rule.nodes[k] = t;
        rule.weights[k] = half * base.weights[k] * std::exp(-0.5 * z * z);
    }
    normalize(rule);
    return rule;
}

QuadratureRule exponential_law_rule(double rate, int n)
{
    if (!(rate > 0.0))
        throw std::invalid_argument("exponential_law_rule: rate must be > 0");
    auto rule = gauss_laguerre(n);
    for (double& x : rule.nodes)
        x /= rate;
    normalize(rule);
    return rule;
}

}  // namespace fops
