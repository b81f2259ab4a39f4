#pragma once

#include <cmath>
#include <vector>

#include "fops/config.hpp"

namespace fops::testing {

/// Two stations, b = (2, 2), asymmetric demand; fixed points at
/// alpha in {1, 2, 4} are ergodic-interior.
inline SystemConfig two_station()
{
    SystemConfig c;
    c.m = 2;
    c.lambda = {0.2, 0.15};
    c.buffers = {2, 2};
    c.service_rate = 0.5;
    c.travel_good = {2.0, 0.1};
    c.travel_bad = {6.0, 0.1};
    c.p_good = expand_destination_probabilities({0.9, 0.1});
    c.reward = 4.0;
    c.alpha = 1.0;
    return c;
}

/// m stations, two of them reached over good routes with probability 0.9,
/// the rest with 0.1; lambda = 0.67 / m.
inline SystemConfig polling(int m, double alpha = 1.0)
{
    SystemConfig c;
    c.m = m;
    c.lambda.assign(m, 0.67 / m);
    c.buffers.assign(m, 5);
    c.service_rate = 1.0 / 3.0;
    c.travel_good = {2.0, 0.1};
    c.travel_bad = {6.0, 0.1};
    std::vector<double> q(m, 0.1);
    for (int i = 0; i < std::min(m, 2); ++i)
        q[i] = 0.9;
    c.p_good = expand_destination_probabilities(q);
    c.reward = 6.0;
    c.alpha = alpha;
    return c;
}

/// Fully symmetric: equal rates, buffers and route probabilities.
inline SystemConfig symmetric(int m, int buffer = 1, double alpha = 1.0)
{
    SystemConfig c;
    c.m = m;
    c.lambda.assign(m, 0.1);
    c.buffers.assign(m, buffer);
    c.service_rate = 1.0;
    c.travel_good = {1.0, 0.1};
    c.travel_bad = {3.0, 0.1};
    c.p_good = expand_destination_probabilities(std::vector<double>(m, 0.7));
    c.reward = 2.0;
    c.alpha = alpha;
    return c;
}

struct MeanEstimate {
    double mean = 0.0;
    double se = 0.0;
};

template <class Draw>
MeanEstimate estimate_mean(long n, Draw&& draw)
{
    double s = 0.0, s2 = 0.0;
    for (long k = 0; k < n; ++k) {
        const double x = draw();
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    const double var = std::max(0.0, s2 / n - mean * mean) * n / (n - 1);
    return {mean, std::sqrt(var / n)};
}

/// 3 standard errors, never below the estimator's 1/n granularity.
inline double three_se(const MeanEstimate& e, long n)
{
    return 3.0 * std::max(e.se, 1.0 / n);
}

}  // namespace fops::testing

#include <algorithm>
#include <random>

namespace fops::testing {

/// Monte-Carlo draws for the anticipation oracles, built directly on the
/// standard library distributions.
class DurationOracle {
  public:
    explicit DurationOracle(std::uint64_t seed) : engine_(seed) {}

    double travel(const TravelLaw& law)
    {
        if (law.spread == 0.0)
            return law.mean;
        std::normal_distribution<double> nd(law.mean, law.spread);
        for (;;) {
            const double t = nd(engine_);
            if (t > 0.0)
                return t;
        }
    }
    double hold(double rate) { return std::exponential_distribution<double>(rate)(engine_); }
    long poisson(double mean)
    {
        if (mean <= 0.0)
            return 0;
        return std::poisson_distribution<long>(mean)(engine_);
    }

  private:
    std::mt19937_64 engine_;
};

/// w * 1{arrival during the travel}
inline MeanEstimate mc_gain(double lambda, const TravelLaw& law, double w, long n, std::uint64_t seed)
{
    DurationOracle o(seed);
    return estimate_mean(n, [&] { return o.poisson(lambda * o.travel(law)) > 0 ? w : 0.0; });
}

/// (arrivals over travel + hold + n - b)^+; `law` null means no travel.
inline MeanEstimate mc_loss(double lambda, int queue, int buffer, const TravelLaw* law, double service_rate, long n,
                            std::uint64_t seed)
{
    DurationOracle o(seed);
    return estimate_mean(n, [&] {
        const double d = (law ? o.travel(*law) : 0.0) + o.hold(service_rate);
        return static_cast<double>(std::max(0L, o.poisson(lambda * d) + queue - buffer));
    });
}

}  // namespace fops::testing
