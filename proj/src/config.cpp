#include "fops/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fops {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

bool finite_positive(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

double positive_mass(const TravelLaw& law)
{
    if (law.spread <= 0.0)
        return law.mean > 0.0 ? 1.0 : 0.0;
    return std_normal_cdf(law.mean / law.spread);
}

double truncated_mean(const TravelLaw& law)
{
    if (law.spread <= 0.0)
        return law.mean;
    const double z = law.mean / law.spread;
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * z * z);
    return law.mean + law.spread * pdf / std_normal_cdf(z);
}

std::string Diagnostics::summary() const
{
    std::ostringstream os;
    os.precision(10);
    os << "rho_B = " << rho_b << " (untruncated mean: " << rho_b_raw << ")\n"
       << "loss bound = " << loss_bound << "\n"
       << "worst-case loss below reward (rho_B < w): " << (a1_pass ? "pass" : "FAIL") << "\n";
    for (const auto& v : violations)
        os << "violation: " << v << "\n";
    return os.str();
}

Diagnostics validate_config(const SystemConfig& c)
{
    Diagnostics d;
    auto& v = d.violations;
    const auto m = static_cast<std::size_t>(std::max(c.m, 0));

    if (c.m < 2)
        v.push_back("m must be >= 2 (got " + std::to_string(c.m) + ")");
    if (c.lambda.size() != m)
        v.push_back("lambda must have m entries");
    if (c.buffers.size() != m)
        v.push_back("buffers must have m entries");
    for (std::size_t i = 0; i < c.lambda.size(); ++i) {
        if (!finite_positive(c.lambda[i]))
            v.push_back("lambda[" + std::to_string(i + 1) + "] must be > 0");
    }
    for (std::size_t i = 0; i < c.buffers.size(); ++i) {
        if (c.buffers[i] < 1)
            v.push_back("buffers[" + std::to_string(i + 1) + "] must be >= 1");
    }
    if (!finite_positive(c.service_rate))
        v.push_back("service_rate must be > 0");
    if (!finite_positive(c.travel_good.mean))
        v.push_back("travel_good mean must be > 0");
    if (!finite_positive(c.travel_bad.mean))
        v.push_back("travel_bad mean must be > 0");
    if (!(c.travel_good.spread >= 0.0) || !(c.travel_bad.spread >= 0.0))
        v.push_back("travel spreads must be >= 0");
    if (!(c.travel_good.mean < c.travel_bad.mean))
        v.push_back("good travel mean must be below bad travel mean");
    if (c.p_good.size() != m) {
        v.push_back("p_good must be an m x m matrix");
    }
    else {
        for (std::size_t i = 0; i < m; ++i) {
            if (c.p_good[i].size() != m) {
                v.push_back("p_good row " + std::to_string(i + 1) + " must have m entries");
                continue;
            }
            for (std::size_t j = 0; j < m; ++j) {
                const double p = c.p_good[i][j];
                if (i != j && !(p > 0.0 && p < 1.0))
                    v.push_back("p_good[" + std::to_string(i + 1) + "][" + std::to_string(j + 1)
                                + "] must lie in (0, 1)");
            }
        }
    }
    if (!finite_positive(c.reward))
        v.push_back("reward w must be > 0");
    if (!(c.alpha >= 0.0) || !std::isfinite(c.alpha))
        v.push_back("alpha must be >= 0");
    if (!finite_positive(c.delta))
        v.push_back("delta must be > 0");
    if (!(c.gamma >= 1.0) || !std::isfinite(c.gamma))
        v.push_back("gamma must be >= 1");

    // Feasibility figures are reported even for invalid configs, using
    // whatever entries are present.
    const double hold = c.service_rate > 0.0 ? 1.0 / c.service_rate : 0.0;
    const double bad_trunc = c.travel_bad.mean > 0.0 ? truncated_mean(c.travel_bad) : c.travel_bad.mean;
    const double good_trunc = c.travel_good.mean > 0.0 ? truncated_mean(c.travel_good) : c.travel_good.mean;
    const double worst_travel = std::max(bad_trunc, good_trunc);
    double total = 0.0;
    double lambda_max = 0.0;
    for (double l : c.lambda) {
        total += l;
        lambda_max = std::max(lambda_max, l);
    }
    d.rho_b = total * (bad_trunc + hold);
    d.rho_b_raw = total * (c.travel_bad.mean + hold);
    d.loss_bound = lambda_max * (worst_travel + hold);
    // The truncated mean is never below the raw one, so it is the
    // conservative side of the comparison.
    d.a1_pass = std::max(d.rho_b, d.rho_b_raw) < c.reward;
    return d;
}

void require_valid(const SystemConfig& config)
{
    const auto d = validate_config(config);
    if (d.valid())
        return;
    std::string msg = "invalid configuration:";
    for (const auto& v : d.violations)
        msg += "\n  " + v;
    throw std::invalid_argument(msg);
}

std::vector<std::vector<double>> expand_destination_probabilities(const std::vector<double>& q)
{
    const std::size_t m = q.size();
    std::vector<std::vector<double>> p(m, std::vector<double>(m, 1.0));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i != j)
                p[i][j] = q[j];
        }
    }
    return p;
}

}  // namespace fops
