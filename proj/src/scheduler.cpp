#include "fops/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fops {

std::vector<double> floor_utilities(std::span<const double> averages, double delta)
{
    if (!(delta > 0.0))
        throw std::invalid_argument("delta must be > 0");
    std::vector<double> out(averages.begin(), averages.end());
    for (double& u : out)
        u = std::max(delta, u);
    return out;
}

FairIndex fair_index_floored(const SystemState& state, std::span<const double> floored, double alpha,
                             const AnticipationEvaluator& evaluator)
{
    const int m = state.size();
    if (static_cast<int>(floored.size()) != m)
        throw std::invalid_argument("fair_index: utility vector size mismatch");
    std::vector<double> weight(m);
    for (int j = 0; j < m; ++j)
        weight[j] = alpha == 0.0 ? 1.0 : std::pow(floored[j], -alpha);

    FairIndex index;
    index.alpha = alpha;
    index.floored.assign(floored.begin(), floored.end());
    index.value.resize(m);
    for (int i = 0; i < m; ++i) {
        const Condition route = state.conditions[i];
        double o = evaluator.gain(i, state.queues[i], route) * weight[i];
        for (int j = 0; j < m; ++j)
            o -= evaluator.loss(j, state.queues[j], route) * weight[j];
        index.value[i] = o;
    }
    return index;
}

FairIndex fair_index(const SystemState& state, std::span<const double> averages, double alpha, double delta,
                     const AnticipationEvaluator& evaluator)
{
    const auto floored = floor_utilities(averages, delta);
    return fair_index_floored(state, floored, alpha, evaluator);
}

std::vector<double> efficiency_index(const SystemState& state, const AnticipationEvaluator& evaluator)
{
    const int m = state.size();
    std::vector<double> out(m);
    for (int i = 0; i < m; ++i) {
        const Condition route = state.conditions[i];
        double o = evaluator.gain(i, state.queues[i], route);
        for (int j = 0; j < m; ++j)
            o -= evaluator.loss(j, state.queues[j], route);
        out[i] = o;
    }
    return out;
}

std::vector<int> argmax_set(std::span<const double> values, double tolerance)
{
    if (values.empty())
        throw std::invalid_argument("argmax_set: empty input");
    const double top = *std::max_element(values.begin(), values.end());
    if (!std::isfinite(top))
        throw std::invalid_argument("argmax_set: non-finite index");
    const double cut = top - tolerance * std::max(1.0, std::abs(top));
    std::vector<int> set;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= cut)
            set.push_back(static_cast<int>(i));
    }
    return set;
}

Choice choose_station(const FairIndex& index, double tolerance, RngStream& rng)
{
    auto support = argmax_set(index.value, tolerance);
    const int m = static_cast<int>(index.value.size());
    const int pick = support.size() == 1 ? support.front() : support[rng.index(static_cast<int>(support.size()))];
    return Choice{Decision::uniform_over(std::move(support), m), pick};
}

UtilityTracker::UtilityTracker(int m, double initial, double gamma)
    : anticipated_(m, initial), realized_sum_(m, 0.0), realized_mean_(m, 0.0), gamma_(gamma)
{
    if (!(gamma >= 1.0))
        throw std::invalid_argument("gamma must be >= 1");
}

void UtilityTracker::update(std::span<const double> anticipated, std::span<const double> realized)
{
    const std::size_t m = anticipated_.size();
    if (anticipated.size() != m || realized.size() != m)
        throw std::invalid_argument("UtilityTracker::update: size mismatch");
    ++epoch_;
    const double k = static_cast<double>(epoch_);
    const double step = gamma_ == 1.0 ? 1.0 / k : std::pow(k, -gamma_);
    for (std::size_t i = 0; i < m; ++i) {
        anticipated_[i] += step * (anticipated[i] - anticipated_[i]);
        realized_sum_[i] += realized[i];
        realized_mean_[i] = realized_sum_[i] / k;
    }
}

WirelessResult wireless_reference(const UtilitySampler& sampler, int users, double alpha, long epochs,
                                  RngStream& rng, double delta, bool record_schedule)
{
    if (users < 1 || epochs < 1)
        throw std::invalid_argument("wireless_reference: need users >= 1 and epochs >= 1");
    WirelessResult r;
    r.averages.assign(users, 0.0);
    r.allocations.assign(users, 0);
    if (record_schedule)
        r.schedule.reserve(epochs);
    std::vector<double> score(users);
    for (long k = 0; k < epochs; ++k) {
        const auto u = sampler(rng);
        if (static_cast<int>(u.size()) != users)
            throw std::invalid_argument("wireless_reference: sampler returned wrong size");
        for (int n = 0; n < users; ++n)
            score[n] = alpha == 0.0 ? u[n] : u[n] / std::pow(std::max(delta, r.averages[n]), alpha);
        const auto best = argmax_set(score);
        const int pick = best.size() == 1 ? best.front() : best[rng.index(static_cast<int>(best.size()))];
        const double step = 1.0 / static_cast<double>(k + 1);
        for (int n = 0; n < users; ++n) {
            const double gained = n == pick ? u[n] : 0.0;
            r.averages[n] += step * (gained - r.averages[n]);
        }
        ++r.allocations[pick];
        if (record_schedule)
            r.schedule.push_back(pick);
    }
    return r;
}

}  // namespace fops
