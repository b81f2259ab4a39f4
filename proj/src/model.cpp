#include "fops/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace fops {

char condition_code(Condition c)
{
    switch (c) {
    case Condition::Self: return 'S';
    case Condition::Good: return 'G';
    case Condition::Bad: return 'B';
    }
    return '?';
}

bool conditions_consistent(const SystemState& state)
{
    const int m = state.size();
    if (static_cast<int>(state.conditions.size()) != m || state.server < 0 || state.server >= m)
        return false;
    for (int i = 0; i < m; ++i) {
        const bool self = state.conditions[i] == Condition::Self;
        if (self != (i == state.server))
            return false;
    }
    return true;
}

Decision Decision::uniform_over(std::vector<int> support, int m)
{
    if (support.empty())
        throw std::invalid_argument("decision support must be non-empty");
    std::sort(support.begin(), support.end());
    Decision d;
    d.probabilities.assign(m, 0.0);
    const double p = 1.0 / static_cast<double>(support.size());
    for (int i : support) {
        if (i < 0 || i >= m)
            throw std::out_of_range("decision support outside station range");
        d.probabilities[i] = p;
    }
    d.support = std::move(support);
    return d;
}

Decision Decision::point_mass(int station, int m) { return uniform_over({station}, m); }

bool EpochOutcome::conserves() const
{
    const std::size_t m = arrivals.size();
    if (queues_before.size() != m || queues_after.size() != m || losses.size() != m)
        return false;
    for (std::size_t i = 0; i < m; ++i) {
        const int departed = (served && static_cast<int>(i) == chosen) ? 1 : 0;
        if (arrivals[i] != (queues_after[i] - queues_before[i]) + losses[i] + departed)
            return false;
    }
    return true;
}

}  // namespace fops
