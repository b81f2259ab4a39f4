#include "fops/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fops {

namespace {

void admit_all(std::vector<int>& queues, std::vector<int>& arrivals, std::vector<int>& losses,
               const SystemConfig& config, double duration, RngStream& rng)
{
    for (int i = 0; i < config.m; ++i) {
        const int a = sample_arrivals(config.lambda[i], duration, rng);
        const auto adm = apply_arrivals(queues[i], a, config.buffers[i]);
        queues[i] = adm.queue;
        arrivals[i] += a;
        losses[i] += adm.lost;
    }
}

}  // namespace

EpochOutcome step(SystemState& state, const SystemConfig& config, const AnticipationEvaluator& evaluator,
                  UtilityTracker& tracker, Streams& streams, const StepOptions& options)
{
    const int m = config.m;
    const int from = state.server;

    if (options.force_good) {
        state.conditions.assign(m, Condition::Good);
        state.conditions[from] = Condition::Self;
    }
    else {
        state.conditions = sample_conditions(from, config, streams.conditions);
    }

    const auto& averages = options.frozen.empty() ? tracker.anticipated() : options.frozen;
    const auto index = fair_index(state, averages, config.alpha, config.delta, evaluator);
    auto choice = choose_station(index, options.tie_tolerance, streams.tie_break);
    const int to = choice.station;

    EpochOutcome out;
    out.from = from;
    out.chosen = to;
    out.conditions = state.conditions;
    out.queues_before = state.queues;
    out.arrivals.assign(m, 0);
    out.losses.assign(m, 0);

    // anticipated utilities are conditional on the decision-epoch state
    if (options.average_mode == AverageMode::Realized) {
        const auto point = Decision::point_mass(to, m);
        out.anticipated = anticipated_utilities(point.probabilities, state, evaluator);
    }
    else {
        out.anticipated = anticipated_utilities(choice.decision.probabilities, state, evaluator);
    }

    auto& queues = state.queues;
    if (to != from) {
        out.travel_time = sample_travel_time(state.conditions[to], config, streams.travel);
        admit_all(queues, out.arrivals, out.losses, config, out.travel_time, streams.arrivals);
    }
    out.queue_at_service = queues[to];
    out.served = out.queue_at_service >= 1;
    out.hold_time = sample_service_time(config, streams.service);
    admit_all(queues, out.arrivals, out.losses, config, out.hold_time, streams.arrivals);
    if (out.served)
        queues[to] -= 1;
    out.queues_after = queues;

    out.utility.resize(m);
    for (int i = 0; i < m; ++i)
        out.utility[i] = (out.served && i == to ? config.reward : 0.0) - out.losses[i];

    for (int i = 0; i < m; ++i) {
        if (queues[i] < 0 || queues[i] > config.buffers[i])
            throw ContractViolation("queue " + std::to_string(i + 1) + " left [0, b] at epoch "
                                    + std::to_string(tracker.epoch() + 1));
    }
    if (!out.conserves())
        throw ContractViolation("arrival conservation failed at epoch " + std::to_string(tracker.epoch() + 1));

    tracker.update(out.anticipated, out.utility);
    state.server = to;
    return out;
}

SystemState initial_state(const SystemConfig& config)
{
    SystemState s;
    s.server = 0;
    s.queues.assign(config.m, 0);
    s.conditions.assign(config.m, Condition::Good);
    s.conditions[0] = Condition::Self;
    return s;
}

Replication run_replication(const SystemConfig& config, const RunOptions& options)
{
    if (options.validate)
        require_valid(config);
    const AnticipationEvaluator evaluator(config);
    return run_replication(config, options, evaluator);
}

Replication run_replication(const SystemConfig& config, const RunOptions& options,
                            const AnticipationEvaluator& evaluator)
{
    if (options.validate)
        require_valid(config);
    if (options.epochs < 1)
        throw std::invalid_argument("epochs must be >= 1");
    const int m = config.m;
    auto streams = Streams::for_replication(options.seed, options.replication);
    SystemState state = initial_state(config);
    UtilityTracker tracker(m, config.delta, config.gamma);

    Replication rep;
    auto& res = rep.result;
    res.visits.assign(m, 0);
    res.losses.assign(m, 0);
    res.services.assign(m, 0);
    res.seed = options.seed;
    res.replication = options.replication;
    res.epochs = options.epochs;

    auto checkpoints = options.checkpoints;
    std::sort(checkpoints.begin(), checkpoints.end());
    std::size_t next_checkpoint = 0;

    const double lower = -evaluator.loss_bound();
    const double upper = config.reward;
    const double slack = 1e-12 * std::max(1.0, std::max(upper, -lower));

    for (long k = 1; k <= options.epochs; ++k) {
        const auto out = step(state, config, evaluator, tracker, streams, options.step);
        ++res.visits[out.chosen];
        if (out.served)
            ++res.services[out.chosen];
        for (int i = 0; i < m; ++i) {
            res.losses[i] += out.losses[i];
            if (out.anticipated[i] < lower - slack || out.anticipated[i] > upper + slack) {
                ++res.bound_violations;
                break;
            }
        }
        if (options.observer)
            options.observer(k, out);
        while (next_checkpoint < checkpoints.size() && checkpoints[next_checkpoint] == k) {
            res.checkpoint_visits.push_back(res.visits);
            ++next_checkpoint;
        }
        const bool keep = k == options.epochs || (options.thinning > 0 && k % options.thinning == 0);
        if (keep) {
            rep.trajectory.snapshots.push_back(
                Snapshot{k, out.from, out.chosen, state.queues, tracker.anticipated(), tracker.realized()});
        }
    }

    res.anticipated = tracker.anticipated();
    res.realized = tracker.realized();
    res.mof = mof(res.anticipated, config.delta);
    res.server_utility = std::accumulate(res.anticipated.begin(), res.anticipated.end(), 0.0);
    return rep;
}

double mof(std::span<const double> averages, double delta)
{
    const auto floored = floor_utilities(averages, delta);
    const auto [lo, hi] = std::minmax_element(floored.begin(), floored.end());
    return *hi / *lo - 1.0;
}

std::optional<double> pof(std::span<const double> with_alpha, std::span<const double> with_zero, double floor)
{
    const double a = std::accumulate(with_alpha.begin(), with_alpha.end(), 0.0);
    const double z = std::accumulate(with_zero.begin(), with_zero.end(), 0.0);
    if (!(std::abs(z) >= floor))
        return std::nullopt;
    return (a - z) / z;
}

ConvergenceReport convergence_report(std::span<const Trajectory> trajectories, double deviation_tolerance,
                                     double tail_tolerance, double tail_fraction)
{
    if (trajectories.size() < 2)
        throw std::invalid_argument("convergence_report: need at least two trajectories");
    for (const auto& t : trajectories) {
        if (t.snapshots.empty())
            throw std::invalid_argument("convergence_report: empty trajectory");
    }
    const auto& first = trajectories.front().snapshots;
    const std::size_t m = first.back().anticipated.size();
    const long horizon = first.back().epoch;
    for (const auto& t : trajectories) {
        if (t.snapshots.back().epoch != horizon || t.snapshots.back().anticipated.size() != m)
            throw std::invalid_argument("convergence_report: trajectories differ in length or size");
    }

    ConvergenceReport rep;
    rep.terminal_deviation.assign(m, 0.0);
    rep.tail_movement.assign(m, 0.0);
    for (std::size_t a = 0; a < trajectories.size(); ++a) {
        for (std::size_t b = a + 1; b < trajectories.size(); ++b) {
            const auto& ua = trajectories[a].snapshots.back().anticipated;
            const auto& ub = trajectories[b].snapshots.back().anticipated;
            for (std::size_t i = 0; i < m; ++i)
                rep.terminal_deviation[i] = std::max(rep.terminal_deviation[i], std::abs(ua[i] - ub[i]));
        }
    }
    const double tail_start = static_cast<double>(horizon) * (1.0 - tail_fraction);
    for (const auto& t : trajectories) {
        for (std::size_t i = 0; i < m; ++i) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (const auto& s : t.snapshots) {
                if (static_cast<double>(s.epoch) < tail_start)
                    continue;
                lo = std::min(lo, s.anticipated[i]);
                hi = std::max(hi, s.anticipated[i]);
            }
            rep.tail_movement[i] = std::max(rep.tail_movement[i], hi - lo);
        }
    }
    rep.max_deviation = *std::max_element(rep.terminal_deviation.begin(), rep.terminal_deviation.end());
    rep.max_tail_movement = *std::max_element(rep.tail_movement.begin(), rep.tail_movement.end());
    rep.converged = rep.max_deviation <= deviation_tolerance && rep.max_tail_movement <= tail_tolerance;
    return rep;
}

}  // namespace fops
