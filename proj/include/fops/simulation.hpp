#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

#include "fops/anticipation.hpp"
#include "fops/config.hpp"
#include "fops/kernels.hpp"
#include "fops/model.hpp"
#include "fops/scheduler.hpp"

namespace fops {

/// Which decision drives the anticipated-average update.
enum class AverageMode {
    Realized,  // u-hat of the point mass on the sampled station
    Mixed,     // u-hat of the full (possibly tied) decision
};

struct StepOptions {
    double tie_tolerance = kDefaultTieTolerance;
    AverageMode average_mode = AverageMode::Realized;
    bool force_good = false;  // every route Good: the ideal-system variant
    std::vector<double> frozen;  // if set, decide on these averages instead of the tracker's
};

/// Thrown when a transition breaks queue bounds or arrival conservation.
class ContractViolation : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One decision epoch. Mutates `state` into the next epoch's state (with
/// the new conditions left for the next call to sample) and advances the
/// tracker.
///
/// Order within the epoch: sample route conditions from the current server
/// location, evaluate the fair index and choose a station, travel (Poisson
/// arrivals to every queue over the travel time), note the chosen queue,
/// hold for one service or wait time (arrivals again), then remove the
/// served customer. Losses over travel + hold count against each station.
EpochOutcome step(SystemState& state, const SystemConfig& config, const AnticipationEvaluator& evaluator,
                  UtilityTracker& tracker, Streams& streams, const StepOptions& options = {});

/// Trajectory record at one epoch (after the update of that epoch).
struct Snapshot {
    long epoch = 0;
    int server = 0;  // S_{k-1}
    int chosen = 0;  // S_k
    std::vector<int> queues;
    std::vector<double> anticipated;
    std::vector<double> realized;
};

struct Trajectory {
    std::vector<Snapshot> snapshots;
};

struct ReplicationResult {
    std::vector<double> anticipated;  // terminal anticipated averages
    std::vector<double> realized;     // terminal realized time averages
    std::vector<long> visits;         // epochs in which each station was chosen
    std::vector<long> losses;         // cumulative customers lost per station
    std::vector<long> services;       // customers served per station
    std::vector<std::vector<long>> checkpoint_visits;  // visits at each requested checkpoint
    double mof = 0.0;                 // on the anticipated averages
    double server_utility = 0.0;      // sum of anticipated averages
    long bound_violations = 0;        // epochs with u-hat outside [-loss bound, w]
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;
    long epochs = 0;
};

/// Called after every epoch. The outcome carries the decision-epoch state
/// (server, queues_before, conditions).
using EpochObserver = std::function<void(long epoch, const EpochOutcome&)>;

struct RunOptions {
    long epochs = 200000;
    std::uint64_t seed = 1;
    std::uint64_t replication = 0;
    long thinning = 100;            // 0 keeps only the final snapshot
    std::vector<long> checkpoints;  // epochs at which visit counts are recorded
    StepOptions step;
    bool validate = true;           // refuse structurally invalid configs
    EpochObserver observer;
};

struct Replication {
    ReplicationResult result;
    Trajectory trajectory;
};

/// Initial state: all queues empty, server at station 0.
SystemState initial_state(const SystemConfig& config);

Replication run_replication(const SystemConfig& config, const RunOptions& options);
Replication run_replication(const SystemConfig& config, const RunOptions& options,
                            const AnticipationEvaluator& evaluator);

/// max_{i,j} f_i / f_j - 1 on the delta-floored utilities.
double mof(std::span<const double> averages, double delta);

/// (sum u_alpha - sum u_zero) / sum u_zero; empty when |sum u_zero| < floor.
std::optional<double> pof(std::span<const double> with_alpha, std::span<const double> with_zero,
                          double floor = 1e-12);

struct ConvergenceReport {
    std::vector<double> terminal_deviation;  // per station, max pairwise |U_a - U_b| at the end
    std::vector<double> tail_movement;       // per station, max over runs of (max - min) in the tail window
    double max_deviation = 0.0;
    double max_tail_movement = 0.0;
    bool converged = false;
};

/// Compares the anticipated-average paths of several runs of one config.
ConvergenceReport convergence_report(std::span<const Trajectory> trajectories, double deviation_tolerance = 0.05,
                                     double tail_tolerance = 0.02, double tail_fraction = 0.1);

}  // namespace fops
