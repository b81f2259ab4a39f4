#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace fops {

/// Route condition from the server's location to a station. `Self` marks the
/// station the server is currently at (no travel needed).
enum class Condition : std::uint8_t { Self = 0, Good = 1, Bad = 2 };

char condition_code(Condition c);

/// Observable part of the system at a decision epoch: server location,
/// queue lengths and route conditions. The running utility averages live in
/// the scheduler's UtilityTracker.
struct SystemState {
    int server = 0;
    std::vector<int> queues;
    std::vector<Condition> conditions;

    int size() const { return static_cast<int>(queues.size()); }
};

/// True when exactly one entry is Self and it sits at the server's index.
bool conditions_consistent(const SystemState& state);

/// A randomized station choice, uniform over `support`.
struct Decision {
    std::vector<double> probabilities;
    std::vector<int> support;

    static Decision uniform_over(std::vector<int> support, int m);
    static Decision point_mass(int station, int m);
};

/// Everything that happened between two decision epochs.
struct EpochOutcome {
    int from = 0;                 // S_{k-1}
    int chosen = 0;               // S_k
    double travel_time = 0.0;     // zero when staying
    double hold_time = 0.0;       // service or wait duration J
    int queue_at_service = 0;     // queue at the chosen station before J
    bool served = false;          // queue_at_service >= 1
    std::vector<Condition> conditions;  // route conditions the decision saw
    std::vector<int> queues_before;
    std::vector<int> queues_after;
    std::vector<int> arrivals;    // all arrivals offered to each queue
    std::vector<int> losses;      // arrivals dropped on a full buffer
    std::vector<double> utility;  // realized U_{i,k}
    std::vector<double> anticipated;  // u-hat used in the average update

    /// arrivals_i == (after_i - before_i) + losses_i + [served and i == chosen]
    bool conserves() const;
};

}  // namespace fops
