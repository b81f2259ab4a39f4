#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fops/anticipation.hpp"
#include "fops/config.hpp"
#include "fops/model.hpp"
#include "fops/quadrature.hpp"
#include "fops/scheduler.hpp"

namespace fops {

inline constexpr std::size_t kDefaultStateCap = 100000;

class StateCapExceeded : public std::runtime_error {
  public:
    StateCapExceeded(std::size_t count, std::size_t cap);
    std::size_t count;
    std::size_t cap;
};

/// m * prod_i (b_i + 1) * 2^(m-1); saturates at SIZE_MAX.
std::size_t chain_state_count(const SystemConfig& config);

/// Enumeration of (server, queues, conditions). Index layout:
/// ((server * Q) + queue_code) * 2^(m-1) + condition_code, with queue_code a
/// mixed-radix number (station 0 fastest) and condition_code one bit per
/// non-server station in increasing order (bit set = Bad).
class StateSpace {
  public:
    explicit StateSpace(const SystemConfig& config);

    std::size_t size() const { return static_cast<std::size_t>(m_) * queue_codes_ * condition_codes_; }
    std::size_t queue_codes() const { return queue_codes_; }
    std::size_t condition_codes() const { return condition_codes_; }
    int stations() const { return m_; }

    std::size_t index(const SystemState& state) const;
    std::size_t index(int server, std::size_t queue_code, std::size_t condition_code) const;
    SystemState state(std::size_t index) const;

    std::size_t encode_queues(std::span<const int> queues) const;
    std::vector<int> decode_queues(std::size_t code) const;
    std::size_t encode_conditions(int server, std::span<const Condition> conditions) const;
    std::vector<Condition> decode_conditions(int server, std::size_t code) const;

  private:
    int m_;
    std::vector<int> buffers_;
    std::size_t queue_codes_ = 1;
    std::size_t condition_codes_ = 1;
};

using SparseRow = std::vector<std::pair<std::size_t, double>>;

/// The chain Y(u) = (S, N, C) with the policy frozen at the averages u.
struct FrozenChain {
    std::vector<double> averages;                 // the frozen u
    std::vector<SparseRow> rows;                  // transition probabilities
    std::vector<std::vector<int>> decisions;      // argmax support per state
    std::vector<std::vector<double>> index;       // fair index per state
    std::vector<double> initial;                  // law of the first decision-epoch state

    std::size_t size() const { return rows.size(); }
    /// max_y |sum_z P(y, z) - 1|
    double max_row_error() const;

    /// Wraps a plain row-stochastic matrix (dense rows) with a point-mass
    /// initial law on state 0.
    static FrozenChain from_dense(const std::vector<std::vector<double>>& matrix);
};

struct AnalyzerOptions {
    std::size_t state_cap = kDefaultStateCap;
    int travel_nodes = 64;  // duration grid for the joint arrival kernel
    int hold_nodes = 64;
    double tie_tolerance = kDefaultTieTolerance;
    bool validate = true;  // refuse structurally invalid configs
};

/// Everything about the frozen chain that does not depend on the averages:
/// the state space, the per-(state, destination) queue kernels and the
/// fresh-condition laws. Build once, then freeze at many u.
class ChainModel {
  public:
    explicit ChainModel(const SystemConfig& config, AnalyzerOptions options = {});

    const SystemConfig& config() const { return config_; }
    const StateSpace& space() const { return space_; }
    const AnticipationEvaluator& evaluator() const { return evaluator_; }
    const AnalyzerOptions& options() const { return options_; }

    FrozenChain build(std::span<const double> averages) const;

    /// Argmax supports and index values for every state at `averages`.
    void decide(std::span<const double> averages, std::vector<std::vector<int>>& supports,
                std::vector<std::vector<double>>& index) const;

    /// Law of the queue code after one epoch that starts in `queue_code`
    /// with the server at `server` and heads to `target` over `route`
    /// (ignored when target == server).
    const SparseRow& queue_kernel(int server, std::size_t queue_code, int target, Condition route) const;

    /// Law of the fresh condition code seen from `server`.
    const std::vector<double>& condition_law(int server) const { return condition_law_[server]; }

    /// Distribution of the first decision state in a simulation.
    std::vector<double> initial_law() const;

    /// u-hat at state `index` under a uniform decision over `support`.
    std::vector<double> anticipated(std::size_t index, std::span<const int> support) const;

  private:
    SparseRow compute_kernel(int server, std::span<const int> queues, int target, Condition route) const;

    SystemConfig config_;
    AnalyzerOptions options_;
    StateSpace space_;
    AnticipationEvaluator evaluator_;
    QuadratureRule good_rule_;
    QuadratureRule bad_rule_;
    QuadratureRule hold_rule_;
    // [(server * Q + queue_code) * m + target][route == Bad], filled on first use
    mutable std::vector<std::array<std::optional<SparseRow>, 2>> kernels_;
    std::vector<std::vector<double>> condition_law_;
};

/// Builds the frozen chain at `averages` (constructs a ChainModel).
FrozenChain build_chain(std::span<const double> averages, const SystemConfig& config, AnalyzerOptions options = {});

struct StationaryResult {
    std::vector<std::vector<std::size_t>> closed_classes;
    std::vector<std::vector<double>> class_distributions;  // full-length, zero outside the class
    std::vector<double> class_weights;                     // absorption probability from chain.initial
    std::vector<double> distribution;                      // weighted mixture
    bool reducible = false;
    double residual = 0.0;                                 // max over classes of ||pi P - pi||_inf
    bool converged = false;
};

/// Closed communicating classes, the stationary law on each, and their
/// mixture weighted by the probability of absorbing into each class from the
/// chain's initial law.
StationaryResult stationary_distribution(const FrozenChain& chain, double tolerance = 1e-12);

struct MapEvaluation {
    std::vector<double> value;  // E_pi[u-hat]
    StationaryResult stationary;
};

/// Stationary expectation of the anticipated utilities under the policy
/// frozen at `averages`.
MapEvaluation fixed_point_map(std::span<const double> averages, const ChainModel& model);
std::vector<double> fixed_point_map(std::span<const double> averages, const SystemConfig& config,
                                    AnalyzerOptions options = {});

struct SolveOptions {
    double damping = 0.3;
    double tolerance = 1e-9;
    int max_iterations = 2000;
    double min_damping = 1e-9;
    double distinct_tolerance = 1e-6;   // to merge equal solutions across starts
    std::vector<std::vector<double>> starts;  // empty: delta*1, w*1, staggered
};

struct FixedPointAttempt {
    std::string start_label;
    std::vector<double> start;
    std::vector<double> averages;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
    double final_damping = 0.0;
};

struct FixedPointReport {
    std::vector<double> averages;  // u* from the first start
    double residual = 0.0;         // ||u* - map(u*)||_inf recomputed at u*
    int iterations = 0;
    bool converged = false;
    double interior_gap = 0.0;     // min top-vs-second index gap over stationary-support states
    bool interior = false;         // decisions unchanged under +-epsilon perturbations
    std::vector<std::vector<std::size_t>> closed_classes;
    std::vector<FixedPointAttempt> attempts;
    std::vector<std::vector<double>> distinct_solutions;  // converged, deduplicated
};

FixedPointReport solve_fixed_point(const ChainModel& model, const SolveOptions& options = {});
FixedPointReport solve_fixed_point(const SystemConfig& config, const SolveOptions& options = {},
                                   AnalyzerOptions analyzer = {});

struct MarginReport {
    bool interior = true;
    std::vector<std::pair<int, int>> changed;  // (station, sign) perturbations that moved a decision
    double min_gap = 0.0;                      // over states with stationary mass
    double min_gap_all = 0.0;                  // over every state
};

/// Perturbs each component of `averages` by +-epsilon and checks whether any
/// state's argmax set changes.
MarginReport ergodic_interior_margin(std::span<const double> averages, const ChainModel& model, double epsilon);

struct BoundCheck {
    bool applicable = false;
    double alpha = 0.0;
    double B = 0.0;
    double bound = 0.0;  // B^(1/alpha) - 1
    double mof = 0.0;
    bool pass = false;
    FixedPointReport fixed_point;
};

/// B = (1 + 1e-6) * max(1, w / min_k lambda_k E[T | good]).
std::optional<double> mof_bound_constant(const SystemConfig& config);

/// Solves the fixed point at `alpha` and checks MoF(u*) <= B^(1/alpha) - 1.
BoundCheck check_mof_bound(const SystemConfig& config, double alpha, const SolveOptions& options = {},
                          AnalyzerOptions analyzer = {});

}  // namespace fops
