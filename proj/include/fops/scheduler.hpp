#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fops/anticipation.hpp"
#include "fops/kernels.hpp"
#include "fops/model.hpp"

namespace fops {

inline constexpr double kDefaultTieTolerance = 1e-12;

/// Componentwise max(delta, u).
std::vector<double> floor_utilities(std::span<const double> averages, double delta);

/// Fair-weighted utility of sending the server to each station:
///   O_i = gain_i / f_i^alpha - sum_j loss_j(i) / f_j^alpha
/// with f the floored averages.
struct FairIndex {
    std::vector<double> value;
    std::vector<double> floored;
    double alpha = 0.0;
};

FairIndex fair_index_floored(const SystemState& state, std::span<const double> floored, double alpha,
                             const AnticipationEvaluator& evaluator);

FairIndex fair_index(const SystemState& state, std::span<const double> averages, double alpha, double delta,
                     const AnticipationEvaluator& evaluator);

/// gain_i - sum_j loss_j(i): the index with every weight equal to one.
std::vector<double> efficiency_index(const SystemState& state, const AnticipationEvaluator& evaluator);

/// Stations whose value is within `tolerance` (relative to max(1, |top|))
/// of the maximum, in increasing index order.
std::vector<int> argmax_set(std::span<const double> values, double tolerance = kDefaultTieTolerance);

struct Choice {
    Decision decision;
    int station = 0;
};

/// Uniform decision over the argmax set, with one station drawn from it.
Choice choose_station(const FairIndex& index, double tolerance, RngStream& rng);

/// Running averages of one replication.
///
/// `anticipated` follows U_k = U_{k-1} + k^-gamma (u-hat_k - U_{k-1});
/// `realized` is the plain time average of the realized utilities, kept as
/// sum / k so that it matches a direct recomputation exactly.
class UtilityTracker {
  public:
    UtilityTracker(int m, double initial, double gamma);

    void update(std::span<const double> anticipated, std::span<const double> realized);

    const std::vector<double>& anticipated() const { return anticipated_; }
    const std::vector<double>& realized() const { return realized_mean_; }
    const std::vector<double>& realized_sum() const { return realized_sum_; }
    long epoch() const { return epoch_; }
    double gamma() const { return gamma_; }

  private:
    std::vector<double> anticipated_;
    std::vector<double> realized_sum_;
    std::vector<double> realized_mean_;
    long epoch_ = 0;
    double gamma_;
};

/// Draws one vector of per-user utilities for an epoch.
using UtilitySampler = std::function<std::vector<double>(RngStream&)>;

struct WirelessResult {
    std::vector<double> averages;
    std::vector<long> allocations;  // epochs each user was scheduled
    std::vector<int> schedule;      // per-epoch scheduled user (empty unless recorded)
};

/// The classic alpha-fair opportunistic scheduler for i.i.d. per-epoch
/// utilities: each epoch, schedule argmax_n U_n / max(delta, Ubar_n)^alpha
/// (uniform ties) and update Ubar_n += (U_n 1{n scheduled} - Ubar_n)/(k+1).
WirelessResult wireless_reference(const UtilitySampler& sampler, int users, double alpha, long epochs,
                                  RngStream& rng, double delta = 1e-6, bool record_schedule = false);

}  // namespace fops
