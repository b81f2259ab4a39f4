#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "fops/config.hpp"
#include "fops/model.hpp"
#include "fops/quadrature.hpp"

namespace fops {

struct AnticipationOptions {
    int travel_nodes = 64;   // Gauss-Legendre nodes over the travel window
    int hold_nodes = 64;     // Gauss-Laguerre nodes over the service/wait time (raised to >= max buffer)
};

/// Conditional expected gains and losses of one decision epoch.
///
/// gain(i, n_i, c_i) is the expected reward at station i if the server goes
/// there: w when n_i > 0, zero when the server already sits at an empty i,
/// and w * P(at least one arrival during the travel) otherwise.
///
/// loss(i, n_i, c_j) is the expected overflow at station i when the server
/// heads to a station whose route condition is c_j (Self = stay). Arrivals
/// at i over travel + hold time are Poisson with random mean; the overflow
/// beyond b_i - n_i is integrated against the duration law.
///
/// All values are tabulated per station at construction. The tables depend
/// only on the config (never on the running averages), so one evaluator
/// serves a whole run and concurrent readers always see the same values.
class AnticipationEvaluator {
  public:
    explicit AnticipationEvaluator(const SystemConfig& config, AnticipationOptions options = {});

    double gain(int station, int queue, Condition condition) const;
    double loss(int station, int queue, Condition route) const;

    /// Direct evaluation, bypassing the tables.
    double compute_gain(double lambda, int queue, Condition condition) const;
    double compute_loss(double lambda, int queue, int buffer, Condition route) const;

    /// Expected travel time of a Good/Bad route (zero for Self).
    double mean_travel(Condition route) const;

    double loss_bound() const { return loss_bound_; }
    double reward() const { return reward_; }
    int stations() const { return static_cast<int>(lambda_.size()); }

    /// Writes the tables as CSV: condition,n,lambda,b,same_station,gain,loss
    void dump_csv(std::ostream& os) const;

  private:
    const QuadratureRule& travel_rule(Condition route) const;

    std::vector<double> lambda_;
    std::vector<int> buffers_;
    double reward_;
    double service_rate_;
    QuadratureRule hold_rule_;  // raw Gauss-Laguerre, weight exp(-x)
    std::array<double, 3> mean_travel_{};
    QuadratureRule good_rule_;
    QuadratureRule bad_rule_;
    QuadratureRule self_rule_;  // point mass at zero
    double loss_bound_ = 0.0;
    // [station][condition] -> gain at an empty queue
    std::vector<std::array<double, 3>> gain_empty_;
    // [station][condition][queue]
    std::vector<std::array<std::vector<double>, 3>> loss_;
};

/// Uniform bound max_q lambda_q (E[T] + 1/mu_s) on every anticipated loss,
/// with E[T] the larger of the two route means.
double loss_bound(const SystemConfig& config);

/// u-hat_i = beta_i * gain_i - sum_j beta_j * loss_i(j), for every station.
std::vector<double> anticipated_utilities(std::span<const double> decision, const SystemState& state,
                                          const AnticipationEvaluator& evaluator);

}  // namespace fops
