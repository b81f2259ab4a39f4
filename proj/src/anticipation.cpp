#include "fops/anticipation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace fops {

namespace {

int condition_slot(Condition c) { return static_cast<int>(c); }

// exp(-shift) * sum_{a<k} (k - a) x^a / a!
// The remaining exp(-(x - shift)) of the Poisson pmf is carried by the
// caller's quadrature weight.
double weighted_low_terms(double x, int k, double shift)
{
    double sum = 0.0;
    if (shift < 700.0) {
        double term = std::exp(-shift);
        for (int a = 0; a < k; ++a) {
            sum += (k - a) * term;
            term *= x / (a + 1);
        }
        return sum;
    }
    const double log_x = x > 0.0 ? std::log(x) : -INFINITY;
    for (int a = 0; a < k; ++a) {
        const double log_term = -shift + a * log_x - std::lgamma(a + 1.0);
        sum += (k - a) * std::exp(log_term);
    }
    return sum;
}

}  // namespace

AnticipationEvaluator::AnticipationEvaluator(const SystemConfig& config, AnticipationOptions options)
    : lambda_(config.lambda),
      buffers_(config.buffers),
      reward_(config.reward),
      service_rate_(config.service_rate)
{
    if (lambda_.size() != buffers_.size())
        throw std::invalid_argument("lambda and buffers must have the same length");
    if (!(service_rate_ > 0.0))
        throw std::invalid_argument("service rate must be > 0");
    const int max_buffer = buffers_.empty() ? 0 : *std::max_element(buffers_.begin(), buffers_.end());
    // the hold-time integrand is a polynomial of degree < b in the Laguerre variable
    hold_rule_ = gauss_laguerre(std::max(options.hold_nodes, max_buffer));
    good_rule_ = travel_law_rule(config.travel_good, options.travel_nodes);
    bad_rule_ = travel_law_rule(config.travel_bad, options.travel_nodes);
    self_rule_ = QuadratureRule{{0.0}, {1.0}};
    mean_travel_[condition_slot(Condition::Self)] = 0.0;
    mean_travel_[condition_slot(Condition::Good)] = truncated_mean(config.travel_good);
    mean_travel_[condition_slot(Condition::Bad)] = truncated_mean(config.travel_bad);
    loss_bound_ = fops::loss_bound(config);

    const std::size_t m = lambda_.size();
    gain_empty_.resize(m);
    loss_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (Condition c : {Condition::Self, Condition::Good, Condition::Bad}) {
            const int slot = condition_slot(c);
            gain_empty_[i][slot] = compute_gain(lambda_[i], 0, c);
            auto& row = loss_[i][slot];
            row.resize(buffers_[i] + 1);
            for (int n = 0; n <= buffers_[i]; ++n)
                row[n] = compute_loss(lambda_[i], n, buffers_[i], c);
        }
    }
}

const QuadratureRule& AnticipationEvaluator::travel_rule(Condition route) const
{
    switch (route) {
    case Condition::Good: return good_rule_;
    case Condition::Bad: return bad_rule_;
    case Condition::Self: break;
    }
    return self_rule_;
}

double AnticipationEvaluator::mean_travel(Condition route) const { return mean_travel_[condition_slot(route)]; }

double AnticipationEvaluator::gain(int station, int queue, Condition condition) const
{
    if (queue > 0)
        return reward_;
    return gain_empty_[station][condition_slot(condition)];
}

double AnticipationEvaluator::loss(int station, int queue, Condition route) const
{
    return loss_[station][condition_slot(route)][queue];
}

double AnticipationEvaluator::compute_gain(double lambda, int queue, Condition condition) const
{
    if (queue > 0)
        return reward_;
    if (condition == Condition::Self || !(lambda > 0.0))
        return 0.0;
    const auto& rule = travel_rule(condition);
    double p_arrival = 0.0;
    for (std::size_t k = 0; k < rule.size(); ++k)
        p_arrival += rule.weights[k] * -std::expm1(-lambda * rule.nodes[k]);
    return reward_ * std::clamp(p_arrival, 0.0, 1.0);
}

double AnticipationEvaluator::compute_loss(double lambda, int queue, int buffer, Condition route) const
{
    if (queue < 0 || queue > buffer)
        throw std::invalid_argument("compute_loss: queue outside [0, buffer]");
    if (!(lambda > 0.0))
        return 0.0;
    // E[(X - k)^+] = E[X] - k + E[(k - X)^+] with X ~ Poisson(lambda (T + J))
    const int room = buffer - queue;
    const double mean_arrivals = lambda * (mean_travel(route) + 1.0 / service_rate_);
    if (room == 0)
        return mean_arrivals;

    // Over J ~ Exp(mu_s): the exp(-lambda J) factor of the Poisson pmf joins
    // the exponential density, leaving a Laguerre weight at rate mu_s + lambda.
    const auto& laguerre = hold_rule_;
    const double rate = service_rate_ + lambda;
    const double scale = service_rate_ / rate;
    const auto& travel = travel_rule(route);
    double deficit = 0.0;
    for (std::size_t t = 0; t < travel.size(); ++t) {
        const double tt = travel.nodes[t];
        double inner = 0.0;
        for (std::size_t q = 0; q < laguerre.size(); ++q) {
            const double x = lambda * (tt + laguerre.nodes[q] / rate);
            inner += laguerre.weights[q] * weighted_low_terms(x, room, lambda * tt);
        }
        deficit += travel.weights[t] * scale * inner;
    }
    deficit = std::min(deficit, static_cast<double>(room));
    const double value = (mean_arrivals - room) + deficit;
    return std::clamp(value, 0.0, mean_arrivals);
}

void AnticipationEvaluator::dump_csv(std::ostream& os) const
{
    os << "condition,n,lambda,b,same_station,gain,loss\n";
    os.precision(17);
    for (std::size_t i = 0; i < lambda_.size(); ++i) {
        for (Condition c : {Condition::Self, Condition::Good, Condition::Bad}) {
            for (int n = 0; n <= buffers_[i]; ++n) {
                os << condition_code(c) << ',' << n << ',' << lambda_[i] << ',' << buffers_[i] << ','
                   << (c == Condition::Self ? 1 : 0) << ',' << gain(static_cast<int>(i), n, c) << ','
                   << loss(static_cast<int>(i), n, c) << '\n';
            }
        }
    }
}

double loss_bound(const SystemConfig& config)
{
    const double travel = std::max(truncated_mean(config.travel_good), truncated_mean(config.travel_bad));
    const double hold = 1.0 / config.service_rate;
    double bound = 0.0;
    for (double l : config.lambda)
        bound = std::max(bound, l * (travel + hold));
    return bound;
}

std::vector<double> anticipated_utilities(std::span<const double> decision, const SystemState& state,
                                          const AnticipationEvaluator& evaluator)
{
    const int m = state.size();
    if (static_cast<int>(decision.size()) != m)
        throw std::invalid_argument("decision size does not match station count");
    std::vector<double> u(m, 0.0);
    for (int i = 0; i < m; ++i) {
        const int n = state.queues[i];
        double value = decision[i] * evaluator.gain(i, n, state.conditions[i]);
        for (int j = 0; j < m; ++j) {
            if (decision[j] != 0.0)
                value -= decision[j] * evaluator.loss(i, n, state.conditions[j]);
        }
        u[i] = value;
    }
    return u;
}

}  // namespace fops
