#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fops {

/// Travel-time law parameters: a Normal(mean, spread) truncated to (0, inf).
struct TravelLaw {
    double mean = 0.0;
    double spread = 0.0;
};

/// Mean of the travel law after truncation to the positive half-line.
/// Truncating from below can only raise the mean above `law.mean`.
double truncated_mean(const TravelLaw& law);

/// Probability mass the untruncated Normal puts on (0, inf).
double positive_mass(const TravelLaw& law);

/// Every model parameter of the lossy polling system.
///
/// Stations are indexed 0..m-1 in code; file formats and CSV output use 1..m.
struct SystemConfig {
    int m = 2;
    std::vector<double> lambda;            // arrival rate per station
    std::vector<int> buffers;              // capacity b_i per station
    double service_rate = 1.0;             // mu_s; service and wait times have mean 1/mu_s
    TravelLaw travel_good{2.0, 0.1};
    TravelLaw travel_bad{6.0, 0.1};
    std::vector<std::vector<double>> p_good;  // p_good[i][j]: P(route i -> j is good)
    double reward = 1.0;                   // w
    double alpha = 1.0;
    double delta = 0.01;
    double gamma = 1.01;
    std::uint64_t seed = 1;

    double mean_service() const { return 1.0 / service_rate; }
};

/// Result of checking a configuration: feasibility figures plus every
/// invariant violation found.
struct Diagnostics {
    double rho_b = 0.0;       // sum_j lambda_j (E[T | bad] + 1/mu_s), truncated travel mean
    double rho_b_raw = 0.0;   // same with the untruncated mean mu_b
    double loss_bound = 0.0;  // uniform bound on anticipated per-epoch losses
    bool a1_pass = false;     // worst-case expected arrivals per epoch below w
    std::vector<std::string> violations;

    bool valid() const { return violations.empty(); }
    /// Valid and satisfies the worst-case loss assumption.
    bool ok() const { return valid() && a1_pass; }
    std::string summary() const;
};

Diagnostics validate_config(const SystemConfig& config);

/// Throws std::invalid_argument listing the violations when the config is
/// structurally invalid. Does not look at the loss assumption.
void require_valid(const SystemConfig& config);

/// Expands a per-destination vector q (q[j] = P(route to j is good)) to an
/// m x m matrix; the diagonal is unused and set to 1.
std::vector<std::vector<double>> expand_destination_probabilities(const std::vector<double>& q);

}  // namespace fops
