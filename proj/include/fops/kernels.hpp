#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "fops/config.hpp"
#include "fops/model.hpp"

namespace fops {

/// Labels for the independent random streams of one replication. Each
/// source of randomness draws from its own stream so that changing how one
/// is consumed never shifts the others.
enum class Purpose : std::uint32_t {
    Conditions = 1,
    Travel = 2,
    Service = 3,
    Arrivals = 4,
    TieBreak = 5,
    Oracle = 6,
};

/// Mixes (seed, replication, purpose) into a 64-bit engine seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replication, Purpose purpose);

/// A seeded 64-bit Mersenne Twister stream with the draws the model needs.
/// Two streams built from the same (seed, replication, purpose) produce
/// identical sequences.
class RngStream {
  public:
    RngStream() : RngStream(0, 0, Purpose::Oracle) {}
    RngStream(std::uint64_t seed, std::uint64_t replication, Purpose purpose);

    double uniform();  // [0, 1)
    double normal(double mean, double spread);
    double exponential(double rate);
    long poisson(double mean);
    bool bernoulli(double p);
    int index(int n);  // uniform on {0, ..., n-1}

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

/// The five streams a replication consumes.
struct Streams {
    RngStream conditions;
    RngStream travel;
    RngStream service;
    RngStream arrivals;
    RngStream tie_break;

    static Streams for_replication(std::uint64_t seed, std::uint64_t replication);
};

/// Truncated-normal travel time for a Good or Bad route, by rejection.
double sample_travel_time(Condition condition, const SystemConfig& config, RngStream& rng);
double sample_travel_time(const TravelLaw& law, RngStream& rng);

/// Exponential service (or wait) time with mean 1/mu_s.
double sample_service_time(const SystemConfig& config, RngStream& rng);

/// Poisson(rate * duration) arrivals. Consumes no randomness when the mean is zero.
int sample_arrivals(double rate, double duration, RngStream& rng);

struct Admission {
    int queue = 0;
    int lost = 0;
};

/// Adds `arrivals` to a queue of capacity `buffer`; the overflow is lost.
Admission apply_arrivals(int queue, int arrivals, int buffer);

/// Fresh route conditions seen from `server`: Self at the server, otherwise
/// Good with probability p_good[server][i], independently.
std::vector<Condition> sample_conditions(int server, const SystemConfig& config, RngStream& rng);

}  // namespace fops
