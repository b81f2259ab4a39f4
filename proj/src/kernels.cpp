#include "fops/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fops {

namespace {

std::uint64_t splitmix64(std::uint64_t& state)
{
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replication, Purpose purpose)
{
    std::uint64_t state = seed;
    std::uint64_t h = splitmix64(state);
    state = h ^ replication;
    h = splitmix64(state);
    state = h ^ static_cast<std::uint64_t>(purpose);
    return splitmix64(state);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t replication, Purpose purpose)
    : engine_(derive_seed(seed, replication, purpose))
{
}

double RngStream::uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

double RngStream::normal(double mean, double spread)
{
    return std::normal_distribution<double>(mean, spread)(engine_);
}

double RngStream::exponential(double rate) { return std::exponential_distribution<double>(rate)(engine_); }

long RngStream::poisson(double mean) { return std::poisson_distribution<long>(mean)(engine_); }

bool RngStream::bernoulli(double p) { return uniform() < p; }

int RngStream::index(int n) { return std::uniform_int_distribution<int>(0, n - 1)(engine_); }

Streams Streams::for_replication(std::uint64_t seed, std::uint64_t replication)
{
    return Streams{
        RngStream(seed, replication, Purpose::Conditions),
        RngStream(seed, replication, Purpose::Travel),
        RngStream(seed, replication, Purpose::Service),
        RngStream(seed, replication, Purpose::Arrivals),
        RngStream(seed, replication, Purpose::TieBreak),
    };
}

double sample_travel_time(const TravelLaw& law, RngStream& rng)
{
    if (!(law.mean > 0.0))
        throw std::invalid_argument("travel mean must be > 0");
    if (law.spread <= 0.0)
        return law.mean;
    for (;;) {
        const double t = rng.normal(law.mean, law.spread);
        if (t > 0.0)
            return t;
    }
}

double sample_travel_time(Condition condition, const SystemConfig& config, RngStream& rng)
{
    switch (condition) {
    case Condition::Good: return sample_travel_time(config.travel_good, rng);
    case Condition::Bad: return sample_travel_time(config.travel_bad, rng);
    case Condition::Self: break;
    }
    throw std::invalid_argument("no travel time for the server's own station");
}

double sample_service_time(const SystemConfig& config, RngStream& rng)
{
    return rng.exponential(config.service_rate);
}

int sample_arrivals(double rate, double duration, RngStream& rng)
{
    if (duration < 0.0)
        throw std::invalid_argument("negative duration");
    const double mean = rate * duration;
    if (!(mean > 0.0))
        return 0;
    return static_cast<int>(rng.poisson(mean));
}

Admission apply_arrivals(int queue, int arrivals, int buffer)
{
    if (queue < 0 || queue > buffer || arrivals < 0)
        throw std::invalid_argument("apply_arrivals: queue " + std::to_string(queue) + " outside [0, "
                                    + std::to_string(buffer) + "] or negative arrivals");
    const int total = queue + arrivals;
    if (total <= buffer)
        return {total, 0};
    return {buffer, total - buffer};
}

std::vector<Condition> sample_conditions(int server, const SystemConfig& config, RngStream& rng)
{
    const int m = config.m;
    if (server < 0 || server >= m)
        throw std::out_of_range("server index outside station range");
    std::vector<Condition> c(m, Condition::Self);
    for (int i = 0; i < m; ++i) {
        if (i == server)
            continue;
        c[i] = rng.bernoulli(config.p_good[server][i]) ? Condition::Good : Condition::Bad;
    }
    return c;
}

}  // namespace fops
