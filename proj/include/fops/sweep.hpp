#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "fops/config.hpp"
#include "fops/simulation.hpp"

namespace fops {

/// A group of stations sharing route quality and demand. Exactly one of
/// count / fraction may be set; a class with neither takes the remaining
/// stations. Stations are assigned to classes in order.
struct StationClass {
    std::optional<int> count;
    std::optional<double> fraction;
    double p_good = 0.5;                 // P(good route), attached per RouteQuality
    std::optional<double> lambda_total;  // per-station rate lambda_total / m
};

/// Which end of a route its class quality attaches to.
enum class RouteQuality {
    Destination,  // P(i -> j good) = p_good of j's class
    Source,       // P(i -> j good) = p_good of i's class
};

struct SweepSpec {
    SystemConfig base;
    std::vector<int> m_grid;
    std::vector<double> alpha_grid;
    std::vector<StationClass> classes;   // empty: every station like the base station 1
    std::optional<double> lambda_total;  // per-station rate lambda_total / m, when no class sets one
    RouteQuality route_quality = RouteQuality::Destination;
    int replications = 1;
    long epochs = 200000;
    std::uint64_t seed = 1;
    bool crn = true;                     // alpha cells of one (m, replication) share random streams
    bool force = false;                  // run configs failing the loss assumption
    StepOptions step;
};

/// Sweep file: JSON object with keys base (config object or path relative
/// to the sweep file), m, alpha, classes, lambda_total, route_quality
/// ("destination" or "source"), replications, epochs, seed, crn, force.
/// Unknown keys are errors.
SweepSpec sweep_from_json(const nlohmann::json& j, const std::string& base_dir = ".");
SweepSpec load_sweep(const std::string& path);

/// Throws std::invalid_argument on an empty grid or bad class layout.
void validate_sweep(const SweepSpec& spec);

/// The config of the m-station cell (alpha taken from the argument).
SystemConfig sweep_config(const SweepSpec& spec, int m, double alpha);

/// Seed of one cell; with crn the alpha index is ignored.
std::uint64_t cell_seed(std::uint64_t master, int m, int alpha_index, int replication, bool crn);

struct SweepCell {
    int m = 0;
    double alpha = 0.0;
    int replication = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    ReplicationResult result;
    std::optional<double> pof;  // against the alpha = 0 cell of the same (m, replication)
};

struct SweepResult {
    std::vector<SweepCell> cells;  // (m, alpha, replication) order
};

/// Worker count from FOPS_WORKERS, else the hardware concurrency.
int worker_count();

SweepResult run_sweep(const SweepSpec& spec, int workers = 0);

/// m,alpha,replication,seed,MoF,PoF,server_utility,status,ubar_1..ubar_M
void write_sweep_table(std::ostream& os, const SweepResult& result);

}  // namespace fops
