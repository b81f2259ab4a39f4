#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "fops/analyzer.hpp"
#include "fops/config.hpp"
#include "fops/simulation.hpp"

namespace fops {

/// Shortest decimal string that reads back to the same double.
std::string format_double(double x);

/// Config file format: a flat JSON object.
///
///   m              integer
///   lambda         number (same rate everywhere) or array of m numbers
///   buffers        integer or array of m integers
///   service_rate   number (mu_s)
///   travel_good    [mean, spread]
///   travel_bad     [mean, spread]
///   p_good         number, array of m (per destination) or m x m matrix
///   reward, alpha, delta, gamma   numbers
///   seed           integer
///
/// Missing keys keep their defaults; unknown keys are errors.
SystemConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const SystemConfig& config);
SystemConfig load_config(const std::string& path);
void save_config(const SystemConfig& config, const std::string& path);

/// Throws std::invalid_argument naming any key of `j` not in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& allowed, const std::string& where);

/// epoch,server,chosen,N_1..N_m,Ubar_1..Ubar_m,Vbar_1..Vbar_m (stations 1-based)
void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory);

/// seed,replication,epochs,mof,server_utility,bound_violations,
/// ubar_1..,vbar_1..,visits_1..,losses_1..,services_1..
std::string result_csv_header(int m);
std::string result_csv_row(const ReplicationResult& result);

/// from,to,probability (state indices) and state,server,N_1..,C_1..,probability
void write_chain_csv(std::ostream& os, const FrozenChain& chain);
void write_stationary_csv(std::ostream& os, const StateSpace& space, const std::vector<double>& pi);

nlohmann::json to_json(const FixedPointReport& report);
nlohmann::json to_json(const BoundCheck& check);

}  // namespace fops
