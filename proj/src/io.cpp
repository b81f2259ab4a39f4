#include "fops/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fops {

using nlohmann::json;

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where)
{
    if (!j.is_object())
        throw std::invalid_argument(where + ": expected a JSON object");
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end())
            throw std::invalid_argument(where + ": unknown key '" + item.key() + "'");
    }
}

namespace {

template <class T>
std::vector<T> broadcast(const json& v, int m, const char* key)
{
    if (v.is_array()) {
        if (static_cast<int>(v.size()) != m)
            throw std::invalid_argument(std::string(key) + ": expected " + std::to_string(m) + " entries");
        return v.get<std::vector<T>>();
    }
    return std::vector<T>(m, v.get<T>());
}

TravelLaw travel_from_json(const json& v, const char* key)
{
    if (!v.is_array() || v.size() != 2)
        throw std::invalid_argument(std::string(key) + ": expected [mean, spread]");
    return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

SystemConfig config_from_json(const json& j)
{
    reject_unknown_keys(j,
                        {"m", "lambda", "buffers", "service_rate", "travel_good", "travel_bad", "p_good", "reward",
                         "alpha", "delta", "gamma", "seed"},
                        "config");
    SystemConfig c;
    try {
        if (!j.contains("m"))
            throw std::invalid_argument("config: 'm' is required");
        c.m = j.at("m").get<int>();
        if (c.m < 1)
            throw std::invalid_argument("config: m must be >= 1");
        c.lambda = broadcast<double>(j.value("lambda", json(1.0)), c.m, "lambda");
        c.buffers = broadcast<int>(j.value("buffers", json(1)), c.m, "buffers");
        c.service_rate = j.value("service_rate", c.service_rate);
        if (j.contains("travel_good"))
            c.travel_good = travel_from_json(j["travel_good"], "travel_good");
        if (j.contains("travel_bad"))
            c.travel_bad = travel_from_json(j["travel_bad"], "travel_bad");
        const json p = j.value("p_good", json(0.5));
        if (p.is_array() && !p.empty() && p[0].is_array()) {
            c.p_good = p.get<std::vector<std::vector<double>>>();
            if (static_cast<int>(c.p_good.size()) != c.m)
                throw std::invalid_argument("p_good: expected an m x m matrix");
            for (const auto& row : c.p_good) {
                if (static_cast<int>(row.size()) != c.m)
                    throw std::invalid_argument("p_good: expected an m x m matrix");
            }
        }
        else {
            c.p_good = expand_destination_probabilities(broadcast<double>(p, c.m, "p_good"));
        }
        c.reward = j.value("reward", c.reward);
        c.alpha = j.value("alpha", c.alpha);
        c.delta = j.value("delta", c.delta);
        c.gamma = j.value("gamma", c.gamma);
        c.seed = j.value("seed", c.seed);
    }
    catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }
    return c;
}

json config_to_json(const SystemConfig& c)
{
    return json{{"m", c.m},
                {"lambda", c.lambda},
                {"buffers", c.buffers},
                {"service_rate", c.service_rate},
                {"travel_good", {c.travel_good.mean, c.travel_good.spread}},
                {"travel_bad", {c.travel_bad.mean, c.travel_bad.spread}},
                {"p_good", c.p_good},
                {"reward", c.reward},
                {"alpha", c.alpha},
                {"delta", c.delta},
                {"gamma", c.gamma},
                {"seed", c.seed}};
}

SystemConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    }
    catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const SystemConfig& config, const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << config_to_json(config).dump(2) << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory)
{
    const std::size_t m = trajectory.snapshots.empty() ? 0 : trajectory.snapshots.front().queues.size();
    os << "epoch,server,chosen";
    for (const char* prefix : {"N_", "Ubar_", "Vbar_"}) {
        for (std::size_t i = 1; i <= m; ++i)
            os << ',' << prefix << i;
    }
    os << '\n';
    for (const auto& s : trajectory.snapshots) {
        os << s.epoch << ',' << s.server + 1 << ',' << s.chosen + 1;
        for (int q : s.queues)
            os << ',' << q;
        for (double u : s.anticipated)
            os << ',' << format_double(u);
        for (double v : s.realized)
            os << ',' << format_double(v);
        os << '\n';
    }
}

std::string result_csv_header(int m)
{
    std::string h = "seed,replication,epochs,mof,server_utility,bound_violations";
    for (const char* prefix : {"ubar_", "vbar_", "visits_", "losses_", "services_"}) {
        for (int i = 1; i <= m; ++i)
            h += std::string(",") + prefix + std::to_string(i);
    }
    return h;
}

std::string result_csv_row(const ReplicationResult& r)
{
    std::string s = std::to_string(r.seed) + ',' + std::to_string(r.replication) + ',' + std::to_string(r.epochs) + ','
                    + format_double(r.mof) + ',' + format_double(r.server_utility) + ','
                    + std::to_string(r.bound_violations);
    for (double u : r.anticipated)
        s += ',' + format_double(u);
    for (double v : r.realized)
        s += ',' + format_double(v);
    for (const auto* counts : {&r.visits, &r.losses, &r.services}) {
        for (long c : *counts)
            s += ',' + std::to_string(c);
    }
    return s;
}

void write_chain_csv(std::ostream& os, const FrozenChain& chain)
{
    os << "from,to,probability\n";
    for (std::size_t y = 0; y < chain.rows.size(); ++y) {
        for (const auto& [z, p] : chain.rows[y])
            os << y << ',' << z << ',' << format_double(p) << '\n';
    }
}

void write_stationary_csv(std::ostream& os, const StateSpace& space, const std::vector<double>& pi)
{
    const int m = space.stations();
    os << "state,server";
    for (int i = 1; i <= m; ++i)
        os << ",N_" << i;
    for (int i = 1; i <= m; ++i)
        os << ",C_" << i;
    os << ",probability\n";
    for (std::size_t y = 0; y < pi.size(); ++y) {
        const auto s = space.state(y);
        os << y << ',' << s.server + 1;
        for (int q : s.queues)
            os << ',' << q;
        for (auto c : s.conditions)
            os << ',' << condition_code(c);
        os << ',' << format_double(pi[y]) << '\n';
    }
}

json to_json(const FixedPointReport& r)
{
    json attempts = json::array();
    for (const auto& a : r.attempts) {
        attempts.push_back({{"start_label", a.start_label},
                            {"start", a.start},
                            {"averages", a.averages},
                            {"residual", a.residual},
                            {"iterations", a.iterations},
                            {"converged", a.converged},
                            {"final_damping", a.final_damping}});
    }
    return json{{"averages", r.averages},
                {"residual", r.residual},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"interior", r.interior},
                {"interior_gap", std::isfinite(r.interior_gap) ? json(r.interior_gap) : json(nullptr)},
                {"closed_classes", r.closed_classes.size()},
                {"attempts", attempts},
                {"distinct_solutions", r.distinct_solutions}};
}

json to_json(const BoundCheck& b)
{
    return json{{"alpha", b.alpha},   {"applicable", b.applicable}, {"B", b.B},
                {"bound", b.bound},   {"mof", b.mof},               {"pass", b.pass},
                {"fixed_point", to_json(b.fixed_point)}};
}

}  // namespace fops
