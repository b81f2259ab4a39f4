#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "fops/io.hpp"
#include "fops/sweep.hpp"
#include "support.hpp"

using namespace fops;
using nlohmann::json;

namespace {

std::string first_line(const std::string& s)
{
    return s.substr(0, s.find('\n'));
}

}  // namespace

TEST_CASE("format_double round-trips")
{
    for (double x : {0.1, 1.0 / 3.0, 6.03, -2.5e-300, 1e300, 0.0, 123456789.0}) {
        const auto s = format_double(x);
        CHECK(std::stod(s) == x);
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("config json round-trip")
{
    const auto cfg = fops::testing::two_station();
    const auto back = config_from_json(config_to_json(cfg));
    CHECK(back.m == cfg.m);
    CHECK(back.lambda == cfg.lambda);
    CHECK(back.buffers == cfg.buffers);
    CHECK(back.service_rate == cfg.service_rate);
    CHECK(back.travel_bad.mean == cfg.travel_bad.mean);
    CHECK(back.p_good == cfg.p_good);
    CHECK(back.reward == cfg.reward);
    CHECK(back.seed == cfg.seed);

    const auto path = std::filesystem::temp_directory_path() / "fops_roundtrip.json";
    save_config(cfg, path.string());
    CHECK(config_to_json(load_config(path.string())) == config_to_json(cfg));
    std::filesystem::remove(path);
}

TEST_CASE("config json forms")
{
    const auto scalar = config_from_json(json{{"m", 3}, {"lambda", 0.2}, {"buffers", 4}, {"p_good", 0.6}});
    CHECK(scalar.lambda == std::vector<double>{0.2, 0.2, 0.2});
    CHECK(scalar.buffers == std::vector<int>{4, 4, 4});
    CHECK(scalar.p_good[0][2] == 0.6);

    const auto vec = config_from_json(json{{"m", 2}, {"lambda", 0.1}, {"buffers", 1}, {"p_good", {0.9, 0.1}}});
    CHECK(vec.p_good[0][1] == 0.1);
    CHECK(vec.p_good[1][0] == 0.9);

    const auto mat = config_from_json(
        json{{"m", 2}, {"lambda", 0.1}, {"buffers", 1}, {"p_good", {{1.0, 0.3}, {0.7, 1.0}}}});
    CHECK(mat.p_good[0][1] == 0.3);
    CHECK(mat.p_good[1][0] == 0.7);

    CHECK_THROWS_AS(config_from_json(json{{"m", 2}, {"lamda", 0.1}}), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"lambda", 0.1}}), std::invalid_argument);
    CHECK_THROWS_AS(config_from_json(json{{"m", 2}, {"lambda", {0.1, 0.2, 0.3}}}), std::invalid_argument);
}

TEST_CASE("csv headers")
{
    CHECK(result_csv_header(2)
          == "seed,replication,epochs,mof,server_utility,bound_violations,ubar_1,ubar_2,vbar_1,vbar_2,"
             "visits_1,visits_2,losses_1,losses_2,services_1,services_2");

    RunOptions o;
    o.epochs = 50;
    o.thinning = 10;
    const auto rep = run_replication(fops::testing::two_station(), o);
    std::ostringstream t;
    write_trajectory_csv(t, rep.trajectory);
    CHECK(first_line(t.str()) == "epoch,server,chosen,N_1,N_2,Ubar_1,Ubar_2,Vbar_1,Vbar_2");
    CHECK([&] { const auto x = t.str(); return std::count(x.begin(), x.end(), '\n'); }() == 6);

    const auto row = result_csv_row(rep.result);
    CHECK(std::count(row.begin(), row.end(), ',') == 15);

    const auto chain = FrozenChain::from_dense({{0.5, 0.5}, {1.0, 0.0}});
    std::ostringstream c;
    write_chain_csv(c, chain);
    CHECK(first_line(c.str()) == "from,to,probability");

    const auto cfg = fops::testing::symmetric(2, 1);
    const StateSpace sp(cfg);
    std::ostringstream s;
    write_stationary_csv(s, sp, std::vector<double>(sp.size(), 1.0 / sp.size()));
    CHECK(first_line(s.str()) == "state,server,N_1,N_2,C_1,C_2,probability");
    CHECK([&] { const auto x = s.str(); return std::count(x.begin(), x.end(), '\n'); }() == 17);
}

TEST_CASE("sweep spec parsing")
{
    const json j = {{"base", config_to_json(fops::testing::polling(2))},
                    {"m", {2, 4}},
                    {"alpha", {0, 1}},
                    {"lambda_total", 0.67},
                    {"classes", {{{"count", 2}, {"p_good", 0.9}}, {{"p_good", 0.1}}}},
                    {"replications", 2},
                    {"epochs", 100}};
    const auto spec = sweep_from_json(j);
    CHECK(spec.m_grid == std::vector<int>{2, 4});
    const auto c4 = sweep_config(spec, 4, 1.0);
    CHECK(c4.lambda == std::vector<double>(4, 0.67 / 4));
    CHECK(c4.p_good[0][1] == 0.9);
    CHECK(c4.p_good[0][3] == 0.1);
    CHECK(c4.p_good[3][0] == 0.9);

    auto src = spec;
    src.route_quality = RouteQuality::Source;
    const auto s4 = sweep_config(src, 4, 1.0);
    CHECK(s4.p_good[0][3] == 0.9);
    CHECK(s4.p_good[3][0] == 0.1);

    json bad = j;
    bad["replicas"] = 3;
    CHECK_THROWS_AS(sweep_from_json(bad), std::invalid_argument);
    json empty = j;
    empty["m"] = json::array();
    CHECK_THROWS_AS(sweep_from_json(empty), std::invalid_argument);
}

TEST_CASE("cell seeds")
{
    CHECK(cell_seed(1, 2, 0, 0, true) == cell_seed(1, 2, 3, 0, true));
    CHECK(cell_seed(1, 2, 0, 0, false) != cell_seed(1, 2, 3, 0, false));
    std::set<std::uint64_t> seen;
    for (int m : {2, 5, 10})
        for (int r = 0; r < 20; ++r)
            seen.insert(cell_seed(9, m, 0, r, true));
    CHECK(seen.size() == 60);
}

TEST_CASE("a one-cell sweep equals a single run")
{
    SweepSpec spec;
    spec.base = fops::testing::two_station();
    spec.m_grid = {2};
    spec.alpha_grid = {1.0};
    spec.epochs = 5000;
    spec.seed = 31;
    spec.base.lambda = {0.2, 0.2};
    const auto res = run_sweep(spec, 1);
    REQUIRE(res.cells.size() == 1);
    REQUIRE(res.cells[0].ok);

    RunOptions o;
    o.epochs = 5000;
    o.seed = res.cells[0].seed;
    o.thinning = 0;
    const auto single = run_replication(sweep_config(spec, 2, 1.0), o).result;
    CHECK(res.cells[0].result.anticipated == single.anticipated);
    CHECK(res.cells[0].result.mof == single.mof);
}

TEST_CASE("sweeps are deterministic regardless of worker count")
{
    SweepSpec spec;
    spec.base = fops::testing::polling(2);
    spec.m_grid = {2, 3};
    spec.alpha_grid = {0.0, 1.0};
    spec.lambda_total = 0.67;
    spec.replications = 2;
    spec.epochs = 3000;
    spec.force = true;
    const auto a = run_sweep(spec, 1);
    const auto b = run_sweep(spec, 4);
    std::ostringstream ta, tb;
    write_sweep_table(ta, a);
    write_sweep_table(tb, b);
    CHECK(ta.str() == tb.str());
    CHECK(first_line(ta.str()) == "m,alpha,replication,seed,MoF,PoF,server_utility,status,ubar_1,ubar_2,ubar_3");
    for (const auto& c : a.cells) {
        CHECK(c.ok);
        CHECK(c.pof.has_value());
        if (c.alpha == 0.0)
            CHECK(*c.pof == 0.0);
    }

    spec.force = false;
    const auto refused = run_sweep(spec, 2);
    for (const auto& c : refused.cells)
        CHECK_FALSE(c.ok);
}
