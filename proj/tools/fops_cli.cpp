#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fops/analyzer.hpp"
#include "fops/io.hpp"
#include "fops/simulation.hpp"
#include "fops/sweep.hpp"

namespace fs = std::filesystem;
using namespace fops;

namespace {

struct Overrides {
    std::optional<double> alpha;
    std::optional<double> gamma;
    std::optional<double> delta;
    std::optional<std::uint64_t> seed;

    void apply(SystemConfig& c) const
    {
        if (alpha)
            c.alpha = *alpha;
        if (gamma)
            c.gamma = *gamma;
        if (delta)
            c.delta = *delta;
        if (seed)
            c.seed = *seed;
    }
};

void add_overrides(CLI::App* cmd, Overrides& o)
{
    cmd->add_option("--alpha", o.alpha, "fairness parameter");
    cmd->add_option("--gamma", o.gamma, "averaging exponent");
    cmd->add_option("--delta", o.delta, "utility floor");
    cmd->add_option("--seed", o.seed, "master seed");
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::string alpha_tag(double a)
{
    return format_double(a);
}

int cmd_run(const std::string& config_path, const Overrides& ov, long epochs, long thin, bool force,
            const std::string& out_dir, std::uint64_t replication)
{
    auto cfg = load_config(config_path);
    ov.apply(cfg);
    const auto diag = validate_config(cfg);
    if (!diag.valid()) {
        std::cerr << "invalid config\n" << diag.summary();
        return 2;
    }
    if (!diag.a1_pass && !force) {
        std::cerr << "refusing to run: worst-case expected losses reach the reward (use --force)\n"
                  << diag.summary();
        return 2;
    }
    RunOptions opts;
    opts.epochs = epochs;
    opts.seed = cfg.seed;
    opts.replication = replication;
    opts.thinning = thin;
    const auto rep = run_replication(cfg, opts);

    fs::create_directories(out_dir);
    {
        auto out = open_out(fs::path(out_dir) / "trajectory.csv");
        write_trajectory_csv(out, rep.trajectory);
    }
    {
        auto out = open_out(fs::path(out_dir) / "result.csv");
        out << result_csv_header(cfg.m) << '\n' << result_csv_row(rep.result) << '\n';
    }
    const auto& r = rep.result;
    std::cout << "epochs " << r.epochs << "  MoF " << format_double(r.mof) << "  server utility "
              << format_double(r.server_utility) << "\nUbar";
    for (double u : r.anticipated)
        std::cout << ' ' << format_double(u);
    std::cout << "\nvisits";
    for (long v : r.visits)
        std::cout << ' ' << v;
    std::cout << '\n';
    return 0;
}

int cmd_sweep(const std::string& sweep_path, const Overrides& ov, std::optional<long> epochs,
              std::optional<bool> crn, bool force, const std::string& out_dir)
{
    auto spec = load_sweep(sweep_path);
    ov.apply(spec.base);
    if (ov.seed)
        spec.seed = *ov.seed;
    if (epochs)
        spec.epochs = *epochs;
    if (crn)
        spec.crn = *crn;
    if (force)
        spec.force = true;
    const int workers = worker_count();
    std::cerr << spec.m_grid.size() * spec.alpha_grid.size() * spec.replications << " cells on " << workers
              << " workers\n";
    const auto res = run_sweep(spec, workers);

    fs::create_directories(out_dir);
    auto out = open_out(fs::path(out_dir) / "sweep.csv");
    write_sweep_table(out, res);
    int failed = 0;
    for (const auto& c : res.cells) {
        if (!c.ok) {
            ++failed;
            std::cerr << "cell m=" << c.m << " alpha=" << format_double(c.alpha) << " rep=" << c.replication
                      << ": " << c.error << '\n';
        }
    }
    std::cout << "wrote " << (fs::path(out_dir) / "sweep.csv").string() << " (" << res.cells.size() << " rows, "
              << failed << " failed)\n";
    return 0;
}

int cmd_analyze(const std::string& config_path, const Overrides& ov, std::vector<double> alphas,
                const std::string& out_dir, bool dump)
{
    auto cfg = load_config(config_path);
    ov.apply(cfg);
    require_valid(cfg);
    const std::size_t states = chain_state_count(cfg);
    if (states > kDefaultStateCap) {
        std::cerr << "refusing to analyze: " << StateCapExceeded(states, kDefaultStateCap).what() << '\n';
        return 3;
    }
    if (alphas.empty())
        alphas.push_back(cfg.alpha);

    fs::create_directories(out_dir);
    auto table = open_out(fs::path(out_dir) / "bound.csv");
    table << "alpha,applicable,B,bound,MoF,pass,converged,residual,iterations,interior,closed_classes";
    for (int i = 1; i <= cfg.m; ++i)
        table << ",ubar_" << i;
    table << '\n';

    bool all_pass = true;
    for (double a : alphas) {
        SystemConfig c = cfg;
        c.alpha = a;
        const ChainModel model(c);
        const auto fp = solve_fixed_point(model);
        BoundCheck bc;
        bc.alpha = a;
        if (const auto B = mof_bound_constant(c); B && a > 0.0) {
            bc.applicable = true;
            bc.B = *B;
            bc.bound = std::pow(*B, 1.0 / a) - 1.0;
            bc.mof = mof(fp.averages, c.delta);
            bc.pass = bc.mof <= bc.bound;
        }
        bc.fixed_point = fp;
        if (bc.applicable && !bc.pass)
            all_pass = false;

        table << format_double(a) << ',' << bc.applicable << ',' << format_double(bc.B) << ','
              << format_double(bc.bound) << ',' << format_double(mof(fp.averages, c.delta)) << ',' << bc.pass << ','
              << fp.converged << ',' << format_double(fp.residual) << ',' << fp.iterations << ',' << fp.interior
              << ',' << fp.closed_classes.size();
        for (double u : fp.averages)
            table << ',' << format_double(u);
        table << '\n';

        auto report = open_out(fs::path(out_dir) / ("fixed_point_alpha" + alpha_tag(a) + ".json"));
        report << to_json(bc).dump(2) << '\n';

        if (dump) {
            const auto chain = model.build(fp.averages);
            auto ch = open_out(fs::path(out_dir) / ("chain_alpha" + alpha_tag(a) + ".csv"));
            write_chain_csv(ch, chain);
            auto st = open_out(fs::path(out_dir) / ("stationary_alpha" + alpha_tag(a) + ".csv"));
            write_stationary_csv(st, model.space(), stationary_distribution(chain).distribution);
        }

        std::cout << "alpha " << format_double(a) << ": u* =";
        for (double u : fp.averages)
            std::cout << ' ' << format_double(u);
        std::cout << "  residual " << format_double(fp.residual) << (fp.converged ? "" : " (not converged)")
                  << (fp.interior ? "" : " (boundary)");
        if (bc.applicable)
            std::cout << "  MoF " << format_double(bc.mof) << " <= " << format_double(bc.bound) << ": "
                      << (bc.pass ? "pass" : "FAIL");
        std::cout << '\n';
    }
    if (!all_pass)
        std::cerr << "MoF bound violated at the solved fixed point\n";
    return all_pass ? 0 : 1;
}

int cmd_validate(const std::string& config_path, const Overrides& ov)
{
    auto cfg = load_config(config_path);
    ov.apply(cfg);
    const auto diag = validate_config(cfg);
    std::cout << diag.summary();
    return diag.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fair opportunistic polling: simulator and exact analyzer"};
    app.require_subcommand(1);

    std::string config;
    std::string out = "out";
    Overrides ov;
    long epochs = 200000;
    long thin = 100;
    bool force = false;
    std::uint64_t replication = 0;

    auto* run = app.add_subcommand("run", "simulate one replication");
    run->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
    run->add_option("--epochs", epochs, "decision epochs")->check(CLI::PositiveNumber);
    run->add_option("--thin", thin, "keep every k-th trajectory row (0: final only)")->check(CLI::NonNegativeNumber);
    run->add_option("--replication", replication, "replication index within the seed");
    run->add_option("--out", out, "output directory");
    run->add_flag("--force", force, "run even if worst-case losses reach the reward");
    add_overrides(run, ov);

    auto* sweep = app.add_subcommand("sweep", "run an (m, alpha, replication) grid");
    std::optional<long> sweep_epochs;
    std::optional<bool> crn;
    sweep->add_option("--config", config, "sweep file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--epochs", sweep_epochs, "override epochs per cell");
    sweep->add_option("--out", out, "output directory");
    sweep->add_flag("--crn,!--no-crn", crn, "share random streams across alpha cells");
    sweep->add_flag("--force", force, "run cells even if worst-case losses reach the reward");
    add_overrides(sweep, ov);

    auto* analyze = app.add_subcommand("analyze", "solve the fixed point and check the MoF bound");
    std::vector<double> alphas;
    bool dump = false;
    analyze->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
    analyze->add_option("--alpha", alphas, "alpha values (comma separated)")->delimiter(',');
    analyze->add_option("--gamma", ov.gamma, "averaging exponent (unused by the analyzer)");
    analyze->add_option("--delta", ov.delta, "utility floor");
    analyze->add_option("--out", out, "output directory");
    analyze->add_flag("--dump", dump, "also write the chain and its stationary law");

    auto* validate = app.add_subcommand("validate", "check a config");
    validate->add_option("--config", config, "config file")->required()->check(CLI::ExistingFile);
    add_overrides(validate, ov);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run)
            return cmd_run(config, ov, epochs, thin, force, out, replication);
        if (*sweep)
            return cmd_sweep(config, ov, sweep_epochs, crn, force, out);
        if (*analyze)
            return cmd_analyze(config, ov, alphas, out, dump);
        if (*validate)
            return cmd_validate(config, ov);
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
