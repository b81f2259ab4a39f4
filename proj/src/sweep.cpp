#include "fops/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "fops/io.hpp"

namespace fops {

using nlohmann::json;

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

StationClass class_from_json(const json& j)
{
    reject_unknown_keys(j, {"count", "fraction", "p_good", "lambda_total"}, "sweep class");
    StationClass c;
    if (j.contains("count"))
        c.count = j["count"].get<int>();
    if (j.contains("fraction"))
        c.fraction = j["fraction"].get<double>();
    c.p_good = j.value("p_good", c.p_good);
    if (j.contains("lambda_total"))
        c.lambda_total = j["lambda_total"].get<double>();
    return c;
}

}  // namespace

SweepSpec sweep_from_json(const json& j, const std::string& base_dir)
{
    reject_unknown_keys(j,
                        {"base", "m", "alpha", "classes", "lambda_total", "route_quality", "replications", "epochs", "seed",
                         "crn", "force"},
                        "sweep");
    SweepSpec s;
    try {
        if (!j.contains("base"))
            throw std::invalid_argument("sweep: 'base' is required");
        const auto& base = j["base"];
        if (base.is_string()) {
            const auto p = std::filesystem::path(base_dir) / base.get<std::string>();
            s.base = load_config(p.string());
        }
        else {
            s.base = config_from_json(base);
        }
        s.m_grid = j.value("m", std::vector<int>{s.base.m});
        s.alpha_grid = j.value("alpha", std::vector<double>{s.base.alpha});
        if (j.contains("classes")) {
            for (const auto& c : j["classes"])
                s.classes.push_back(class_from_json(c));
        }
        if (j.contains("lambda_total"))
            s.lambda_total = j["lambda_total"].get<double>();
        const auto rq = j.value("route_quality", std::string("destination"));
        if (rq == "destination")
            s.route_quality = RouteQuality::Destination;
        else if (rq == "source")
            s.route_quality = RouteQuality::Source;
        else
            throw std::invalid_argument("sweep: route_quality must be 'destination' or 'source'");
        s.replications = j.value("replications", s.replications);
        s.epochs = j.value("epochs", s.epochs);
        s.seed = j.value("seed", s.base.seed);
        s.crn = j.value("crn", s.crn);
        s.force = j.value("force", s.force);
    }
    catch (const json::exception& e) {
        throw std::invalid_argument(std::string("sweep: ") + e.what());
    }
    validate_sweep(s);
    return s;
}

SweepSpec load_sweep(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open sweep " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    }
    catch (const json::parse_error& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
    return sweep_from_json(j, std::filesystem::path(path).parent_path().string());
}

void validate_sweep(const SweepSpec& s)
{
    if (s.m_grid.empty() || s.alpha_grid.empty())
        throw std::invalid_argument("sweep: m and alpha grids must be non-empty");
    for (int m : s.m_grid) {
        if (m < 1)
            throw std::invalid_argument("sweep: m must be >= 1");
    }
    for (double a : s.alpha_grid) {
        if (!(a >= 0.0))
            throw std::invalid_argument("sweep: alpha must be >= 0");
    }
    if (s.replications < 1 || s.epochs < 1)
        throw std::invalid_argument("sweep: replications and epochs must be >= 1");
    if (s.lambda_total && !(*s.lambda_total > 0.0))
        throw std::invalid_argument("sweep: lambda_total must be positive");
    for (const auto& c : s.classes) {
        if (c.count && c.fraction)
            throw std::invalid_argument("sweep: a class sets both count and fraction");
        if (c.count && *c.count < 0)
            throw std::invalid_argument("sweep: negative class count");
        if (c.fraction && !(*c.fraction >= 0.0 && *c.fraction <= 1.0))
            throw std::invalid_argument("sweep: class fraction outside [0, 1]");
    }
}

SystemConfig sweep_config(const SweepSpec& spec, int m, double alpha)
{
    SystemConfig c = spec.base;
    c.m = m;
    c.alpha = alpha;
    const double base_lambda = spec.lambda_total ? *spec.lambda_total / m : spec.base.lambda.front();
    c.lambda.assign(m, base_lambda);
    c.buffers.assign(m, spec.base.buffers.front());

    std::vector<double> q(m, m > 1 ? spec.base.p_good[0][1] : 0.5);
    if (!spec.classes.empty()) {
        int next = 0;
        for (std::size_t k = 0; k < spec.classes.size(); ++k) {
            const auto& cls = spec.classes[k];
            int n;
            if (cls.count)
                n = *cls.count;
            else if (cls.fraction)
                n = static_cast<int>(std::lround(*cls.fraction * m));
            else
                n = m;
            n = std::clamp(n, 0, m - next);
            for (int i = next; i < next + n; ++i) {
                q[i] = cls.p_good;
                if (cls.lambda_total)
                    c.lambda[i] = *cls.lambda_total / m;
            }
            next += n;
        }
        if (next < m)
            throw std::invalid_argument("sweep: classes cover " + std::to_string(next) + " of " + std::to_string(m)
                                        + " stations");
    }
    if (spec.route_quality == RouteQuality::Destination) {
        c.p_good = expand_destination_probabilities(q);
    }
    else {
        c.p_good.assign(m, std::vector<double>(m, 1.0));
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) {
                if (i != j)
                    c.p_good[i][j] = q[i];
            }
        }
    }
    return c;
}

std::uint64_t cell_seed(std::uint64_t master, int m, int alpha_index, int replication, bool crn)
{
    std::uint64_t s = splitmix(master);
    s = splitmix(s ^ static_cast<std::uint64_t>(m));
    s = splitmix(s ^ (static_cast<std::uint64_t>(replication) << 20));
    if (!crn)
        s = splitmix(s ^ (static_cast<std::uint64_t>(alpha_index + 1) << 40));
    return s;
}

int worker_count()
{
    if (const char* env = std::getenv("FOPS_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1)
            return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SweepResult run_sweep(const SweepSpec& spec, int workers)
{
    validate_sweep(spec);
    SweepResult out;
    for (int m : spec.m_grid) {
        for (std::size_t a = 0; a < spec.alpha_grid.size(); ++a) {
            for (int r = 0; r < spec.replications; ++r) {
                SweepCell cell;
                cell.m = m;
                cell.alpha = spec.alpha_grid[a];
                cell.replication = r;
                cell.seed = cell_seed(spec.seed, m, static_cast<int>(a), r, spec.crn);
                out.cells.push_back(std::move(cell));
            }
        }
    }

    auto run_cell = [&spec](SweepCell& cell) {
        try {
            const auto cfg = sweep_config(spec, cell.m, cell.alpha);
            const auto diag = validate_config(cfg);
            if (!diag.valid())
                throw std::invalid_argument(diag.summary());
            if (!diag.a1_pass && !spec.force)
                throw std::invalid_argument("loss assumption fails (rho_B = " + format_double(diag.rho_b) + ")");
            RunOptions opts;
            opts.epochs = spec.epochs;
            opts.seed = cell.seed;
            opts.replication = static_cast<std::uint64_t>(cell.replication);
            opts.thinning = 0;
            opts.step = spec.step;
            cell.result = run_replication(cfg, opts).result;
            cell.ok = true;
        }
        catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
    };

    if (workers <= 0)
        workers = worker_count();
    workers = std::min<int>(workers, static_cast<int>(out.cells.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < out.cells.size(); i = next++)
            run_cell(out.cells[i]);
    };
    if (workers <= 1) {
        worker();
    }
    else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }

    for (auto& cell : out.cells) {
        if (!cell.ok)
            continue;
        const auto zero = std::find_if(out.cells.begin(), out.cells.end(), [&](const SweepCell& z) {
            return z.ok && z.m == cell.m && z.replication == cell.replication && z.alpha == 0.0;
        });
        if (zero != out.cells.end())
            cell.pof = pof(cell.result.anticipated, zero->result.anticipated);
    }
    return out;
}

void write_sweep_table(std::ostream& os, const SweepResult& result)
{
    int max_m = 0;
    for (const auto& c : result.cells)
        max_m = std::max(max_m, c.m);
    os << "m,alpha,replication,seed,MoF,PoF,server_utility,status";
    for (int i = 1; i <= max_m; ++i)
        os << ",ubar_" << i;
    os << '\n';
    for (const auto& c : result.cells) {
        os << c.m << ',' << format_double(c.alpha) << ',' << c.replication << ',' << c.seed << ',';
        if (c.ok) {
            os << format_double(c.result.mof) << ',' << (c.pof ? format_double(*c.pof) : "") << ','
               << format_double(c.result.server_utility) << ",ok";
        }
        else {
            std::string msg = c.error;
            std::replace(msg.begin(), msg.end(), '"', '\'');
            std::replace(msg.begin(), msg.end(), '\n', ' ');
            os << ",,,\"error: " << msg << '"';
        }
        for (int i = 0; i < max_m; ++i) {
            os << ',';
            if (c.ok && i < c.m)
                os << format_double(c.result.anticipated[i]);
        }
        os << '\n';
    }
}

}  // namespace fops
