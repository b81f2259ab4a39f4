#include "fops/analyzer.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fops/simulation.hpp"

namespace fops {

namespace {

constexpr std::size_t kSaturated = std::numeric_limits<std::size_t>::max();

std::size_t saturating_mul(std::size_t a, std::size_t b)
{
    if (a != 0 && b > kSaturated / a)
        return kSaturated;
    return a * b;
}

/// Poisson pmf 0..n-1 at mean mu.
std::vector<double> poisson_pmf(double mu, int n)
{
    std::vector<double> p(std::max(n, 0), 0.0);
    if (n <= 0)
        return p;
    p[0] = std::exp(-mu);
    for (int a = 1; a < n; ++a)
        p[a] = p[a - 1] * mu / a;
    return p;
}

/// Law of min(b, n + Poisson(mu)) on 0..b.
std::vector<double> capped_poisson(int n, int b, double mu)
{
    std::vector<double> out(b + 1, 0.0);
    const auto p = poisson_pmf(mu, b - n);
    double mass = 0.0;
    for (int a = 0; a < b - n; ++a) {
        out[n + a] = p[a];
        mass += p[a];
    }
    out[b] += std::max(0.0, 1.0 - mass);
    return out;
}

}  // namespace

StateCapExceeded::StateCapExceeded(std::size_t count, std::size_t cap)
    : std::runtime_error("chain has " + (count == kSaturated ? std::string("too many") : std::to_string(count))
                         + " states, cap is " + std::to_string(cap)),
      count(count), cap(cap)
{
}

std::size_t chain_state_count(const SystemConfig& config)
{
    std::size_t n = static_cast<std::size_t>(config.m);
    for (int b : config.buffers)
        n = saturating_mul(n, static_cast<std::size_t>(b) + 1);
    for (int i = 1; i < config.m; ++i)
        n = saturating_mul(n, 2);
    return n;
}

// ---------------------------------------------------------------------------

StateSpace::StateSpace(const SystemConfig& config) : m_(config.m), buffers_(config.buffers)
{
    for (int b : buffers_)
        queue_codes_ = saturating_mul(queue_codes_, static_cast<std::size_t>(b) + 1);
    condition_codes_ = std::size_t{1} << (m_ - 1);
}

std::size_t StateSpace::index(int server, std::size_t queue_code, std::size_t condition_code) const
{
    return (static_cast<std::size_t>(server) * queue_codes_ + queue_code) * condition_codes_ + condition_code;
}

std::size_t StateSpace::index(const SystemState& state) const
{
    return index(state.server, encode_queues(state.queues), encode_conditions(state.server, state.conditions));
}

SystemState StateSpace::state(std::size_t idx) const
{
    SystemState s;
    const std::size_t ccode = idx % condition_codes_;
    idx /= condition_codes_;
    const std::size_t qcode = idx % queue_codes_;
    s.server = static_cast<int>(idx / queue_codes_);
    s.queues = decode_queues(qcode);
    s.conditions = decode_conditions(s.server, ccode);
    return s;
}

std::size_t StateSpace::encode_queues(std::span<const int> queues) const
{
    std::size_t code = 0;
    for (int i = m_ - 1; i >= 0; --i)
        code = code * (buffers_[i] + 1) + queues[i];
    return code;
}

std::vector<int> StateSpace::decode_queues(std::size_t code) const
{
    std::vector<int> q(m_);
    for (int i = 0; i < m_; ++i) {
        q[i] = static_cast<int>(code % (buffers_[i] + 1));
        code /= buffers_[i] + 1;
    }
    return q;
}

std::size_t StateSpace::encode_conditions(int server, std::span<const Condition> conditions) const
{
    std::size_t code = 0;
    int bit = 0;
    for (int i = 0; i < m_; ++i) {
        if (i == server)
            continue;
        if (conditions[i] == Condition::Bad)
            code |= std::size_t{1} << bit;
        ++bit;
    }
    return code;
}

std::vector<Condition> StateSpace::decode_conditions(int server, std::size_t code) const
{
    std::vector<Condition> c(m_, Condition::Self);
    int bit = 0;
    for (int i = 0; i < m_; ++i) {
        if (i == server)
            continue;
        c[i] = (code >> bit) & 1 ? Condition::Bad : Condition::Good;
        ++bit;
    }
    return c;
}

// ---------------------------------------------------------------------------

double FrozenChain::max_row_error() const
{
    double err = 0.0;
    for (const auto& row : rows) {
        double s = 0.0;
        for (const auto& [j, p] : row)
            s += p;
        err = std::max(err, std::abs(s - 1.0));
    }
    return err;
}

FrozenChain FrozenChain::from_dense(const std::vector<std::vector<double>>& matrix)
{
    FrozenChain c;
    c.rows.resize(matrix.size());
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        for (std::size_t j = 0; j < matrix[i].size(); ++j) {
            if (matrix[i][j] != 0.0)
                c.rows[i].emplace_back(j, matrix[i][j]);
        }
    }
    c.initial.assign(matrix.size(), 0.0);
    if (!matrix.empty())
        c.initial[0] = 1.0;
    return c;
}

// ---------------------------------------------------------------------------

namespace {

const SystemConfig& checked(const SystemConfig& config, const AnalyzerOptions& options)
{
    if (options.validate)
        require_valid(config);
    const std::size_t count = chain_state_count(config);
    if (count > options.state_cap)
        throw StateCapExceeded(count, options.state_cap);
    return config;
}

}  // namespace

ChainModel::ChainModel(const SystemConfig& config, AnalyzerOptions options)
    : config_(checked(config, options)), options_(options), space_(config),
      evaluator_(config, AnticipationOptions{options.travel_nodes, options.hold_nodes})
{
    good_rule_ = travel_law_rule(config.travel_good, options_.travel_nodes);
    bad_rule_ = travel_law_rule(config.travel_bad, options_.travel_nodes);
    hold_rule_ = exponential_law_rule(config.service_rate, options_.hold_nodes);
    kernels_.resize(static_cast<std::size_t>(config.m) * space_.queue_codes() * config.m);

    const int m = config.m;
    condition_law_.assign(m, std::vector<double>(space_.condition_codes(), 1.0));
    for (int s = 0; s < m; ++s) {
        for (std::size_t code = 0; code < space_.condition_codes(); ++code) {
            const auto c = space_.decode_conditions(s, code);
            double p = 1.0;
            for (int j = 0; j < m; ++j) {
                if (j == s)
                    continue;
                const double g = config.p_good[s][j];
                p *= c[j] == Condition::Bad ? 1.0 - g : g;
            }
            condition_law_[s][code] = p;
        }
    }
}

std::vector<double> ChainModel::initial_law() const
{
    std::vector<double> init(space_.size(), 0.0);
    for (std::size_t c = 0; c < space_.condition_codes(); ++c)
        init[space_.index(0, 0, c)] = condition_law_[0][c];
    return init;
}

const SparseRow& ChainModel::queue_kernel(int server, std::size_t queue_code, int target, Condition route) const
{
    const int m = config_.m;
    if (target == server)
        route = Condition::Self;
    auto& slot = kernels_[(static_cast<std::size_t>(server) * space_.queue_codes() + queue_code) * m + target]
                         [route == Condition::Bad ? 1 : 0];
    if (!slot) {
        const auto queues = space_.decode_queues(queue_code);
        slot = compute_kernel(server, queues, target, route);
    }
    return *slot;
}

SparseRow ChainModel::compute_kernel(int server, std::span<const int> queues, int target, Condition route) const
{
    const int m = config_.m;
    const auto& lambda = config_.lambda;
    const auto& b = config_.buffers;
    const bool moving = target != server;

    QuadratureRule self_rule{{0.0}, {1.0}};
    const QuadratureRule& travel = !moving ? self_rule : route == Condition::Bad ? bad_rule_ : good_rule_;

    std::vector<double> acc(space_.queue_codes(), 0.0);
    std::vector<std::vector<double>> marg(m);
    std::vector<double> joint;
    std::vector<double> next;

    for (std::size_t t = 0; t < travel.size(); ++t) {
        const double tt = travel.nodes[t];
        for (std::size_t h = 0; h < hold_rule_.size(); ++h) {
            const double tj = hold_rule_.nodes[h];
            const double weight = travel.weights[t] * hold_rule_.weights[h];
            if (weight == 0.0)
                continue;

            for (int i = 0; i < m; ++i) {
                const double mu = lambda[i] * (tt + tj);
                if (i != target) {
                    marg[i] = capped_poisson(queues[i], b[i], mu);
                    continue;
                }
                auto& out = marg[i];
                if (queues[i] >= 1) {
                    const auto d = capped_poisson(queues[i], b[i], mu);
                    out.assign(b[i] + 1, 0.0);
                    for (int v = 1; v <= b[i]; ++v)
                        out[v - 1] = d[v];
                    continue;
                }
                if (!moving) {
                    // waiting at an empty station: nothing to serve
                    out = capped_poisson(0, b[i], lambda[i] * tj);
                    continue;
                }
                // empty on arrival at the decision epoch: service happens
                // only if something arrived during the travel
                const auto pt = poisson_pmf(lambda[i] * tt, b[i] + 1);
                const auto pj = poisson_pmf(lambda[i] * tj, b[i] + 1);
                out = capped_poisson(0, b[i], lambda[i] * tj);
                for (double& x : out)
                    x *= pt[0];
                double below = 0.0;
                for (int v = 1; v < b[i]; ++v) {
                    double s = 0.0;
                    for (int a = 1; a <= v; ++a)
                        s += pt[a] * pj[v - a];
                    out[v - 1] += s;
                    below += s;
                }
                out[b[i] - 1] += std::max(0.0, 1.0 - pt[0] - below);
            }

            joint.assign(marg[m - 1].begin(), marg[m - 1].end());
            for (int i = m - 2; i >= 0; --i) {
                const std::size_t r = marg[i].size();
                next.assign(joint.size() * r, 0.0);
                for (std::size_t x = 0; x < joint.size(); ++x) {
                    if (joint[x] == 0.0)
                        continue;
                    for (std::size_t v = 0; v < r; ++v)
                        next[x * r + v] = joint[x] * marg[i][v];
                }
                joint.swap(next);
            }
            for (std::size_t c = 0; c < joint.size(); ++c)
                acc[c] += weight * joint[c];
        }
    }

    SparseRow row;
    for (std::size_t c = 0; c < acc.size(); ++c) {
        if (acc[c] > 0.0)
            row.emplace_back(c, acc[c]);
    }
    return row;
}

void ChainModel::decide(std::span<const double> averages, std::vector<std::vector<int>>& supports,
                        std::vector<std::vector<double>>& index) const
{
    const auto floored = floor_utilities(averages, config_.delta);
    const std::size_t n = space_.size();
    supports.resize(n);
    index.resize(n);
    for (std::size_t y = 0; y < n; ++y) {
        const auto s = space_.state(y);
        auto fi = fair_index_floored(s, floored, config_.alpha, evaluator_);
        supports[y] = argmax_set(fi.value, options_.tie_tolerance);
        index[y] = std::move(fi.value);
    }
}

FrozenChain ChainModel::build(std::span<const double> averages) const
{
    const int m = config_.m;
    if (static_cast<int>(averages.size()) != m)
        throw std::invalid_argument("averages must have one entry per station");
    FrozenChain chain;
    chain.averages.assign(averages.begin(), averages.end());
    decide(averages, chain.decisions, chain.index);

    const std::size_t n = space_.size();
    const std::size_t cc = space_.condition_codes();
    chain.rows.resize(n);
    std::vector<double> dense;
    for (std::size_t y = 0; y < n; ++y) {
        const std::size_t ccode = y % cc;
        const std::size_t qcode = (y / cc) % space_.queue_codes();
        const int server = static_cast<int>(y / cc / space_.queue_codes());
        const auto cond = space_.decode_conditions(server, ccode);
        const auto& support = chain.decisions[y];
        const double beta = 1.0 / static_cast<double>(support.size());

        auto& row = chain.rows[y];
        for (int j : support) {
            const auto& kernel = queue_kernel(server, qcode, j, cond[j]);
            const auto& law = condition_law_[j];
            for (const auto& [q, pk] : kernel) {
                for (std::size_t c = 0; c < cc; ++c)
                    row.emplace_back(space_.index(j, q, c), beta * pk * law[c]);
            }
        }
        if (support.size() > 1) {
            std::sort(row.begin(), row.end());
            SparseRow merged;
            for (const auto& e : row) {
                if (!merged.empty() && merged.back().first == e.first)
                    merged.back().second += e.second;
                else
                    merged.push_back(e);
            }
            row.swap(merged);
        }
    }
    chain.initial = initial_law();
    return chain;
}

std::vector<double> ChainModel::anticipated(std::size_t index, std::span<const int> support) const
{
    const auto s = space_.state(index);
    std::vector<int> sup(support.begin(), support.end());
    const auto d = Decision::uniform_over(std::move(sup), config_.m);
    return anticipated_utilities(d.probabilities, s, evaluator_);
}

FrozenChain build_chain(std::span<const double> averages, const SystemConfig& config, AnalyzerOptions options)
{
    const ChainModel model(config, options);
    return model.build(averages);
}

// ---------------------------------------------------------------------------

namespace {

/// Strongly connected components (iterative Tarjan). comp[v] is the
/// component id; ids come out in reverse topological order.
std::vector<std::size_t> strong_components(const std::vector<SparseRow>& rows, std::size_t& count)
{
    const std::size_t n = rows.size();
    constexpr std::size_t unvisited = kSaturated;
    std::vector<std::size_t> index(n, unvisited), low(n, 0), comp(n, unvisited);
    std::vector<char> on_stack(n, 0);
    std::vector<std::size_t> stack;
    std::vector<std::pair<std::size_t, std::size_t>> frames;  // (vertex, next edge)
    std::size_t next_index = 0;
    count = 0;

    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != unvisited)
            continue;
        frames.emplace_back(root, 0);
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!frames.empty()) {
            auto& [v, e] = frames.back();
            if (e < rows[v].size()) {
                const std::size_t w = rows[v][e].first;
                ++e;
                if (rows[v][e - 1].second <= 0.0)
                    continue;
                if (index[w] == unvisited) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.emplace_back(w, 0);
                }
                else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const std::size_t done = v;
            frames.pop_back();
            if (!frames.empty()) {
                const std::size_t parent = frames.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
            if (low[done] == index[done]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = count;
                } while (w != done);
                ++count;
            }
        }
    }
    return comp;
}

double class_residual(const std::vector<SparseRow>& rows, const std::vector<std::size_t>& members,
                      const std::vector<double>& pi)
{
    std::vector<double> next(rows.size(), 0.0);
    for (std::size_t v : members) {
        for (const auto& [w, p] : rows[v])
            next[w] += pi[v] * p;
    }
    double r = 0.0;
    for (std::size_t v : members)
        r = std::max(r, std::abs(next[v] - pi[v]));
    return r;
}

std::vector<double> class_stationary(const std::vector<SparseRow>& rows, const std::vector<std::size_t>& members,
                                     double tolerance)
{
    const std::size_t n = rows.size();
    const std::size_t k = members.size();
    std::vector<double> pi(n, 0.0);
    if (k == 1) {
        pi[members[0]] = 1.0;
        return pi;
    }
    std::vector<std::size_t> local(n, kSaturated);
    for (std::size_t a = 0; a < k; ++a)
        local[members[a]] = a;

    // (P^T - I) pi = 0 with the last equation replaced by sum pi = 1
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t a = 0; a < k; ++a) {
        const std::size_t v = members[a];
        if (a + 1 < k)
            trip.emplace_back(a, a, -1.0);
        for (const auto& [w, p] : rows[v]) {
            const std::size_t b = local[w];
            if (b == kSaturated || b + 1 == k)
                continue;
            trip.emplace_back(b, a, p);
        }
        trip.emplace_back(k - 1, a, 1.0);
    }
    Eigen::SparseMatrix<double> A(k, k);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    rhs[k - 1] = 1.0;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    Eigen::VectorXd x;
    if (lu.info() == Eigen::Success)
        x = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !x.allFinite())
        x = Eigen::VectorXd::Constant(k, 1.0 / k);

    double sum = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
        const double v = std::max(0.0, x[a]);
        pi[members[a]] = v;
        sum += v;
    }
    for (std::size_t v : members)
        pi[v] /= sum;

    // polish with power steps if the direct solve left a visible residual
    std::vector<double> next(n, 0.0);
    for (int it = 0; it < 100000 && class_residual(rows, members, pi) > tolerance; ++it) {
        for (std::size_t v : members)
            next[v] = 0.0;
        for (std::size_t v : members) {
            for (const auto& [w, p] : rows[v])
                next[w] += pi[v] * p;
        }
        double s = 0.0;
        for (std::size_t v : members)
            s += next[v];
        for (std::size_t v : members)
            pi[v] = next[v] / s;
    }
    return pi;
}

}  // namespace

StationaryResult stationary_distribution(const FrozenChain& chain, double tolerance)
{
    const auto& rows = chain.rows;
    const std::size_t n = rows.size();
    StationaryResult res;
    if (n == 0)
        return res;

    std::size_t ncomp = 0;
    const auto comp = strong_components(rows, ncomp);
    std::vector<char> closed(ncomp, 1);
    for (std::size_t v = 0; v < n; ++v) {
        for (const auto& [w, p] : rows[v]) {
            if (p > 0.0 && comp[w] != comp[v])
                closed[comp[v]] = 0;
        }
    }
    std::vector<std::vector<std::size_t>> members(ncomp);
    for (std::size_t v = 0; v < n; ++v)
        members[comp[v]].push_back(v);

    std::vector<std::size_t> class_of(n, kSaturated);
    // order classes by their smallest state for a stable report
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < ncomp; ++c) {
        if (closed[c])
            order.push_back(c);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return members[a][0] < members[b][0]; });
    for (std::size_t c : order) {
        for (std::size_t v : members[c])
            class_of[v] = res.closed_classes.size();
        res.closed_classes.push_back(members[c]);
    }
    const std::size_t nc = res.closed_classes.size();
    res.reducible = ncomp > 1;

    for (const auto& cls : res.closed_classes) {
        res.class_distributions.push_back(class_stationary(rows, cls, tolerance));
        res.residual = std::max(res.residual, class_residual(rows, cls, res.class_distributions.back()));
    }

    // absorption probabilities from the initial law
    std::vector<double> init = chain.initial;
    if (init.size() != n) {
        init.assign(n, 0.0);
        init[0] = 1.0;
    }
    res.class_weights.assign(nc, 0.0);
    std::vector<std::size_t> transient;
    std::vector<std::size_t> tpos(n, kSaturated);
    for (std::size_t v = 0; v < n; ++v) {
        if (class_of[v] == kSaturated) {
            tpos[v] = transient.size();
            transient.push_back(v);
        }
        else {
            res.class_weights[class_of[v]] += init[v];
        }
    }
    if (nc == 1) {
        res.class_weights[0] = 1.0;
    }
    else if (!transient.empty()) {
        double tmass = 0.0;
        for (std::size_t v : transient)
            tmass += init[v];
        if (tmass > 0.0) {
            // solve (I - Q)^T x = init_T, then weight_c += sum_v x_v R(v, c)
            const std::size_t k = transient.size();
            std::vector<Eigen::Triplet<double>> trip;
            for (std::size_t a = 0; a < k; ++a) {
                trip.emplace_back(a, a, 1.0);
                for (const auto& [w, p] : rows[transient[a]]) {
                    if (tpos[w] != kSaturated)
                        trip.emplace_back(tpos[w], a, -p);
                }
            }
            Eigen::SparseMatrix<double> A(k, k);
            A.setFromTriplets(trip.begin(), trip.end());
            A.makeCompressed();
            Eigen::VectorXd rhs(k);
            for (std::size_t a = 0; a < k; ++a)
                rhs[a] = init[transient[a]];
            Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
            lu.compute(A);
            if (lu.info() != Eigen::Success)
                throw std::runtime_error("absorption solve failed");
            const Eigen::VectorXd x = lu.solve(rhs);
            for (std::size_t a = 0; a < k; ++a) {
                for (const auto& [w, p] : rows[transient[a]]) {
                    if (class_of[w] != kSaturated)
                        res.class_weights[class_of[w]] += x[a] * p;
                }
            }
        }
    }
    const double wsum = std::accumulate(res.class_weights.begin(), res.class_weights.end(), 0.0);
    for (double& w : res.class_weights)
        w /= wsum;

    res.distribution.assign(n, 0.0);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t v : res.closed_classes[c])
            res.distribution[v] += res.class_weights[c] * res.class_distributions[c][v];
    }
    res.converged = res.residual <= std::max(tolerance, 1e-10);
    return res;
}

// ---------------------------------------------------------------------------

MapEvaluation fixed_point_map(std::span<const double> averages, const ChainModel& model)
{
    const auto chain = model.build(averages);
    MapEvaluation ev;
    ev.stationary = stationary_distribution(chain);
    ev.value.assign(model.config().m, 0.0);
    const auto& pi = ev.stationary.distribution;
    for (std::size_t y = 0; y < pi.size(); ++y) {
        if (pi[y] == 0.0)
            continue;
        const auto u = model.anticipated(y, chain.decisions[y]);
        for (std::size_t i = 0; i < u.size(); ++i)
            ev.value[i] += pi[y] * u[i];
    }
    return ev;
}

std::vector<double> fixed_point_map(std::span<const double> averages, const SystemConfig& config,
                                    AnalyzerOptions options)
{
    const ChainModel model(config, options);
    return fixed_point_map(averages, model).value;
}

namespace {

double sup_distance(std::span<const double> a, std::span<const double> b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

FixedPointAttempt iterate_from(const ChainModel& model, std::string label, std::vector<double> start,
                               const SolveOptions& opts)
{
    FixedPointAttempt at;
    at.start_label = std::move(label);
    at.start = start;
    std::vector<double> u = std::move(start);
    double eta = opts.damping;
    double previous = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opts.max_iterations; ++it) {
        const auto phi = fixed_point_map(u, model).value;
        const double r = sup_distance(u, phi);
        at.iterations = it;
        if (r < opts.tolerance) {
            at.converged = true;
            break;
        }
        if (r > previous * (1.0 + 1e-12))
            eta = std::max(eta * 0.5, opts.min_damping);
        previous = r;
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = (1.0 - eta) * u[i] + eta * phi[i];
    }
    at.averages = u;
    at.residual = sup_distance(u, fixed_point_map(u, model).value);
    at.converged = at.residual < opts.tolerance;
    at.final_damping = eta;
    return at;
}

}  // namespace

FixedPointReport solve_fixed_point(const ChainModel& model, const SolveOptions& options)
{
    const auto& cfg = model.config();
    const int m = cfg.m;
    std::vector<std::pair<std::string, std::vector<double>>> starts;
    if (options.starts.empty()) {
        starts.emplace_back("delta", std::vector<double>(m, cfg.delta));
        starts.emplace_back("reward", std::vector<double>(m, cfg.reward));
        std::vector<double> ramp(m);
        for (int i = 0; i < m; ++i)
            ramp[i] = m == 1 ? cfg.delta : cfg.delta + (cfg.reward - cfg.delta) * i / (m - 1);
        starts.emplace_back("staggered", ramp);
    }
    else {
        for (std::size_t k = 0; k < options.starts.size(); ++k) {
            if (static_cast<int>(options.starts[k].size()) != m)
                throw std::invalid_argument("start point must have one entry per station");
            starts.emplace_back("start" + std::to_string(k + 1), options.starts[k]);
        }
    }

    FixedPointReport rep;
    for (auto& [label, start] : starts)
        rep.attempts.push_back(iterate_from(model, label, start, options));

    const auto& first = rep.attempts.front();
    rep.averages = first.averages;
    rep.residual = first.residual;
    rep.iterations = first.iterations;
    rep.converged = first.converged;

    for (const auto& at : rep.attempts) {
        if (!at.converged)
            continue;
        const bool seen = std::any_of(rep.distinct_solutions.begin(), rep.distinct_solutions.end(),
                                      [&](const auto& s) { return sup_distance(s, at.averages) < options.distinct_tolerance; });
        if (!seen)
            rep.distinct_solutions.push_back(at.averages);
    }

    const auto margin = ergodic_interior_margin(rep.averages, model, 1e-6);
    rep.interior = margin.interior;
    rep.interior_gap = margin.min_gap;
    const auto chain = model.build(rep.averages);
    rep.closed_classes = stationary_distribution(chain).closed_classes;
    return rep;
}

FixedPointReport solve_fixed_point(const SystemConfig& config, const SolveOptions& options, AnalyzerOptions analyzer)
{
    const ChainModel model(config, analyzer);
    return solve_fixed_point(model, options);
}

MarginReport ergodic_interior_margin(std::span<const double> averages, const ChainModel& model, double epsilon)
{
    MarginReport rep;
    std::vector<std::vector<int>> base, moved;
    std::vector<std::vector<double>> index, scratch;
    model.decide(averages, base, index);

    const int m = model.config().m;
    std::vector<double> u(averages.begin(), averages.end());
    for (int i = 0; i < m; ++i) {
        for (int sign : {-1, 1}) {
            u[i] = averages[i] + sign * epsilon;
            model.decide(u, moved, scratch);
            if (moved != base) {
                rep.interior = false;
                rep.changed.emplace_back(i, sign);
            }
            u[i] = averages[i];
        }
    }

    const auto chain = model.build(averages);
    const auto st = stationary_distribution(chain);
    rep.min_gap = rep.min_gap_all = std::numeric_limits<double>::infinity();
    for (std::size_t y = 0; y < index.size(); ++y) {
        if (index[y].size() < 2)
            continue;
        auto v = index[y];
        std::partial_sort(v.begin(), v.begin() + 2, v.end(), std::greater<>());
        const double gap = v[0] - v[1];
        rep.min_gap_all = std::min(rep.min_gap_all, gap);
        if (st.distribution[y] > 1e-12)
            rep.min_gap = std::min(rep.min_gap, gap);
    }
    return rep;
}

std::optional<double> mof_bound_constant(const SystemConfig& config)
{
    const double lmin = *std::min_element(config.lambda.begin(), config.lambda.end());
    const double denom = lmin * truncated_mean(config.travel_good);
    if (!(denom > 0.0))
        return std::nullopt;
    return (1.0 + 1e-6) * std::max(1.0, config.reward / denom);
}

BoundCheck check_mof_bound(const SystemConfig& config, double alpha, const SolveOptions& options,
                           AnalyzerOptions analyzer)
{
    BoundCheck bc;
    bc.alpha = alpha;
    const auto B = mof_bound_constant(config);
    if (!B || !(alpha > 0.0))
        return bc;
    bc.applicable = true;
    bc.B = *B;
    bc.bound = std::pow(*B, 1.0 / alpha) - 1.0;
    SystemConfig cfg = config;
    cfg.alpha = alpha;
    bc.fixed_point = solve_fixed_point(cfg, options, analyzer);
    bc.mof = mof(bc.fixed_point.averages, cfg.delta);
    bc.pass = bc.mof <= bc.bound;
    return bc;
}

}  // namespace fops
