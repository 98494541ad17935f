#include "apal/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>
#include <thread>

#include "apal/errors.hpp"
#include "apal/log.hpp"
#include "apal/pareto.hpp"

namespace apal {

void EngineConfig::validate() const
{
    space.validate();
    partition.validate();
    if (kernel.outputs() < 1)
        throw ConfigError("engine: kernel has no outputs");
    if (!(noise_variance > 0.0) || !std::isfinite(noise_variance))
        throw ConfigError("engine: noise variance must be positive");
    if (eps.size() != kernel.outputs())
        throw ConfigError("engine: eps must have one entry per objective");
    if (budget < 0)
        throw ConfigError("engine: budget must be >= 0");
    if (workers < 1)
        throw ConfigError("engine: workers must be >= 1");
}

ScheduleParams EngineConfig::schedule_params() const
{
    ScheduleParams p;
    p.delta = delta;
    p.eps = eps;
    p.outputs = kernel.outputs();
    p.children = partition.children;
    p.smoothness = kernel.smoothness();
    p.metric_dimension = space.effective_metric_dimension();
    p.v1 = partition.v1;
    p.rho = partition.rho;
    p.c1 = c1;
    p.q = q;
    p.h_max_override = h_max_override;
    p.beta_h_max = beta_h_max;
    return p;
}

Oracle noisy_oracle(std::function<ObjVec(const Point&)> f, double noise_variance, std::uint64_t seed)
{
    auto rng = std::make_shared<std::mt19937_64>(seed);
    const double sd = std::sqrt(noise_variance);
    return [f = std::move(f), rng, sd](const Point& x) {
        ObjVec y = f(x);
        std::normal_distribution<double> noise(0.0, sd);
        for (Eigen::Index j = 0; j < y.size(); ++j)
            y[j] += noise(*rng);
        return y;
    };
}

std::string_view to_string(Action a)
{
    switch (a) {
    case Action::Refine: return "refine";
    case Action::Evaluate: return "evaluate";
    case Action::Terminate: return "terminate";
    }
    return "unknown";
}

std::string_view to_string(Termination t)
{
    return t == Termination::Converged ? "converged" : "budget_exhausted";
}

namespace {

// Runs fn(0..n-1) on up to `workers` threads; each index writes its own slot.
template <typename F>
void parallel_for(std::size_t n, int workers, F&& fn)
{
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += threads)
                fn(i);
        });
    }
    for (auto& t : pool)
        t.join();
}

NodeRecord make_record(Node node, std::optional<Point> parent_center, const HyperRect& rect)
{
    NodeRecord r;
    r.node = std::move(node);
    r.belief.rect = rect;
    r.parent_center = std::move(parent_center);
    return r;
}

} // namespace

Engine::Engine(EngineConfig config, Oracle oracle)
    : config_((config.validate(), std::move(config))), oracle_(std::move(oracle)), schedules_(config_.schedule_params())
{
    if (!oracle_)
        throw ConfigError("engine: oracle is empty");
}

EngineState Engine::initial_state() const
{
    EngineState s(GPPosterior(config_.kernel, config_.noise_variance));
    Node r = root(config_.space, config_.partition);
    const NodeId id = r.id;
    s.nodes.emplace(id, make_record(std::move(r), std::nullopt, HyperRect::unbounded(config_.kernel.outputs())));
    s.undecided.insert(id);
    return s;
}

void Engine::model(EngineState& state) const
{
    const int tau = state.tau();
    const double beta = schedules_.beta(tau);

    // Collect the stale posteriors, one job per distinct point.
    std::vector<const Point*> points;
    std::vector<Prediction*> own_slots;
    std::map<NodeId, std::size_t> parent_job;
    std::vector<std::pair<NodeRecord*, std::size_t>> parent_users;
    for (auto& [id, rec] : state.nodes) {
        if (!rec.belief.fresh(tau)) {
            points.push_back(&rec.node.center);
            own_slots.push_back(&rec.belief.prediction);
        }
        if (rec.parent_center && rec.parent_stamp != tau) {
            const NodeId pid = *rec.node.parent;
            auto [it, inserted] = parent_job.try_emplace(pid, points.size());
            if (inserted) {
                points.push_back(&*rec.parent_center);
                own_slots.push_back(nullptr);
            }
            parent_users.emplace_back(&rec, it->second);
        }
    }
    std::vector<Prediction> results(points.size());
    parallel_for(points.size(), config_.workers, [&](std::size_t i) { results[i] = state.posterior.predict(*points[i]); });

    for (std::size_t i = 0; i < points.size(); ++i) {
        if (own_slots[i])
            *own_slots[i] = results[i];
    }
    for (auto& [rec, job] : parent_users) {
        rec->parent_prediction = results[job];
        rec->parent_stamp = tau;
    }

    for (auto& [id, rec] : state.nodes) {
        rec.belief.stamp = tau;
        const int h = id.depth;
        std::optional<ParentBound> parent;
        if (rec.parent_center)
            parent = ParentBound{rec.parent_prediction, schedules_.v_h(h - 1)};
        const HyperRect q = node_indices(rec.belief.prediction, parent, beta, schedules_.v_h(h));
        IntersectResult r = intersect(rec.belief.rect, q);
        if (r.degenerate) {
            ++state.degenerate_count;
            log_warning("engine: empty rectangle intersection at node (" + std::to_string(id.depth) + "," + std::to_string(id.index) +
                        ") in round " + std::to_string(state.round));
        }
        rec.belief.rect = std::move(r.rect);
        if (observer_.on_modeled)
            observer_.on_modeled(rec.node, q, rec.belief.rect, state);
    }
}

RoundRecord Engine::step(EngineState& state) const
{
    if (state.undecided.empty())
        throw DomainError("step: the undecided set is empty");
    if (state.truncated)
        throw DomainError("step: the run was truncated by the evaluation budget");

    RoundRecord rec;
    rec.round = state.round;

    // Modeling over A = S u P.
    model(state);

    // Discarding against the pessimistic Pareto set of A.
    {
        std::vector<std::pair<NodeId, ObjVec>> corners;
        corners.reserve(state.nodes.size());
        for (const auto& [id, r] : state.nodes)
            corners.emplace_back(id, r.belief.rect.lower);
        const std::vector<NodeId> pess = pessimistic_pareto(corners);
        std::vector<ObjVec> shifted;
        shifted.reserve(pess.size());
        for (const NodeId& p : pess)
            shifted.push_back(state.nodes.at(p).belief.rect.lower + config_.eps);
        const DominanceQuery query(std::move(shifted));

        std::vector<NodeId> drop;
        for (const NodeId& x : state.undecided) {
            if (std::binary_search(pess.begin(), pess.end(), x))
                continue;
            if (query.dominated(state.nodes.at(x).belief.rect.upper))
                drop.push_back(x);
        }
        for (const NodeId& x : drop) {
            state.undecided.erase(x);
            auto it = state.nodes.find(x);
            state.discarded.push_back({std::move(it->second.node), state.round});
            state.nodes.erase(it);
        }
    }

    // epsilon-covering over W = S u P (a node is compared with itself too).
    {
        std::vector<ObjVec> uppers;
        uppers.reserve(state.nodes.size());
        for (const auto& [id, r] : state.nodes)
            uppers.push_back(r.belief.rect.upper);
        const DominanceQuery query(std::move(uppers));
        std::vector<NodeId> covered;
        for (const NodeId& x : state.undecided) {
            if (!query.dominated(state.nodes.at(x).belief.rect.lower + config_.eps))
                covered.push_back(x);
        }
        for (const NodeId& x : covered) {
            state.undecided.erase(x);
            state.decided.insert(x);
        }
    }

    // Selection: argmax of the diameter over W, ties to the smallest NodeId.
    const NodeId* chosen = nullptr;
    double omega_bar = 0.0;
    for (const auto& [id, r] : state.nodes) {
        const double w = diameter(r.belief.rect);
        if (!chosen || w > omega_bar) {
            chosen = &id;
            omega_bar = w;
        }
    }
    rec.omega_bar = omega_bar;
    state.last_omega_bar = omega_bar;

    if (state.undecided.empty() || !chosen) {
        rec.action = Action::Terminate;
    }
    else {
        const NodeId id = *chosen;
        NodeRecord& node = state.nodes.at(id);
        rec.node = id;
        const int h = id.depth;
        const double lhs = std::sqrt(schedules_.beta(state.tau())) * node.belief.prediction.stddev.norm();
        const double rhs = std::sqrt(static_cast<double>(config_.kernel.outputs())) * schedules_.v_h(h);
        if (lhs <= rhs && h < schedules_.depth_cap()) {
            rec.action = Action::Refine;
            const bool was_decided = state.decided.count(id) > 0;
            std::vector<Node> kids = children(node.node, config_.partition);
            const HyperRect rect = node.belief.rect;
            const Point center = node.node.center;
            if (observer_.on_refined)
                observer_.on_refined(node.node, kids, rect);
            state.undecided.erase(id);
            state.decided.erase(id);
            state.nodes.erase(id);
            for (Node& k : kids) {
                const NodeId kid = k.id;
                state.nodes.emplace(kid, make_record(std::move(k), center, rect));
                (was_decided ? state.decided : state.undecided).insert(kid);
            }
            state.max_depth = std::max(state.max_depth, h + 1);
        }
        else if (state.tau() >= config_.budget) {
            rec.action = Action::Terminate;
            state.truncated = true;
            log_warning("engine: evaluation budget of " + std::to_string(config_.budget) + " reached; result is truncated");
        }
        else {
            rec.action = Action::Evaluate;
            rec.node_evaluations = node.evaluations;
            ObjVec y = oracle_(node.node.center);
            if (y.size() != config_.kernel.outputs())
                throw InputError("engine: oracle returned " + std::to_string(y.size()) + " objectives");
            state.posterior.update(node.node.center, y);
            ++node.evaluations;
            state.evaluations.push_back({node.node.center, std::move(y), state.round, id});
        }
    }

    rec.tau = state.tau();
    rec.s_size = static_cast<int>(state.undecided.size());
    rec.p_size = static_cast<int>(state.decided.size());
    if (observer_.on_round)
        observer_.on_round(rec, state);
    ++state.round;
    return rec;
}

RunResult Engine::run_from(EngineState& state) const
{
    RunResult out;
    while (!finished(state))
        out.trace.push_back(step(state));

    out.rounds = static_cast<int>(out.trace.size());
    out.termination = state.truncated ? Termination::BudgetExhausted : Termination::Converged;
    out.degenerate_count = state.degenerate_count;
    out.max_depth = state.max_depth;
    out.evaluations = state.evaluations;
    for (const NodeId& id : state.decided) {
        const Node& n = state.nodes.at(id).node;
        out.decided.push_back(n);
        out.predictions.push_back(state.posterior.predict(n.center));
    }
    return out;
}

RunResult Engine::run() const
{
    EngineState s = initial_state();
    return run_from(s);
}

RunResult run(const EngineConfig& config, Oracle oracle)
{
    return Engine(config, std::move(oracle)).run();
}

} // namespace apal
