#pragma once

// Shared fixtures for the unit tests and the acceptance runner.

#include <algorithm>
#include <cstdint>
#include <string>

#include "apal/bench.hpp"
#include "apal/config.hpp"
#include "apal/engine.hpp"
#include "apal/experiment.hpp"

namespace apal::testing {

inline ExperimentConfig simulation_one(std::optional<int> h_max_override = 10)
{
    ExperimentConfig c;
    c.name = "simulation-1";
    c.engine.kernel = MultiOutputKernel::independent(
        {{KernelFamily::SquaredExponential, 0.5, 0.1}, {KernelFamily::SquaredExponential, 0.1, 0.06}});
    c.engine.eps = Eigen::Vector2d(0.05, 0.05);
    c.engine.partition.v1 = 1.0;
    c.engine.partition.v2 = 1.0;
    c.engine.h_max_override = h_max_override;
    return c;
}

inline ExperimentConfig sweep(KernelFamily family, double eps)
{
    ExperimentConfig c;
    c.name = "sweep";
    c.engine.kernel = MultiOutputKernel::independent({{family, 0.6, 0.2}, {family, 0.6, 0.2}});
    c.engine.eps = Eigen::Vector2d::Constant(eps);
    return c;
}

/// Per-run checks of the engine invariants, collected through the observer.
struct Audit {
    SeedOutcome outcome;
    int depth_cap = 0;
    int early_termination_violations = 0; // rounds with omega_bar <= min eps that did not terminate
    int omega_increases = 0;
    int cap_checked = 0;                  // evaluations at depths below the cap
    int cap_violations = 0;               // evaluations beyond q_h at depths below the cap
    int evaluations_at_cap = 0;           // forced evaluations at the depth cap
    long long containment_total = 0;      // (node, round, objective) triples
    long long containment_misses = 0;     // true f^j(center) outside Q_t

    bool accurate() const { return outcome.metrics.eps_accuracy == 1.0 && outcome.metrics.eps_coverage == 1.0; }
};

inline Audit audit_seed(const ExperimentConfig& cfg, std::uint64_t seed)
{
    Audit a;
    const auto& ec = cfg.engine;
    const SampledObjective obj = sample_gp_function(ec.kernel, ec.space, cfg.resolved_grid_size(), seed);
    Engine engine(ec, noisy_oracle([&obj](const Point& x) { return obj(x); }, ec.noise_variance, noise_seed(seed)));
    const Schedules& sched = engine.schedules();
    a.depth_cap = sched.depth_cap();
    const double min_eps = ec.eps.minCoeff();
    std::optional<double> last;

    EngineObserver obs;
    obs.on_modeled = [&](const Node& n, const HyperRect& q, const HyperRect&, const EngineState&) {
        const ObjVec f = obj(n.center);
        for (Eigen::Index j = 0; j < f.size(); ++j) {
            ++a.containment_total;
            if (f[j] < q.lower[j] || f[j] > q.upper[j])
                ++a.containment_misses;
        }
    };
    obs.on_round = [&](const RoundRecord& r, const EngineState&) {
        if (r.omega_bar <= min_eps && r.action != Action::Terminate)
            ++a.early_termination_violations;
        if (last && r.omega_bar > *last)
            ++a.omega_increases;
        last = r.omega_bar;
        if (r.action == Action::Evaluate) {
            const int h = r.node->depth;
            if (h < a.depth_cap) {
                ++a.cap_checked;
                if (*r.node_evaluations + 1 > sched.evaluation_cap(h, r.tau - 1, ec.noise_variance))
                    ++a.cap_violations;
            }
            else {
                ++a.evaluations_at_cap;
            }
        }
    };
    engine.set_observer(std::move(obs));

    a.outcome.seed = seed;
    a.outcome.result = engine.run();
    a.outcome.truth = true_pareto_front(obj);
    a.outcome.predicted = predicted_front(obj, a.outcome.result.decided);
    a.outcome.metrics = score(a.outcome.predicted, a.outcome.truth, ec.eps, reference_point(obj));
    a.outcome.metrics.evaluations = static_cast<int>(a.outcome.result.evaluations.size());
    return a;
}

} // namespace apal::testing
