#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <vector>

#include "apal/confidence.hpp"
#include "apal/gp.hpp"
#include "apal/partition.hpp"
#include "apal/schedules.hpp"

namespace apal {

struct EngineConfig {
    DesignSpace space = DesignSpace::unit_cube(1);
    PartitionParams partition;
    MultiOutputKernel kernel = MultiOutputKernel::independent({ScalarKernel{}, ScalarKernel{}});
    double noise_variance = 1e-4;
    ObjVec eps;
    double delta = 0.05;
    double c1 = 1.0;
    double q = 1.0;
    std::optional<int> h_max_override;
    std::optional<int> beta_h_max;
    int budget = 10'000;
    int workers = 1; // threads used to refresh posteriors in the modeling phase

    /// Throws ConfigError on any inconsistency.
    void validate() const;
    ScheduleParams schedule_params() const;
};

/// Returns a noisy observation of the objective at a design.
using Oracle = std::function<ObjVec(const Point&)>;

/// Oracle that adds N(0, noise_variance I) to `f`, drawing from its own seeded stream.
Oracle noisy_oracle(std::function<ObjVec(const Point&)> f, double noise_variance, std::uint64_t seed);

enum class Action { Refine, Evaluate, Terminate };
std::string_view to_string(Action a);

enum class Termination { Converged, BudgetExhausted };
std::string_view to_string(Termination t);

/// One row of the per-round trace.
struct RoundRecord {
    int round = 0;
    int tau = 0;            // evaluations after the round
    int s_size = 0;         // |S| after the round
    int p_size = 0;         // |P| after the round
    double omega_bar = 0.0; // max diameter over W; 0 when W is empty
    Action action = Action::Terminate;
    std::optional<NodeId> node;
    std::optional<int> node_evaluations; // evaluations at `node` before this round (evaluate only)
};

struct Evaluation {
    Point design;
    ObjVec observation;
    int round = 0;
    NodeId node;
};

/// Live node: a member of S or P together with its belief.
struct NodeRecord {
    Node node;
    NodeBelief belief;
    int evaluations = 0;
    std::optional<Point> parent_center;
    Prediction parent_prediction;
    int parent_stamp = -1;
};

struct DiscardedCell {
    Node node;
    int round = 0;
};

struct EngineState {
    explicit EngineState(GPPosterior p) : posterior(std::move(p)) {}

    int round = 1;
    std::set<NodeId> undecided; // S
    std::set<NodeId> decided;   // P
    std::map<NodeId, NodeRecord> nodes;
    std::vector<DiscardedCell> discarded;
    GPPosterior posterior;
    std::vector<Evaluation> evaluations;
    int degenerate_count = 0;
    bool truncated = false;
    std::optional<double> last_omega_bar;
    int max_depth = 0;

    int tau() const { return posterior.evaluations(); }
};

/// Called during modeling with each node's fresh Q_t and updated R_t.
struct EngineObserver {
    std::function<void(const Node&, const HyperRect& q, const HyperRect& r, const EngineState&)> on_modeled;
    std::function<void(const Node& parent, const std::vector<Node>& children, const HyperRect& r)> on_refined;
    std::function<void(const RoundRecord&, const EngineState&)> on_round;
};

struct RunResult {
    std::vector<Node> decided;           // P-hat
    std::vector<Prediction> predictions; // posterior at each decided node's center
    std::vector<Evaluation> evaluations;
    std::vector<RoundRecord> trace;
    int rounds = 0;
    Termination termination = Termination::Converged;
    int degenerate_count = 0;
    int max_depth = 0;
};

class Engine {
public:
    /// Throws ConfigError on invalid configuration.
    Engine(EngineConfig config, Oracle oracle);

    const EngineConfig& config() const { return config_; }
    const Schedules& schedules() const { return schedules_; }

    EngineState initial_state() const;

    /// Applies one round of the algorithm. Throws DomainError if S is empty
    /// or the state was truncated.
    RoundRecord step(EngineState& state) const;

    bool finished(const EngineState& state) const { return state.undecided.empty() || state.truncated; }

    RunResult run() const;
    /// Runs rounds from `state` until S is empty or the budget is hit.
    RunResult run_from(EngineState& state) const;

    void set_observer(EngineObserver observer) { observer_ = std::move(observer); }

private:
    void model(EngineState& state) const;

    EngineConfig config_;
    Oracle oracle_;
    Schedules schedules_;
    EngineObserver observer_;
};

RunResult run(const EngineConfig& config, Oracle oracle);

} // namespace apal
