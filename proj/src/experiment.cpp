#include "apal/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "apal/errors.hpp"
#include "apal/schedules.hpp"

namespace apal {

std::uint64_t noise_seed(std::uint64_t seed)
{
    // splitmix64 finalizer
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed)
{
    SeedOutcome out;
    out.seed = seed;
    const auto& ec = config.engine;
    const SampledObjective obj = sample_gp_function(ec.kernel, ec.space, config.resolved_grid_size(), seed);
    out.grid_spacing = obj.spacing();
    out.truth = true_pareto_front(obj);
    const ObjVec ref = reference_point(obj);

    Engine engine(ec, noisy_oracle([&obj](const Point& x) { return obj(x); }, ec.noise_variance, noise_seed(seed)));
    EngineObserver observer;
    observer.on_round = [&](const RoundRecord& r, const EngineState& state) {
        if (r.action != Action::Evaluate)
            return;
        std::vector<Node> live;
        live.reserve(state.nodes.size());
        for (const auto& [id, rec] : state.nodes)
            live.push_back(rec.node);
        const ParetoFront f = predicted_front(obj, live);
        out.hv_curve.push_back({r.tau, hypervolume(f.points, ref)});
    };
    engine.set_observer(std::move(observer));
    out.result = engine.run();

    out.predicted = predicted_front(obj, out.result.decided);
    out.metrics = score(out.predicted, out.truth, ec.eps, ref);
    out.metrics.evaluations = static_cast<int>(out.result.evaluations.size());
    return out;
}

namespace {

std::string fmt(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write " + path.string());
    f << text;
}

std::vector<double> as_vector(const Eigen::VectorXd& v)
{
    return {v.data(), v.data() + v.size()};
}

} // namespace

std::string trace_csv(const std::vector<RoundRecord>& trace)
{
    std::string s = "round,tau,S_size,P_size,omega_bar,action,node_h,node_i\n";
    for (const auto& r : trace) {
        s += std::to_string(r.round) + ',' + std::to_string(r.tau) + ',' + std::to_string(r.s_size) + ',' + std::to_string(r.p_size) + ',' +
             fmt(r.omega_bar) + ',' + std::string(to_string(r.action)) + ',';
        if (r.node)
            s += std::to_string(r.node->depth) + ',' + std::to_string(r.node->index);
        else
            s += ',';
        s += '\n';
    }
    return s;
}

std::string hv_curve_csv(const std::vector<HvPoint>& curve)
{
    std::string s = "evaluations,hypervolume\n";
    for (const auto& p : curve)
        s += std::to_string(p.evaluations) + ',' + fmt(p.hypervolume) + '\n';
    return s;
}

namespace {

std::string matrix_csv(const std::vector<Eigen::VectorXd>& rows, char prefix, Eigen::Index cols)
{
    std::string s;
    for (Eigen::Index j = 0; j < cols; ++j)
        s += (j ? "," : "") + std::string(1, prefix) + std::to_string(j + 1);
    s += '\n';
    for (const auto& r : rows) {
        for (Eigen::Index j = 0; j < r.size(); ++j)
            s += (j ? "," : "") + fmt(r[j]);
        s += '\n';
    }
    return s;
}

} // namespace

std::string points_csv(const std::vector<ObjVec>& points)
{
    return matrix_csv(points, 'f', points.empty() ? 0 : points.front().size());
}

std::string designs_csv(const std::vector<Point>& designs)
{
    return matrix_csv(designs, 'x', designs.empty() ? 0 : designs.front().size());
}

std::vector<ObjVec> read_points_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw InputError("cannot read " + path.string());
    std::vector<ObjVec> out;
    std::string line;
    int lineno = 0;
    Eigen::Index cols = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        bool numeric = true;
        while (std::getline(ss, cell, ',')) {
            std::size_t used = 0;
            try {
                row.push_back(std::stod(cell, &used));
            }
            catch (const std::exception&) {
                numeric = false;
                break;
            }
            if (used != cell.size()) {
                numeric = false;
                break;
            }
        }
        if (!numeric) {
            if (out.empty() && cols < 0) {
                cols = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
                continue;
            }
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": non-numeric value");
        }
        if (cols < 0)
            cols = static_cast<Eigen::Index>(row.size());
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(cols) + " columns");
        out.push_back(Eigen::Map<const Eigen::VectorXd>(row.data(), static_cast<Eigen::Index>(row.size())));
    }
    return out;
}

nlohmann::ordered_json summary_json(const ExperimentConfig& config, const std::vector<SeedOutcome>& outcomes)
{
    using oj = nlohmann::ordered_json;
    const Schedules sched(config.engine.schedule_params());
    oj runs = oj::array();
    int successes = 0;
    double mean_evals = 0.0;
    for (const auto& o : outcomes) {
        const auto& m = o.metrics;
        const bool ok = m.eps_accuracy == 1.0 && m.eps_coverage == 1.0;
        successes += ok ? 1 : 0;
        mean_evals += m.evaluations;
        runs.push_back({{"seed", o.seed},
                        {"evaluations", m.evaluations},
                        {"rounds", o.result.rounds},
                        {"termination", std::string(to_string(o.result.termination))},
                        {"truncated", o.result.termination == Termination::BudgetExhausted},
                        {"decided_nodes", o.result.decided.size()},
                        {"max_depth", o.result.max_depth},
                        {"degenerate_intersections", o.result.degenerate_count},
                        {"true_front_size", o.truth.points.size()},
                        {"predicted_front_size", o.predicted.points.size()},
                        {"grid_spacing", o.grid_spacing},
                        {"metrics",
                         {{"hypervolume", m.hypervolume},
                          {"eps_accuracy", m.eps_accuracy},
                          {"eps_coverage", m.eps_coverage},
                          {"avg_mse", m.avg_mse},
                          {"reference_point", as_vector(m.reference)}}}});
    }
    if (!outcomes.empty())
        mean_evals /= static_cast<double>(outcomes.size());
    return oj{{"schema_version", kSchemaVersion},
              {"config", to_json(config)},
              {"schedules",
               {{"h_max", sched.h_max()},
                {"depth_cap", sched.depth_cap()},
                {"beta_depth", sched.beta_depth()},
                {"beta_0", sched.beta(0)},
                {"eta1", sched.eta1()},
                {"eta2", sched.eta2()}}},
              {"predicted_front_source", "noise-free objective at the grid points nearest the decided node centers"},
              {"hypervolume_reference", "grid minimum minus 0.1 times the grid range, per objective"},
              {"runs", runs},
              {"aggregate", {{"runs", outcomes.size()}, {"fully_accurate_and_covering", successes}, {"mean_evaluations", mean_evals}}}};
}

void run_experiment(const ExperimentConfig& config, const std::filesystem::path& out, int workers, std::ostream& log)
{
    namespace fs = std::filesystem;
    fs::create_directories(out);
    const std::size_t n = config.seeds.size();
    std::vector<SeedOutcome> outcomes(n);
    std::vector<double> wall(n, 0.0);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                const auto t0 = std::chrono::steady_clock::now();
                outcomes[i] = run_seed(config, config.seeds[i]);
                wall[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                const auto& o = outcomes[i];
                const fs::path dir = out / ("seed-" + std::to_string(o.seed));
                fs::create_directories(dir);
                write_file(dir / "trace.csv", trace_csv(o.result.trace));
                write_file(dir / "hv_curve.csv", hv_curve_csv(o.hv_curve));
                write_file(dir / "front.csv", points_csv(o.predicted.points));
                write_file(dir / "front_designs.csv", designs_csv(o.predicted.designs));
                write_file(dir / "truth.csv", points_csv(o.truth.points));
                std::lock_guard lock(log_mutex);
                log << "seed " << o.seed << ": " << o.metrics.evaluations << " evaluations, eps-accuracy " << o.metrics.eps_accuracy
                    << ", eps-coverage " << o.metrics.eps_coverage << ", " << to_string(o.result.termination) << " (" << std::fixed
                    << std::setprecision(2) << wall[i] << " s)" << std::defaultfloat << '\n';
            }
            catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    for (const auto& e : errors) {
        if (e)
            std::rethrow_exception(e);
    }

    write_file(out / "summary.json", summary_json(config, outcomes).dump(2) + '\n');
    nlohmann::ordered_json timing = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < n; ++i)
        timing.push_back({{"seed", config.seeds[i]}, {"wall_time_seconds", wall[i]}});
    write_file(out / "timing.json", timing.dump(2) + '\n');
}

} // namespace apal
