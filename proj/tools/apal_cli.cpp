// Batch runner: apal run | metrics | schedule.

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "apal/bench.hpp"
#include "apal/config.hpp"
#include "apal/errors.hpp"
#include "apal/experiment.hpp"
#include "apal/pareto.hpp"
#include "apal/schedules.hpp"

using namespace apal;

namespace {

constexpr int kUsageError = 2;

// "0,3,5" or "0-9" or a mix of both.
std::vector<std::uint64_t> parse_seed_list(const std::string& text)
{
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        const auto dash = item.find('-');
        std::size_t used = 0;
        if (dash == std::string::npos) {
            seeds.push_back(std::stoull(item, &used));
            if (used != item.size())
                throw InputError("bad seed \"" + item + "\"");
            continue;
        }
        const std::uint64_t lo = std::stoull(item.substr(0, dash));
        const std::uint64_t hi = std::stoull(item.substr(dash + 1));
        if (hi < lo || hi - lo > 100000)
            throw InputError("bad seed range \"" + item + "\"");
        for (std::uint64_t s = lo; s <= hi; ++s)
            seeds.push_back(s);
    }
    if (seeds.empty())
        throw InputError("empty seed list");
    return seeds;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

// The paper's first simulation reports h_max = 24 for this exact setup.
bool is_simulation_one(const EngineConfig& e)
{
    const auto& l = e.kernel.latents();
    return e.kernel.is_independent() && l.size() == 2 && e.space.dim() == 1 && l[0].family == KernelFamily::SquaredExponential &&
           l[1].family == KernelFamily::SquaredExponential && close(l[0].variance, 0.5) && close(l[1].variance, 0.1) &&
           close(l[0].lengthscale, 0.1) && close(l[1].lengthscale, 0.06) && close(e.eps.maxCoeff(), 0.05) && close(e.eps.minCoeff(), 0.05) &&
           close(e.delta, 0.05) && e.partition.children == 2 && close(e.partition.rho, 0.5) && close(e.partition.v1, 1.0);
}

int cmd_run(const std::string& config_path, const std::string& seeds, const std::string& out, int workers, std::optional<int> budget)
{
    ExperimentConfig cfg = load_config(config_path);
    if (!seeds.empty())
        cfg.seeds = parse_seed_list(seeds);
    if (!out.empty())
        cfg.output_dir = out;
    if (budget) {
        if (*budget < 0)
            throw ConfigError("--budget must be >= 0");
        cfg.engine.budget = *budget;
    }
    run_experiment(cfg, cfg.output_dir, workers, std::cerr);
    std::cout << (std::filesystem::path(cfg.output_dir) / "summary.json").string() << '\n';
    return 0;
}

int cmd_metrics(const std::string& predicted_path, const std::string& truth_path, const std::vector<double>& eps_in,
                const std::vector<double>& ref_in)
{
    const auto predicted_pts = read_points_csv(predicted_path);
    const auto truth_pts = read_points_csv(truth_path);
    if (predicted_pts.empty())
        throw InputError("predicted file has no points");
    if (truth_pts.empty())
        throw InputError("truth file has no points");
    const auto m = truth_pts.front().size();
    if (predicted_pts.front().size() != m)
        throw InputError("predicted and truth files have different column counts");
    ObjVec eps(m);
    if (eps_in.size() == 1)
        eps.setConstant(eps_in.front());
    else if (static_cast<Eigen::Index>(eps_in.size()) == m)
        eps = Eigen::Map<const Eigen::VectorXd>(eps_in.data(), m);
    else
        throw InputError("--eps needs 1 or " + std::to_string(m) + " values");
    if ((eps.array() < 0.0).any())
        throw InputError("--eps must be non-negative");

    ObjVec ref(m);
    if (!ref_in.empty()) {
        if (static_cast<Eigen::Index>(ref_in.size()) != m)
            throw InputError("--ref needs " + std::to_string(m) + " values");
        ref = Eigen::Map<const Eigen::VectorXd>(ref_in.data(), m);
    }
    else {
        ObjVec lo = truth_pts.front(), hi = truth_pts.front();
        for (const auto* set : {&truth_pts, &predicted_pts}) {
            for (const auto& p : *set) {
                lo = lo.cwiseMin(p);
                hi = hi.cwiseMax(p);
            }
        }
        ref = lo - 0.1 * (hi - lo);
    }

    const ParetoFront predicted = nondominated_front(predicted_pts);
    const ParetoFront truth = nondominated_front(truth_pts);
    const MetricsReport r = score(predicted, truth, eps, ref);
    nlohmann::ordered_json doc{{"hypervolume", r.hypervolume},
                               {"eps_accuracy", r.eps_accuracy},
                               {"eps_coverage", r.eps_coverage},
                               {"avg_mse", r.avg_mse},
                               {"reference_point", std::vector<double>(ref.data(), ref.data() + m)},
                               {"eps", std::vector<double>(eps.data(), eps.data() + m)},
                               {"predicted_points", predicted.points.size()},
                               {"truth_points", truth.points.size()}};
    std::cout << doc.dump(2) << '\n';
    return 0;
}

int cmd_schedule(const std::string& config_path)
{
    const ExperimentConfig cfg = load_config(config_path);
    const Schedules s(cfg.engine.schedule_params());
    std::cout << std::setprecision(10);
    std::cout << "h_max            " << s.h_max();
    if (is_simulation_one(cfg.engine))
        std::cout << "    (paper, same setup: 24)";
    std::cout << '\n';
    std::cout << "depth_cap        " << s.depth_cap() << '\n';
    std::cout << "beta_depth       " << s.beta_depth() << '\n';
    std::cout << "eta1             " << s.eta1() << "\neta2             " << s.eta2() << '\n';
    std::cout << "C2               " << s.c2() << "\nC3               " << s.c3() << '\n';
    std::cout << "C_K              " << s.params().smoothness.c_k << "\nalpha            " << s.params().smoothness.alpha << "\n\n";
    std::cout << "tau    beta_tau\n";
    for (int tau : {0, 1, 10, 100})
        std::cout << std::left << std::setw(7) << tau << s.beta(tau) << '\n';
    std::cout << "\nh      V_h              V_h(override)    q_h(tau=0)\n";
    for (int h = 0; h <= s.h_max(); ++h) {
        std::cout << std::left << std::setw(7) << h << std::setw(17) << s.v_h_raw(h) << std::setw(17) << s.v_h(h)
                  << s.evaluation_cap(h, 0, cfg.engine.noise_variance) << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Adaptive epsilon-PAL batch runner"};
    app.require_subcommand(1);

    std::string config_path, seeds, out, predicted, truth;
    int workers = 1;
    std::optional<int> budget;
    std::vector<double> eps, ref;

    auto* run = app.add_subcommand("run", "Sample objectives, run the engine and write results");
    run->add_option("--config", config_path, "Experiment config (JSON)")->required();
    run->add_option("--seeds", seeds, "Seed list override, e.g. 0-9 or 1,4,7");
    run->add_option("--out", out, "Output directory override");
    run->add_option("--workers", workers, "Seeds run concurrently")->check(CLI::Range(1, 256));
    run->add_option("--budget", budget, "Evaluation cap override");

    auto* metrics = app.add_subcommand("metrics", "Score a predicted front against a true front");
    metrics->add_option("--predicted", predicted, "CSV of predicted points")->required();
    metrics->add_option("--truth", truth, "CSV of true front points")->required();
    metrics->add_option("--eps", eps, "Accuracy per objective (one value broadcasts)")->required();
    metrics->add_option("--ref", ref, "Hypervolume reference point");

    auto* schedule = app.add_subcommand("schedule", "Print beta, V_h and h_max for a config");
    schedule->add_option("--config", config_path, "Experiment config (JSON)")->required();

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kUsageError;
    }

    try {
        if (*run)
            return cmd_run(config_path, seeds, out, workers, budget);
        if (*metrics)
            return cmd_metrics(predicted, truth, eps, ref);
        return cmd_schedule(config_path);
    }
    catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const DomainError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const std::out_of_range& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return kUsageError;
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
