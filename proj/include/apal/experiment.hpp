#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "apal/bench.hpp"
#include "apal/config.hpp"
#include "apal/engine.hpp"

namespace apal {

struct HvPoint {
    int evaluations = 0;
    double hypervolume = 0.0;
};

/// Everything produced by one seeded run of the full pipeline.
struct SeedOutcome {
    std::uint64_t seed = 0;
    RunResult result;
    MetricsReport metrics;
    ParetoFront truth;
    ParetoFront predicted;
    std::vector<HvPoint> hv_curve; // after each evaluation, over the live nodes
    double grid_spacing = 0.0;
};

/// Seed of the observation-noise stream for objective seed `seed`.
std::uint64_t noise_seed(std::uint64_t seed);

/// Samples the objective, runs the engine and scores the result.
SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed);

std::string trace_csv(const std::vector<RoundRecord>& trace);
std::string hv_curve_csv(const std::vector<HvPoint>& curve);
/// Objective columns f1..fm, one row per point.
std::string points_csv(const std::vector<ObjVec>& points);
/// Design columns x1..xD, one row per point.
std::string designs_csv(const std::vector<Point>& designs);

/// Reads a point list written by points_csv (a non-numeric first row is
/// treated as a header). Throws InputError on ragged rows or bad numbers.
std::vector<ObjVec> read_points_csv(const std::filesystem::path& path);

/// Deterministic summary document (no timings).
nlohmann::ordered_json summary_json(const ExperimentConfig& config, const std::vector<SeedOutcome>& outcomes);

/// Runs all seeds on a pool of `workers` threads and writes
/// out/summary.json, out/timing.json and out/seed-<n>/{trace,hv_curve,front,front_designs,truth}.csv.
void run_experiment(const ExperimentConfig& config, const std::filesystem::path& out, int workers, std::ostream& log);

} // namespace apal
