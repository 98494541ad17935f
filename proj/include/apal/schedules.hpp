#pragma once

#include <optional>

#include "apal/kernels.hpp"
#include "apal/pareto.hpp"

namespace apal {

/// Inputs of the confidence schedules. Everything not listed here is derived.
struct ScheduleParams {
    double delta = 0.05;
    ObjVec eps;                      // per-objective accuracy, all > 0
    int outputs = 2;                 // m
    int children = 2;                // N
    SmoothnessConstants smoothness;  // C_K, alpha
    double metric_dimension = 1.0;   // D1
    double v1 = 1.0;
    double rho = 0.5;
    double c1 = 1.0;                 // covering constant of the induced metric
    double q = 1.0;                  // covering constant of the design space
    std::optional<int> h_max_override;
    std::optional<int> beta_h_max;   // depth used inside beta; defaults to the computed h_max
};

/// Confidence multipliers beta_tau, cell-variation bounds V_h and the depth cap.
class Schedules {
public:
    static constexpr int kMaxDepthSearch = 64;

    /// Throws ConfigError on invalid parameters or if no h <= 64 satisfies the depth condition.
    explicit Schedules(ScheduleParams params);

    const ScheduleParams& params() const { return params_; }

    double eta1() const { return eta1_; }
    double eta2() const { return eta2_; }
    double c2() const { return c2_; }
    double c3() const { return c3_; }

    /// Smallest h with 16 m V_h^2 <= (min_j eps_j)^2, from the unclipped V_h.
    int h_max() const { return h_max_; }

    /// Deepest level the engine may refine to: min(h_max, override).
    int depth_cap() const;

    int beta_depth() const { return params_.beta_h_max.value_or(h_max_); }

    /// 2 log(2 m pi^2 N^(h+1) (tau+1)^2 / (3 delta)) with h = beta_depth().
    double beta(int tau) const;

    /// Cell-variation bound; zero at depths >= h_max_override when set.
    double v_h(int h) const;

    /// V_h ignoring the override.
    double v_h_raw(int h) const;

    /// Maximum number of evaluations of a depth-h node before it must be refined.
    double evaluation_cap(int h, int tau, double noise_variance) const;

    /// N_1 = rho^-alpha.
    double v_ratio_bound() const;

private:
    ScheduleParams params_;
    double eta1_ = 0.0;
    double eta2_ = 0.0;
    double c2_ = 0.0;
    double c3_ = 0.0;
    int h_max_ = 0;
};

/// sum_{n>=1} 2^-(n-1) sqrt(log n), truncated below 1e-12 absolute error.
double series_eta1();
/// sum_{n>=1} 2^-(n-1) sqrt(n), truncated below 1e-12 absolute error.
double series_eta2();

inline double beta(int tau, const Schedules& s) { return s.beta(tau); }
inline double v_h(int h, const Schedules& s) { return s.v_h(h); }
inline int compute_h_max(const Schedules& s) { return s.h_max(); }

} // namespace apal
