#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "apal/kernels.hpp"

namespace apal {

struct Prediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
};

/// Lower Cholesky factor of a growing SPD matrix, extended one block at a time.
class IncrementalCholesky {
public:
    static constexpr double kJitterLadder[] = {0.0, 1e-10, 1e-8, 1e-6};

    Eigen::Index size() const { return n_; }

    /// Appends the block [[A, C], [C^T, B]] where A is the current matrix.
    /// Returns the factor of the Schur complement B - X^T X (jitter included),
    /// with X = L^{-1} C written to `x_out`. Throws NumericalError if the
    /// ladder is exhausted.
    Eigen::MatrixXd append(const Eigen::MatrixXd& cross, const Eigen::MatrixXd& block, Eigen::MatrixXd* x_out = nullptr);

    /// Solves L v = rhs in place (rhs has size() rows).
    template <typename Derived>
    void forward_solve(Eigen::MatrixBase<Derived>& rhs) const
    {
        if (n_ > 0)
            l_.topLeftCorner(n_, n_).triangularView<Eigen::Lower>().solveInPlace(rhs);
    }

    Eigen::MatrixXd dense_factor() const { return l_.topLeftCorner(n_, n_); }
    double last_jitter() const { return last_jitter_; }

private:
    void reserve(Eigen::Index n);

    Eigen::MatrixXd l_;
    Eigen::Index n_ = 0;
    double last_jitter_ = 0.0;
};

/// Exact m-output GP posterior with isotropic observation noise sigma^2 I_m.
class GPPosterior {
public:
    /// Chain-rule bookkeeping for one evaluation.
    struct Step {
        Point design;
        Eigen::VectorXd observation;
        Eigen::VectorXd prior_variance; // (sigma^j_{tau-1}(x_tau))^2 before the update
        double log_det_term = 0.0;      // log |I_m + sigma^-2 k_{tau-1}(x_tau, x_tau)|
        double jitter = 0.0;
    };

    GPPosterior(MultiOutputKernel kernel, double noise_variance);

    const MultiOutputKernel& kernel() const { return kernel_; }
    double noise_variance() const { return noise_variance_; }
    int outputs() const { return kernel_.outputs(); }
    int evaluations() const { return static_cast<int>(steps_.size()); }
    std::span<const Step> trajectory() const { return steps_; }

    /// Conditions on y observed at x. Throws InputError on non-finite y.
    void update(const Point& x, const Eigen::VectorXd& y);

    Prediction predict(const Point& x) const;

    /// Full m x m posterior covariance k_tau(x, x).
    Eigen::MatrixXd predict_covariance(const Point& x) const;

    /// Sum over steps of 1/2 log|I_m + sigma^-2 k_{tau-1}(x_tau, x_tau)|.
    double information_gain() const;

    /// (1/2m) sum_tau sum_j log(1 + sigma^-2 (sigma^j_{tau-1}(x_tau))^2).
    double information_gain_lower_bound() const;

private:
    Eigen::VectorXd latent_cross(int latent, const Point& x) const;
    Eigen::MatrixXd mixed_cross(const Point& x) const;

    MultiOutputKernel kernel_;
    double noise_variance_;
    std::vector<Step> steps_;
    // Independent structure: one factor per output over tau points.
    // Mixed structure: a single factor over m*tau stacked outputs.
    std::vector<IncrementalCholesky> factors_;
    std::vector<Eigen::VectorXd> whitened_; // L^{-1} y per factor
};

/// Value-returning form of GPPosterior::update.
GPPosterior update(GPPosterior p, const Point& x, const Eigen::VectorXd& y);

double information_gain(const GPPosterior& p);

} // namespace apal
