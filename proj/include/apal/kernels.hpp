#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "apal/partition.hpp"

namespace apal {

enum class KernelFamily { SquaredExponential, Matern52 };

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

/// Stationary scalar covariance k(x, y) = variance * g(|x - y| / lengthscale).
struct ScalarKernel {
    KernelFamily family = KernelFamily::SquaredExponential;
    double variance = 1.0;
    double lengthscale = 1.0;

    void validate() const;

    /// Covariance as a function of Euclidean distance r.
    double at_distance(double r) const;
    double operator()(const Point& x, const Point& y) const { return at_distance((x - y).norm()); }
};

inline double eval_scalar(const ScalarKernel& k, const Point& x, const Point& y) { return k(x, y); }

struct SmoothnessConstants {
    double c_k = 0.0;
    double alpha = 1.0;
};

/// Lipschitz-type constants of the GP-induced metric, l(x, y) <= C_K d(x, y)^alpha.
SmoothnessConstants smoothness_constants(const ScalarKernel& k);

/// sqrt(k(x,x) + k(y,y) - 2 k(x,y)) for a stationary kernel at distance r.
double induced_metric(const ScalarKernel& k, double r);

/// m-output covariance: either independent outputs or f = A g with g independent.
class MultiOutputKernel {
public:
    static MultiOutputKernel independent(std::vector<ScalarKernel> outputs);

    /// Rows of `mixing` must have unit Euclidean norm (checked to 1e-9).
    static MultiOutputKernel linear_mixing(std::vector<ScalarKernel> latents, Eigen::MatrixXd mixing);

    int outputs() const { return static_cast<int>(latents_.size()); }
    bool is_independent() const { return !mixing_.has_value(); }
    const std::vector<ScalarKernel>& latents() const { return latents_; }
    const std::optional<Eigen::MatrixXd>& mixing() const { return mixing_; }

    Eigen::MatrixXd operator()(const Point& x, const Point& y) const;

    /// Prior variances k^jj(x, x); constant for stationary latents.
    Eigen::VectorXd prior_variances() const;

    /// Componentwise max over outputs of the induced-metric constants.
    SmoothnessConstants smoothness() const;

private:
    std::vector<ScalarKernel> latents_;
    std::optional<Eigen::MatrixXd> mixing_;
};

inline Eigen::MatrixXd eval_matrix(const MultiOutputKernel& k, const Point& x, const Point& y) { return k(x, y); }

} // namespace apal
