#include "apal/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apal/errors.hpp"

namespace apal {

std::string_view to_string(KernelFamily family)
{
    switch (family) {
    case KernelFamily::SquaredExponential:
        return "squared_exponential";
    case KernelFamily::Matern52:
        return "matern52";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(std::string_view name)
{
    if (name == "squared_exponential" || name == "se" || name == "sqrexp")
        return KernelFamily::SquaredExponential;
    if (name == "matern52" || name == "matern-5/2")
        return KernelFamily::Matern52;
    throw ConfigError("unsupported kernel family '" + std::string(name) + "'");
}

void ScalarKernel::validate() const
{
    if (!(variance > 0.0) || !std::isfinite(variance))
        throw ConfigError("kernel: variance must be positive");
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale))
        throw ConfigError("kernel: lengthscale must be positive");
}

double ScalarKernel::at_distance(double r) const
{
    switch (family) {
    case KernelFamily::SquaredExponential: {
        double s = r / lengthscale;
        return variance * std::exp(-s * s);
    }
    case KernelFamily::Matern52: {
        double s = std::sqrt(5.0) * r / lengthscale;
        return variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    }
    throw ConfigError("kernel: unsupported family");
}

SmoothnessConstants smoothness_constants(const ScalarKernel& k)
{
    k.validate();
    switch (k.family) {
    case KernelFamily::SquaredExponential:
        return {std::sqrt(2.0 * k.variance) / k.lengthscale, 1.0};
    case KernelFamily::Matern52:
        // Second-order expansion of the induced metric at r = 0.
        return {std::sqrt(5.0 * k.variance / 3.0) / k.lengthscale, 1.0};
    }
    throw ConfigError("kernel: unsupported family");
}

double induced_metric(const ScalarKernel& k, double r)
{
    return std::sqrt(std::max(0.0, 2.0 * (k.at_distance(0.0) - k.at_distance(r))));
}

MultiOutputKernel MultiOutputKernel::independent(std::vector<ScalarKernel> outputs)
{
    if (outputs.empty())
        throw ConfigError("multi-output kernel needs at least one output");
    for (const auto& k : outputs)
        k.validate();
    MultiOutputKernel out;
    out.latents_ = std::move(outputs);
    return out;
}

MultiOutputKernel MultiOutputKernel::linear_mixing(std::vector<ScalarKernel> latents, Eigen::MatrixXd mixing)
{
    MultiOutputKernel out = independent(std::move(latents));
    const auto m = static_cast<Eigen::Index>(out.latents_.size());
    if (mixing.rows() != m || mixing.cols() != m)
        throw ConfigError("mixing matrix must be m x m");
    for (Eigen::Index r = 0; r < m; ++r) {
        if (std::abs(mixing.row(r).norm() - 1.0) > 1e-9)
            throw ConfigError("mixing matrix row " + std::to_string(r) + " must have unit norm");
    }
    out.mixing_ = std::move(mixing);
    return out;
}

Eigen::MatrixXd MultiOutputKernel::operator()(const Point& x, const Point& y) const
{
    const double r = (x - y).norm();
    Eigen::VectorXd diag(outputs());
    for (int j = 0; j < outputs(); ++j)
        diag[j] = latents_[j].at_distance(r);
    if (!mixing_)
        return diag.asDiagonal();
    const Eigen::MatrixXd& a = *mixing_;
    return a * diag.asDiagonal() * a.transpose();
}

Eigen::VectorXd MultiOutputKernel::prior_variances() const
{
    Eigen::VectorXd v(outputs());
    for (int j = 0; j < outputs(); ++j)
        v[j] = latents_[j].variance;
    if (!mixing_)
        return v;
    return (mixing_->array().square().matrix() * v);
}

SmoothnessConstants MultiOutputKernel::smoothness() const
{
    // With unit-norm mixing rows, l_j(x,y)^2 = sum_i a_ji^2 l_i(x,y)^2 <= max_i l_i(x,y)^2,
    // so the largest latent constant bounds every output.
    SmoothnessConstants s{0.0, 1.0};
    for (const auto& k : latents_) {
        auto c = smoothness_constants(k);
        s.c_k = std::max(s.c_k, c.c_k);
        s.alpha = std::min(s.alpha, c.alpha);
    }
    return s;
}

} // namespace apal
