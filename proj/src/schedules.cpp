#include "apal/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "apal/errors.hpp"

namespace apal {
namespace {

// Both series have terms 2^-(n-1) g(n) with g(n) <= n; the tail after n
// terms is below 2^-(n-1) (n + 2), so 64 terms put it under 1e-15.
template <typename F>
double geometric_weighted_sum(F&& g)
{
    double sum = 0.0;
    for (int n = 1; n <= 80; ++n)
        sum += std::ldexp(1.0, -(n - 1)) * g(static_cast<double>(n));
    return sum;
}

} // namespace

double series_eta1()
{
    return geometric_weighted_sum([](double n) { return std::sqrt(std::log(n)); });
}

double series_eta2()
{
    return geometric_weighted_sum([](double n) { return std::sqrt(n); });
}

Schedules::Schedules(ScheduleParams params) : params_(std::move(params))
{
    const auto& p = params_;
    if (!(p.delta > 0.0 && p.delta < 1.0))
        throw ConfigError("schedules: delta must lie in (0,1)");
    if (p.eps.size() == 0 || !(p.eps.minCoeff() > 0.0) || !p.eps.allFinite())
        throw ConfigError("schedules: every eps_j must be positive");
    if (p.outputs < 1 || p.eps.size() != p.outputs)
        throw ConfigError("schedules: eps must have one entry per objective");
    if (p.children < 2)
        throw ConfigError("schedules: N must be >= 2");
    if (!(p.smoothness.c_k > 0.0) || !(p.smoothness.alpha > 0.0 && p.smoothness.alpha <= 1.0))
        throw ConfigError("schedules: need C_K > 0 and alpha in (0,1]");
    if (!(p.metric_dimension >= 0.0))
        throw ConfigError("schedules: metric dimension must be >= 0");
    if (!(p.v1 > 0.0) || !(p.rho > 0.0 && p.rho < 1.0))
        throw ConfigError("schedules: need v1 > 0 and rho in (0,1)");
    if (!(p.c1 > 0.0) || !(p.q > 0.0))
        throw ConfigError("schedules: C1 and Q must be positive");
    if (p.h_max_override && *p.h_max_override < 0)
        throw ConfigError("schedules: h_max_override must be >= 0");
    if (p.beta_h_max && *p.beta_h_max < 0)
        throw ConfigError("schedules: beta_h_max must be >= 0");

    eta1_ = series_eta1();
    eta2_ = series_eta2();
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    c2_ = 2.0 * std::log(2.0 * p.c1 * p.c1 * pi2 / 6.0);
    c3_ = eta1_ + eta2_ * std::sqrt(2.0 * p.metric_dimension * p.smoothness.alpha * std::log(2.0));

    const double eps = p.eps.minCoeff();
    h_max_ = -1;
    for (int h = 0; h <= kMaxDepthSearch; ++h) {
        const double v = v_h_raw(h);
        if (16.0 * p.outputs * v * v <= eps * eps) {
            h_max_ = h;
            break;
        }
    }
    if (h_max_ < 0)
        throw ConfigError("schedules: 16 m V_h^2 <= eps^2 unreachable for h <= " + std::to_string(kMaxDepthSearch));
}

int Schedules::depth_cap() const
{
    return params_.h_max_override ? std::min(h_max_, *params_.h_max_override) : h_max_;
}

double Schedules::beta(int tau) const
{
    const auto& p = params_;
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    const double t1 = static_cast<double>(tau) + 1.0;
    // log N^(h+1) is expanded to keep deep trees from overflowing.
    return 2.0 * (std::log(2.0 * p.outputs * pi2 * t1 * t1 / (3.0 * p.delta)) + (beta_depth() + 1) * std::log(static_cast<double>(p.children)));
}

double Schedules::v_h_raw(int h) const
{
    const auto& p = params_;
    constexpr double pi2 = std::numbers::pi * std::numbers::pi;
    const double scale = p.smoothness.c_k * std::pow(p.v1 * std::pow(p.rho, h), p.smoothness.alpha);
    // The union-bound term is undefined at h = 0; use h = 1 there.
    const double hl = std::max(h, 1);
    const double radicand = c2_ + 2.0 * std::log(2.0 * hl * hl * pi2 * p.outputs / (6.0 * p.delta)) + h * std::log(static_cast<double>(p.children)) +
                            std::max(0.0, -4.0 * (p.metric_dimension / p.smoothness.alpha) * std::log(scale));
    return 4.0 * scale * (std::sqrt(std::max(0.0, radicand)) + c3_);
}

double Schedules::v_h(int h) const
{
    if (params_.h_max_override && h >= *params_.h_max_override)
        return 0.0;
    return v_h_raw(h);
}

double Schedules::evaluation_cap(int h, int tau, double noise_variance) const
{
    const double v = v_h(h);
    if (v <= 0.0)
        return std::numeric_limits<double>::infinity();
    return std::ceil(noise_variance * beta(tau) / (v * v));
}

double Schedules::v_ratio_bound() const
{
    return std::pow(params_.rho, -params_.smoothness.alpha);
}

} // namespace apal
