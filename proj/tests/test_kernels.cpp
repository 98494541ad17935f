#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "apal/errors.hpp"
#include "apal/kernels.hpp"

using namespace apal;

namespace {

Point scalar(double x)
{
    return Point::Constant(1, x);
}

} // namespace

TEST_CASE("scalar kernel values")
{
    const ScalarKernel se{KernelFamily::SquaredExponential, 0.5, 0.3};
    CHECK(se(scalar(0.2), scalar(0.2)) == 0.5);
    const ScalarKernel unit{KernelFamily::SquaredExponential, 1.0, 1.0};
    CHECK(unit(scalar(0.0), scalar(1.0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(unit(scalar(0.0), scalar(1.0)) == doctest::Approx(0.3679).epsilon(1e-4));
    const ScalarKernel mat{KernelFamily::Matern52, 1.0, 1.0};
    CHECK(mat(scalar(0.0), scalar(0.0)) == 1.0);
    CHECK(mat.at_distance(1e3) < 1e-300);
    const double s = std::sqrt(5.0) * 0.4 / 1.0;
    CHECK(mat.at_distance(0.4) == doctest::Approx((1 + s + s * s / 3) * std::exp(-s)));
}

TEST_CASE("scalar kernel is symmetric and bounded")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (KernelFamily fam : {KernelFamily::SquaredExponential, KernelFamily::Matern52}) {
        const ScalarKernel k{fam, 0.7, 0.4};
        for (int i = 0; i < 200; ++i) {
            Point x(3), y(3);
            for (int d = 0; d < 3; ++d) {
                x[d] = u(rng);
                y[d] = u(rng);
            }
            CHECK(k(x, y) == k(y, x));
            CHECK(k(x, y) <= k.variance);
        }
    }
}

TEST_CASE("family names round-trip")
{
    for (KernelFamily f : {KernelFamily::SquaredExponential, KernelFamily::Matern52})
        CHECK(kernel_family_from_string(to_string(f)) == f);
    CHECK(kernel_family_from_string("se") == KernelFamily::SquaredExponential);
    CHECK_THROWS_AS(kernel_family_from_string("rbf2"), ConfigError);
}

TEST_CASE("smoothness constants")
{
    auto se = smoothness_constants({KernelFamily::SquaredExponential, 0.5, 0.1});
    CHECK(se.c_k == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(se.alpha == 1.0);
    CHECK(smoothness_constants({KernelFamily::SquaredExponential, 0.5, 1.0}).c_k == doctest::Approx(1.0));
    auto mat = smoothness_constants({KernelFamily::Matern52, 0.6, 0.2});
    CHECK(mat.c_k == doctest::Approx(5.0).epsilon(1e-14));
    CHECK_THROWS_AS(smoothness_constants({KernelFamily::Matern52, -1.0, 0.2}), ConfigError);
}

TEST_CASE("induced metric is dominated by C_K d on a dense grid")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> var(0.05, 2.0), len(0.02, 1.5);
    for (KernelFamily fam : {KernelFamily::SquaredExponential, KernelFamily::Matern52}) {
        for (int trial = 0; trial < 10; ++trial) {
            const ScalarKernel k{fam, var(rng), len(rng)};
            const auto c = smoothness_constants(k);
            for (int i = 0; i <= 10000; ++i) {
                const double r = i / 10000.0;
                CHECK_MESSAGE(induced_metric(k, r) <= c.c_k * std::pow(r, c.alpha) + 1e-9, "r=" << r);
            }
        }
    }
}

TEST_CASE("multi-output matrices")
{
    const ScalarKernel a{KernelFamily::SquaredExponential, 0.5, 0.1};
    const ScalarKernel b{KernelFamily::SquaredExponential, 0.1, 0.06};
    const auto ind = MultiOutputKernel::independent({a, b});
    Eigen::MatrixXd k = ind(scalar(0.3), scalar(0.3));
    CHECK(k(0, 0) == 0.5);
    CHECK(k(1, 1) == 0.1);
    CHECK(k(0, 1) == 0.0);
    CHECK(ind.is_independent());

    const auto ident = MultiOutputKernel::linear_mixing({a, b}, Eigen::MatrixXd::Identity(2, 2));
    CHECK(ident(scalar(0.1), scalar(0.25)).isApprox(ind(scalar(0.1), scalar(0.25))));

    Eigen::MatrixXd mix(2, 2);
    mix << 1.0, 0.0, std::sqrt(0.5), std::sqrt(0.5);
    const ScalarKernel one{KernelFamily::SquaredExponential, 1.0, 0.2};
    const auto mixed = MultiOutputKernel::linear_mixing({one, one}, mix);
    Eigen::MatrixXd expect(2, 2);
    expect << 1.0, std::sqrt(0.5), std::sqrt(0.5), 1.0;
    CHECK(mixed(scalar(0.4), scalar(0.4)).isApprox(expect, 1e-14));
    CHECK(mixed.prior_variances().isApprox(Eigen::Vector2d(1.0, 1.0)));

    Eigen::MatrixXd bad(2, 2);
    bad << 1.0, 1.0, 0.0, 1.0;
    CHECK_THROWS_AS(MultiOutputKernel::linear_mixing({one, one}, bad), ConfigError);
}

TEST_CASE("multi-output matrices are symmetric PSD")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd mix = Eigen::MatrixXd::Random(3, 3);
    for (int r = 0; r < 3; ++r)
        mix.row(r).normalize();
    const auto k = MultiOutputKernel::linear_mixing(
        {{KernelFamily::SquaredExponential, 0.5, 0.2}, {KernelFamily::Matern52, 1.0, 0.3}, {KernelFamily::SquaredExponential, 0.2, 0.1}}, mix);
    for (int i = 0; i < 100; ++i) {
        const Point x = scalar(u(rng)), y = scalar(u(rng));
        const Eigen::MatrixXd kxy = k(x, y);
        CHECK(kxy.isApprox(kxy.transpose(), 1e-14));
        // Joint covariance of (f(x), f(y)) must be PSD.
        Eigen::MatrixXd joint(6, 6);
        joint << k(x, x), kxy, kxy.transpose(), k(y, y);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(joint);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es1(k(x, x));
        CHECK(es1.eigenvalues().minCoeff() >= -1e-10);
    }
    CHECK(k.smoothness().c_k == doctest::Approx(std::sqrt(2.0 * 0.2) / 0.1));
}
