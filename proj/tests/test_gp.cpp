#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "apal/errors.hpp"
#include "apal/gp.hpp"

using namespace apal;

namespace {

Point scalar(double x)
{
    return Point::Constant(1, x);
}

struct DenseModel {
    Eigen::MatrixXd gram; // stacked (point-major, output-minor) prior covariance
    Eigen::VectorXd y;
};

DenseModel dense(const MultiOutputKernel& k, const std::vector<Point>& xs, const std::vector<Eigen::VectorXd>& ys)
{
    const int m = k.outputs();
    const auto n = static_cast<Eigen::Index>(xs.size());
    DenseModel d{Eigen::MatrixXd(n * m, n * m), Eigen::VectorXd(n * m)};
    for (Eigen::Index a = 0; a < n; ++a) {
        d.y.segment(a * m, m) = ys[a];
        for (Eigen::Index b = 0; b < n; ++b)
            d.gram.block(a * m, b * m, m, m) = k(xs[a], xs[b]);
    }
    return d;
}

// From-scratch posterior at x: a single dense LLT solve.
Prediction dense_predict(const MultiOutputKernel& k, double noise, const std::vector<Point>& xs, const std::vector<Eigen::VectorXd>& ys,
                         const Point& x, Eigen::MatrixXd* cov = nullptr)
{
    const int m = k.outputs();
    const auto n = static_cast<Eigen::Index>(xs.size());
    const DenseModel d = dense(k, xs, ys);
    Eigen::MatrixXd cross(n * m, m);
    for (Eigen::Index a = 0; a < n; ++a)
        cross.block(a * m, 0, m, m) = k(xs[a], x);
    Eigen::MatrixXd sys = d.gram + noise * Eigen::MatrixXd::Identity(n * m, n * m);
    Eigen::LLT<Eigen::MatrixXd> llt(sys);
    const Eigen::VectorXd mean = cross.transpose() * llt.solve(d.y);
    const Eigen::MatrixXd c = k(x, x) - cross.transpose() * llt.solve(cross);
    if (cov)
        *cov = c;
    return {mean, c.diagonal().cwiseMax(0.0).cwiseSqrt()};
}

MultiOutputKernel random_kernel(std::mt19937_64& rng, bool mixed)
{
    std::uniform_real_distribution<double> var(0.1, 1.0), len(0.05, 0.5);
    std::vector<ScalarKernel> lat;
    for (int j = 0; j < 2; ++j)
        lat.push_back({j ? KernelFamily::Matern52 : KernelFamily::SquaredExponential, var(rng), len(rng)});
    if (!mixed)
        return MultiOutputKernel::independent(lat);
    std::normal_distribution<double> g;
    Eigen::MatrixXd a(2, 2);
    for (int i = 0; i < 4; ++i)
        a(i / 2, i % 2) = g(rng);
    for (int r = 0; r < 2; ++r)
        a.row(r).normalize();
    return MultiOutputKernel::linear_mixing(lat, a);
}

} // namespace

TEST_CASE("prior prediction")
{
    const auto k = MultiOutputKernel::independent({{KernelFamily::SquaredExponential, 0.5, 0.1}, {KernelFamily::SquaredExponential, 0.1, 0.06}});
    const GPPosterior p(k, 1e-4);
    const Prediction pr = p.predict(scalar(0.3));
    CHECK(pr.mean.isZero());
    CHECK(pr.stddev[0] == doctest::Approx(std::sqrt(0.5)));
    CHECK(pr.stddev[1] == doctest::Approx(std::sqrt(0.1)));
    CHECK_THROWS_AS(p.information_gain(), DomainError);
    CHECK_THROWS_AS(p.information_gain_lower_bound(), DomainError);
}

TEST_CASE("scalar example: unit prior, unit noise")
{
    GPPosterior p(MultiOutputKernel::independent({{KernelFamily::SquaredExponential, 1.0, 0.5}}), 1.0);
    p.update(scalar(0.3), Eigen::VectorXd::Constant(1, 2.0));
    const Prediction pr = p.predict(scalar(0.3));
    CHECK(pr.mean[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(pr.stddev[0] * pr.stddev[0] == doctest::Approx(0.5).epsilon(1e-14));
    const double one = pr.stddev[0];
    p.update(scalar(0.3), Eigen::VectorXd::Constant(1, 2.0));
    CHECK(p.predict(scalar(0.3)).stddev[0] < one);
}

TEST_CASE("information gain examples")
{
    const ScalarKernel unit{KernelFamily::SquaredExponential, 1.0, 0.2};
    GPPosterior p(MultiOutputKernel::independent({unit, unit}), 1.0);
    p.update(scalar(0.1), Eigen::Vector2d(0.3, -0.3));
    CHECK(p.information_gain() == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    GPPosterior loud(MultiOutputKernel::independent({unit, unit}), 1e12);
    loud.update(scalar(0.1), Eigen::Vector2d(0.3, -0.3));
    CHECK(loud.information_gain() < 1e-11);
}

TEST_CASE("single observation closed form")
{
    const double v = 1.0, s2 = 0.01;
    const auto k = MultiOutputKernel::independent({{KernelFamily::SquaredExponential, v, 0.2}});
    GPPosterior p(k, s2);
    p.update(scalar(0.5), Eigen::VectorXd::Constant(1, 2.0));
    const Prediction pr = p.predict(scalar(0.5));
    CHECK(pr.mean[0] == doctest::Approx(v * 2.0 / (v + s2)).epsilon(1e-12));
    CHECK(pr.stddev[0] * pr.stddev[0] == doctest::Approx(v * s2 / (v + s2)).epsilon(1e-10));
    CHECK(p.information_gain() == doctest::Approx(0.5 * std::log(1 + v / s2)).epsilon(1e-12));

    // Far away the posterior falls back to the prior.
    const Prediction far = p.predict(scalar(50.0));
    CHECK(std::abs(far.mean[0]) < 1e-12);
    CHECK(far.stddev[0] == doctest::Approx(1.0));

    const GPPosterior q = update(GPPosterior(k, s2), scalar(0.5), Eigen::VectorXd::Constant(1, 2.0));
    CHECK(q.predict(scalar(0.4)).mean[0] == p.predict(scalar(0.4)).mean[0]);
}

TEST_CASE("repeated evaluations shrink the variance like noise / n")
{
    const double s2 = 1e-2;
    const auto k = MultiOutputKernel::independent({{KernelFamily::SquaredExponential, 1.0, 0.3}, {KernelFamily::Matern52, 0.4, 0.3}});
    GPPosterior p(k, s2);
    for (int n = 1; n <= 20; ++n) {
        p.update(scalar(0.2), Eigen::Vector2d(0.1 * n, -0.2));
        const Prediction pr = p.predict(scalar(0.2));
        for (int j = 0; j < 2; ++j)
            CHECK(pr.stddev[j] * pr.stddev[j] <= s2 / n * (1 + 1e-9));
    }
}

TEST_CASE("non-finite observations are rejected")
{
    GPPosterior p(MultiOutputKernel::independent({ScalarKernel{}}), 1e-4);
    CHECK_THROWS_AS(p.update(scalar(0.1), Eigen::VectorXd::Constant(1, std::nan(""))), InputError);
    CHECK(p.evaluations() == 0);
}

TEST_CASE("incremental predictions match a dense solve on random trajectories")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int traj = 0; traj < 50; ++traj) {
        const bool mixed = traj % 2 == 1;
        const auto k = random_kernel(rng, mixed);
        const double noise = traj % 3 == 0 ? 1e-2 : 1e-3;
        GPPosterior p(k, noise);
        std::vector<Point> xs;
        std::vector<Eigen::VectorXd> ys;
        const int n = 5 + traj % 20;
        for (int i = 0; i < n; ++i) {
            xs.push_back(scalar(u(rng)));
            ys.push_back(Eigen::Vector2d(g(rng), g(rng)));
            p.update(xs.back(), ys.back());
        }
        for (int probe = 0; probe < 5; ++probe) {
            const Point x = scalar(u(rng));
            Eigen::MatrixXd cov_ref;
            const Prediction ref = dense_predict(k, noise, xs, ys, x, &cov_ref);
            const Prediction got = p.predict(x);
            const double mean_err = (got.mean - ref.mean).norm() / std::max(1.0, ref.mean.norm());
            const double var_err = (got.stddev.array().square() - ref.stddev.array().square()).matrix().norm() /
                                   std::max(1e-12, ref.stddev.array().square().matrix().norm());
            const double cov_err = (p.predict_covariance(x) - cov_ref).norm() / std::max(1e-12, cov_ref.norm());
            worst = std::max({worst, mean_err, var_err, cov_err});
        }
    }
    MESSAGE("worst relative error " << worst);
    CHECK(worst <= 1e-8);
}

TEST_CASE("information gain chain rule equals the global log-det")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> g;
    for (int traj = 0; traj < 20; ++traj) {
        const auto k = random_kernel(rng, traj % 2 == 1);
        const double noise = 1e-2;
        GPPosterior p(k, noise);
        std::vector<Point> xs;
        std::vector<Eigen::VectorXd> ys;
        for (int i = 0; i < 15; ++i) {
            xs.push_back(scalar(u(rng)));
            ys.push_back(Eigen::Vector2d(g(rng), g(rng)));
            p.update(xs.back(), ys.back());
        }
        const DenseModel d = dense(k, xs, ys);
        const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(d.gram.rows(), d.gram.cols()) + d.gram / noise;
        const Eigen::LLT<Eigen::MatrixXd> llt(a);
        const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
        CHECK(std::abs(p.information_gain() - 0.5 * logdet) <= 1e-6);
        CHECK(information_gain(p) == p.information_gain());

        double chain = 0.0;
        for (const auto& s : p.trajectory())
            chain += 0.5 * s.log_det_term;
        CHECK(chain == doctest::Approx(p.information_gain()).epsilon(1e-12));
        CHECK(p.information_gain_lower_bound() <= p.information_gain() + 1e-12);
    }
}

TEST_CASE("jitter ladder rescues duplicate points without noise")
{
    IncrementalCholesky c;
    Eigen::MatrixXd one(1, 1);
    one << 1.0;
    c.append(Eigen::MatrixXd(0, 1), one);
    CHECK(c.last_jitter() == 0.0);
    Eigen::MatrixXd cross(1, 1);
    cross << 1.0;
    c.append(cross, one);
    CHECK(c.last_jitter() > 0.0);
    CHECK(c.size() == 2);

    IncrementalCholesky bad;
    Eigen::MatrixXd neg(1, 1);
    neg << -1.0;
    CHECK_THROWS_AS(bad.append(Eigen::MatrixXd(0, 1), neg), NumericalError);
}
