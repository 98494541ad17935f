#include "apal/gp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

#include "apal/errors.hpp"

namespace apal {

void IncrementalCholesky::reserve(Eigen::Index n)
{
    if (n <= l_.rows())
        return;
    Eigen::Index cap = std::max<Eigen::Index>(n, std::max<Eigen::Index>(16, 2 * l_.rows()));
    Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(cap, cap);
    grown.topLeftCorner(n_, n_) = l_.topLeftCorner(n_, n_);
    l_.swap(grown);
}

Eigen::MatrixXd IncrementalCholesky::append(const Eigen::MatrixXd& cross, const Eigen::MatrixXd& block, Eigen::MatrixXd* x_out)
{
    const Eigen::Index b = block.rows();
    Eigen::MatrixXd x = cross;
    forward_solve(x);
    Eigen::MatrixXd schur = block;
    if (n_ > 0)
        schur.noalias() -= x.transpose() * x;

    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    bool ok = false;
    for (double j : kJitterLadder) {
        jitter = j;
        Eigen::MatrixXd trial = schur;
        trial.diagonal().array() += j;
        llt.compute(trial);
        if (llt.info() == Eigen::Success && (llt.matrixL().toDenseMatrix().diagonal().array() > 0.0).all()) {
            ok = true;
            break;
        }
    }
    if (!ok)
        throw NumericalError("Cholesky block append failed", jitter);

    reserve(n_ + b);
    if (n_ > 0)
        l_.block(n_, 0, b, n_) = x.transpose();
    Eigen::MatrixXd lb = llt.matrixL();
    l_.block(n_, n_, b, b) = lb;
    n_ += b;
    last_jitter_ = jitter;
    if (x_out)
        *x_out = std::move(x);
    return lb;
}

GPPosterior::GPPosterior(MultiOutputKernel kernel, double noise_variance)
    : kernel_(std::move(kernel)), noise_variance_(noise_variance)
{
    if (!(noise_variance_ > 0.0) || !std::isfinite(noise_variance_))
        throw ConfigError("GP: noise variance must be positive");
    const int nf = kernel_.is_independent() ? kernel_.outputs() : 1;
    factors_.resize(nf);
    whitened_.assign(nf, Eigen::VectorXd());
}

Eigen::VectorXd GPPosterior::latent_cross(int latent, const Point& x) const
{
    const auto& k = kernel_.latents()[latent];
    Eigen::VectorXd v(steps_.size());
    for (std::size_t s = 0; s < steps_.size(); ++s)
        v[static_cast<Eigen::Index>(s)] = k(x, steps_[s].design);
    return v;
}

void GPPosterior::update(const Point& x, const Eigen::VectorXd& y)
{
    const int m = outputs();
    if (y.size() != m)
        throw InputError("GP update: observation has wrong dimension");
    if (!y.allFinite())
        throw InputError("GP update: observation is not finite");

    Step step;
    step.design = x;
    step.observation = y;
    step.prior_variance.resize(m);
    const double s2 = noise_variance_;

    if (kernel_.is_independent()) {
        double log_det = 0.0;
        double jitter = 0.0;
        for (int j = 0; j < m; ++j) {
            Eigen::MatrixXd cross = latent_cross(j, x);
            Eigen::MatrixXd block(1, 1);
            block(0, 0) = kernel_.latents()[j].variance + s2;
            Eigen::MatrixXd solved;
            Eigen::MatrixXd lb = factors_[j].append(cross, block, &solved);
            const double pivot = lb(0, 0);
            step.prior_variance[j] = std::max(0.0, pivot * pivot - s2 - factors_[j].last_jitter());
            log_det += 2.0 * std::log(pivot) - std::log(s2);
            jitter = std::max(jitter, factors_[j].last_jitter());

            auto& z = whitened_[j];
            double zn = y[j];
            if (z.size() > 0)
                zn -= solved.col(0).dot(z);
            z.conservativeResize(z.size() + 1);
            z[z.size() - 1] = zn / pivot;
        }
        step.log_det_term = log_det;
        step.jitter = jitter;
    }
    else {
        Eigen::MatrixXd cross = mixed_cross(x);
        Eigen::MatrixXd block = kernel_(x, x);
        block.diagonal().array() += s2;
        Eigen::MatrixXd solved;
        Eigen::MatrixXd lb = factors_[0].append(cross, block, &solved);
        Eigen::MatrixXd schur = lb * lb.transpose();
        const double jitter = factors_[0].last_jitter();
        step.prior_variance = (schur.diagonal().array() - s2 - jitter).max(0.0);
        step.log_det_term = 2.0 * lb.diagonal().array().log().sum() - m * std::log(s2);
        step.jitter = jitter;

        auto& z = whitened_[0];
        Eigen::VectorXd rhs = y;
        if (z.size() > 0)
            rhs.noalias() -= solved.transpose() * z;
        Eigen::VectorXd zn = lb.triangularView<Eigen::Lower>().solve(rhs);
        z.conservativeResize(z.size() + m);
        z.tail(m) = zn;
    }
    steps_.push_back(std::move(step));
}

Prediction GPPosterior::predict(const Point& x) const
{
    const int m = outputs();
    Prediction p;
    p.mean = Eigen::VectorXd::Zero(m);
    p.stddev.resize(m);
    if (kernel_.is_independent()) {
        for (int j = 0; j < m; ++j) {
            double var = kernel_.latents()[j].variance;
            if (!steps_.empty()) {
                Eigen::VectorXd v = latent_cross(j, x);
                factors_[j].forward_solve(v);
                p.mean[j] = v.dot(whitened_[j]);
                var -= v.squaredNorm();
            }
            p.stddev[j] = std::sqrt(std::max(0.0, var));
        }
        return p;
    }
    Eigen::MatrixXd cov = kernel_(x, x);
    if (!steps_.empty()) {
        Eigen::MatrixXd v = mixed_cross(x);
        factors_[0].forward_solve(v);
        p.mean = v.transpose() * whitened_[0];
        cov.noalias() -= v.transpose() * v;
    }
    p.stddev = cov.diagonal().array().max(0.0).sqrt();
    return p;
}

Eigen::MatrixXd GPPosterior::mixed_cross(const Point& x) const
{
    const int m = outputs();
    const auto tau = static_cast<Eigen::Index>(steps_.size());
    Eigen::MatrixXd cross(m * tau, m);
    for (Eigen::Index s = 0; s < tau; ++s)
        cross.block(s * m, 0, m, m) = kernel_(steps_[s].design, x);
    return cross;
}

Eigen::MatrixXd GPPosterior::predict_covariance(const Point& x) const
{
    const int m = outputs();
    Eigen::MatrixXd prior = kernel_(x, x);
    if (steps_.empty())
        return prior;
    if (kernel_.is_independent()) {
        for (int j = 0; j < m; ++j) {
            Eigen::VectorXd v = latent_cross(j, x);
            factors_[j].forward_solve(v);
            prior(j, j) -= v.squaredNorm();
        }
        return prior;
    }
    Eigen::MatrixXd v = mixed_cross(x);
    factors_[0].forward_solve(v);
    prior.noalias() -= v.transpose() * v;
    return prior;
}

double GPPosterior::information_gain() const
{
    if (steps_.empty())
        throw DomainError("information_gain: empty trajectory");
    double sum = 0.0;
    for (const auto& s : steps_)
        sum += 0.5 * s.log_det_term;
    return sum;
}

double GPPosterior::information_gain_lower_bound() const
{
    if (steps_.empty())
        throw DomainError("information_gain_lower_bound: empty trajectory");
    double sum = 0.0;
    for (const auto& s : steps_)
        sum += (1.0 + s.prior_variance.array() / noise_variance_).log().sum();
    return sum / (2.0 * outputs());
}

GPPosterior update(GPPosterior p, const Point& x, const Eigen::VectorXd& y)
{
    p.update(x, y);
    return p;
}

double information_gain(const GPPosterior& p) { return p.information_gain(); }

} // namespace apal
