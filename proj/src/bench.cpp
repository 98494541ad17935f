#include "apal/bench.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <unsupported/Eigen/FFT>

#include "apal/errors.hpp"
#include "apal/gp.hpp"
#include "apal/log.hpp"

namespace apal {

SampledObjective::SampledObjective(DesignSpace space, std::vector<int> shape, Eigen::MatrixXd values, std::uint64_t seed)
    : space_(std::move(space)), shape_(std::move(shape)), values_(std::move(values)), seed_(seed)
{
    space_.validate();
    if (static_cast<int>(shape_.size()) != space_.dim())
        throw ConfigError("sampled objective: grid shape does not match the design dimension");
    Eigen::Index n = 1;
    for (int s : shape_) {
        if (s < 2)
            throw ConfigError("sampled objective: need at least 2 grid points per dimension");
        n *= s;
    }
    if (values_.rows() != n)
        throw ConfigError("sampled objective: value table has the wrong number of rows");
}

Point SampledObjective::grid_point(Eigen::Index flat) const
{
    Point x(space_.dim());
    for (int d = 0; d < space_.dim(); ++d) {
        const Eigen::Index i = flat % shape_[d];
        flat /= shape_[d];
        x[d] = space_.lower[d] + (space_.upper[d] - space_.lower[d]) * static_cast<double>(i) / (shape_[d] - 1);
    }
    return x;
}

double SampledObjective::spacing() const
{
    double h = 0.0;
    for (int d = 0; d < space_.dim(); ++d)
        h = std::max(h, (space_.upper[d] - space_.lower[d]) / (shape_[d] - 1));
    return h;
}

ObjVec SampledObjective::operator()(const Point& x) const
{
    const int dim = space_.dim();
    std::vector<Eigen::Index> base(dim);
    std::vector<double> frac(dim);
    for (int d = 0; d < dim; ++d) {
        const double t = std::clamp((x[d] - space_.lower[d]) / (space_.upper[d] - space_.lower[d]), 0.0, 1.0) * (shape_[d] - 1);
        Eigen::Index i = static_cast<Eigen::Index>(std::floor(t));
        i = std::min<Eigen::Index>(i, shape_[d] - 2);
        base[d] = i;
        frac[d] = t - static_cast<double>(i);
    }
    ObjVec y = ObjVec::Zero(values_.cols());
    for (int corner = 0; corner < (1 << dim); ++corner) {
        double w = 1.0;
        Eigen::Index flat = 0;
        Eigen::Index stride = 1;
        for (int d = 0; d < dim; ++d) {
            const bool up = (corner >> d) & 1;
            w *= up ? frac[d] : 1.0 - frac[d];
            flat += (base[d] + (up ? 1 : 0)) * stride;
            stride *= shape_[d];
        }
        if (w != 0.0)
            y += w * values_.row(flat).transpose();
    }
    return y;
}

Eigen::Index SampledObjective::nearest_index(const Point& x) const
{
    Eigen::Index flat = 0;
    Eigen::Index stride = 1;
    for (int d = 0; d < space_.dim(); ++d) {
        const double t = std::clamp((x[d] - space_.lower[d]) / (space_.upper[d] - space_.lower[d]), 0.0, 1.0) * (shape_[d] - 1);
        flat += static_cast<Eigen::Index>(std::lround(t)) * stride;
        stride *= shape_[d];
    }
    return flat;
}

int default_grid_size(int dim)
{
    return dim <= 1 ? (1 << 14) + 1 : 129;
}

namespace {

constexpr Eigen::Index kDenseLimit = 1024;

Eigen::VectorXd draw_dense(const ScalarKernel& k, const SampledObjective& grid, std::mt19937_64& rng)
{
    const Eigen::Index n = grid.size();
    std::vector<Point> pts(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        pts[static_cast<std::size_t>(i)] = grid.grid_point(i);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j)
            cov(i, j) = cov(j, i) = k(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]);
    }
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
    bool ok = false;
    for (double j : IncrementalCholesky::kJitterLadder) {
        jitter = j * k.variance;
        Eigen::MatrixXd trial = cov;
        trial.diagonal().array() += jitter;
        llt.compute(trial);
        if (llt.info() == Eigen::Success) {
            ok = true;
            break;
        }
    }
    if (!ok)
        throw NumericalError("grid covariance factorization failed", jitter);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i)
        z[i] = normal(rng);
    return llt.matrixL() * z;
}

using Complex = std::complex<double>;

// In-place 2D DFT of a row-major m0 x m1 array (index i0 * m1 + i1).
void fft2(std::vector<Complex>& a, Eigen::Index m0, Eigen::Index m1, Eigen::FFT<double>& fft)
{
    std::vector<Complex> in, out;
    if (m1 > 1) {
        in.resize(static_cast<std::size_t>(m1));
        for (Eigen::Index i0 = 0; i0 < m0; ++i0) {
            std::copy_n(a.begin() + i0 * m1, m1, in.begin());
            fft.fwd(out, in);
            std::copy(out.begin(), out.end(), a.begin() + i0 * m1);
        }
    }
    if (m0 > 1) {
        in.resize(static_cast<std::size_t>(m0));
        for (Eigen::Index i1 = 0; i1 < m1; ++i1) {
            for (Eigen::Index i0 = 0; i0 < m0; ++i0)
                in[static_cast<std::size_t>(i0)] = a[static_cast<std::size_t>(i0 * m1 + i1)];
            fft.fwd(out, in);
            for (Eigen::Index i0 = 0; i0 < m0; ++i0)
                a[static_cast<std::size_t>(i0 * m1 + i1)] = out[static_cast<std::size_t>(i0)];
        }
    }
}

Eigen::Index next_pow2(Eigen::Index n)
{
    Eigen::Index p = 1;
    while (p < n)
        p <<= 1;
    return p;
}

// Circulant embedding on a D <= 2 grid. Eigenvalues of the embedded
// covariance are its DFT; the embedding is doubled while any is
// significantly negative and tiny negatives are clipped to zero.
Eigen::VectorXd draw_circulant(const ScalarKernel& k, const SampledObjective& grid, std::mt19937_64& rng)
{
    const auto& space = grid.space();
    const int dim = space.dim();
    const Eigen::Index n0 = grid.shape()[0];
    const Eigen::Index n1 = dim > 1 ? grid.shape()[1] : 1;
    const double h0 = (space.upper[0] - space.lower[0]) / static_cast<double>(n0 - 1);
    const double h1 = dim > 1 ? (space.upper[1] - space.lower[1]) / static_cast<double>(n1 - 1) : 0.0;

    Eigen::FFT<double> fft;
    Eigen::Index m0 = next_pow2(2 * (n0 - 1));
    Eigen::Index m1 = n1 > 1 ? next_pow2(2 * (n1 - 1)) : 1;
    std::vector<Complex> lambda;
    for (int attempt = 0;; ++attempt) {
        lambda.assign(static_cast<std::size_t>(m0 * m1), Complex(0.0, 0.0));
        for (Eigen::Index i0 = 0; i0 < m0; ++i0) {
            const double d0 = static_cast<double>(std::min(i0, m0 - i0)) * h0;
            for (Eigen::Index i1 = 0; i1 < m1; ++i1) {
                const double d1 = static_cast<double>(std::min(i1, m1 - i1)) * h1;
                // Column-major flat index so that dimension 0 varies fastest after the FFT too.
                lambda[static_cast<std::size_t>(i1 * m0 + i0)] = k.at_distance(std::hypot(d0, d1));
            }
        }
        fft2(lambda, m1, m0, fft);
        double most_negative = 0.0;
        double largest = 0.0;
        for (const auto& l : lambda) {
            most_negative = std::min(most_negative, l.real());
            largest = std::max(largest, l.real());
        }
        if (most_negative >= -1e-8 * largest)
            break;
        if (attempt == 3)
            throw NumericalError("circulant embedding has negative eigenvalues (" + std::to_string(most_negative) + ")", 0.0);
        m0 *= 2;
        if (m1 > 1)
            m1 *= 2;
    }

    const double scale = 1.0 / static_cast<double>(m0 * m1);
    std::normal_distribution<double> normal;
    std::vector<Complex> w(lambda.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double re = normal(rng);
        const double im = normal(rng);
        w[i] = std::sqrt(std::max(0.0, lambda[i].real()) * scale) * Complex(re, im);
    }
    fft2(w, m1, m0, fft);

    Eigen::VectorXd out(n0 * n1);
    for (Eigen::Index i1 = 0; i1 < n1; ++i1) {
        for (Eigen::Index i0 = 0; i0 < n0; ++i0)
            out[i0 + n0 * i1] = w[static_cast<std::size_t>(i1 * m0 + i0)].real();
    }
    return out;
}

} // namespace

SampledObjective sample_gp_function(const MultiOutputKernel& kernel, const DesignSpace& space, int grid_size, std::uint64_t seed)
{
    space.validate();
    if (grid_size < 2)
        throw ConfigError("sample_gp_function: grid size must be >= 2");
    const int dim = space.dim();
    std::vector<int> shape(static_cast<std::size_t>(dim), grid_size);
    Eigen::Index n = 1;
    for (int s : shape)
        n *= s;
    const int m = kernel.outputs();
    SampledObjective grid(space, shape, Eigen::MatrixXd::Zero(n, m), seed);
    if (n > kDenseLimit && dim > 2)
        throw ConfigError("sample_gp_function: grids above " + std::to_string(kDenseLimit) + " points need D <= 2");

    std::mt19937_64 rng(seed);
    Eigen::MatrixXd latent(n, m);
    for (int j = 0; j < m; ++j) {
        const auto& k = kernel.latents()[static_cast<std::size_t>(j)];
        latent.col(j) = n <= kDenseLimit ? draw_dense(k, grid, rng) : draw_circulant(k, grid, rng);
    }
    Eigen::MatrixXd values = kernel.mixing() ? Eigen::MatrixXd(latent * kernel.mixing()->transpose()) : latent;
    return SampledObjective(space, std::move(shape), std::move(values), seed);
}

ParetoFront nondominated_front(std::vector<ObjVec> points, std::vector<Point> designs)
{
    ParetoFront out;
    if (points.empty())
        return out;
    for (std::size_t i : nondominated_set(points)) {
        out.points.push_back(points[i]);
        if (!designs.empty())
            out.designs.push_back(designs[i]);
    }
    return out;
}

ParetoFront true_pareto_front(const SampledObjective& obj)
{
    std::vector<ObjVec> pts(static_cast<std::size_t>(obj.size()));
    for (Eigen::Index i = 0; i < obj.size(); ++i)
        pts[static_cast<std::size_t>(i)] = obj.values().row(i).transpose();
    ParetoFront out;
    for (std::size_t i : nondominated_set(pts)) {
        out.points.push_back(pts[i]);
        out.designs.push_back(obj.grid_point(static_cast<Eigen::Index>(i)));
    }
    return out;
}

double eps_accuracy(const ParetoFront& predicted, const ParetoFront& truth, const ObjVec& eps)
{
    if (predicted.points.empty())
        throw DomainError("eps_accuracy: empty predicted set");
    std::size_t hits = 0;
    for (const auto& y : predicted.points)
        hits += eps_pareto_front_membership(y, truth.points, eps) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(predicted.points.size());
}

double eps_coverage(const ParetoFront& truth, const ParetoFront& predicted, const ObjVec& eps)
{
    if (truth.points.empty())
        throw DomainError("eps_coverage: empty true front");
    std::vector<ObjVec> lifted;
    lifted.reserve(predicted.points.size());
    for (const auto& q : predicted.points)
        lifted.push_back(q + 2.0 * eps);
    const DominanceQuery query(std::move(lifted));
    std::size_t hits = 0;
    for (const auto& p : truth.points)
        hits += query.dominated(p) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.points.size());
}

double avg_mse(const ParetoFront& truth, const ParetoFront& predicted)
{
    if (truth.points.empty() || predicted.points.empty())
        throw DomainError("avg_mse: empty input");
    double sum = 0.0;
    for (const auto& p : truth.points) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& q : predicted.points)
            best = std::min(best, (p - q).squaredNorm());
        sum += best;
    }
    return sum / static_cast<double>(truth.points.size());
}

ObjVec reference_point(const SampledObjective& obj)
{
    const ObjVec lo = obj.values().colwise().minCoeff().transpose();
    const ObjVec hi = obj.values().colwise().maxCoeff().transpose();
    return lo - 0.1 * (hi - lo);
}

ParetoFront predicted_front(const SampledObjective& obj, std::span<const Node> decided)
{
    std::vector<ObjVec> pts;
    std::vector<Point> designs;
    // Snapping keeps every image inside the tabulated objective's range, so
    // the slab test against the discrete front stays meaningful below the
    // grid resolution.
    for (const auto& n : decided) {
        const Eigen::Index i = obj.nearest_index(n.center);
        pts.push_back(obj.values().row(i).transpose());
        designs.push_back(obj.grid_point(i));
    }
    return nondominated_front(std::move(pts), std::move(designs));
}

MetricsReport score(const ParetoFront& predicted, const ParetoFront& truth, const ObjVec& eps, const ObjVec& reference)
{
    MetricsReport r;
    r.reference = reference;
    r.hypervolume = hypervolume(predicted.points, reference);
    if (predicted.points.empty()) {
        // Only a truncated run can end with nothing decided.
        r.avg_mse = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    r.eps_accuracy = eps_accuracy(predicted, truth, eps);
    r.eps_coverage = eps_coverage(truth, predicted, eps);
    r.avg_mse = avg_mse(truth, predicted);
    return r;
}

} // namespace apal
