#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "apal/engine.hpp"
#include "apal/kernels.hpp"
#include "apal/pareto.hpp"
#include "apal/partition.hpp"

namespace apal {

/// A GP sample path tabulated on a regular grid, read back by multilinear interpolation.
class SampledObjective {
public:
    SampledObjective(DesignSpace space, std::vector<int> shape, Eigen::MatrixXd values, std::uint64_t seed);

    const DesignSpace& space() const { return space_; }
    const std::vector<int>& shape() const { return shape_; }
    /// One row per grid point (first dimension varies fastest), one column per objective.
    const Eigen::MatrixXd& values() const { return values_; }
    std::uint64_t seed() const { return seed_; }
    int outputs() const { return static_cast<int>(values_.cols()); }
    Eigen::Index size() const { return values_.rows(); }

    Point grid_point(Eigen::Index flat) const;
    /// Largest grid spacing over all dimensions.
    double spacing() const;

    /// Interpolated objective value. Points outside the space are clamped.
    ObjVec operator()(const Point& x) const;

    /// Flat index of the grid point closest to x.
    Eigen::Index nearest_index(const Point& x) const;

private:
    DesignSpace space_;
    std::vector<int> shape_;
    Eigen::MatrixXd values_;
    std::uint64_t seed_;
};

/// Points per dimension used when a config leaves the grid unset: 2^14 + 1 in
/// 1D so dyadic node centers fall on grid points, 129 per side otherwise.
int default_grid_size(int dim);

/// Joint draw of the m-output prior on a grid with `grid_size` points per
/// dimension. Small grids use a dense Cholesky factor with the jitter ladder;
/// larger ones (D <= 2) use circulant embedding. Throws NumericalError when
/// neither succeeds.
SampledObjective sample_gp_function(const MultiOutputKernel& kernel, const DesignSpace& space, int grid_size, std::uint64_t seed);

struct ParetoFront {
    std::vector<ObjVec> points;
    std::vector<Point> designs; // empty when the source designs are unknown
};

/// Nondominated grid images with their designs.
ParetoFront true_pareto_front(const SampledObjective& obj);

/// Nondominated subset of the given images (designs carried along when present).
ParetoFront nondominated_front(std::vector<ObjVec> points, std::vector<Point> designs = {});

/// Fraction of predicted points inside the eps-Pareto-front slab of `truth`.
double eps_accuracy(const ParetoFront& predicted, const ParetoFront& truth, const ObjVec& eps);

/// Fraction of truth points p with some predicted q such that p <= q + 2 eps.
double eps_coverage(const ParetoFront& truth, const ParetoFront& predicted, const ObjVec& eps);

/// Mean over truth points of the squared distance to the nearest predicted point.
double avg_mse(const ParetoFront& truth, const ParetoFront& predicted);

struct MetricsReport {
    double hypervolume = 0.0;
    double eps_accuracy = 0.0;
    double eps_coverage = 0.0;
    double avg_mse = 0.0;
    ObjVec reference;
    int evaluations = 0;
    double wall_time_seconds = 0.0;
};

/// Componentwise grid minimum minus 0.1 times the grid range.
ObjVec reference_point(const SampledObjective& obj);

/// Noise-free objective at the grid points nearest to the decided node
/// centers, reduced to its nondominated subset.
ParetoFront predicted_front(const SampledObjective& obj, std::span<const Node> decided);

/// An empty prediction scores 0 accuracy and coverage with a NaN MSE.
MetricsReport score(const ParetoFront& predicted, const ParetoFront& truth, const ObjVec& eps, const ObjVec& reference);

} // namespace apal
