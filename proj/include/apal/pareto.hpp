#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "apal/partition.hpp"

namespace apal {

/// A point in objective space. All objectives are maximized.
using ObjVec = Eigen::VectorXd;

/// u <= v componentwise.
bool weakly_dominated(const ObjVec& u, const ObjVec& v);

/// u <= v + eps componentwise. Throws DomainError if any eps_j < 0.
bool eps_dominated(const ObjVec& u, const ObjVec& v, const ObjVec& eps);

/// Indices (ascending) of the points not strictly dominated by any other
/// point. Exact duplicates never dominate each other, so all copies of a
/// maximal point are kept. Throws DomainError on empty input.
std::vector<std::size_t> nondominated_set(std::span<const ObjVec> points);

/// O(n^2) pairwise version of nondominated_set, kept for cross-checking.
std::vector<std::size_t> nondominated_set_bruteforce(std::span<const ObjVec> points);

/// Keeps node x unless some other node y has min(x) <= min(y). Among nodes
/// with identical corners only the smallest NodeId survives, so the result is
/// never empty. Output is sorted by NodeId.
std::vector<NodeId> pessimistic_pareto(std::span<const std::pair<NodeId, ObjVec>> min_corners);

struct HypervolumeOptions {
    std::size_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
};

/// Volume of the region weakly dominated by the front and dominating `ref`.
/// Exact for m = 2, 3; Monte-Carlo for m > 3. Points not >= ref are dropped.
double hypervolume(std::span<const ObjVec> front, const ObjVec& ref, const HypervolumeOptions& options = {});

/// Monte-Carlo estimate of the same integral, any m.
double hypervolume_monte_carlo(std::span<const ObjVec> front, const ObjVec& ref, std::size_t samples, std::uint64_t seed);

/// y lies in the slab below the front: some p has y <= p and no p has y + 2 eps <= p.
bool eps_pareto_front_membership(const ObjVec& y, std::span<const ObjVec> true_front, const ObjVec& eps);

/// Answers "is q weakly dominated by some stored point" in O(log n) for
/// m = 2 and by scanning otherwise.
class DominanceQuery {
public:
    explicit DominanceQuery(std::vector<ObjVec> points);

    bool dominated(const ObjVec& q) const;
    bool empty() const { return points_.empty(); }

private:
    std::vector<ObjVec> points_;
    // m == 2: points sorted by first coordinate descending with running max of the second.
    std::vector<double> first_desc_;
    std::vector<double> prefix_max_second_;
};

} // namespace apal
