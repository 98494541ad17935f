#include "apal/confidence.hpp"

#include <cassert>
#include <cmath>
#include <limits>

#include "apal/errors.hpp"

namespace apal {

HyperRect HyperRect::unbounded(int m)
{
    const double inf = std::numeric_limits<double>::infinity();
    return {ObjVec::Constant(m, -inf), ObjVec::Constant(m, inf)};
}

bool HyperRect::contains(const ObjVec& y) const
{
    return (lower.array() <= y.array()).all() && (y.array() <= upper.array()).all();
}

IntersectResult intersect(const HyperRect& prev, const HyperRect& q)
{
    IntersectResult out{{prev.lower.cwiseMax(q.lower), prev.upper.cwiseMin(q.upper)}, false};
    for (Eigen::Index j = 0; j < out.rect.lower.size(); ++j) {
        if (out.rect.lower[j] > out.rect.upper[j]) {
            const double mid = 0.5 * (out.rect.lower[j] + out.rect.upper[j]);
            out.rect.lower[j] = mid;
            out.rect.upper[j] = mid;
            out.degenerate = true;
        }
    }
    return out;
}

double diameter(const HyperRect& r)
{
    return (r.upper - r.lower).norm();
}

HyperRect node_indices(const Prediction& own, const std::optional<ParentBound>& parent, double beta, double v_h)
{
    if (!(beta >= 0.0) || !(v_h >= 0.0))
        throw DomainError("node_indices: beta and V_h must be non-negative");
    const double root_beta = std::sqrt(beta);
    ObjVec lo = own.mean - root_beta * own.stddev;
    ObjVec hi = own.mean + root_beta * own.stddev;
    if (parent) {
        const auto& pp = parent->prediction;
        lo = lo.cwiseMax(pp.mean - root_beta * pp.stddev - ObjVec::Constant(lo.size(), parent->v_parent));
        hi = hi.cwiseMin(pp.mean + root_beta * pp.stddev + ObjVec::Constant(hi.size(), parent->v_parent));
    }
    HyperRect q{lo.array() - v_h, hi.array() + v_h};
    // The two-term bounds can cross only when the parent and child intervals
    // are disjoint, which is a failed confidence event; intersect() flags it.
    return q;
}

} // namespace apal
