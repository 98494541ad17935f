#pragma once

#include <optional>

#include "apal/gp.hpp"
#include "apal/pareto.hpp"

namespace apal {

/// Axis-aligned box [lower, upper] in objective space.
struct HyperRect {
    ObjVec lower;
    ObjVec upper;

    /// The whole of R^m.
    static HyperRect unbounded(int m);

    const ObjVec& min_corner() const { return lower; }
    const ObjVec& max_corner() const { return upper; }
    bool contains(const ObjVec& y) const;
    bool operator==(const HyperRect&) const = default;
};

struct IntersectResult {
    HyperRect rect;
    bool degenerate = false; // some coordinate had an empty overlap
};

/// Componentwise [max(lower), min(upper)]. An empty coordinate collapses to
/// the midpoint of the gap between the two intervals and sets `degenerate`.
IntersectResult intersect(const HyperRect& prev, const HyperRect& q);

/// Euclidean length of the diagonal, |upper - lower|_2.
double diameter(const HyperRect& r);

/// Confidence box Q_t of a node. `parent` carries the parent's prediction and
/// V_{h-1}; it is absent for the root, whose box uses only its own posterior.
struct ParentBound {
    Prediction prediction;
    double v_parent = 0.0;
};

HyperRect node_indices(const Prediction& own, const std::optional<ParentBound>& parent, double beta, double v_h);

/// Cumulative rectangle of one node together with its cached posterior.
struct NodeBelief {
    HyperRect rect;
    Prediction prediction;
    int stamp = -1; // evaluation count tau at which `prediction` was computed

    bool fresh(int tau) const { return stamp == tau; }
};

} // namespace apal
