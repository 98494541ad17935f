#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace apal {

using Point = Eigen::VectorXd;

enum class Metric { LInf, L2 };

/// Axis-aligned box in R^D with a distance tag. D1 defaults to D.
struct DesignSpace {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
    Metric metric = Metric::LInf;
    std::optional<double> metric_dimension; // D1; unset means D

    static DesignSpace unit_cube(int dim, Metric metric = Metric::LInf);

    int dim() const { return static_cast<int>(lower.size()); }
    double effective_metric_dimension() const { return metric_dimension.value_or(dim()); }
    Point midpoint() const { return 0.5 * (lower + upper); }

    /// Throws ConfigError on empty/degenerate bounds or a negative D1.
    void validate() const;
};

double distance(const Point& a, const Point& b, Metric metric);

struct PartitionParams {
    int children = 2;  // N
    double rho = 0.5;  // decay rate
    double v1 = 1.0;
    double v2 = 1.0;

    /// Defaults for longest-side bisection of a D-dimensional box.
    static PartitionParams defaults_for(int dim, Metric metric);

    void validate() const;
};

/// (depth, index) with index in [1, N^depth]. Ordered by depth, then index.
struct NodeId {
    int depth = 0;
    std::int64_t index = 1;

    auto operator<=>(const NodeId&) const = default;
    bool operator==(const NodeId&) const = default;

    std::optional<NodeId> parent(int branching) const;
};

struct Node {
    NodeId id;
    Point center;
    Eigen::VectorXd cell_lower;
    Eigen::VectorXd cell_upper;
    std::optional<NodeId> parent;

    int depth() const { return id.depth; }
    bool contains(const Point& x) const;
};

Node root(const DesignSpace& space, const PartitionParams& params);

/// N children whose cells split the longest side of the parent cell into
/// equal slabs (ties go to the lowest dimension index).
std::vector<Node> children(const Node& node, const PartitionParams& params);

/// Half the cell diameter under the configured metric.
double cell_radius(const Node& node, Metric metric);

/// Radius of the largest metric ball centred at the node's center that fits in its cell.
double inner_radius(const Node& node, Metric metric);

/// Grid upper bound on the r-covering number of the box.
double covering_number_bound(const DesignSpace& space, double r);

} // namespace apal
