#include "apal/partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "apal/errors.hpp"

namespace apal {

DesignSpace DesignSpace::unit_cube(int dim, Metric metric)
{
    DesignSpace s;
    s.lower = Eigen::VectorXd::Zero(dim);
    s.upper = Eigen::VectorXd::Ones(dim);
    s.metric = metric;
    return s;
}

void DesignSpace::validate() const
{
    if (lower.size() == 0 || lower.size() != upper.size())
        throw ConfigError("design space: bounds must be non-empty and of equal dimension");
    for (Eigen::Index d = 0; d < lower.size(); ++d) {
        if (!std::isfinite(lower[d]) || !std::isfinite(upper[d]) || !(lower[d] < upper[d]))
            throw ConfigError("design space: dimension " + std::to_string(d) + " needs lower < upper");
    }
    if (metric_dimension && !(*metric_dimension >= 0.0 && std::isfinite(*metric_dimension)))
        throw ConfigError("design space: metric dimension must be >= 0");
}

double distance(const Point& a, const Point& b, Metric metric)
{
    return metric == Metric::LInf ? (a - b).cwiseAbs().maxCoeff() : (a - b).norm();
}

PartitionParams PartitionParams::defaults_for(int dim, Metric metric)
{
    PartitionParams p;
    if (dim <= 1)
        return p;
    // Bisection cycles through the D axes, so a cell's longest side halves
    // every D levels: side_max(h) = 2^-floor(h/D) <= rho^(h-D+1) with rho = 2^(-1/D).
    p.children = 2;
    p.rho = std::pow(2.0, -1.0 / dim);
    double outer = std::pow(p.rho, -(dim - 1));
    if (metric == Metric::LInf) {
        p.v1 = 0.5 * outer;
        p.v2 = 0.25;
    }
    else {
        p.v1 = 0.5 * std::sqrt(static_cast<double>(dim)) * outer;
        p.v2 = 0.25;
    }
    return p;
}

void PartitionParams::validate() const
{
    if (children < 2)
        throw ConfigError("partition: N must be >= 2");
    if (!(rho > 0.0 && rho < 1.0))
        throw ConfigError("partition: rho must lie in (0,1)");
    if (!(v2 > 0.0) || !(v2 <= v1) || !std::isfinite(v1))
        throw ConfigError("partition: need 0 < v2 <= v1");
}

std::optional<NodeId> NodeId::parent(int branching) const
{
    if (depth == 0)
        return std::nullopt;
    return NodeId{depth - 1, (index - 1) / branching + 1};
}

bool Node::contains(const Point& x) const
{
    return (x.array() >= cell_lower.array()).all() && (x.array() <= cell_upper.array()).all();
}

Node root(const DesignSpace& space, const PartitionParams& params)
{
    space.validate();
    params.validate();
    Node n;
    n.id = NodeId{0, 1};
    n.cell_lower = space.lower;
    n.cell_upper = space.upper;
    n.center = space.midpoint();
    return n;
}

std::vector<Node> children(const Node& node, const PartitionParams& params)
{
    Eigen::VectorXd sides = node.cell_upper - node.cell_lower;
    Eigen::Index split = 0;
    for (Eigen::Index d = 1; d < sides.size(); ++d) {
        if (sides[d] > sides[split])
            split = d;
    }

    const int n = params.children;
    const double lo = node.cell_lower[split];
    const double hi = node.cell_upper[split];
    std::vector<Node> out;
    out.reserve(n);
    for (int j = 0; j < n; ++j) {
        Node c;
        c.id = NodeId{node.id.depth + 1, static_cast<std::int64_t>(n) * (node.id.index - 1) + 1 + j};
        c.parent = node.id;
        c.cell_lower = node.cell_lower;
        c.cell_upper = node.cell_upper;
        // Shared boundaries are computed once so adjacent cells tile exactly.
        c.cell_lower[split] = j == 0 ? lo : lo + (hi - lo) * j / n;
        c.cell_upper[split] = j == n - 1 ? hi : lo + (hi - lo) * (j + 1) / n;
        c.center = 0.5 * (c.cell_lower + c.cell_upper);
        out.push_back(std::move(c));
    }
    return out;
}

double cell_radius(const Node& node, Metric metric)
{
    Eigen::VectorXd sides = node.cell_upper - node.cell_lower;
    return 0.5 * (metric == Metric::LInf ? sides.maxCoeff() : sides.norm());
}

double inner_radius(const Node& node, Metric)
{
    // Both L-inf and L2 balls of radius r fit in a box iff r <= half the shortest side.
    return 0.5 * (node.cell_upper - node.cell_lower).minCoeff();
}

double covering_number_bound(const DesignSpace& space, double r)
{
    if (!(r > 0.0))
        throw DomainError("covering_number_bound: r must be positive");
    space.validate();
    // An L-inf ball of radius r is a cube of side 2r; under L2 the largest
    // inscribed cube of a radius-r ball has side 2r/sqrt(D).
    double cube_side = 2.0 * r;
    if (space.metric == Metric::L2)
        cube_side /= std::sqrt(static_cast<double>(space.dim()));
    double count = 1.0;
    for (int d = 0; d < space.dim(); ++d)
        count *= std::ceil((space.upper[d] - space.lower[d]) / cube_side - 1e-12);
    return std::max(count, 1.0);
}

} // namespace apal
