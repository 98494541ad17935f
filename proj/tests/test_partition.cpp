#include <doctest.h>

#include <cmath>
#include <functional>

#include "apal/errors.hpp"
#include "apal/partition.hpp"

using namespace apal;

namespace {

Point pt(std::initializer_list<double> v)
{
    Point p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        p[i++] = x;
    return p;
}

// Brute-force check that `centers` r-cover a fine grid of [0,1]^dim under L-inf.
bool covers(const std::vector<Point>& centers, double r, int dim, int n)
{
    const int total = dim == 1 ? n : n * n;
    for (int k = 0; k < total; ++k) {
        Point x(dim);
        x[0] = (k % n) / double(n - 1);
        if (dim == 2)
            x[1] = (k / n) / double(n - 1);
        bool hit = false;
        for (const auto& c : centers)
            hit = hit || distance(x, c, Metric::LInf) <= r + 1e-12;
        if (!hit)
            return false;
    }
    return true;
}

} // namespace

TEST_CASE("root covers the whole space")
{
    const auto space = DesignSpace::unit_cube(1);
    const Node r = root(space, PartitionParams{});
    CHECK(r.center[0] == 0.5);
    CHECK(r.cell_lower[0] == 0.0);
    CHECK(r.cell_upper[0] == 1.0);
    CHECK(r.id == NodeId{0, 1});
    CHECK_FALSE(r.parent.has_value());

    const Node r2 = root(DesignSpace::unit_cube(2), PartitionParams::defaults_for(2, Metric::LInf));
    CHECK(r2.center == pt({0.5, 0.5}));

    DesignSpace bad = DesignSpace::unit_cube(1);
    bad.lower[0] = 1.0;
    CHECK_THROWS_AS(root(bad, PartitionParams{}), ConfigError);
}

TEST_CASE("children halve the longest side")
{
    const PartitionParams p;
    const Node r = root(DesignSpace::unit_cube(1), p);
    const auto kids = children(r, p);
    REQUIRE(kids.size() == 2);
    CHECK(kids[0].cell_lower[0] == 0.0);
    CHECK(kids[0].cell_upper[0] == 0.5);
    CHECK(kids[1].cell_lower[0] == 0.5);
    CHECK(kids[1].cell_upper[0] == 1.0);
    CHECK(kids[0].center[0] == 0.25);
    CHECK(kids[1].center[0] == 0.75);
    CHECK(kids[0].id == NodeId{1, 1});
    CHECK(kids[1].id == NodeId{1, 2});
    CHECK(*kids[1].parent == r.id);

    const auto grand = children(kids[0], p);
    CHECK(grand[0].cell_upper[0] == 0.25);
    CHECK(grand[1].cell_lower[0] == 0.25);
    CHECK(grand[1].cell_upper[0] == 0.5);
    CHECK(grand[1].id == NodeId{2, 2});

    const auto p2 = PartitionParams::defaults_for(2, Metric::LInf);
    const auto sq = children(root(DesignSpace::unit_cube(2), p2), p2);
    CHECK(sq[0].cell_lower == pt({0.0, 0.0}));
    CHECK(sq[0].cell_upper == pt({0.5, 1.0}));
    CHECK(sq[1].cell_lower == pt({0.5, 0.0}));
    CHECK(sq[1].cell_upper == pt({1.0, 1.0}));
}

TEST_CASE("node index arithmetic matches the parent function")
{
    PartitionParams p;
    p.children = 3;
    p.rho = 1.0 / 3.0;
    const Node r = root(DesignSpace::unit_cube(1), p);
    for (const auto& c : children(r, p)) {
        for (const auto& g : children(c, p)) {
            CHECK(*g.id.parent(3) == c.id);
            CHECK(g.id.index >= 1);
            CHECK(g.id.index <= 9);
        }
    }
    CHECK_FALSE(r.id.parent(3).has_value());
}

TEST_CASE("cells tile their parent and radii decay")
{
    for (int dim : {1, 2, 3}) {
        for (Metric metric : {Metric::LInf, Metric::L2}) {
            const auto p = PartitionParams::defaults_for(dim, metric);
            const auto space = DesignSpace::unit_cube(dim, metric);
            std::function<void(const Node&)> walk = [&](const Node& n) {
                const double rad = cell_radius(n, metric);
                CHECK(rad <= p.v1 * std::pow(p.rho, n.depth()) * (1 + 1e-12));
                // The 1D default v2 = 1 is the experiment convention, not an inner radius.
                const double v2 = dim == 1 ? 0.5 : p.v2;
                CHECK(inner_radius(n, metric) >= v2 * std::pow(p.rho, n.depth()) * (1 - 1e-12));
                if (n.depth() >= (dim == 1 ? 12 : 8))
                    return;
                const auto kids = children(n, p);
                double volume = 0.0;
                Eigen::VectorXd lo = kids[0].cell_lower, hi = kids[0].cell_upper;
                for (const auto& k : kids) {
                    volume += (k.cell_upper - k.cell_lower).prod();
                    lo = lo.cwiseMin(k.cell_lower);
                    hi = hi.cwiseMax(k.cell_upper);
                    CHECK(cell_radius(k, metric) <= rad);
                    CHECK(n.contains(k.center));
                }
                CHECK(lo == n.cell_lower);
                CHECK(hi == n.cell_upper);
                CHECK(volume == doctest::Approx((n.cell_upper - n.cell_lower).prod()).epsilon(1e-12));
                // Consecutive children share their boundary exactly.
                for (std::size_t j = 1; j < kids.size(); ++j)
                    CHECK((kids[j - 1].cell_upper.array() >= kids[j].cell_lower.array()).all());
                // Only the first branch is walked deeply to bound the runtime.
                walk(kids[0]);
                if (n.depth() < 3)
                    walk(kids.back());
            };
            walk(root(space, p));
        }
    }
}

TEST_CASE("cell radius examples")
{
    const PartitionParams p;
    Node n = root(DesignSpace::unit_cube(1), p);
    CHECK(cell_radius(n, Metric::LInf) == 0.5);
    for (int h = 0; h < 3; ++h)
        n = children(n, p)[0];
    CHECK(cell_radius(n, Metric::LInf) == 0.0625);
    CHECK(cell_radius(root(DesignSpace::unit_cube(2), p), Metric::LInf) == 0.5);
}

TEST_CASE("children are deterministic")
{
    const auto p = PartitionParams::defaults_for(2, Metric::L2);
    const Node r = root(DesignSpace::unit_cube(2, Metric::L2), p);
    const auto a = children(r, p);
    const auto b = children(r, p);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == b[i].id);
        CHECK(a[i].center == b[i].center);
        CHECK(a[i].cell_lower == b[i].cell_lower);
        CHECK(a[i].cell_upper == b[i].cell_upper);
    }
}

TEST_CASE("covering number bound")
{
    const auto line = DesignSpace::unit_cube(1);
    CHECK(covering_number_bound(line, 0.25) == 2.0);
    CHECK(covers({pt({0.25}), pt({0.75})}, 0.25, 1, 4001));
    CHECK_FALSE(covers({pt({0.5})}, 0.25, 1, 4001));
    CHECK(covering_number_bound(line, 0.5) == 1.0);
    CHECK(covers({pt({0.5})}, 0.5, 1, 4001));

    const auto square = DesignSpace::unit_cube(2);
    CHECK(covering_number_bound(square, 0.25) == 4.0);
    CHECK(covers({pt({0.25, 0.25}), pt({0.75, 0.25}), pt({0.25, 0.75}), pt({0.75, 0.75})}, 0.25, 2, 201));
    // Three points cannot cover: some corner of the square stays uncovered.
    CHECK_FALSE(covers({pt({0.25, 0.25}), pt({0.75, 0.25}), pt({0.5, 0.75})}, 0.25, 2, 201));

    CHECK_THROWS_AS(covering_number_bound(line, 0.0), DomainError);
    CHECK_THROWS_AS(covering_number_bound(line, -1.0), DomainError);

    // Bound holds against a greedy grid cover for random radii.
    for (double r : {0.07, 0.13, 0.3}) {
        const double bound = covering_number_bound(line, r);
        std::vector<Point> greedy;
        for (double c = r; c - r < 1.0; c += 2 * r)
            greedy.push_back(pt({std::min(c, 1.0)}));
        CHECK(covers(greedy, r, 1, 2001));
        CHECK(bound <= static_cast<double>(greedy.size()));
    }
}

TEST_CASE("partition parameter validation")
{
    PartitionParams p;
    p.children = 1;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = PartitionParams{};
    p.rho = 1.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = PartitionParams{};
    p.v2 = 2.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    DesignSpace s = DesignSpace::unit_cube(1);
    s.metric_dimension = -1.0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
}
