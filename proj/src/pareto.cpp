#include "apal/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "apal/errors.hpp"
#include "apal/log.hpp"

namespace apal {

bool weakly_dominated(const ObjVec& u, const ObjVec& v)
{
    return (u.array() <= v.array()).all();
}

bool eps_dominated(const ObjVec& u, const ObjVec& v, const ObjVec& eps)
{
    if ((eps.array() < 0.0).any())
        throw DomainError("eps_dominated: eps must be componentwise non-negative");
    return (u.array() <= (v + eps).array()).all();
}

namespace {

bool lex_greater(const ObjVec& a, const ObjVec& b)
{
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        if (a[j] != b[j])
            return a[j] > b[j];
    }
    return false;
}

void check_points(std::span<const ObjVec> points, const char* who)
{
    if (points.empty())
        throw DomainError(std::string(who) + ": empty point set");
    const auto m = points.front().size();
    for (const auto& p : points) {
        if (p.size() != m)
            throw DomainError(std::string(who) + ": points have mixed dimensions");
    }
}

// Kung-style recursion over groups sorted lexicographically descending: a
// group can only be dominated by groups earlier in the order.
std::vector<std::size_t> kung_front(const std::vector<const ObjVec*>& reps, std::size_t lo, std::size_t hi)
{
    if (hi - lo == 1)
        return {lo};
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<std::size_t> top = kung_front(reps, lo, mid);
    std::vector<std::size_t> bottom = kung_front(reps, mid, hi);
    for (std::size_t b : bottom) {
        bool dominated = std::any_of(top.begin(), top.end(), [&](std::size_t t) { return weakly_dominated(*reps[b], *reps[t]); });
        if (!dominated)
            top.push_back(b);
    }
    return top;
}

} // namespace

std::vector<std::size_t> nondominated_set(std::span<const ObjVec> points)
{
    check_points(points, "nondominated_set");
    const auto m = points.front().size();

    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lex_greater(points[a], points[b]); });

    // Group exact duplicates; groups are distinct, so weak dominance between
    // representatives of different groups is strict dominance.
    std::vector<std::size_t> group_start;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (k == 0 || points[order[k]] != points[order[k - 1]])
            group_start.push_back(k);
    }
    const std::size_t groups = group_start.size();
    std::vector<const ObjVec*> reps(groups);
    for (std::size_t g = 0; g < groups; ++g)
        reps[g] = &points[order[group_start[g]]];

    std::vector<char> keep(groups, 0);
    if (m == 1) {
        keep[0] = 1;
    }
    else if (m == 2) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t g = 0; g < groups; ++g) {
            const double y = (*reps[g])[1];
            keep[g] = g == 0 || y > best;
            best = std::max(best, y);
        }
    }
    else if (m == 3) {
        // Staircase over (second, third): keys ascending, values strictly descending.
        std::map<double, double> stair;
        for (std::size_t g = 0; g < groups; ++g) {
            const double y = (*reps[g])[1];
            const double z = (*reps[g])[2];
            auto it = stair.lower_bound(y);
            if (it != stair.end() && it->second >= z)
                continue;
            keep[g] = 1;
            auto hi = stair.upper_bound(y);
            while (hi != stair.begin()) {
                auto prev = std::prev(hi);
                if (prev->second > z)
                    break;
                hi = stair.erase(prev);
            }
            stair[y] = z;
        }
    }
    else {
        for (std::size_t g : kung_front(reps, 0, groups))
            keep[g] = 1;
    }

    std::vector<std::size_t> out;
    for (std::size_t g = 0; g < groups; ++g) {
        if (!keep[g])
            continue;
        const std::size_t end = g + 1 < groups ? group_start[g + 1] : order.size();
        for (std::size_t k = group_start[g]; k < end; ++k)
            out.push_back(order[k]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> nondominated_set_bruteforce(std::span<const ObjVec> points)
{
    check_points(points, "nondominated_set_bruteforce");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < points.size() && !dominated; ++j)
            dominated = weakly_dominated(points[i], points[j]) && points[i] != points[j];
        if (!dominated)
            out.push_back(i);
    }
    return out;
}

std::vector<NodeId> pessimistic_pareto(std::span<const std::pair<NodeId, ObjVec>> min_corners)
{
    if (min_corners.empty())
        throw DomainError("pessimistic_pareto: empty node set");
    std::vector<ObjVec> corners;
    corners.reserve(min_corners.size());
    for (const auto& [id, c] : min_corners)
        corners.push_back(c);

    std::vector<char> kept(corners.size(), 0);
    for (std::size_t i : nondominated_set(corners))
        kept[i] = 1;

    // Among exact ties keep the smallest id: sort kept entries by (corner, id).
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < corners.size(); ++i) {
        if (kept[i])
            idx.push_back(i);
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (corners[a] != corners[b])
            return lex_greater(corners[a], corners[b]);
        return min_corners[a].first < min_corners[b].first;
    });
    std::vector<NodeId> out;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (k > 0 && corners[idx[k]] == corners[idx[k - 1]])
            continue;
        out.push_back(min_corners[idx[k]].first);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::vector<ObjVec> points_above_ref(std::span<const ObjVec> front, const ObjVec& ref)
{
    std::vector<ObjVec> kept;
    std::size_t dropped = 0;
    for (const auto& p : front) {
        if (p.size() != ref.size())
            throw DomainError("hypervolume: point and reference dimensions differ");
        if ((p.array() >= ref.array()).all())
            kept.push_back(p);
        else
            ++dropped;
    }
    if (dropped > 0)
        log_warning("hypervolume: dropped " + std::to_string(dropped) + " point(s) not dominating the reference point");
    return kept;
}

double area_2d(std::vector<std::pair<double, double>> pts, double rx, double ry)
{
    std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    double area = 0.0;
    double best_y = ry;
    for (const auto& [x, y] : pts) {
        if (y > best_y) {
            area += (x - rx) * (y - best_y);
            best_y = y;
        }
    }
    return area;
}

} // namespace

double hypervolume(std::span<const ObjVec> front, const ObjVec& ref, const HypervolumeOptions& options)
{
    std::vector<ObjVec> pts = points_above_ref(front, ref);
    if (pts.empty()) {
        log_warning("hypervolume: empty effective front");
        return 0.0;
    }
    const auto m = ref.size();
    if (m == 1) {
        double best = ref[0];
        for (const auto& p : pts)
            best = std::max(best, p[0]);
        return best - ref[0];
    }
    if (m == 2) {
        std::vector<std::pair<double, double>> xy;
        for (const auto& p : pts)
            xy.emplace_back(p[0], p[1]);
        return area_2d(std::move(xy), ref[0], ref[1]);
    }
    if (m == 3) {
        std::sort(pts.begin(), pts.end(), [](const ObjVec& a, const ObjVec& b) { return a[2] > b[2]; });
        double volume = 0.0;
        std::vector<std::pair<double, double>> slice;
        for (std::size_t k = 0; k < pts.size(); ++k) {
            slice.emplace_back(pts[k][0], pts[k][1]);
            const double next_z = k + 1 < pts.size() ? pts[k + 1][2] : ref[2];
            const double dz = pts[k][2] - next_z;
            if (dz > 0.0)
                volume += dz * area_2d(slice, ref[0], ref[1]);
        }
        return volume;
    }
    return hypervolume_monte_carlo(pts, ref, options.mc_samples, options.seed);
}

double hypervolume_monte_carlo(std::span<const ObjVec> front, const ObjVec& ref, std::size_t samples, std::uint64_t seed)
{
    std::vector<ObjVec> pts = points_above_ref(front, ref);
    if (pts.empty() || samples == 0)
        return 0.0;
    ObjVec upper = ref;
    for (const auto& p : pts)
        upper = upper.cwiseMax(p);
    const double box = (upper - ref).prod();
    if (box <= 0.0)
        return 0.0;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ObjVec s(ref.size());
    std::size_t hits = 0;
    for (std::size_t n = 0; n < samples; ++n) {
        for (Eigen::Index j = 0; j < s.size(); ++j)
            s[j] = ref[j] + unif(rng) * (upper[j] - ref[j]);
        for (const auto& p : pts) {
            if (weakly_dominated(s, p)) {
                ++hits;
                break;
            }
        }
    }
    return box * static_cast<double>(hits) / static_cast<double>(samples);
}

bool eps_pareto_front_membership(const ObjVec& y, std::span<const ObjVec> true_front, const ObjVec& eps)
{
    const ObjVec lifted = y + 2.0 * eps;
    bool below = false;
    for (const auto& p : true_front) {
        if (weakly_dominated(lifted, p))
            return false;
        below = below || weakly_dominated(y, p);
    }
    return below;
}

DominanceQuery::DominanceQuery(std::vector<ObjVec> points) : points_(std::move(points))
{
    if (points_.empty() || points_.front().size() != 2)
        return;
    std::vector<std::size_t> order(points_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points_[a][0] > points_[b][0]; });
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k : order) {
        first_desc_.push_back(points_[k][0]);
        best = std::max(best, points_[k][1]);
        prefix_max_second_.push_back(best);
    }
}

bool DominanceQuery::dominated(const ObjVec& q) const
{
    if (points_.empty())
        return false;
    if (!first_desc_.empty()) {
        // Number of stored points with first coordinate >= q[0].
        auto it = std::upper_bound(first_desc_.begin(), first_desc_.end(), q[0], std::greater<double>());
        const auto count = static_cast<std::size_t>(it - first_desc_.begin());
        return count > 0 && prefix_max_second_[count - 1] >= q[1];
    }
    return std::any_of(points_.begin(), points_.end(), [&](const ObjVec& p) { return weakly_dominated(q, p); });
}

} // namespace apal
