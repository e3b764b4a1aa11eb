#include "mobelcov/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "mobelcov/errors.hpp"

namespace mobelcov::pareto {

bool dominates(const Point& a, const Point& b) {
    return a[0] >= b[0] && a[1] >= b[1] && (a[0] > b[0] || a[1] > b[1]);
}

std::vector<std::size_t> nondominated_indices(const PointSet& points) {
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    // Sweep by first objective descending (ties: second descending, then index).
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a][0] != points[b][0]) return points[a][0] > points[b][0];
        return points[a][1] > points[b][1];
    });
    std::vector<std::size_t> kept;
    double best_second = -std::numeric_limits<double>::infinity();
    for (std::size_t idx : order) {
        if (points[idx][1] > best_second) {
            kept.push_back(idx);
            best_second = points[idx][1];
        }
    }
    return kept;
}

PointSet nondominated_filter(const PointSet& points) {
    PointSet out;
    for (std::size_t idx : nondominated_indices(points)) out.push_back(points[idx]);
    return out;
}

double hypervolume_2d(const PointSet& points, const Point& ref) {
    PointSet useful;
    for (const Point& p : points) {
        if (p[0] > ref[0] && p[1] > ref[1]) useful.push_back(p);
    }
    // Non-dominated front sorted by first objective descending, second ascending.
    const PointSet front = nondominated_filter(useful);
    double area = 0.0;
    double covered_second = ref[1];
    for (const Point& p : front) {
        area += (p[0] - ref[0]) * (p[1] - covered_second);
        covered_second = p[1];
    }
    return area;
}

EpsilonIndicators epsilon_indicators(const PointSet& front, const PointSet& coverage) {
    if (front.empty() || coverage.empty()) {
        throw ValidationError("epsilon indicators need non-empty front and coverage sets");
    }
    EpsilonIndicators out;
    out.per_point.reserve(front.size());
    for (const Point& f : front) {
        double best = std::numeric_limits<double>::infinity();
        for (const Point& c : coverage) {
            best = std::min(best, std::max(f[0] - c[0], f[1] - c[1]));
        }
        out.per_point.push_back(std::max(best, 0.0));
    }
    out.max = *std::max_element(out.per_point.begin(), out.per_point.end());
    out.mean = std::accumulate(out.per_point.begin(), out.per_point.end(), 0.0) /
               static_cast<double>(out.per_point.size());
    return out;
}

Bounds bounds_of(const std::vector<const PointSet*>& sets) {
    Bounds b;
    b.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    b.hi = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    bool any = false;
    for (const PointSet* set : sets) {
        for (const Point& p : *set) {
            any = true;
            for (int o = 0; o < 2; ++o) {
                b.lo[o] = std::min(b.lo[o], p[o]);
                b.hi[o] = std::max(b.hi[o], p[o]);
            }
        }
    }
    if (!any) return Bounds{};
    return b;
}

PointSet normalize_points(const PointSet& points, const Bounds& bounds) {
    PointSet out;
    out.reserve(points.size());
    bool warned = false;
    for (const Point& p : points) {
        Point q{};
        for (int o = 0; o < 2; ++o) {
            const double span = bounds.hi[o] - bounds.lo[o];
            if (span <= 0.0) {
                if (!warned) {
                    spdlog::warn("degenerate normalization bounds on objective {}: mapping to 0.5", o);
                    warned = true;
                }
                q[o] = 0.5;
            } else {
                q[o] = std::clamp((p[o] - bounds.lo[o]) / span, 0.0, 1.0);
            }
        }
        out.push_back(q);
    }
    return out;
}

std::vector<int> nondomination_ranks(const PointSet& points) {
    const std::size_t n = points.size();
    std::vector<int> rank(n, -1);
    std::vector<int> dominated_by(n, 0);
    std::vector<std::vector<std::size_t>> dominates_list(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (dominates(points[i], points[j])) {
                dominates_list[i].push_back(j);
                ++dominated_by[j];
            } else if (dominates(points[j], points[i])) {
                dominates_list[j].push_back(i);
                ++dominated_by[i];
            }
        }
    }
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (dominated_by[i] == 0) current.push_back(i);
    }
    int r = 0;
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (std::size_t i : current) {
            rank[i] = r;
            for (std::size_t j : dominates_list[i]) {
                if (--dominated_by[j] == 0) next.push_back(j);
            }
        }
        current = std::move(next);
        ++r;
    }
    return rank;
}

std::vector<double> crowding_distances(const PointSet& points) {
    const double inf = std::numeric_limits<double>::infinity();
    // Distances are computed over distinct points, then shared by duplicates.
    std::map<Point, double> distance;
    for (const Point& p : points) distance.emplace(p, 0.0);
    std::vector<Point> unique;
    for (const auto& kv : distance) unique.push_back(kv.first);
    const std::size_t n = unique.size();
    if (n <= 2) {
        for (auto& kv : distance) kv.second = inf;
    } else {
        for (int o = 0; o < 2; ++o) {
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return unique[a][o] < unique[b][o]; });
            const double span = unique[order.back()][o] - unique[order.front()][o];
            distance[unique[order.front()]] = inf;
            distance[unique[order.back()]] = inf;
            if (span <= 0.0) continue;
            for (std::size_t i = 1; i + 1 < n; ++i) {
                double& d = distance[unique[order[i]]];
                if (std::isinf(d)) continue;
                d += (unique[order[i + 1]][o] - unique[order[i - 1]][o]) / span;
            }
        }
    }
    std::vector<double> out;
    out.reserve(points.size());
    for (const Point& p : points) out.push_back(distance.at(p));
    return out;
}

}  // namespace mobelcov::pareto
