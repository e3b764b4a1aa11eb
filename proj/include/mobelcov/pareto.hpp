#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace mobelcov::pareto {

/// A return vector in maximization orientation (higher is better on both axes).
using Point = std::array<double, 2>;
using PointSet = std::vector<Point>;

struct Bounds {
    Point lo{0.0, 0.0};
    Point hi{1.0, 1.0};
};

/// a weakly improves on b everywhere and differs somewhere.
bool dominates(const Point& a, const Point& b);

/// Points not dominated by any other point; duplicates collapse to one. Output is
/// sorted by the first objective, descending.
PointSet nondominated_filter(const PointSet& points);

/// Indices of the non-dominated points (first occurrence of each duplicate).
std::vector<std::size_t> nondominated_indices(const PointSet& points);

/// Area dominated by `points` and bounded below by `ref`. Points that do not
/// strictly exceed `ref` on both objectives contribute nothing.
double hypervolume_2d(const PointSet& points, const Point& ref);

struct EpsilonIndicators {
    double max = 0.0;   // I_eps
    double mean = 0.0;  // I_eps-mean
    std::vector<double> per_point;
};

/// Additive epsilon of `coverage` against `front`: for each front point the
/// smallest worst-objective shortfall over coverage points, floored at zero.
EpsilonIndicators epsilon_indicators(const PointSet& front, const PointSet& coverage);

/// Per-objective min/max over the union of the given sets.
Bounds bounds_of(const std::vector<const PointSet*>& sets);

/// (x - lo) / (hi - lo), clipped to [0,1]; degenerate objectives map to 0.5.
PointSet normalize_points(const PointSet& points, const Bounds& bounds);

/// Fast non-dominated sorting: rank 0 is the non-dominated front.
std::vector<int> nondomination_ranks(const PointSet& points);

/// Crowding distance within a set of mutually non-dominated points. Boundary points
/// get +inf; identical points share the same distance.
std::vector<double> crowding_distances(const PointSet& points);

}  // namespace mobelcov::pareto
